"""Reduction from directed max-cut to resilience of a query with an acyclic finite dual.

Over the valued dual of an acyclic ``D`` whose longest path has ``k`` edges,
the expression ``R(x0,x1) + R*(x1,x2) + ... + R*(x_{k-1},x_k)`` behaves like
the max-cut relation: it is 0 exactly on edges whose head starts a path of
length ``k - 1``, 1 on non-edges with such a head, and infinite otherwise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..errors import InputError
from ..structures import BagDatabase, FiniteStructure, longest_paths_from, path_profile
from ..vcsp.expression import Atom, Expression, PPDefinition, PPPowerSpec, Sum, pp_reduce
from ..vcsp.relations import gamma_mc, valued_dual
from ..vcsp.solver import min_cost
from ..vcsp.translate import resilience_to_vcsp
from .duals import DualCandidate
from .flatten import ReductionArtifact, flatten


def _depth(D: FiniteStructure) -> int:
    prof = path_profile(D, "R")
    if prof.has_directed_cycle:
        raise InputError("dual candidate has a directed cycle")
    if not D.relations["R"]:
        raise InputError("dual candidate has no edge")
    return prof.longest_path


def chain_definition(k: int) -> PPDefinition:
    """``R(p0,p1)`` followed by ``k - 1`` starred atoms along a fresh path."""
    body = [Atom("R", ("p0", "p1"))]
    body += [Atom("R", (f"p{i}", f"p{i + 1}"), True) for i in range(1, k)]
    return PPDefinition(("p0", "p1"), Sum(tuple(body)))


@dataclass
class MaxcutMaps:
    k: int
    a: int
    b: int
    g: tuple                          # vertex -> {0, 1}
    relation: dict                    # (x, y) -> value of the chain relation
    forward_ok: bool                  # R^Gamma(f(u), f(v)) <= R^MC(u, v)
    backward_ok: bool                 # R^MC(g(x), g(y)) <= R^Gamma(x, y)
    failures: list

    @property
    def ok(self) -> bool:
        return self.forward_ok and self.backward_ok


def maxcut_maps(D: DualCandidate | FiniteStructure) -> MaxcutMaps:
    T = D.structure if isinstance(D, DualCandidate) else D
    k = _depth(T)
    depth = longest_paths_from(T, "R")
    # first edge of the lexicographically least longest path
    a = min(x for x in range(T.n) if depth[x] == k)
    b = min(y for x, y in T.relations["R"] if x == a and depth[y] == k - 1)
    g = tuple(0 if depth[x] >= k else 1 for x in range(T.n))
    Gam = valued_dual(T)
    mc = gamma_mc()["R"]
    d = chain_definition(k)
    e = Expression([d.body], d.params)
    rel = {}
    for x, y in itertools.product(range(T.n), repeat=2):
        rel[(x, y)] = min_cost(e, Gam, pins={"p0": x, "p1": y}, argmin=False).value
    f = {0: a, 1: b}
    failures = []
    fwd = True
    for u, v in itertools.product((0, 1), repeat=2):
        if not rel[(f[u], f[v])] <= mc(u, v):
            fwd = False
            failures.append({"side": "forward", "pair": [u, v]})
    bwd = True
    for x, y in itertools.product(range(T.n), repeat=2):
        if not mc(g[x], g[y]) <= rel[(x, y)]:
            bwd = False
            failures.append({"side": "backward", "pair": [x, y]})
    return MaxcutMaps(k, a, b, g, rel, fwd, bwd, failures)


def maxcut_value(G: BagDatabase) -> tuple[int, tuple]:
    """Minimum total multiplicity of edges not cut from side 0 to side 1, with a lex-least partition."""
    rel = G.relations.get("R", {})
    best, arg = None, None
    for side in itertools.product((0, 1), repeat=G.n):
        cost = sum(m for (x, y), m in rel.items() if not (side[x] == 0 and side[y] == 1))
        if best is None or cost < best:
            best, arg = cost, side
    return best, arg


def maxcut_brute(G: BagDatabase, t: int) -> bool:
    """Is there a partition leaving at most ``t`` edge copies uncut?"""
    return maxcut_value(G)[0] <= t


def maxcut_reduction(G: BagDatabase, t: int, D: DualCandidate) -> ReductionArtifact:
    """Resilience instance for the query dual to ``D`` whose answer matches max-cut on ``G`` at ``t``."""
    if set(G.signature) - {"R"}:
        raise InputError("max-cut instances are graphs over R")
    T = D.structure if isinstance(D, DualCandidate) else D
    k = _depth(T)
    e = resilience_to_vcsp(G)
    spec = PPPowerSpec(1, {"R": chain_definition(k)})
    reduced = pp_reduce(e, spec, valued_dual(T))
    art = flatten(reduced, t)
    art.provenance = {
        "reduction": "maxcut",
        "dual": getattr(D, "provenance", "user_supplied"),
        "chain_length": k,
        "source_edges": G.total(),
    }
    return art


__all__ = ["MaxcutMaps", "chain_definition", "maxcut_maps", "maxcut_brute", "maxcut_value", "maxcut_reduction"]
