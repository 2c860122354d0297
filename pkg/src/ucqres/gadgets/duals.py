"""Finite duals of path queries and a bounded exhaustive duality check."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

from ..errors import InputError
from ..query import as_ucq, holds, parse_ucq
from ..structures import FiniteStructure, Signature, find_homomorphism, transitive_tournament

BUILTIN = "builtin_path"
USER = "user_supplied"


@dataclass(frozen=True)
class DualCandidate:
    structure: FiniteStructure
    provenance: str                  # builtin_path(k) | user_supplied
    validated_up_to: int = 0
    query: object = None


@dataclass
class DualReport:
    passed: bool
    validated_up_to: int
    graphs_checked: int
    query_fails_on_dual: bool
    counterexample: dict | None = None
    note: str = "bounded exhaustive evidence up to the stated size, not a proof"
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "validated_up_to": self.validated_up_to,
            "graphs_checked": self.graphs_checked,
            "query_fails_on_dual": self.query_fails_on_dual,
            "counterexample": self.counterexample,
            "note": self.note,
        }


def path_query(length: int, symbol: str = "R"):
    """The directed path with ``length`` edges."""
    if length < 1:
        raise InputError("path length must be positive")
    return parse_ucq(" & ".join(f"{symbol}(v{i},v{i + 1})" for i in range(length)))


def validate_dual(D: FiniteStructure, mu, s: int) -> DualReport:
    """Check: every digraph on at most ``s`` vertices maps to ``D`` iff ``mu`` fails on it.

    Edge sets are enumerated in a monotone depth-first order. Once the query
    holds, every superset also satisfies it and (since ``D`` fails the query)
    cannot map to ``D``, so that branch is closed.
    """
    mu = as_ucq(mu)
    symbols = set(mu.symbols)
    if symbols - {"R"} or set(D.signature) - {"R"}:
        raise InputError("dual validation is implemented for the single symbol R")
    sig = Signature.binary("R")
    D = D.with_signature(sig) if "R" not in D.signature else D
    fails = not holds(mu, D)
    report = DualReport(fails, s, 0, fails)
    if not fails:
        report.counterexample = {"reason": "query holds on the candidate dual"}
        return report
    pairs = list(itertools.product(range(s), repeat=2))
    # s vertices subsume smaller graphs: extra isolated vertices change neither side
    # (D is non-empty, so isolated vertices always have an image)
    if D.n == 0:
        pairs = []
    edges: list = []

    def check():
        G = FiniteStructure(s, {"R": edges}, signature=sig)
        report.graphs_checked += 1
        if holds(mu, G):
            return True, False
        if find_homomorphism(G, D) is None:
            report.passed = False
            report.counterexample = {"n": s, "edges": sorted(edges), "reason": "query fails but no homomorphism"}
            return True, True
        return False, False

    def rec(start):
        for i in range(start, len(pairs)):
            edges.append(pairs[i])
            closed, bad = check()
            if bad:
                return True
            if not closed and rec(i + 1):
                return True
            edges.pop()
        return False

    if s > 0:
        closed, bad = check()
        if not bad and not closed:
            rec(0)
    return report


@functools.lru_cache(maxsize=None)
def builtin_dual_for_path(length: int, validate_up_to: int = 5) -> DualCandidate:
    """Transitive tournament on ``length`` vertices, the dual of the path with ``length`` edges."""
    if length < 2:
        raise InputError("path queries need at least 2 edges here")
    T = transitive_tournament(length)
    q = path_query(length)
    if find_homomorphism(q[0].canonical_database(Signature.binary("R")), T) is not None:
        raise AssertionError("path maps into its dual")
    n = 0
    if validate_up_to:
        rep = validate_dual(T, q, validate_up_to)
        if not rep.passed:
            raise AssertionError(f"builtin dual failed validation: {rep.counterexample}")
        n = validate_up_to
    return DualCandidate(T, f"{BUILTIN}({length})", n, q)


def user_dual(D: FiniteStructure, mu, validate_up_to: int = 0) -> DualCandidate:
    if holds(mu, D):
        raise InputError("query holds on the supplied structure")
    n = 0
    if validate_up_to:
        rep = validate_dual(D, mu, validate_up_to)
        if not rep.passed:
            raise InputError(f"supplied structure is not a dual: {rep.counterexample}")
        n = validate_up_to
    return DualCandidate(D, USER, n, as_ucq(mu))
