"""Penalty flattening of crisp atoms and Opt sub-gadgets into plain weighted atoms.

Each level of nesting gets its own slack ``s`` (the threshold ``u`` at the
top, the certified minimum ``c`` inside an ``Opt`` gadget) and its own weight
``M = floor(s) + 1 + soft`` where ``soft`` is the total soft weight at that
level. A crisp atom becomes ``M * R(...)``; an ``Opt(child, c)`` gadget
becomes ``M`` times the flattened child, whose cost never drops below the
child baseline ``c + sum(inner weight * inner baseline)`` and meets it
exactly on the optimal assignments. Costs of the target are assumed to be
0/1 with every relation attaining 0, which is the case for valued duals of
structures whose relations are non-empty.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ..errors import InputError
from ..structures import BagDatabase, Signature, read_graph, write_graph
from ..vcsp.expression import BOT, BUILTINS, Atom, Expression, Node, Opt, Project, Sum
from ..vcsp.translate import vcsp_to_resilience


@dataclass
class ReductionArtifact:
    expression: Expression          # flat, plain atoms with integer multiplicities
    threshold: int                  # decide: optimum <= threshold
    source_threshold: int
    baseline: int                   # cost contributed by satisfied gadgets
    weights: list                   # one record per flattened level
    source_variables: tuple
    db: BagDatabase | None = None
    provenance: dict = field(default_factory=dict)

    def source_value(self, value):
        """Source optimum from the artifact optimum, or None when the threshold is exceeded."""
        if value is None or value > self.threshold:
            return None
        return value - self.baseline

    def back_translate(self, assignment: dict) -> dict:
        return {v: assignment[v] for v in self.source_variables if v in assignment}

    def sidecar(self) -> dict:
        d = {
            "threshold": self.threshold,
            "source_threshold": self.source_threshold,
            "baseline": self.baseline,
            "weights": self.weights,
            "back_translation": {
                "rule": "source optimum = artifact optimum - baseline when the artifact optimum is at most the threshold",
                "source_variables": [str(v) for v in self.source_variables],
            },
        }
        d.update(self.provenance)
        return d

    def write(self, graph_path, sidecar_path=None) -> tuple[Path, Path]:
        if self.db is None:
            raise InputError("artifact has no database form")
        graph_path = Path(graph_path)
        sidecar_path = Path(sidecar_path) if sidecar_path else graph_path.with_suffix(".json")
        write_graph(self.db, graph_path)
        sidecar_path.write_text(json.dumps(self.sidecar(), indent=2, sort_keys=True) + "\n")
        return graph_path, sidecar_path


def load_artifact(graph_path, sidecar_path=None) -> tuple[BagDatabase, dict]:
    graph_path = Path(graph_path)
    sidecar_path = Path(sidecar_path) if sidecar_path else graph_path.with_suffix(".json")
    return read_graph(graph_path), json.loads(sidecar_path.read_text())


def _int(x, what):
    f = Fraction(x)
    if f.denominator != 1 or f < 0:
        raise InputError(f"{what} must be a non-negative integer, got {x}")
    return int(f)


def label_text(v) -> str:
    """Whitespace-free text for a variable name, e.g. ``("p", 0)`` becomes ``p.0``."""
    if isinstance(v, tuple):
        return ".".join(label_text(x) for x in v)
    return str(v).replace(" ", "_")


def _parts(node: Node, fresh):
    """Atoms and Opt gadgets of a body; projections dissolve into ``fresh`` locals."""
    if isinstance(node, Atom):
        yield node
    elif isinstance(node, Sum):
        for c in node.children:
            yield from _parts(c, fresh)
    elif isinstance(node, Project):
        ren = {v: fresh(v) for v in node.locals}
        yield from _parts(node.child.rename(ren), fresh)
    elif isinstance(node, Opt):
        yield node
    else:
        raise InputError(f"flatten supports atoms, sums, projections and Opt gadgets, not {type(node).__name__}")


class _Flattener:
    def __init__(self, variables):
        self.out: dict = {}
        self.weights: list = []
        self.taken = set(variables)
        self.count = 0

    def fresh(self, v):
        """Keep a local's name unless an earlier variable already uses it."""
        name = v
        while name in self.taken:
            self.count += 1
            name = (v, self.count)
        self.taken.add(name)
        return name

    def emit(self, a: Atom, mult: int):
        key = Atom(a.symbol, a.args)
        self.out[key] = self.out.get(key, 0) + mult

    def level(self, items, slack: int, scale: int, path: str) -> int:
        """Emit ``scale`` times the flattening of ``items``; returns the level's inner baseline."""
        soft = sum(m for n, m in items if isinstance(n, Atom) and not n.crisp and n.symbol not in BUILTINS)
        M = slack + 1 + soft
        crisp = sum(1 for n, _ in items if isinstance(n, Atom) and n.crisp)
        gadgets = [(n, m) for n, m in items if isinstance(n, Opt)]
        if crisp or gadgets:
            self.weights.append({"level": path, "slack": slack, "soft_weight": soft, "weight": M * scale,
                                 "crisp_atoms": crisp, "gadgets": len(gadgets)})
        base = 0
        k = 0
        for n, m in items:
            if isinstance(n, Atom):
                if n.symbol in BUILTINS:
                    # equality and bottom stay hard; they carry no weight
                    self.emit(n, 1)
                elif n.crisp:
                    self.emit(n, m * M * scale)
                else:
                    self.emit(n, m * scale)
            else:
                if n.certified_min is None:
                    raise InputError(f"Opt gadget at {path} has no certified minimum")
                c = _int(n.certified_min, "certified minimum")
                inner = [(p, 1) for p in _parts(n.child, self.fresh)]
                b = self.level(inner, c, scale * m * M, f"{path}.{k}")
                base += m * M * (c + b)
                k += 1
        return base


def flatten(e: Expression, u: int) -> ReductionArtifact:
    """Replace crisp atoms and Opt gadgets of ``e`` by weighted plain atoms.

    The flat optimum is at most the returned threshold iff the original
    optimum (crisp parts enforced) is at most ``u``.
    """
    u = _int(u, "threshold")
    f = _Flattener(e.variables)
    items = []
    for n, m in e.terms.items():
        items.extend((p, m) for p in _parts(n, f.fresh))
    base = f.level(items, u, 1, "top")
    flat = Expression(list(f.out.items()), list(e.variables) + [v for a in f.out for v in a.args])
    db = None
    if all(len(a.args) == 2 for a in f.out if a.symbol not in BUILTINS) and not any(a.symbol == BOT for a in f.out):
        syms = sorted({a.symbol for a in f.out if a.symbol not in BUILTINS})
        db = vcsp_to_resilience(flat, Signature.binary(*syms))
        db = BagDatabase(db.n, db.relations, db.signature, labels=[label_text(x) for x in db.labels])
    return ReductionArtifact(flat, u + base, u, base, f.weights, tuple(e.variables), db)
