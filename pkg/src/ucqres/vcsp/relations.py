"""Valued relations and structures over a finite domain, plus clone operators."""

from __future__ import annotations

import itertools
import json
from collections.abc import Iterable, Mapping
from fractions import Fraction

from ..errors import InputError
from ..structures import FiniteStructure, Signature
from .values import INF, Value, format_value, to_value


class ValuedRelation:
    """Total map ``domain^arity -> Q ∪ {INF}``.

    Stored sparsely as explicit entries plus a default value.
    """

    __slots__ = ("arity", "size", "entries", "default")

    def __init__(self, arity: int, size: int, entries: Mapping[tuple, object] = (), default=INF):
        self.arity = int(arity)
        self.size = int(size)
        self.default = to_value(default)
        clean = {}
        for t, v in dict(entries).items():
            t = tuple(int(x) for x in t)
            if len(t) != self.arity or any(x < 0 or x >= self.size for x in t):
                raise InputError(f"tuple {t} outside domain^{self.arity}")
            v = to_value(v)
            if v != self.default:
                clean[t] = v
        self.entries = clean

    @classmethod
    def from_function(cls, arity: int, size: int, fn, default=INF) -> "ValuedRelation":
        return cls(arity, size, {t: fn(t) for t in itertools.product(range(size), repeat=arity)}, default)

    @classmethod
    def crisp(cls, arity: int, size: int, tuples: Iterable[tuple]) -> "ValuedRelation":
        return cls(arity, size, {t: 0 for t in tuples}, INF)

    def __call__(self, *t) -> Value:
        if len(t) == 1 and isinstance(t[0], tuple):
            t = t[0]
        return self.entries.get(tuple(t), self.default)

    def all_tuples(self):
        return itertools.product(range(self.size), repeat=self.arity)

    def items(self):
        for t in self.all_tuples():
            yield t, self(t)

    def values(self) -> set:
        vals = set(self.entries.values())
        if len(self.entries) < self.size ** self.arity:
            vals.add(self.default)
        return vals

    def minimum(self) -> Value:
        return min(self.values(), default=INF)

    def is_crisp(self) -> bool:
        return self.values() <= {Fraction(0), INF}

    def support(self) -> set:
        """Tuples of value 0."""
        return {t for t, v in self.items() if v == 0}

    def __eq__(self, other):
        if not isinstance(other, ValuedRelation):
            return NotImplemented
        if (self.arity, self.size) != (other.arity, other.size):
            return False
        return all(self(t) == other(t) for t in self.all_tuples())

    def __hash__(self):
        return hash((self.arity, self.size, tuple(self(t) for t in self.all_tuples())))

    def __repr__(self):
        return f"ValuedRelation(arity={self.arity}, size={self.size}, default={self.default}, entries={len(self.entries)})"


class ValuedStructure:
    """Finite domain with one valued relation per symbol."""

    def __init__(self, size: int, relations: Mapping[str, ValuedRelation], labels=None):
        self.size = int(size)
        self.labels = tuple(labels) if labels is not None else tuple(range(self.size))
        for s, r in relations.items():
            if r.size != self.size:
                raise InputError(f"relation {s} has domain size {r.size}, expected {self.size}")
        self.relations = dict(relations)
        self.signature = Signature([(s, r.arity) for s, r in self.relations.items()])

    def __getitem__(self, symbol: str) -> ValuedRelation:
        return self.relations[symbol]

    def __contains__(self, symbol):
        return symbol in self.relations

    def fingerprint(self):
        return (self.size, tuple((s, r.arity, r.default, tuple(sorted(r.entries.items(), key=lambda kv: kv[0])))
                                 for s, r in self.relations.items()))

    def to_json(self) -> str:
        return json.dumps(structure_to_dict(self), sort_keys=True)

    def __repr__(self):
        return f"ValuedStructure(size={self.size}, signature={self.signature})"


def structure_to_dict(G: ValuedStructure) -> dict:
    return {
        "domain": [str(x) for x in G.labels],
        "signature": {s: r.arity for s, r in G.relations.items()},
        "relations": {
            s: {
                "default": format_value(r.default),
                "table": [[list(t), format_value(v)] for t, v in sorted(r.entries.items())],
            }
            for s, r in G.relations.items()
        },
    }


def structure_from_dict(d: dict) -> ValuedStructure:
    labels = d["domain"]
    n = len(labels)
    rels = {}
    for s, arity in d["signature"].items():
        spec = d["relations"][s]
        rels[s] = ValuedRelation(arity, n, {tuple(t): to_value(v) for t, v in spec["table"]}, to_value(spec["default"]))
    return ValuedStructure(n, rels, labels)


def structure_from_json(text: str) -> ValuedStructure:
    return structure_from_dict(json.loads(text))


# ------------------------------------------------------------- clone operators

def feas(R: ValuedRelation) -> ValuedRelation:
    return ValuedRelation.crisp(R.arity, R.size, [t for t, v in R.items() if v is not INF])


def opt(R: ValuedRelation) -> ValuedRelation:
    m = R.minimum()
    if m is INF:
        return ValuedRelation.crisp(R.arity, R.size, [])
    return ValuedRelation.crisp(R.arity, R.size, [t for t, v in R.items() if v == m])


def project(R: ValuedRelation, keep: Iterable[int]) -> ValuedRelation:
    """Infimum over every coordinate not listed in ``keep`` (kept in listed order)."""
    keep = list(keep)
    if any(k < 0 or k >= R.arity for k in keep) or len(set(keep)) != len(keep):
        raise InputError(f"bad projection coordinates {keep} for arity {R.arity}")
    best: dict[tuple, Value] = {}
    for t, v in R.items():
        key = tuple(t[k] for k in keep)
        cur = best.get(key, INF)
        if v < cur:
            best[key] = v
    return ValuedRelation(len(keep), R.size, best, INF)


def shift(R: ValuedRelation, a) -> ValuedRelation:
    a = Fraction(a)
    return ValuedRelation(R.arity, R.size, {t: v + a for t, v in R.items()}, INF)


def scale(R: ValuedRelation, c) -> ValuedRelation:
    c = Fraction(c)
    if c < 0:
        raise InputError("scale factor must be non-negative")
    return ValuedRelation(R.arity, R.size, {t: c * v for t, v in R.items()}, INF)


def clone_op(op: str, R: ValuedRelation, arg=None) -> ValuedRelation:
    """Dispatch ``feas | opt | project | shift | scale``."""
    if op == "feas":
        return feas(R)
    if op == "opt":
        return opt(R)
    if op == "project":
        return project(R, arg)
    if op == "shift":
        return shift(R, 0 if arg is None else arg)
    if op == "scale":
        return scale(R, 1 if arg is None else arg)
    raise InputError(f"unknown clone operator {op!r}")


# ------------------------------------------------------------ named structures

def valued_dual(B: FiniteStructure) -> ValuedStructure:
    """Cost 0 on tuples of ``B``, 1 elsewhere."""
    rels = {
        s: ValuedRelation(B.signature.arity(s), B.n, {t: 0 for t in B.relations[s]}, 1)
        for s in B.signature
    }
    return ValuedStructure(B.n, rels, B.labels)


def gamma_mc() -> ValuedStructure:
    """Directed max-cut: R(0,1) = 0, every other pair 1."""
    return ValuedStructure(2, {"R": ValuedRelation(2, 2, {(0, 1): 0}, 1)})


def oit_structure() -> ValuedStructure:
    """({0,1}; OIT) with OIT the crisp one-in-three relation."""
    tuples = [t for t in itertools.product((0, 1), repeat=3) if sum(t) == 1]
    return ValuedStructure(2, {"OIT": ValuedRelation.crisp(3, 2, tuples)})
