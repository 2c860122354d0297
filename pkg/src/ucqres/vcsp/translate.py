"""Instance translations between bag databases and expressions over a valued dual."""

from __future__ import annotations

from ..errors import InputError
from ..structures import BagDatabase, Signature
from .expression import BOT, EQ, Atom, Expression


def resilience_to_vcsp(db: BagDatabase) -> Expression:
    """One variable per element, one atom occurrence per tuple copy.

    Variables are named ``("x", label)``.
    """
    names = [("x", lab) for lab in db.labels]
    terms = []
    for sym, t, m in db.facts():
        terms.append((Atom(sym, tuple(names[i] for i in t)), m))
    return Expression(terms, names)


def vcsp_to_resilience(e: Expression, signature: Signature | None = None) -> BagDatabase:
    """Inverse translation; equality atoms merge variables, ⊥ is rejected."""
    parent = {v: v for v in e.variables}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for node, _ in e.terms.items():
        if not isinstance(node, Atom) or node.crisp:
            raise InputError("only plain atom occurrences translate to a database")
        if node.symbol == BOT:
            raise InputError("⊥ has no database counterpart")
        if node.symbol == EQ:
            a, b = (find(x) for x in node.args)
            if a != b:
                # keep the earlier-declared variable as representative
                order = {v: i for i, v in enumerate(e.variables)}
                lo, hi = sorted((a, b), key=order.__getitem__)
                parent[hi] = lo
    reps = list(dict.fromkeys(find(v) for v in e.variables))
    index = {r: i for i, r in enumerate(reps)}
    rels: dict = {}
    for node, m in e.terms.items():
        if node.symbol == EQ:
            continue
        if len(node.args) != 2:
            raise InputError("bag databases hold binary relations only")
        t = tuple(index[find(a)] for a in node.args)
        bucket = rels.setdefault(node.symbol, {})
        bucket[t] = bucket.get(t, 0) + m
    if signature is None:
        signature = Signature.binary(*rels)
    return BagDatabase(len(reps), rels, signature, labels=[_label(r) for r in reps])


def _label(v):
    if isinstance(v, tuple) and len(v) == 2 and v[0] == "x":
        return v[1]
    return v
