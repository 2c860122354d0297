"""Lifting instances of a self-join-free query to its self-join variation."""

from __future__ import annotations

from collections.abc import Mapping

from ..errors import InputError
from ..query import (apply_map, as_ucq, equivalent, is_connected, is_injective_for, is_minimal,
                     is_self_join_free)
from ..structures import BagDatabase, Signature


def check_lift_preconditions(nu, f: Mapping) -> list[str]:
    """Names of violated preconditions (empty when the lift applies)."""
    nu = as_ucq(nu)
    problems = []
    if not is_self_join_free(nu):
        problems.append("query is not self-join-free")
    if not all(is_connected(q) for q in nu):
        problems.append("a disjunct is not connected")
    missing = sorted(s for s in nu.symbols if s not in f)
    if missing:
        problems.append(f"symbol map misses {missing}")
        return problems
    if not is_injective_for(f, nu):
        problems.append("symbol map is not injective on some disjunct")
    image = apply_map(f, nu)
    if not all(is_minimal(q) for q in image):
        problems.append("a disjunct of the image query is not minimal")
    for i in range(len(image)):
        for j in range(i):
            if equivalent(image[i], image[j]):
                problems.append(f"image disjuncts {j} and {i} are equivalent")
    return problems


def self_join_lift(db: BagDatabase, nu, f: Mapping) -> BagDatabase:
    """Database over the image symbols with one copy of each element per (variable, disjunct).

    Each fact ``R(a1, a2)`` of ``db`` and each atom ``R(x1, x2)`` of disjunct
    ``i`` yields ``f(R)(a1_{x1,i}, a2_{x2,i})`` with the same multiplicity.
    """
    nu = as_ucq(nu)
    problems = check_lift_preconditions(nu, f)
    if problems:
        raise InputError("; ".join(problems))
    index: dict = {}
    labels: list = []
    several = len(nu) > 1

    def elem(a, v, i):
        key = (a, v, i)
        if key not in index:
            index[key] = len(labels)
            lab = f"{db.labels[a]}_{v}" + (f"_{i}" if several else "")
            labels.append(lab)
        return index[key]

    # every element copy exists, used or not
    for i, q in enumerate(nu):
        for v in q.variables:
            for a in range(db.n):
                elem(a, v, i)
    out: dict = {}
    for i, q in enumerate(nu):
        for atom in q.atoms:
            table = db.relations.get(atom.symbol)
            if not table:
                continue
            target = out.setdefault(f[atom.symbol], {})
            for (a1, a2), m in table.items():
                t = (elem(a1, atom.var_from, i), elem(a2, atom.var_to, i))
                target[t] = target.get(t, 0) + m
    symbols = list(dict.fromkeys(f[s] for s in nu.symbols))
    return BagDatabase(len(labels), out, Signature.binary(*symbols), labels)
