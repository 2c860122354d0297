"""Resilience solvers: exhaustive oracle, witness-hitting branch and bound,
and closed forms for the three polynomial queries."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from . import kernels
from .classify import EDGE, LOOP, TWOCYCLE, classify
from .errors import GuardExceeded, InputError, VerificationError
from .query import as_ucq, holds
from .structures import BagDatabase, FiniteStructure, Signature, find_homomorphism

BRUTE_GUARD = 24


@dataclass(frozen=True)
class ResilienceResult:
    value: int
    deleted: tuple          # ((symbol, tuple), copies) pairs, sorted
    method: str             # brute | exact | poly

    def to_dict(self, db: BagDatabase | None = None) -> dict:
        def lab(t):
            return [db.labels[x] if db is not None else x for x in t]
        return {
            "value": self.value,
            "method": self.method,
            "deleted": [{"symbol": s, "tuple": lab(t), "copies": c} for (s, t), c in self.deleted],
        }


def _finish(db: BagDatabase, mu, facts, method: str) -> ResilienceResult:
    """Build the result and re-verify that the deletion falsifies ``mu``."""
    deleted = tuple(sorted(((s, t), db.multiplicity(s, t)) for s, t in facts))
    value = sum(c for _, c in deleted)
    if mu is not None and holds(mu, db.without([f for f, _ in deleted])):
        raise VerificationError(f"{method}: deleting {deleted} does not falsify the query")
    return ResilienceResult(value, deleted, method)


# ------------------------------------------------------------- witnesses

def enumerate_witnesses(db: BagDatabase, mu, limit: int | None = None) -> list[frozenset]:
    """Inclusion-minimal fact sets that are images of some disjunct.

    Facts are indexed by position in ``db.facts()``.
    """
    facts = db.facts()
    index = {(s, t): i for i, (s, t, _) in enumerate(facts)}
    succ: dict = defaultdict(lambda: defaultdict(set))
    pred: dict = defaultdict(lambda: defaultdict(set))
    for s, (u, v), _ in facts:
        succ[s][u].add(v)
        pred[s][v].add(u)
    found: set = set()
    for q in as_ucq(mu):
        if any(s not in db.signature for s in q.symbols):
            continue
        order = list(q.variables)
        pos = {v: i for i, v in enumerate(order)}
        # atoms checked as soon as both endpoints are assigned
        checks = [[] for _ in order]
        for a in q.atoms:
            checks[max(pos[a.var_from], pos[a.var_to])].append(a)
        assign: dict = {}

        def candidates(i):
            v = order[i]
            cand = None
            for a in checks[i]:
                if a.var_from == v and a.var_to == v:
                    opts = {x for x in succ[a.symbol] if x in succ[a.symbol][x]}
                elif a.var_from == v:
                    opts = pred[a.symbol].get(assign[a.var_to], set())
                else:
                    opts = succ[a.symbol].get(assign[a.var_from], set())
                cand = set(opts) if cand is None else cand & opts
                if not cand:
                    return ()
            return sorted(cand) if cand is not None else range(db.n)

        def rec(i):
            if limit is not None and len(found) >= limit:
                return
            if i == len(order):
                found.add(frozenset(index[(a.symbol, (assign[a.var_from], assign[a.var_to]))] for a in q.atoms))
                return
            for x in candidates(i):
                assign[order[i]] = x
                rec(i + 1)
            assign.pop(order[i], None)

        rec(0)
    ws = sorted(found, key=lambda w: (len(w), sorted(w)))
    minimal: list[frozenset] = []
    for w in ws:
        if not any(m <= w for m in minimal):
            minimal.append(w)
    return minimal


# ------------------------------------------------------------------ brute

def resilience_brute(db: BagDatabase, mu, guard: int = BRUTE_GUARD) -> ResilienceResult:
    """Exact resilience by exhaustive minimum-weight hitting of all witnesses."""
    m = db.distinct_count()
    if m > guard:
        raise GuardExceeded(f"{m} distinct tuples exceed the brute-force guard of {guard}")
    facts = db.facts()
    witnesses = enumerate_witnesses(db, mu)
    masks = [sum(1 << i for i in w) for w in witnesses]
    res = kernels.min_hitting_deletion(masks, [c for _, _, c in facts])
    if res is None:
        raise InputError("a disjunct with no atoms cannot be falsified")
    _, mask = res
    chosen = [(facts[i][0], facts[i][1]) for i in range(m) if mask >> i & 1]
    return _finish(db, mu, chosen, "brute")


# ------------------------------------------------------------------ exact

class _Exact:
    def __init__(self, db: BagDatabase, mu):
        self.db = db
        self.mu = as_ucq(mu)
        self.facts = db.facts()
        self.index = {(s, t): i for i, (s, t, _) in enumerate(self.facts)}
        self.weight = [c for _, _, c in self.facts]
        self.queries = []
        for q in self.mu:
            if any(s not in db.signature for s in q.symbols):
                continue
            self.queries.append((q, q.canonical_database(Signature.binary(*q.symbols))))
        self.best = sum(self.weight) + 1
        self.best_set: frozenset | None = None

    def witness(self, absent: frozenset, banned_kept: frozenset | None = None):
        """Fact ids of some surviving witness, or None. ``absent`` facts are removed."""
        rels: dict = {s: [] for s in self.db.signature}
        for i, (s, t, _) in enumerate(self.facts):
            if i not in absent:
                rels[s].append(t)
        S = FiniteStructure(self.db.n, rels, signature=self.db.signature)
        for q, A in self.queries:
            h = find_homomorphism(A, S)
            if h is not None:
                env = dict(zip(q.variables, h.map))
                return frozenset(self.index[(a.symbol, (env[a.var_from], env[a.var_to]))] for a in q.atoms)
        return None

    def lower_bound(self, deleted: frozenset, kept: frozenset) -> int | None:
        """Greedy packing of witnesses disjoint on their deletable facts."""
        lb = 0
        used = set(deleted)
        while True:
            w = self.witness(frozenset(used))
            if w is None:
                return lb
            free = w - kept
            if not free:
                return None          # a witness made only of kept facts
            lb += min(self.weight[i] for i in free)
            used |= free

    def run(self):
        self.rec(frozenset(), frozenset(), 0)
        return self.best_set

    def rec(self, deleted: frozenset, kept: frozenset, cost: int):
        w = self.witness(deleted)
        if w is None:
            if cost < self.best:
                self.best, self.best_set = cost, deleted
            return
        lb = self.lower_bound(deleted, kept)
        if lb is None or cost + lb >= self.best:
            return
        branch = sorted(w - kept, key=lambda i: (self.weight[i], i))
        k = set(kept)
        for i in branch:
            self.rec(deleted | {i}, frozenset(k), cost + self.weight[i])
            k.add(i)


def resilience_exact(db: BagDatabase, mu) -> ResilienceResult:
    """Exact resilience by branching on the facts of a surviving witness."""
    solver = _Exact(db, mu)
    chosen = solver.run()
    return _finish(db, mu, [solver.facts[i][:2] for i in sorted(chosen)], "exact")


# ------------------------------------------------------------------- poly

def resilience_poly(db: BagDatabase, case: str, mu=None) -> ResilienceResult:
    """Closed forms for the loop, edge and two-cycle queries.

    If ``mu`` is given it must classify as polynomial with this ``case``.
    """
    queries = {LOOP: "R(x,x)", EDGE: "R(x,y)", TWOCYCLE: "R(x,y) & R(y,x)"}
    if case not in queries:
        raise InputError(f"unknown polynomial case {case!r}")
    if mu is not None:
        v = classify(mu)
        if v.ptime_case != case:
            raise InputError(f"case mismatch: query classifies as {v}, not {case}")
    else:
        mu = queries[case]
    if set(db.signature) - {"R"}:
        raise InputError("closed forms are defined for databases over R")
    rel = db.relations.get("R", {})
    chosen = []
    if case == EDGE:
        chosen = [("R", t) for t in rel]
    else:
        chosen = [("R", t) for t in rel if t[0] == t[1]]
        if case == TWOCYCLE:
            for (u, v), m in rel.items():
                if u < v and (v, u) in rel:
                    back = rel[(v, u)]
                    chosen.append(("R", (u, v)) if m <= back else ("R", (v, u)))
    return _finish(db, mu, chosen, "poly")


def resilience(db: BagDatabase, mu, method: str = "auto") -> ResilienceResult:
    if method == "brute":
        return resilience_brute(db, mu)
    if method == "exact":
        return resilience_exact(db, mu)
    verdict = None
    if set(as_ucq(mu).symbols) <= {"R"}:
        verdict = classify(mu)
    if method == "poly":
        if verdict is None or not verdict.is_ptime:
            raise InputError("no polynomial closed form applies to this query")
        return resilience_poly(db, verdict.ptime_case, mu)
    if method != "auto":
        raise InputError(f"unknown method {method!r}")
    if verdict is not None and verdict.is_ptime and set(db.signature) <= {"R"}:
        return resilience_poly(db, verdict.ptime_case, mu)
    return resilience_exact(db, mu)


def decide(db: BagDatabase, u: int, mu) -> bool:
    """Is the resilience of ``db`` for ``mu`` at most ``u``?"""
    return resilience(db, mu).value <= u
