"""Complexity classification of resilience for unions of conjunctive queries over {R}."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import InputError
from .query import UCQ, ConjunctiveQuery, as_ucq, format_cq, normalize, shape

PTIME = "PTime"
NPCOMPLETE = "NPComplete"
LOOP, EDGE, TWOCYCLE = "Loop", "Edge", "TwoCycle"
CYCLE_GEQ3, TREE_FAMILY = "CycleGeq3", "TreeFamily"


@dataclass(frozen=True)
class HardnessReason:
    kind: str                       # CycleGeq3 | TreeFamily
    query_index: int | None = None  # for CycleGeq3: index into normalized_queries
    cycle: tuple | None = None

    def to_dict(self):
        d = {"kind": self.kind}
        if self.query_index is not None:
            d["query_index"] = self.query_index
        if self.cycle is not None:
            d["cycle"] = list(self.cycle)
        return d


@dataclass(frozen=True)
class Verdict:
    complexity: str
    ptime_case: str | None
    hardness_reason: HardnessReason | None
    normalized_queries: tuple[ConjunctiveQuery, ...]
    trace: list = field(default_factory=list, compare=False)

    def __post_init__(self):
        if (self.complexity == PTIME) != (self.ptime_case is not None):
            raise ValueError("ptime_case must be present exactly for PTime verdicts")
        if (self.complexity == NPCOMPLETE) != (self.hardness_reason is not None):
            raise ValueError("hardness_reason must be present exactly for NPComplete verdicts")

    @property
    def is_ptime(self) -> bool:
        return self.complexity == PTIME

    def to_dict(self) -> dict:
        d = {
            "complexity": self.complexity,
            "normalized_queries": [format_cq(q) for q in self.normalized_queries],
            "trace": self.trace,
        }
        if self.ptime_case is not None:
            d["case"] = self.ptime_case
        else:
            d["reason"] = self.hardness_reason.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def __str__(self):
        tag = self.ptime_case if self.ptime_case else self.hardness_reason.kind
        return f"{self.complexity}({tag})"


def _shape_evidence(q: ConjunctiveQuery) -> dict:
    s = shape(q)
    return {
        "query": format_cq(q),
        "loop": s.is_loop_query,
        "edge": s.is_edge_query,
        "two_cycle": s.is_twocycle_query,
        "tree": s.is_tree,
        "cycle_ge3": list(s.cycle) if s.cycle else None,
    }


def _classify_branch(queries: list[ConjunctiveQuery]):
    """Verdict parts for a list of minimal, connected, pairwise incomparable queries."""
    evidence = [_shape_evidence(q) for q in queries]
    if len(queries) == 1:
        e = evidence[0]
        for flag, case in (("loop", LOOP), ("edge", EDGE), ("two_cycle", TWOCYCLE)):
            if e[flag]:
                return PTIME, case, None, evidence
    for i, e in enumerate(evidence):
        if e["cycle_ge3"]:
            return NPCOMPLETE, None, HardnessReason(CYCLE_GEQ3, i, tuple(e["cycle_ge3"])), evidence
    # every query is then a tree: mu_c and mu_e would have absorbed the rest,
    # and a loop query implies everything
    if not all(e["tree"] for e in evidence):
        raise AssertionError(f"unexpected shape mix: {evidence}")
    return NPCOMPLETE, None, HardnessReason(TREE_FAMILY), evidence


def classify(mu) -> Verdict:
    """Decide whether resilience for ``mu`` is polynomial or NP-complete.

    Disconnected disjuncts expand into branches (one component chosen per
    disjunct); the union is polynomial iff every branch is.
    """
    mu = as_ucq(mu)
    if set(mu.symbols) - {"R"}:
        raise InputError("classification is defined for queries over the single symbol R")
    norm = normalize(mu)
    trace = list(norm.trace)
    results = []
    for b in norm.branches:
        complexity, case, reason, evidence = _classify_branch(b)
        results.append((b, complexity, case, reason))
        trace.append({"step": "shape", "branch": [format_cq(q) for q in b], "evidence": evidence,
                      "verdict": case or reason.kind})
    hard = next((r for r in results if r[1] == NPCOMPLETE), None)
    if hard is None:
        cases = {r[2] for r in results}
        if len(cases) != 1 or len(results) != 1:
            raise AssertionError("polynomial branches must coincide")
        b, _, case, _ = results[0]
        return Verdict(PTIME, case, None, tuple(b), trace)
    b, _, _, reason = hard
    return Verdict(NPCOMPLETE, None, reason, tuple(b), trace)


def classify_text(text: str) -> Verdict:
    from .query import parse_ucq
    return classify(parse_ucq(text))


__all__ = ["Verdict", "HardnessReason", "classify", "classify_text", "PTIME", "NPCOMPLETE",
           "LOOP", "EDGE", "TWOCYCLE", "CYCLE_GEQ3", "TREE_FAMILY", "UCQ"]
