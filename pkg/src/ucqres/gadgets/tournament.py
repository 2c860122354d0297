"""Case analysis for the majority/minority tournament operations behind the two-cycle query.

An edge type describes a coordinate pair ``(x_i, y_i)`` of two triples:
Equal, Forward (an edge x_i -> y_i) or Backward. The two ternary
operations act on the triples through the tournaments T_majo and T_mino on
the third power, so the type of the image pair is determined by the three
input types.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from ..errors import VerificationError

EQUAL, FORWARD, BACKWARD = "Equal", "Forward", "Backward"
TYPES = (EQUAL, FORWARD, BACKWARD)
VALUE = {FORWARD: 0, EQUAL: 1, BACKWARD: 1}
_FLIP = {FORWARD: BACKWARD, BACKWARD: FORWARD, EQUAL: EQUAL}


@dataclass(frozen=True)
class EdgeTypeCase:
    inputs: tuple
    f_type: str
    g_type: str
    lhs: int                  # 2 v(f) + v(g)
    rhs: int                  # sum of input values

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    def to_dict(self) -> dict:
        return {"inputs": list(self.inputs), "f": self.f_type, "g": self.g_type,
                "lhs": self.lhs, "rhs": self.rhs, "holds": self.holds}


def _equality_branch(types, reverse: bool):
    """Direction forced by some equal coordinate whose successor is an edge, or None."""
    forced = set()
    for i in range(3):
        nxt = types[(i + 1) % 3]
        if types[i] == EQUAL and nxt != EQUAL:
            forced.add(_FLIP[nxt] if reverse else nxt)
    if len(forced) > 1:
        raise VerificationError(f"conflicting equality-branch directions for {types}")
    return forced.pop() if forced else None


def majo_type(types) -> str:
    if all(t == EQUAL for t in types):
        return EQUAL
    if EQUAL in types:
        return _equality_branch(types, False)
    return FORWARD if sum(t == FORWARD for t in types) >= 2 else BACKWARD


def mino_type(types) -> str:
    if all(t == EQUAL for t in types):
        return EQUAL
    if EQUAL in types:
        return _equality_branch(types, True)
    return FORWARD if sum(t == FORWARD for t in types) in (1, 3) else BACKWARD


def edge_type_cases() -> list[EdgeTypeCase]:
    out = []
    for types in itertools.product(TYPES, repeat=3):
        f, g = majo_type(types), mino_type(types)
        out.append(EdgeTypeCase(types, f, g, 2 * VALUE[f] + VALUE[g], sum(VALUE[t] for t in types)))
    return out


def random_tournament(n: int, rng: random.Random) -> set:
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            edges.add((i, j) if rng.random() < 0.5 else (j, i))
    return edges


def power_tournament(edges: set, n: int, rule: str) -> set:
    """T_majo or T_mino on the third power of a tournament, from the vertex-level rules."""
    out = set()
    verts = list(itertools.product(range(n), repeat=3))
    for x in verts:
        for y in verts:
            if x == y:
                continue
            eq_hits = set()
            for i in range(3):
                j = (i + 1) % 3
                if x[i] == y[i]:
                    pair = (y[j], x[j]) if rule == "mino" else (x[j], y[j])
                    if pair in edges:
                        eq_hits.add(i)
            if eq_hits:
                out.add((x, y))
                continue
            if all(x[i] != y[i] for i in range(3)):
                fw = sum((x[i], y[i]) in edges for i in range(3))
                if (rule == "majo" and fw >= 2) or (rule == "mino" and fw in (1, 3)):
                    out.add((x, y))
    return out


def is_tournament(arcs: set, vertices) -> tuple[bool, str | None]:
    vertices = list(vertices)
    for v in vertices:
        if (v, v) in arcs:
            return False, f"loop at {v}"
    for i, u in enumerate(vertices):
        for v in vertices[i + 1:]:
            k = ((u, v) in arcs) + ((v, u) in arcs)
            if k != 1:
                return False, f"{k} arcs between {u} and {v}"
    return True, None


def tournament_polymorphism_check(seed: int = 0, n: int = 4) -> dict:
    cases = edge_type_cases()
    failed = [c.to_dict() for c in cases if not c.holds]
    rng = random.Random(seed)
    T = random_tournament(n, rng)
    verts = list(itertools.product(range(n), repeat=3))
    majo_ok, majo_why = is_tournament(power_tournament(T, n, "majo"), verts)
    mino_ok, mino_why = is_tournament(power_tournament(T, n, "mino"), verts)
    return {
        "cases": [c.to_dict() for c in cases],
        "passed_cases": len(cases) - len(failed),
        "total_cases": len(cases),
        "failed": failed,
        "base_tournament": sorted(T),
        "pairs": len(verts) * (len(verts) - 1) // 2,
        "majo_tournament": majo_ok,
        "mino_tournament": mino_ok,
        "problems": [w for w in (majo_why, mino_why) if w],
        "ok": not failed and majo_ok and mino_ok,
    }
