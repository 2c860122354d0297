"""Acceptance suite: one PASS/FAIL line per criterion, exact (zero tolerance).

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ucqres.classify import classify_text  # noqa: E402
from ucqres.gadgets import (build_psi_gadgets, build_witness_structure, builtin_dual_for_path,  # noqa: E402
                            maxcut_brute, maxcut_reduction, oit_reduction, path_query,
                            self_join_lift, tournament_polymorphism_check, verify_gadget_optima)
from ucqres.query import factorize_self_joins, holds, parse_ucq  # noqa: E402
from ucqres.resilience import resilience, resilience_brute, resilience_exact, resilience_poly  # noqa: E402
from ucqres.structures import (BagDatabase, FiniteStructure, Signature, has_closed_directed_walk,  # noqa: E402
                               transitive_tournament)
from ucqres.vcsp import INF, min_cost, resilience_to_vcsp, valued_dual  # noqa: E402

from oracles import all_loopless_digraphs, naive_maxcut, random_bag_db  # noqa: E402

LINES: list[str] = []


def record(tag, ok, detail, elapsed, limit):
    ok = ok and elapsed < limit
    LINES.append(f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail} ({elapsed:.2f}s, limit {limit:g}s)")
    return ok


# ------------------------------------------------------------------------ 1

GOLDEN = [
    ("loop", "R(x,x)", "PTime(Loop)"),
    ("edge", "R(x,y)", "PTime(Edge)"),
    ("two-cycle", "R(x,y) & R(y,x)", "PTime(TwoCycle)"),
    ("2-path", "R(x,y) & R(y,z)", "NPComplete(TreeFamily)"),
    ("3-path", "R(x,y) & R(y,z) & R(z,w)", "NPComplete(TreeFamily)"),
    ("star, 2 out-edges", "R(x,y) & R(x,z)", "PTime(Edge)"),
    ("directed triangle", "R(x,y) & R(y,z) & R(z,x)", "NPComplete(CycleGeq3)"),
    ("directed 4-cycle", "R(x,y) & R(y,z) & R(z,w) & R(w,x)", "NPComplete(CycleGeq3)"),
    ("oriented 4-cycle", "R(x,y) & R(y,z) & R(z,w) & R(x,w)", "NPComplete(CycleGeq3)"),
    ("loop | two-cycle", "R(x,x) | R(x,y) & R(y,x)", "PTime(TwoCycle)"),
    ("edge | triangle", "R(x,y) | R(x,y) & R(y,z) & R(z,x)", "PTime(Edge)"),
    ("two-cycle | triangle", "R(x,y) & R(y,x) | R(x,y) & R(y,z) & R(z,x)", "NPComplete(CycleGeq3)"),
]


def test_c1_classifier_golden_suite():
    t0 = time.perf_counter()
    bad = [(name, str(classify_text(text)), want) for name, text, want in GOLDEN
           if str(classify_text(text)) != want]
    el = time.perf_counter() - t0
    ok = record("C1 classifier golden suite", not bad and len(GOLDEN) >= 12,
                f"{len(GOLDEN) - len(bad)}/{len(GOLDEN)} verdicts exact" + (f", mismatches {bad}" if bad else ""),
                el, 1)
    assert ok, bad


# ------------------------------------------------------------------------ 2

def test_c2_poly_equals_brute():
    rng = random.Random(2)
    t0 = time.perf_counter()
    bad = 0
    for case, text in (("Loop", "R(x,x)"), ("Edge", "R(x,y)"), ("TwoCycle", "R(x,y) & R(y,x)")):
        mu = parse_ucq(text)
        for _ in range(500):
            db = random_bag_db(rng, n_max=6, tuples_max=24, mult_max=3)
            if resilience_poly(db, case, mu).value != resilience_brute(db, mu).value:
                bad += 1
    el = time.perf_counter() - t0
    ok = record("C2 poly = brute", bad == 0, f"3 x 500 databases, {bad} mismatches", el, 60)
    assert ok


# ------------------------------------------------------------------------ 3

def test_c3_exact_equals_brute():
    rng = random.Random(3)
    t0 = time.perf_counter()
    bad = 0
    for text in ("R(x,y) & R(y,z) & R(z,x)", "R(x,y) & R(y,z)", "R(x,y) & R(y,z) & R(z,w) & R(x,w)"):
        mu = parse_ucq(text)
        for _ in range(100):
            db = random_bag_db(rng, n_max=6, tuples_max=12, mult_max=3)
            if resilience_exact(db, mu).value != resilience_brute(db, mu).value:
                bad += 1
    el = time.perf_counter() - t0
    ok = record("C3 exact = brute", bad == 0, f"300 instances, {bad} mismatches", el, 120)
    assert ok


# ------------------------------------------------------------------------ 4

def test_c4_resilience_is_vcsp_over_dual():
    rng = random.Random(4)
    t0 = time.perf_counter()
    D = builtin_dual_for_path(2, validate_up_to=5)
    G = valued_dual(D.structure)
    mu = path_query(2)
    bad = 0
    for _ in range(200):
        db = random_bag_db(rng, n_max=5, tuples_max=12, mult_max=3)
        if resilience(db, mu).value != min_cost(resilience_to_vcsp(db), G, argmin=False).value:
            bad += 1
    el = time.perf_counter() - t0
    ok = record("C4 resilience = min_cost over valued dual of T_2", bad == 0 and D.validated_up_to == 5,
                f"200 databases, {bad} mismatches, dual validated to 5 vertices", el, 30)
    assert ok


# ------------------------------------------------------------------------ 5

def _maxcut_sweep(length, max_n):
    D = builtin_dual_for_path(length)
    mu = path_query(length)
    cases = bad = 0
    for n in range(1, max_n + 1):
        for edges in all_loopless_digraphs(n):
            G = BagDatabase(n, {"R": {e: 1 for e in edges}})
            best = naive_maxcut({e: 1 for e in edges}, n)
            for t in range(len(edges) + 1):
                art = maxcut_reduction(G, t, D)
                want = best <= t
                got = resilience_brute(art.db, mu).value <= art.threshold
                cases += 1
                if got != want or maxcut_brute(G, t) != want:
                    bad += 1
    return cases, bad


def test_c5_maxcut_end_to_end():
    t0 = time.perf_counter()
    cases, bad = _maxcut_sweep(2, 4)
    extra_cases, extra_bad = _maxcut_sweep(3, 3)
    el = time.perf_counter() - t0
    ok = record("C5 max-cut reduction end to end", bad == 0 and extra_bad == 0,
                f"T_2: {cases} (digraph, t) cases on <= 4 vertices, {bad} bad; "
                f"T_3 extra: {extra_cases} cases on <= 3 vertices, {extra_bad} bad", el, 300)
    assert ok


# ------------------------------------------------------------------------ 6

CYCLES = {"RST-triangle": "R(x,y) & S(y,z) & T(z,x)", "RSTU 4-cycle": "R(x,y) & S(y,z) & T(z,w) & U(w,x)"}
CLAIMED = {"R": 3, "S": 5, "T": 5, "psi": 1}


def _extra_targets(g, rng):
    sig = Signature.binary(*sorted(g.cycle.query.symbols))
    syms = list(sig)
    two = FiniteStructure(2, {s: [(0, 1)] for s in syms}, sig)
    T4 = FiniteStructure(4, {s: transitive_tournament(4).relations["R"] for s in syms}, sig)
    while True:
        n = 3
        rels = {s: {(rng.randrange(n), rng.randrange(n)) for _ in range(rng.randint(1, 4))} for s in syms}
        R = FiniteStructure(n, rels, sig)
        if not holds(g.cycle.query, R):
            break
    return {"two-vertex edge": two, "T_4 edges": T4, "random nu-free": R}


@pytest.fixture(scope="module")
def theorem_suite():
    t0 = time.perf_counter()
    rng = random.Random(6)
    out = {}
    for name, text in CYCLES.items():
        g = build_psi_gadgets(parse_ucq(text))
        W = build_witness_structure(None, g)
        walk_free = not has_closed_directed_walk(W.structure, g.cycle.cycle_signature)
        main = verify_gadget_optima(g, W.structure, check_alternation=True)
        lower = {}
        for tname, T in _extra_targets(g, rng).items():
            rep = verify_gadget_optima(g, T, check_alternation=False)
            lower[tname] = (all(rep["lower_bounds"].values()), {k: str(v) for k, v in rep["optima"].items()})
        oit = oit_reduction([("p", "q", "r")], gadgets=g)
        out[name] = {"walk_free": walk_free, "walk": W.closed_walk, "query_fails": W.query_fails,
                     "optima": main["optima"], "alternation": main["alternation"], "lower": lower,
                     "oit": oit.soundness}
    out["_elapsed"] = time.perf_counter() - t0
    return out


def _c6(suite, tag, check, describe):
    el = suite["_elapsed"]
    results = {k: check(v) for k, v in suite.items() if not k.startswith("_")}
    detail = "; ".join(f"{k}: {describe(v)}" for k, v in suite.items() if not k.startswith("_"))
    return record(f"C6 {tag}", all(results.values()), detail, el, 600)


def test_c6_witness_has_no_closed_walk(theorem_suite):
    ok = _c6(theorem_suite, "witness structure has no closed directed walk",
             lambda v: v["walk_free"],
             lambda v: "walk-free" if v["walk_free"] else "closed walk " + " -> ".join(v["walk"]))
    assert ok


def test_c6_query_fails_on_witness(theorem_suite):
    ok = _c6(theorem_suite, "query is false on the witness structure", lambda v: v["query_fails"],
             lambda v: f"holds = {not v['query_fails']}")
    assert ok


def test_c6_optima(theorem_suite):
    ok = _c6(theorem_suite, "gadget optima over the witness structure = (3, 5, 5, 1)",
             lambda v: v["optima"] == CLAIMED,
             lambda v: "(" + ", ".join(str(v["optima"][k]) for k in ("R", "S", "T", "psi")) + ")")
    assert ok


def test_c6_alternation(theorem_suite):
    ok = _c6(theorem_suite, "XOR alternation on every optimal assignment",
             lambda v: len(v["alternation"]) == 4 and all(v["alternation"].values()),
             lambda v: ", ".join(f"{k}={'ok' if a else 'violated'}" for k, a in v["alternation"].items()))
    assert ok


def test_c6_lower_bounds(theorem_suite):
    ok = _c6(theorem_suite, "lower bounds over 3 extra nu-free targets",
             lambda v: len(v["lower"]) == 3 and all(ok for ok, _ in v["lower"].values()),
             lambda v: ", ".join(f"{t} {tuple(o.values())}" for t, (_, o) in v["lower"].items()))
    assert ok


def test_c6_oit_single_clause(theorem_suite):
    ok = _c6(theorem_suite, "single-clause OIT soundness", lambda v: v["oit"]["sound"] is True,
             lambda v: f"sound={v['oit']['sound']} at threshold {v['oit']['threshold']}")
    assert ok


# ------------------------------------------------------------------------ 7

def test_c7_tournament_polymorphisms():
    t0 = time.perf_counter()
    rep = tournament_polymorphism_check(seed=0, n=4)
    el = time.perf_counter() - t0
    ok = record("C7 edge-type cases and cube tournaments", rep["ok"] and rep["total_cases"] == 27
                and rep["pairs"] == 2016,
                f"{rep['passed_cases']}/{rep['total_cases']} cases, T_majo tournament={rep['majo_tournament']}, "
                f"T_mino tournament={rep['mino_tournament']} over {rep['pairs']} pairs", el, 30)
    assert ok


# ------------------------------------------------------------------------ 8

def test_c8_self_join_lift():
    rng = random.Random(8)
    t0 = time.perf_counter()
    bad_holds = bad_res = 0
    for text in ("R(x,y) & R(y,x)", "R(x,y) & R(y,z) & R(z,x)"):
        mu = parse_ucq(text)
        nu, f = factorize_self_joins(mu)
        syms = tuple(nu.symbols)
        for _ in range(100):
            db = random_bag_db(rng, n_max=4, tuples_max=8, mult_max=3, symbols=syms)
            out = self_join_lift(db, nu, f)
            if holds(nu, db) != holds(mu, out):
                bad_holds += 1
            if resilience_brute(db, nu).value != resilience_brute(out, mu).value:
                bad_res += 1
    el = time.perf_counter() - t0
    ok = record("C8 self-join lift", bad_holds == 0 and bad_res == 0,
                f"2 x 100 databases, {bad_holds} holds mismatches, {bad_res} resilience mismatches", el, 120)
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
