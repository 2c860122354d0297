import itertools
from fractions import Fraction

import pytest

from ucqres.errors import InputError
from ucqres.query import parse_ucq
from ucqres.resilience import resilience_brute
from ucqres.structures import BagDatabase, FiniteStructure, transitive_tournament
from ucqres.vcsp import (BOT, INF, Atom, Expression, Feas, Opt, PPDefinition, PPPowerSpec, Project,
                         Scale, Shift, Sum, ValuedRelation, ValuedStructure,
                         clone_op, evaluate, gamma_mc, min_cost, oit_structure, pp_reduce,
                         resilience_to_vcsp, structure_from_json, valued_dual, vcsp_to_resilience)

from oracles import naive_min_cost, naive_tree_min, random_bag_db

MC = gamma_mc()


def test_evaluate_examples():
    e = Expression.of(("R", "x", "y"), ("R", "y", "x"))
    assert evaluate(e, MC, {"x": 0, "y": 1}) == 1
    assert evaluate(Expression(), MC, {}) == 0
    with_bot = Expression([Atom("R", ("x", "y")), Atom(BOT, ("x",))], ["x", "y"])
    assert evaluate(with_bot, MC, {"x": 0, "y": 1}) == INF


def test_min_cost_examples():
    assert min_cost(Expression.of(("R", "x", "y"), ("R", "y", "x")), MC).value == 1
    s = min_cost(Expression.of(("R", "x", "y")), MC)
    assert s.value == 0 and s.assignment == {"x": 0, "y": 1}
    assert min_cost(Expression.of(("OIT", "x", "x", "x")), oit_structure()).value == INF


def test_clone_ops():
    R = MC["R"]
    assert clone_op("opt", R).support() == {(0, 1)}
    assert clone_op("opt", R).is_crisp()
    assert clone_op("shift", R, 0) == R
    p = clone_op("project", R, [0])
    # inf over y of R(0,y) is 0, of R(1,y) is 1
    assert (p(0), p(1)) == (0, 1)
    assert clone_op("feas", R).support() == set(itertools.product((0, 1), repeat=2))
    assert clone_op("scale", R, 3)((0, 0)) == 3
    with pytest.raises(InputError):
        clone_op("nope", R)


def test_valued_dual():
    edge = FiniteStructure.digraph(2, [(0, 1)])
    G = valued_dual(edge)
    assert [G["R"](t) for t in itertools.product((0, 1), repeat=2)] == [1, 0, 1, 1]
    assert G["R"] == MC["R"]
    assert valued_dual(transitive_tournament(2))["R"] == MC["R"]
    empty = valued_dual(FiniteStructure.digraph(2, []))
    assert empty["R"].values() == {1}


def test_structure_json_round_trip():
    G = valued_dual(transitive_tournament(3))
    assert structure_from_json(G.to_json()).fingerprint() == G.fingerprint()


def test_translation_examples(q):
    db = BagDatabase(2, {"R": {(0, 1): 3}})
    e = resilience_to_vcsp(db)
    assert list(e.terms.values()) == [3]
    back = vcsp_to_resilience(e)
    assert back == db
    path = BagDatabase(3, {"R": {(0, 1): 1, (1, 2): 1}})
    T2 = valued_dual(transitive_tournament(2))
    assert min_cost(resilience_to_vcsp(path), T2).value == 1 == resilience_brute(path, q["path2"]).value


def test_equality_merges_and_bottom_rejected():
    e = Expression([Atom("R", ("a", "b")), Atom("=", ("a", "c")), Atom("R", ("c", "b"))], ["a", "b", "c"])
    db = vcsp_to_resilience(e)
    assert db.n == 2 and db.total() == 2
    with pytest.raises(InputError):
        vcsp_to_resilience(Expression([Atom(BOT, ("x",))]))


def random_structure(rng, d, symbols=("R", "S")):
    rels = {}
    for s in symbols:
        ent = {t: (INF if rng.random() < 0.2 else rng.randint(0, 4)) for t in itertools.product(range(d), repeat=2)}
        rels[s] = ValuedRelation(2, d, ent, INF)
    return ValuedStructure(d, rels)


def random_flat(rng, nv, k, symbols=("R", "S")):
    vs = [f"v{i}" for i in range(nv)]
    return Expression([(Atom(rng.choice(symbols), (rng.choice(vs), rng.choice(vs))), rng.randint(1, 2))
                       for _ in range(k)], vs)


def test_min_cost_matches_enumeration(rng):
    for _ in range(300):
        G = random_structure(rng, rng.randint(1, 3))
        e = random_flat(rng, rng.randint(1, 4), rng.randint(0, 6))
        s = min_cost(e, G)
        assert s.value == naive_min_cost(e, G)
        if s.value is not INF:
            assert evaluate(e, G, s.assignment) == s.value
            # lexicographically least optimum
            vs = list(e.variables)
            first = next(dict(zip(vs, vals)) for vals in itertools.product(range(G.size), repeat=len(vs))
                         if evaluate(e, G, dict(zip(vs, vals))) == s.value)
            assert s.assignment == first


def test_gadget_trees_match_brute(rng):
    for _ in range(120):
        G = random_structure(rng, 2)
        a = Atom("R", ("x", "z"))
        b = Atom("S", ("z", "y"))
        trees = [Project(Sum((a, b)), ("z",)), Opt(Sum((a, b))), Feas(Sum((a, b))),
                 Shift(Opt(a), Fraction(1)), Scale(Sum((a, b)), Fraction(2))]
        node = rng.choice(trees)
        extra = Atom("R", ("y", "x"))
        e = Expression([node, extra], ["x", "y", "z"])
        assert min_cost(e, G).value == naive_tree_min(e, G)


def test_pins_and_within():
    e = Expression.of(("R", "x", "y"), ("R", "y", "z"))
    assert min_cost(e, MC, pins={"y": 1}).value == 1
    assert min_cost(e, MC, within=1, argmin=False).value is not INF
    assert min_cost(Expression.of(("R", "x", "x")), MC, within=0, argmin=False).value is INF


def test_pp_reduce_identity():
    e = Expression.of(("R", "x", "y"), ("R", "y", "x"))
    spec = PPPowerSpec(1, {"R": PPDefinition(("a", "b"), Atom("R", ("a", "b")))})
    r = pp_reduce(e, spec, MC)
    assert min_cost(r, MC).value == min_cost(e, MC).value == 1


def test_pp_reduce_chain_equals_maxcut(rng):
    from ucqres.gadgets.maxcut import chain_definition, maxcut_value
    T3 = valued_dual(transitive_tournament(3))
    spec = PPPowerSpec(1, {"R": chain_definition(2)})
    for _ in range(40):
        g = random_bag_db(rng, n_max=4, tuples_max=5)
        red = pp_reduce(resilience_to_vcsp(g), spec, T3)
        assert min_cost(red, T3, argmin=False).value == maxcut_value(g)[0]


def test_pp_power_spec_errors():
    with pytest.raises(InputError):
        PPPowerSpec(2, {"R": PPDefinition(("a", "b", "c"), Atom("R", ("a", "b")))})
    with pytest.raises(InputError):
        PPPowerSpec(0, {})
