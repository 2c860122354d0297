import pytest

from ucqres.errors import GuardExceeded, InputError
from ucqres.query import holds, parse_ucq
from ucqres.resilience import (decide, enumerate_witnesses, resilience, resilience_brute,
                               resilience_exact, resilience_poly)
from ucqres.structures import BagDatabase

from oracles import naive_resilience, random_bag_db


def db(edges, n=None):
    n = n if n is not None else 1 + max((max(t) for t in edges), default=-1)
    return BagDatabase(n, {"R": dict(edges)})


TRI = {(0, 1): 1, (1, 2): 1, (2, 0): 1}


def test_brute_examples(q):
    assert resilience_brute(db({(0, 0): 2}), q["loop"]).value == 2
    assert resilience_brute(db(TRI), q["triangle"]).value == 1
    assert resilience_brute(db({(0, 1): 1}), q["triangle"]).value == 0


def test_exact_examples(q):
    bowtie = {(0, 1): 1, (1, 2): 1, (2, 0): 1, (0, 3): 1, (3, 4): 1, (4, 0): 1}
    assert resilience_exact(db(bowtie), q["triangle"]).value == 2
    assert resilience_exact(db({(0, 1): 1, (1, 2): 1}), q["path2"]).value == 1


def test_poly_examples():
    two = db({(1, 2): 2, (2, 1): 3, (3, 3): 1})
    assert resilience_poly(two, "TwoCycle").value == 3
    loops = db({(1, 1): 2, (2, 2): 1, (1, 2): 4})
    assert resilience_poly(loops, "Loop").value == 3
    some = db({(0, 1): 2, (1, 2): 5})
    assert resilience_poly(some, "Edge").value == 7


def test_decide_examples(q):
    assert not decide(db(TRI), 0, q["triangle"])
    assert decide(db(TRI), 1, q["triangle"])
    assert decide(BagDatabase(0, {"R": {}}), 0, q["triangle"])


def test_deletion_falsifies(q, rng):
    for _ in range(60):
        d = random_bag_db(rng, n_max=4, tuples_max=8)
        r = resilience_exact(d, q["triangle"])
        assert not holds(q["triangle"], d.without([f for f, _ in r.deleted]))
        assert r.value == sum(c for _, c in r.deleted)


@pytest.mark.parametrize("name", ["loop", "edge", "twocycle", "path2", "triangle", "oriented4"])
def test_brute_and_exact_match_naive(q, rng, name):
    for _ in range(25):
        d = random_bag_db(rng, n_max=4, tuples_max=7)
        want = naive_resilience(d, q[name])
        assert resilience_brute(d, q[name]).value == want
        assert resilience_exact(d, q[name]).value == want


def test_union_query(rng):
    mu = parse_ucq("R(x,x) | R(x,y) & R(y,z) & R(z,x)")
    for _ in range(30):
        d = random_bag_db(rng, n_max=4, tuples_max=7)
        assert resilience_exact(d, mu).value == naive_resilience(d, mu)


def test_multi_symbol(q, rng):
    for _ in range(30):
        d = random_bag_db(rng, n_max=3, tuples_max=8, symbols=("R", "S", "T"))
        assert resilience_exact(d, q["rst"]).value == naive_resilience(d, q["rst"])


def test_guard():
    big = db({(i, i + 1): 1 for i in range(30)})
    with pytest.raises(GuardExceeded):
        resilience_brute(big, parse_ucq("R(x,y) & R(y,x)"))


def test_witnesses(q):
    w = enumerate_witnesses(db(TRI), q["triangle"])
    assert len(w) == 1 and len(w[0]) == 3


def test_dispatch(q):
    d = db({(0, 1): 1, (1, 0): 2})
    assert resilience(d, q["twocycle"]).method == "poly"
    assert resilience(d, q["triangle"]).method == "exact"
    with pytest.raises(InputError):
        resilience(d, q["triangle"], "poly")
    with pytest.raises(InputError):
        resilience_poly(d, "Edge", q["twocycle"])
