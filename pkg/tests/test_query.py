import pytest

from ucqres.errors import InputError
from ucqres.query import (Atom, ConjunctiveQuery, QuerySyntaxError, apply_map, equivalent,
                          factorize_self_joins, format_ucq, holds, is_self_join_free, minimize,
                          normalize, parse_ucq, shape)
from ucqres.structures import FiniteStructure, transitive_tournament

from oracles import naive_holds, random_bag_db


def test_parse_named_queries(q):
    assert len(q["loop"]) == 1 and q["loop"][0].atoms == (Atom("R", "x", "x"),)
    assert len(q["twocycle"][0].atoms) == 2
    u = parse_ucq("R(x,y) & R(y,z) | R(x,x)")
    assert len(u) == 2


@pytest.mark.parametrize("bad", ["R(x,y", "R(x)", "R(x,y,z)", "R(x,y) &", "", "R(x,y) | | R(x,x)", "R(x;y)"])
def test_parse_errors(bad):
    with pytest.raises(QuerySyntaxError):
        parse_ucq(bad)


def test_canonical_database(q):
    c = q["twocycle"][0].canonical_database()
    assert c.n == 2 and c.relations["R"] == {(0, 1), (1, 0)}
    c = q["loop"][0].canonical_database()
    assert c.n == 1 and c.relations["R"] == {(0, 0)}
    c = q["triangle"][0].canonical_database()
    assert c.relations["R"] == {(0, 1), (1, 2), (2, 0)}


def test_holds_examples(q):
    loop = FiniteStructure.digraph(1, [(0, 0)])
    assert holds(q["twocycle"], loop)
    assert not holds(q["triangle"], transitive_tournament(3))
    assert not holds(q["edge"], FiniteStructure.digraph(3, []))


def test_holds_matches_enumeration(q, rng):
    names = ["loop", "edge", "twocycle", "path2", "triangle", "oriented4"]
    for _ in range(200):
        db = random_bag_db(rng, n_max=4, tuples_max=6)
        for k in names:
            assert holds(q[k], db) == naive_holds(q[k], db)


def test_minimize_examples(q):
    assert minimize(parse_ucq("R(x,x) & R(x,y)")[0]).atoms == (Atom("R", "x", "x"),)
    assert minimize(parse_ucq("R(x,y) & R(x,z)")[0]).atoms == (Atom("R", "x", "y"),)
    tri = q["triangle"][0]
    assert minimize(tri) == tri


def test_minimize_preserves_equivalence(rng):
    for _ in range(100):
        vs = "xyzw"
        atoms = [Atom("R", rng.choice(vs), rng.choice(vs)) for _ in range(rng.randint(1, 5))]
        cq = ConjunctiveQuery(atoms)
        m = minimize(cq)
        assert equivalent(cq, m)
        assert len(m.atoms) <= len(cq.atoms)


def test_normalize_examples(q):
    n = normalize(parse_ucq("R(x,y) | R(x,y) & R(y,z) & R(z,x)"))
    assert [format_ucq(x) for x in n.queries] == ["R(v1,v2)"]
    n = normalize(parse_ucq("R(x,x) | R(x,y) & R(y,x)"))
    assert [format_ucq(x) for x in n.queries] == [format_ucq(q["twocycle"])]
    n = normalize(parse_ucq("R(x,y) & R(z,w)"))
    assert [format_ucq(x) for x in n.queries] == ["R(v1,v2)"]
    assert any("component" in str(step) for step in n.trace)


def test_shape_flags(q):
    assert shape(q["triangle"][0]).multigraph_cycle_ge3
    assert shape(q["path2"][0]).is_tree
    s = shape(q["twocycle"][0])
    assert s.is_twocycle_query and not s.is_tree
    assert shape(q["oriented4"][0]).multigraph_cycle_ge3


def test_factorize_examples(q):
    nu, f = factorize_self_joins(q["twocycle"])
    assert is_self_join_free(nu)
    assert sorted(nu.symbols) == ["R_0", "R_1"] and set(f.values()) == {"R"}
    assert apply_map(f, nu) == q["twocycle"]
    nu, f = factorize_self_joins(q["triangle"])
    assert len(set(nu.symbols)) == 3
    assert apply_map(f, nu) == q["triangle"]
    nu, f = factorize_self_joins(q["rst"])
    assert nu == q["rst"] and all(k == v for k, v in f.items())


def test_apply_map_identity(q):
    assert apply_map({"R": "R", "S": "S", "T": "T"}, q["rst"]) == q["rst"]
    with pytest.raises(InputError):
        apply_map({"R": "R"}, q["rst"])
