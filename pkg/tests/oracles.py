"""Independent brute-force oracles and seeded generators for the test suite.

Nothing here calls the package's search code: satisfaction is checked by
enumerating every variable assignment, resilience by enumerating deletion
sets, and VCSP minima by enumerating every assignment.
"""

import itertools
import random

from ucqres.structures import BagDatabase, Signature


def naive_holds(mu, db) -> bool:
    rels = {s: set(ts) for s, ts in db.relations.items()}
    for q in mu:
        vs = list(q.variables)
        for vals in itertools.product(range(db.n), repeat=len(vs)):
            a = dict(zip(vs, vals))
            if all((a[t.var_from], a[t.var_to]) in rels.get(t.symbol, ()) for t in q.atoms):
                return True
    return False


def naive_resilience(db: BagDatabase, mu) -> int:
    """Cheapest set of distinct tuples (all copies) whose removal falsifies ``mu``."""
    facts = [(s, t, m) for s, tab in db.relations.items() for t, m in tab.items()]
    best = None
    for k in range(len(facts) + 1):
        for chosen in itertools.combinations(range(len(facts)), k):
            cost = sum(facts[i][2] for i in chosen)
            if best is not None and cost >= best:
                continue
            gone = {(facts[i][0], facts[i][1]) for i in chosen}
            rest = {s: {t: m for t, m in tab.items() if (s, t) not in gone} for s, tab in db.relations.items()}
            if not naive_holds(mu, BagDatabase(db.n, rest, db.signature)):
                best = cost
    return best


def naive_min_cost(e, gamma):
    """Minimum of a flat expression by enumerating all assignments."""
    vs = list(e.variables)
    best = None
    for vals in itertools.product(range(gamma.size), repeat=len(vs)):
        a = dict(zip(vs, vals))
        total = 0
        for atom, m in e.terms.items():
            total = total + m * gamma[atom.symbol](*(a[x] for x in atom.args))
        if best is None or total < best:
            best = total
    return best


def naive_maxcut(edges, n) -> int:
    """Minimum number of edge copies not cut from side 0 to side 1."""
    best = None
    for side in itertools.product((0, 1), repeat=n):
        c = sum(m for (u, v), m in edges.items() if not (side[u] == 0 and side[v] == 1))
        best = c if best is None else min(best, c)
    return best


def random_bag_db(rng: random.Random, n_max=6, tuples_max=12, mult_max=3, symbols=("R",), n_min=1):
    """Random bag database; at most ``tuples_max`` distinct tuples."""
    n = rng.randint(n_min, n_max)
    rels = {s: {} for s in symbols}
    for _ in range(rng.randint(0, tuples_max)):
        s = rng.choice(symbols)
        rels[s][(rng.randrange(n), rng.randrange(n))] = rng.randint(1, mult_max)
    return BagDatabase(n, rels, Signature.binary(*symbols))


def all_loopless_digraphs(n):
    """Every loopless digraph on ``n`` labelled vertices (antiparallel arcs allowed)."""
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    for bits in range(1 << len(pairs)):
        yield [pairs[i] for i in range(len(pairs)) if bits >> i & 1]


def _tree_value(node, a, gamma):
    from ucqres.vcsp import INF, Atom, Feas, Opt, Project, Scale, Shift, Sum
    if isinstance(node, Atom):
        v = gamma[node.symbol](*(a[x] for x in node.args))
        if node.crisp:
            return 0 if v == gamma[node.symbol].minimum() else INF
        return v
    if isinstance(node, Sum):
        total = 0
        for c in node.children:
            total = total + _tree_value(c, a, gamma)
        return total
    if isinstance(node, Project):
        best = INF
        for vals in itertools.product(range(gamma.size), repeat=len(node.locals)):
            b = dict(a, **dict(zip(node.locals, vals)))
            best = min(best, _tree_value(node.child, b, gamma))
        return best
    if isinstance(node, Shift):
        return _tree_value(node.child, a, gamma) + node.amount
    if isinstance(node, Scale):
        v = _tree_value(node.child, a, gamma)
        return 0 if node.factor == 0 else node.factor * v
    free = list(dict.fromkeys(node.child.free_vars()))
    v = _tree_value(node.child, a, gamma)
    if isinstance(node, Feas):
        return INF if v is INF else 0
    if isinstance(node, Opt):
        low = min(_tree_value(node.child, dict(a, **dict(zip(free, vals))), gamma)
                  for vals in itertools.product(range(gamma.size), repeat=len(free)))
        return 0 if v == low and v is not INF else INF
    raise TypeError(node)


def naive_tree_min(e, gamma):
    """Minimum of an expression with sub-gadget trees, straight from the definitions."""
    from ucqres.vcsp import INF
    vs = list(e.variables)
    best = INF
    for vals in itertools.product(range(gamma.size), repeat=len(vs)):
        a = dict(zip(vs, vals))
        total = 0
        for node, m in e.terms.items():
            total = total + m * _tree_value(node, a, gamma)
        best = min(best, total)
    return best
