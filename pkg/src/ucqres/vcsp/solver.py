"""Exact minimization of valued expressions over finite valued structures.

Expressions may carry pp sub-gadgets. Every Opt node becomes a hard
constraint group: its terms must sum to at most the child's minimum.
Feas nodes keep only infinities. Projected locals become ordinary search
variables, which is sound because every local is existential and appears
nowhere else.

Search is branch and bound over integer-scaled costs with bitmask domains,
forward checking and cost-based filtering. A first phase finds the optimum
with a dynamic variable order; a second phase recovers the lexicographically
least optimal assignment in declared variable order.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import InputError
from .expression import (BOT, EQ, Atom, Expression, Feas, Node, Opt, Project, Scale, Shift, Sum,
                         canonical_form)
from .relations import ValuedRelation, ValuedStructure
from .values import INF, Value

INFC = 1 << 62          # integer stand-in for an infinite cost
_HALF = INFC >> 1


@dataclass
class Solution:
    value: Value
    assignment: dict | None
    nodes: int = 0
    full_assignment: dict | None = field(default=None, repr=False)


# ------------------------------------------------------------------ tables

def _atom_table(gamma: ValuedStructure, symbol: str, args: tuple, mode: str):
    """Dense table over the distinct variables of an atom.

    Returns ``(distinct_vars, values)`` with values as Fraction/INF in
    mixed-radix order (first variable most significant). ``mode`` is
    ``raw``, ``feas``, ``opt`` (argmin of the restricted function) or
    ``crisp`` (Opt of the whole relation, then restricted: a starred atom).
    """
    cache = gamma.__dict__.setdefault("_table_cache", {})
    pattern = tuple(args.index(a) for a in args)
    key = (symbol, pattern, mode)
    distinct = tuple(dict.fromkeys(args))
    hit = cache.get(key)
    if hit is not None:
        return distinct, hit
    d = gamma.size
    k = len(distinct)
    if d ** k > 1 << 22:
        raise InputError(f"table for {symbol} too large ({d}^{k})")
    pos = [distinct.index(a) for a in args]
    if symbol == EQ:
        fn = lambda t: Fraction(0) if t[pos[0]] == t[pos[1]] else INF
    elif symbol == BOT:
        fn = lambda t: INF
    else:
        if symbol not in gamma:
            raise InputError(f"symbol {symbol!r} not in the valued structure")
        rel = gamma[symbol]
        if rel.arity != len(args):
            raise InputError(f"arity mismatch for {symbol}")
        if mode == "crisp":
            m = rel.minimum()
            fn = lambda t: Fraction(0) if (m is not INF and rel(tuple(t[p] for p in pos)) == m) else INF
        else:
            fn = lambda t: rel(tuple(t[p] for p in pos))
    vals = [fn(t) for t in itertools.product(range(d), repeat=k)]
    if mode == "feas":
        vals = [v if v is INF else Fraction(0) for v in vals]
    elif mode == "opt":
        m = min(vals, default=INF)
        vals = [Fraction(0) if (m is not INF and v == m) else INF for v in vals]
    vals = tuple(vals)
    cache[key] = vals
    return distinct, vals


class _Table:
    """Integer cost table over k variables with lazily built value levels."""

    __slots__ = ("k", "d", "costs", "minimum", "_levels", "_unary")

    def __init__(self, k, d, costs):
        self.k = k
        self.d = d
        self.costs = costs
        self.minimum = min(costs) if costs else 0
        self._levels = ({}, {})
        self._unary = None

    def levels(self, side: int, a: int):
        """For binary tables: ``[(cost, mask), ...]`` ascending over the other
        variable when variable ``side`` is fixed to ``a``. Infinite costs omitted."""
        cache = self._levels[side]
        lv = cache.get(a)
        if lv is None:
            d = self.d
            by: dict = {}
            if side == 0:
                row = self.costs[a * d:(a + 1) * d]
                for b, c in enumerate(row):
                    if c < _HALF:
                        by[c] = by.get(c, 0) | (1 << b)
            else:
                for b in range(d):
                    c = self.costs[b * d + a]
                    if c < _HALF:
                        by[c] = by.get(c, 0) | (1 << b)
            lv = sorted(by.items())
            cache[a] = lv
        return lv

    def unary_levels(self):
        if self._unary is None:
            by: dict = {}
            for a, c in enumerate(self.costs):
                if c < _HALF:
                    by[c] = by.get(c, 0) | (1 << a)
            self._unary = sorted(by.items())
        return self._unary


# --------------------------------------------------------------- compiling

class _Problem:
    def __init__(self, gamma: ValuedStructure):
        self.gamma = gamma
        self.d = gamma.size
        self.names: list = []             # internal var index -> name (free vars only meaningful)
        self.terms: list = []             # (vars, values, group, weight)
        self.offsets: dict = defaultdict(Fraction)
        self.budgets: dict = {0: None}
        self.infeasible = False
        self._fresh = itertools.count()

    def new_var(self, name) -> int:
        self.names.append(name)
        return len(self.names) - 1

    def new_group(self, budget) -> int:
        g = len(self.budgets)
        self.budgets[g] = budget
        return g

    def add_atom(self, env, symbol, args, group, weight, mode):
        idx = []
        for a in args:
            if a not in env:
                raise InputError(f"unbound variable {a!r}")
            idx.append(env[a])
        distinct, vals = _atom_table(self.gamma, symbol, tuple(idx), mode)
        if not distinct:
            v = vals[0]
            if v is INF:
                self.infeasible = True
            else:
                self.offsets[group] += weight * v
            return
        self.terms.append((distinct, vals, group, weight))

    def compile(self, node: Node, env: Mapping, group: int, weight: Fraction, crisp: bool):
        if isinstance(node, Atom):
            if node.symbol == EQ and node.args[0] == node.args[1]:
                return
            if node.crisp:
                mode = "crisp"
            else:
                mode = "feas" if crisp else "raw"
            self.add_atom(env, node.symbol, node.args, group, weight, mode)
        elif isinstance(node, Sum):
            for c in node.children:
                self.compile(c, env, group, weight, crisp)
        elif isinstance(node, Project):
            inner = dict(env)
            for v in node.locals:
                inner[v] = self.new_var(("_p", next(self._fresh), v))
            self.compile(node.child, inner, group, weight, crisp)
        elif isinstance(node, Shift):
            if not crisp:
                self.offsets[group] += weight * Fraction(node.amount)
            self.compile(node.child, env, group, weight, crisp)
        elif isinstance(node, Scale):
            f = Fraction(node.factor)
            if f == 0:
                return
            self.compile(node.child, env, group, weight * f, crisp)
        elif isinstance(node, Feas):
            self.compile(node.child, env, group, weight, True)
        elif isinstance(node, Opt):
            child = node.child
            if isinstance(child, Atom):
                if child.symbol == EQ or child.crisp:
                    self.compile(child, env, group, weight, True)
                else:
                    self.add_atom(env, child.symbol, child.args, group, weight, "opt")
                return
            m = node.certified_min
            if m is None:
                m = child_minimum(child, self.gamma)
            elif m is not INF:
                m = Fraction(m)
            if m is INF:
                self.infeasible = True
                return
            g = self.new_group(m)
            self.compile(child, env, g, Fraction(1), False)
        else:
            raise InputError(f"unknown node {node!r}")

    def integerize(self):
        """Scale each group to integers; returns (tables, groups, limits, scales)."""
        dens: dict = defaultdict(set)
        for _, vals, g, w in self.terms:
            for v in set(vals):
                if v is not INF:
                    dens[g].add((w * v).denominator)
        for g, off in self.offsets.items():
            dens[g].add(Fraction(off).denominator)
        for g, b in self.budgets.items():
            if b is not None:
                dens[g].add(Fraction(b).denominator)
        scales = {g: math.lcm(*dens[g]) if dens[g] else 1 for g in self.budgets}
        interned: dict = {}
        terms = []
        d = self.d
        for vars_, vals, g, w in self.terms:
            L = scales[g]
            key = (len(vars_), vals, w * L)
            tab = interned.get(key)
            if tab is None:
                f = w * L
                costs = [INFC if v is INF else int(v * f) for v in vals]
                tab = _Table(len(vars_), d, costs)
                interned[key] = tab
            terms.append((vars_, tab, g))
        limits = {}
        for g, b in self.budgets.items():
            off = int(self.offsets.get(g, 0) * scales[g])
            limits[g] = None if b is None else int(b * scales[g]) - off
        return terms, limits, scales


def child_minimum(child: Node, gamma: ValuedStructure) -> Value:
    """Minimum of a sub-tree over all assignments of its variables (cached per structure)."""
    cache = gamma.__dict__.setdefault("_min_cache", {})
    key = canonical_form(child)
    if key not in cache:
        e = Expression([child])
        cache[key] = min_cost(e, gamma, argmin=False).value
    return cache[key]


# ------------------------------------------------------------------ search

class _Search:
    def __init__(self, n, d, terms, limits, domains):
        self.n = n
        self.d = d
        self.terms = terms
        self.ngroups = len(limits)
        self.limits = [limits[g] for g in range(self.ngroups)]
        self.dom = list(domains)
        self.val = [-1] * n
        self.incident = [[] for _ in range(n)]
        for ti, (vs, _, _) in enumerate(terms):
            for v in vs:
                self.incident[v].append(ti)
        self.degree = [len(x) for x in self.incident]
        self.trail: list = []
        self.nodes = 0

    # lower bound of one term under current domains
    def term_lb(self, ti):
        vs, tab, _ = self.terms[ti]
        val = self.val
        dom = self.dom
        if tab.k == 1:
            v = vs[0]
            a = val[v]
            if a >= 0:
                return tab.costs[a]
            D = dom[v]
            for c, m in tab.unary_levels():
                if m & D:
                    return c
            return INFC
        if tab.k == 2:
            u, v = vs
            a, b = val[u], val[v]
            if a >= 0:
                if b >= 0:
                    return tab.costs[a * self.d + b]
                D = dom[v]
                for c, m in tab.levels(0, a):
                    if m & D:
                        return c
                return INFC
            if b >= 0:
                D = dom[u]
                for c, m in tab.levels(1, b):
                    if m & D:
                        return c
                return INFC
            Du, Dv = dom[u], dom[v]
            if Du.bit_count() <= 4:
                best = INFC
                while Du:
                    low = Du & -Du
                    Du ^= low
                    for c, m in tab.levels(0, low.bit_length() - 1):
                        if c >= best:
                            break
                        if m & Dv:
                            best = c
                            break
                return best
            return tab.minimum
        free = [v for v in vs if val[v] < 0]
        if not free:
            idx = 0
            for v in vs:
                idx = idx * self.d + val[v]
            return tab.costs[idx]
        size = 1
        for v in free:
            size *= self.dom[v].bit_count()
        if size > 256:
            return tab.minimum
        best = INFC
        for combo in itertools.product(*(_bits(self.dom[v]) if val[v] < 0 else (val[v],) for v in vs)):
            idx = 0
            for x in combo:
                idx = idx * self.d + x
            c = tab.costs[idx]
            if c < best:
                best = c
        return best

    def bounds(self):
        lbs = [0] * self.ngroups
        tl = [0] * len(self.terms)
        for ti, (_, _, g) in enumerate(self.terms):
            c = self.term_lb(ti)
            tl[ti] = c
            lbs[g] += c
        return lbs, tl

    def set_dom(self, v, mask):
        self.trail.append((v, self.dom[v]))
        self.dom[v] = mask

    def undo(self, mark):
        trail = self.trail
        dom = self.dom
        while len(trail) > mark:
            v, m = trail.pop()
            dom[v] = m

    def filter_from(self, x, lbs, tl, limits):
        """Forward checking plus slack filtering on binary terms touching ``x``."""
        val = self.val
        for ti in self.incident[x]:
            vs, tab, g = self.terms[ti]
            if tab.k == 2:
                u, v = vs
                if val[u] >= 0 and val[v] < 0:
                    side, a, y = 0, val[u], v
                elif val[v] >= 0 and val[u] < 0:
                    side, a, y = 1, val[v], u
                else:
                    continue
                lim = limits[g]
                slack = None if lim is None else lim - lbs[g]
                allowed = 0
                base = tl[ti]
                for c, m in tab.levels(side, a):
                    if slack is not None and c - base > slack:
                        break
                    allowed |= m
                D = self.dom[y]
                nd = D & allowed
                if nd != D:
                    if not nd:
                        return False
                    self.set_dom(y, nd)
            elif tab.k == 1:
                continue
            else:
                free = [v for v in vs if val[v] < 0]
                if len(free) != 1:
                    continue
                y = free[0]
                allowed = 0
                for b in _bits(self.dom[y]):
                    idx = 0
                    for v in vs:
                        idx = idx * self.d + (b if v == y else val[v])
                    if tab.costs[idx] < _HALF:
                        allowed |= 1 << b
                D = self.dom[y]
                if D & allowed != D:
                    if not D & allowed:
                        return False
                    self.set_dom(y, D & allowed)
        return True

    def run(self, static_order=None, target=None, upper=None, max_solutions=1):
        """Optimize (target None) or find the first assignment with cost <= target."""
        self.static = static_order
        self.target = target
        self.best = None
        self.best_val = None
        self.done = False
        limits = list(self.limits)
        if target is not None:
            limits[0] = target
        elif upper is not None:
            limits[0] = upper
        else:
            limits[0] = _HALF
        self.cur_limits = limits
        # root propagation of unary / fixed terms
        self._node(None)
        return self.best, self.best_val

    def _pick(self):
        val = self.val
        if self.static is not None:
            for v in self.static:
                if val[v] < 0:
                    return v
            return -1
        best = -1
        key = None
        dom = self.dom
        for v in range(self.n):
            if val[v] < 0:
                k = (dom[v].bit_count(), -self.degree[v], v)
                if key is None or k < key:
                    key, best = k, v
        return best

    def _node(self, last):
        self.nodes += 1
        limits = self.cur_limits
        lbs, tl = self.bounds()
        for g in range(self.ngroups):
            lim = limits[g]
            if lbs[g] >= _HALF or (lim is not None and lbs[g] > lim):
                return
        if last is not None and not self.filter_from(last, lbs, tl, limits):
            return
        x = self._pick()
        if x < 0:
            cost = lbs[0]
            self.best = cost
            self.best_val = list(self.val)
            if self.target is not None:
                self.done = True
            else:
                limits[0] = cost - 1
            return
        mark = len(self.trail)
        for a in _bits(self.dom[x]):
            self.set_dom(x, 1 << a)
            self.val[x] = a
            self._node(x)
            self.val[x] = -1
            self.undo(mark)
            if self.done:
                return


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# ------------------------------------------------------------------ public

def _build(e: Expression, gamma: ValuedStructure, constraints=()):
    prob = _Problem(gamma)
    env = {}
    for v in e.variables:
        env[v] = prob.new_var(v)
    for node, mult in e.terms.items():
        prob.compile(node, env, 0, Fraction(mult), False)
    for args, rel in constraints:
        if not isinstance(rel, ValuedRelation) or rel.size != gamma.size:
            raise InputError("extra constraints must be valued relations over the same domain")
        idx = tuple(env[a] for a in args)
        distinct = tuple(dict.fromkeys(idx))
        pos = [distinct.index(i) for i in idx]
        vals = tuple(rel(tuple(t[p] for p in pos)) for t in itertools.product(range(gamma.size), repeat=len(distinct)))
        vals = tuple(v if v is INF else Fraction(0) for v in vals)
        prob.terms.append((distinct, vals, 0, Fraction(1)))
    return prob, env


def min_cost(e: Expression, gamma: ValuedStructure, *, pins: Mapping | None = None,
             domains: Mapping | None = None, upper=None, argmin: bool = True,
             constraints: Sequence = (), within=None) -> Solution:
    """Exact minimum of ``e`` over ``gamma``.

    ``pins`` fixes variables to domain indices, ``domains`` restricts them to
    index sets, ``upper`` is an optional known bound on the optimum (search
    reports INF if nothing is at most ``upper``). ``constraints`` are extra
    crisp ``(args, ValuedRelation)`` pairs (only the finite/infinite pattern
    matters). With ``argmin`` the returned assignment is the lexicographically
    least optimum in the expression's variable order.

    With ``within`` the search stops at the first assignment of cost at most
    ``within`` (not necessarily optimal); INF means there is none.
    """
    if not isinstance(e, Expression):
        raise InputError("min_cost expects an Expression")
    prob, env = _build(e, gamma, constraints)
    d = gamma.size
    if prob.infeasible or d == 0 and prob.names:
        return Solution(INF, None)
    terms, limits, scales = prob.integerize()
    full = (1 << d) - 1
    doms = [full] * len(prob.names)
    for v, a in (pins or {}).items():
        if v not in env:
            raise InputError(f"unknown variable {v!r}")
        if not 0 <= int(a) < d:
            raise InputError(f"value {a} outside the domain")
        doms[env[v]] &= 1 << int(a)
    for v, allowed in (domains or {}).items():
        if v not in env:
            raise InputError(f"unknown variable {v!r}")
        m = 0
        for a in allowed:
            m |= 1 << int(a)
        doms[env[v]] &= m
    if any(m == 0 for m in doms):
        return Solution(INF, None)
    L0 = scales[0]
    off0 = prob.offsets.get(0, Fraction(0))
    target = None
    if within is not None:
        target = _HALF - 1 if within is INF else math.floor((Fraction(within) - off0) * L0)
    elif upper is not None and upper is not INF:
        target = math.floor((Fraction(upper) - off0) * L0)
    n = len(prob.names)
    comps = _components(n, terms, doms)
    if len(comps) <= 1:
        cost, vals, nodes = _solve(list(range(n)), terms, limits, doms, d, target, within is not None,
                                   argmin and within is None)
    else:
        # independent parts: optima add up, lex-least optima combine
        nonneg = all(tab.minimum >= 0 for _, tab, _ in terms)
        vals = [(m & -m).bit_length() - 1 for m in doms]
        cost, nodes = 0, 0
        for vars_, tis in comps:
            budget = None if target is None or not nonneg else target - cost
            loc = {v: i for i, v in enumerate(vars_)}
            gmap = {0: 0}
            for ti in tis:
                gmap.setdefault(terms[ti][2], len(gmap))
            sub = [(tuple(loc[v] for v in terms[ti][0]), terms[ti][1], gmap[terms[ti][2]]) for ti in tis]
            sublim = {new: limits[old] for old, new in gmap.items()}
            c, sv, k = _solve(vars_, sub, sublim, [doms[v] for v in vars_], d, budget, False,
                              argmin and within is None)
            nodes += k
            if c is None:
                cost = None
                break
            cost += c
            for v, a in zip(vars_, sv):
                vals[v] = a
        if cost is not None and target is not None and cost > target:
            cost = None
    if cost is None:
        return Solution(INF, None, nodes)
    value = Fraction(cost, L0) + off0
    assignment = {v: vals[env[v]] for v in e.variables}
    fullmap = {prob.names[i]: vals[i] for i in range(len(prob.names))}
    return Solution(value, assignment, nodes, fullmap)


def _components(n, terms, doms):
    """Group terms that share an unfixed variable or an Opt budget; returns ``[(vars, term ids)]``."""
    parent = list(range(len(terms)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict = {}
    for ti, (vs, _, g) in enumerate(terms):
        keys = [("v", v) for v in vs if doms[v] & (doms[v] - 1)]
        if g:
            keys.append(("g", g))
        for key in keys:
            if key in owner:
                a, b = find(ti), find(owner[key])
                if a != b:
                    parent[a] = b
            else:
                owner[key] = ti
    groups: dict = {}
    for ti in range(len(terms)):
        groups.setdefault(find(ti), []).append(ti)
    out = []
    for tis in groups.values():
        vs = sorted({v for ti in tis for v in terms[ti][0]})
        out.append((vs, tis))
    out.sort(key=lambda c: (c[0][0] if c[0] else -1, c[1][0]))
    return out


def _solve(vars_, terms, limits, doms, d, target, first, lex):
    """Run one search; returns ``(cost or None, values per variable, nodes)``."""
    s = _Search(len(vars_), d, terms, limits, doms)
    if first:
        cost, vals = s.run(target=target)
    else:
        cost, vals = s.run(upper=target)
    nodes = s.nodes
    if cost is None:
        return None, None, nodes
    if lex:
        s2 = _Search(len(vars_), d, terms, limits, doms)
        cost2, vals2 = s2.run(static_order=list(range(len(vars_))), target=cost)
        nodes += s2.nodes
        if cost2 is None or cost2 != cost:
            raise AssertionError("lexicographic phase lost the optimum")
        vals = vals2
    return cost, vals, nodes


def evaluate(e: Expression, gamma: ValuedStructure, assignment: Mapping) -> Value:
    """Cost of ``e`` at ``assignment`` (sub-gadgets minimized over their locals)."""
    for v in e.variables:
        if v not in assignment:
            raise InputError(f"unbound variable {v!r}")
    if e.is_flat():
        total: Value = Fraction(0)
        for node, mult in e.terms.items():
            args = tuple(int(assignment[a]) for a in node.args)
            if node.symbol == EQ:
                val = Fraction(0) if args[0] == args[1] else INF
            elif node.symbol == BOT:
                val = INF
            else:
                if node.symbol not in gamma:
                    raise InputError(f"symbol {node.symbol!r} not in the valued structure")
                val = gamma[node.symbol](args)
            total = total + mult * val
            if total is INF:
                return INF
        return total
    return min_cost(e, gamma, pins={v: assignment[v] for v in e.variables}, argmin=False).value


def brute_min_cost(e: Expression, gamma: ValuedStructure, limit: int = 10 ** 6) -> Solution:
    """Exhaustive oracle for flat expressions (lexicographic argmin)."""
    if not e.is_flat():
        raise InputError("brute_min_cost handles flat expressions only")
    n = len(e.variables)
    if gamma.size ** n > limit:
        raise InputError("search space exceeds the brute-force limit")
    best, arg = INF, None
    for t in itertools.product(range(gamma.size), repeat=n):
        a = dict(zip(e.variables, t))
        v = evaluate(e, gamma, a)
        if v < best:
            best, arg = v, a
    return Solution(best, arg)
