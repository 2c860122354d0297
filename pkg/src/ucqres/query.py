"""Conjunctive queries over binary symbols: AST, DSL, minimization, shape."""

from __future__ import annotations

import itertools
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .errors import InputError
from .structures import BagDatabase, FiniteStructure, Signature, find_homomorphism


@dataclass(frozen=True, order=True)
class Atom:
    symbol: str
    var_from: str
    var_to: str

    @property
    def variables(self) -> tuple[str, str]:
        return (self.var_from, self.var_to)

    def __str__(self):
        return f"{self.symbol}({self.var_from},{self.var_to})"


class ConjunctiveQuery:
    """Existentially closed conjunction of binary atoms (a set: duplicates collapse)."""

    __slots__ = ("atoms", "variables", "_key")

    def __init__(self, atoms: Iterable[Atom]):
        seen: dict[Atom, None] = {}
        for a in atoms:
            if not isinstance(a, Atom):
                a = Atom(*a)
            seen.setdefault(a, None)
        if not seen:
            raise InputError("a conjunctive query needs at least one atom")
        self.atoms: tuple[Atom, ...] = tuple(seen)
        order: dict[str, None] = {}
        for a in self.atoms:
            order.setdefault(a.var_from, None)
            order.setdefault(a.var_to, None)
        self.variables: tuple[str, ...] = tuple(order)
        self._key = frozenset(self.atoms)

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(a.symbol for a in self.atoms))

    @property
    def signature(self) -> Signature:
        return Signature.binary(*self.symbols)

    def canonical_database(self, signature: Signature | None = None) -> FiniteStructure:
        rels: dict[str, list] = {s: [] for s in self.symbols}
        for a in self.atoms:
            rels[a.symbol].append((a.var_from, a.var_to))
        sig = self.signature if signature is None else signature
        return FiniteStructure.from_tuples(rels, elements=self.variables, signature=sig)

    def without(self, atom: Atom) -> "ConjunctiveQuery":
        return ConjunctiveQuery(a for a in self.atoms if a != atom)

    def renamed(self, prefix: str = "v") -> "ConjunctiveQuery":
        ren = {v: f"{prefix}{i + 1}" for i, v in enumerate(self.variables)}
        return ConjunctiveQuery(Atom(a.symbol, ren[a.var_from], ren[a.var_to]) for a in self.atoms)

    def __eq__(self, other):
        return isinstance(other, ConjunctiveQuery) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __len__(self):
        return len(self.atoms)

    def __str__(self):
        return " & ".join(str(a) for a in self.atoms)

    def __repr__(self):
        return f"ConjunctiveQuery({self})"


class UCQ:
    """Finite disjunction of conjunctive queries."""

    __slots__ = ("disjuncts",)

    def __init__(self, disjuncts: Iterable[ConjunctiveQuery]):
        ds = tuple(d if isinstance(d, ConjunctiveQuery) else ConjunctiveQuery(d) for d in disjuncts)
        if not ds:
            raise InputError("a UCQ needs at least one disjunct")
        self.disjuncts = ds

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(s for d in self.disjuncts for s in d.symbols))

    @property
    def signature(self) -> Signature:
        return Signature.binary(*self.symbols)

    def __iter__(self):
        return iter(self.disjuncts)

    def __len__(self):
        return len(self.disjuncts)

    def __getitem__(self, i):
        return self.disjuncts[i]

    def __eq__(self, other):
        return isinstance(other, UCQ) and self.disjuncts == other.disjuncts

    def __hash__(self):
        return hash(self.disjuncts)

    def __str__(self):
        return " | ".join(str(d) for d in self.disjuncts)

    def __repr__(self):
        return f"UCQ({self})"


def as_ucq(q) -> UCQ:
    if isinstance(q, UCQ):
        return q
    if isinstance(q, ConjunctiveQuery):
        return UCQ([q])
    if isinstance(q, str):
        return parse_ucq(q)
    raise InputError(f"cannot interpret {q!r} as a query")


# ---------------------------------------------------------------- parsing

class QuerySyntaxError(InputError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<sym>[A-Z][A-Za-z0-9_]*)|(?P<var>[a-z][A-Za-z0-9_]*)"
    r"|(?P<punct>[(),&|])"
)


def _tokenize(text: str):
    line, col, pos = 1, 1, 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        val = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind not in ("ws", "comment"):
                out.append((kind if kind != "punct" else val, val, line, col))
            col += len(val)
        pos = m.end()
    out.append(("eof", "", line, col))
    return out


def parse_ucq(text: str) -> UCQ:
    """Parse ``cq ('|' cq)*`` with ``cq := atom ('&' atom)*``, ``atom := SYM(var,var)``."""
    toks = _tokenize(text)
    i = 0

    def expect(kind):
        nonlocal i
        k, v, ln, cl = toks[i]
        if k != kind:
            shown = repr(v) if v else "end of input"
            raise QuerySyntaxError(f"expected {kind}, found {shown}", ln, cl)
        i += 1
        return v

    def atom():
        nonlocal i
        _, _, ln, cl = toks[i]
        sym = expect("sym")
        expect("(")
        args = [expect("var")]
        while toks[i][0] == ",":
            i += 1
            args.append(expect("var"))
        expect(")")
        if len(args) != 2:
            raise QuerySyntaxError(f"atom {sym} has arity {len(args)}; only binary atoms are allowed", ln, cl)
        return Atom(sym, args[0], args[1])

    def cq():
        nonlocal i
        atoms = [atom()]
        while toks[i][0] == "&":
            i += 1
            atoms.append(atom())
        return ConjunctiveQuery(atoms)

    disjuncts = [cq()]
    while toks[i][0] == "|":
        i += 1
        disjuncts.append(cq())
    expect("eof")
    return UCQ(disjuncts)


def format_cq(q: ConjunctiveQuery) -> str:
    return str(q.renamed())


def format_ucq(mu) -> str:
    """Stable text form: variables renamed ``v1, v2, ...`` per disjunct."""
    if isinstance(mu, ConjunctiveQuery):
        return format_cq(mu)
    return " | ".join(format_cq(d) for d in as_ucq(mu))


# ---------------------------------------------------------- semantics

def _maps_to(src: ConjunctiveQuery, dst: ConjunctiveQuery) -> bool:
    if not set(src.symbols) <= set(dst.symbols):
        return False
    sig = dst.signature
    return find_homomorphism(src.canonical_database(sig), dst.canonical_database(sig)) is not None


def implies(q1: ConjunctiveQuery, q2: ConjunctiveQuery) -> bool:
    """q1 implies q2 iff the canonical database of q2 maps into that of q1."""
    return _maps_to(q2, q1)


def equivalent(q1: ConjunctiveQuery, q2: ConjunctiveQuery) -> bool:
    return implies(q1, q2) and implies(q2, q1)


def canonical_database(q: ConjunctiveQuery) -> FiniteStructure:
    return q.canonical_database()


def holds(mu, D) -> bool:
    """Some disjunct maps into ``D`` (multiplicities ignored)."""
    S = D.support() if isinstance(D, BagDatabase) else D
    for q in as_ucq(mu):
        if any(s not in S.signature for s in q.symbols):
            continue
        A = q.canonical_database(Signature.binary(*q.symbols))
        if find_homomorphism(A, S) is not None:
            return True
    return False


def satisfying_disjunct(mu, D) -> tuple[int, dict[str, int]] | None:
    """First disjunct that holds, with the witnessing variable assignment."""
    S = D.support() if isinstance(D, BagDatabase) else D
    for i, q in enumerate(as_ucq(mu)):
        if any(s not in S.signature for s in q.symbols):
            continue
        h = find_homomorphism(q.canonical_database(Signature.binary(*q.symbols)), S)
        if h is not None:
            return i, dict(zip(q.variables, h.map))
    return None


def _removal_order(q: ConjunctiveQuery) -> list[Atom]:
    rank = {v: i for i, v in enumerate(q.variables)}
    ordered = sorted(q.atoms, key=lambda a: (a.symbol, rank[a.var_from], rank[a.var_to]))
    return ordered[::-1]


def minimize(q: ConjunctiveQuery) -> ConjunctiveQuery:
    """Greedy atom removal while equivalence is kept; one pass suffices."""
    cur = q
    for a in _removal_order(q):
        if len(cur) == 1:
            break
        cand = cur.without(a)
        if _maps_to(cur, cand):
            cur = cand
    return cur


def is_minimal(q: ConjunctiveQuery) -> bool:
    return len(minimize(q)) == len(q)


def components(q: ConjunctiveQuery) -> list[ConjunctiveQuery]:
    """Connected components by shared variables, in first-atom order."""
    parent = {v: v for v in q.variables}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a in q.atoms:
        ra, rb = find(a.var_from), find(a.var_to)
        if ra != rb:
            parent[rb] = ra
    groups: dict[str, list[Atom]] = {}
    for a in q.atoms:
        groups.setdefault(find(a.var_from), []).append(a)
    return [ConjunctiveQuery(g) for g in groups.values()]


def is_connected(q: ConjunctiveQuery) -> bool:
    return len(components(q)) == 1


MU_LOOP = parse_ucq("R(x,x)")[0]
MU_EDGE = parse_ucq("R(x,y)")[0]
MU_CYCLE = parse_ucq("R(x,y) & R(y,x)")[0]


@dataclass
class Normalization:
    """Normalized form: one or more branches of minimal connected queries."""

    branches: list[list[ConjunctiveQuery]]
    trace: list[dict] = field(default_factory=list)

    @property
    def queries(self) -> list[ConjunctiveQuery]:
        out: dict[ConjunctiveQuery, None] = {}
        for b in self.branches:
            for q in b:
                out.setdefault(q, None)
        return list(out)


def _prune(qs: list[ConjunctiveQuery], trace: list[dict]) -> list[ConjunctiveQuery]:
    kept: list[ConjunctiveQuery] = []
    for q in qs:
        dup = next((k for k in kept if equivalent(q, k)), None)
        if dup is not None:
            trace.append({"step": "dedupe", "query": format_cq(q), "equivalent_to": format_cq(dup)})
        else:
            kept.append(q)
    out = []
    for q in kept:
        stronger = next((o for o in kept if o is not q and implies(q, o)), None)
        if stronger is not None:
            trace.append({"step": "drop_implied", "query": format_cq(q), "implies": format_cq(stronger)})
        else:
            out.append(q)
    return out


def normalize(mu) -> Normalization:
    """Minimize, prune implied/equivalent disjuncts, split disconnected ones.

    A disconnected disjunct with components c1..ck yields one branch per
    choice of component; classification is hard iff some branch is hard.
    """
    mu = as_ucq(mu)
    trace: list[dict] = []
    mins = []
    for i, q in enumerate(mu):
        comps = components(q)
        if len(comps) > 1:
            trace.append({"step": "components", "disjunct": i,
                          "components": [format_cq(c) for c in comps]})
        m = minimize(q)
        if len(m) != len(q):
            trace.append({"step": "minimize", "disjunct": i, "from": format_cq(q), "to": format_cq(m)})
        mins.append(m)
    pruned = _prune(mins, trace)
    choices = []
    for q in pruned:
        comps = [minimize(c) for c in components(q)]
        if len(comps) > 1:
            trace.append({"step": "split", "query": format_cq(q),
                          "components": [format_cq(c) for c in comps]})
        choices.append(comps)
    if all(len(c) == 1 for c in choices):
        return Normalization([[c[0] for c in choices]], trace)
    branches = []
    for pick in itertools.product(*choices):
        sub = normalize(UCQ(pick))
        for b in sub.branches:
            if b not in branches:
                branches.append(b)
    trace.append({"step": "branches", "count": len(branches),
                  "branches": [[format_cq(q) for q in b] for b in branches]})
    return Normalization(branches, trace)


# ---------------------------------------------------------------- shape

@dataclass(frozen=True)
class QueryShape:
    connected: bool
    is_loop_query: bool
    is_edge_query: bool
    is_twocycle_query: bool
    multigraph_cycle_ge3: bool
    is_tree: bool
    cycle: tuple[str, ...] | None = None


def undirected_cycle(q: ConjunctiveQuery) -> tuple[str, ...] | None:
    """A cycle (length >= 3) in the simple undirected graph underlying ``q``."""
    adj: dict[str, set[str]] = {v: set() for v in q.variables}
    for a in q.atoms:
        if a.var_from != a.var_to:
            adj[a.var_from].add(a.var_to)
            adj[a.var_to].add(a.var_from)
    parent: dict[str, str | None] = {}
    depth: dict[str, int] = {}
    tree_edges = set()
    for root in q.variables:
        if root in parent:
            continue
        parent[root], depth[root] = None, 0
        queue = [root]
        while queue:
            v = queue.pop(0)
            for w in sorted(adj[v]):
                if w not in parent:
                    parent[w], depth[w] = v, depth[v] + 1
                    tree_edges.add(frozenset((v, w)))
                    queue.append(w)
    for v in q.variables:
        for w in sorted(adj[v]):
            if frozenset((v, w)) in tree_edges:
                continue
            # non-tree edge closes a cycle through the lowest common ancestor
            left, right = [v], [w]
            while left[-1] != right[-1]:
                if depth[left[-1]] >= depth[right[-1]]:
                    left.append(parent[left[-1]])
                else:
                    right.append(parent[right[-1]])
            return tuple(left + right[-2::-1])
    return None


def shape(q: ConjunctiveQuery) -> QueryShape:
    if not is_connected(q):
        raise InputError("shape needs a connected query")
    if not is_minimal(q):
        raise InputError("shape needs a minimized query")
    single_r = q.symbols == ("R",)
    named = [single_r and equivalent(q, n) for n in (MU_LOOP, MU_EDGE, MU_CYCLE)]
    cyc = undirected_cycle(q)
    pairs = {(a.var_from, a.var_to) for a in q.atoms}
    loop_free = all(u != v for u, v in pairs)
    antiparallel = any((v, u) in pairs for u, v in pairs if u != v)
    tree = loop_free and not antiparallel and cyc is None
    return QueryShape(True, named[0], named[1], named[2], cyc is not None, tree, cyc)


# ------------------------------------------------------- self-join variations

class SymbolMap(Mapping):
    """Arity-preserving map between binary symbols."""

    def __init__(self, mapping: Mapping[str, str]):
        self._m = dict(mapping)

    def __getitem__(self, k):
        return self._m[k]

    def __iter__(self):
        return iter(self._m)

    def __len__(self):
        return len(self._m)

    def __repr__(self):
        return "SymbolMap(" + ", ".join(f"{k}->{v}" for k, v in self._m.items()) + ")"


def apply_map(f: Mapping[str, str], nu) -> UCQ:
    nu = as_ucq(nu)
    out = []
    for q in nu:
        missing = [a.symbol for a in q.atoms if a.symbol not in f]
        if missing:
            raise InputError(f"symbol map is missing {sorted(set(missing))}")
        out.append(ConjunctiveQuery(Atom(f[a.symbol], a.var_from, a.var_to) for a in q.atoms))
    return UCQ(out)


def is_self_join_free(mu) -> bool:
    syms = [a.symbol for q in as_ucq(mu) for a in q.atoms]
    return len(syms) == len(set(syms))


def is_injective_for(f: Mapping[str, str], nu) -> bool:
    """No disjunct has atoms S(x,y), S'(x,y) with f(S) == f(S')."""
    for q in as_ucq(nu):
        by_vars: dict[tuple[str, str], list[str]] = {}
        for a in q.atoms:
            by_vars.setdefault(a.variables, []).append(a.symbol)
        for syms in by_vars.values():
            images = [f[s] for s in syms]
            if len(set(images)) != len(images):
                return False
    return True


def factorize_self_joins(mu) -> tuple[UCQ, SymbolMap]:
    """Self-join-free ``nu`` and an injective-for-``nu`` map ``f`` with f(nu) = mu."""
    mu = as_ucq(mu)
    for i, q in enumerate(mu):
        if not is_minimal(q):
            raise InputError(f"disjunct {i} is not minimal")
    if is_self_join_free(mu):
        return mu, SymbolMap({s: s for s in mu.symbols})
    taken = set(mu.symbols)
    counters: dict[str, int] = {}
    f: dict[str, str] = {}
    out = []
    for q in mu:
        atoms = []
        for a in q.atoms:
            k = counters.get(a.symbol, 0)
            fresh = f"{a.symbol}_{k}"
            while fresh in taken:
                k += 1
                fresh = f"{a.symbol}_{k}"
            counters[a.symbol] = k + 1
            taken.add(fresh)
            f[fresh] = a.symbol
            atoms.append(Atom(fresh, a.var_from, a.var_to))
        out.append(ConjunctiveQuery(atoms))
    return UCQ(out), SymbolMap(f)
