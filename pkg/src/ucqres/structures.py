"""Finite relational structures, bag databases and homomorphism search."""

from __future__ import annotations

import itertools
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType

import numpy as np

from . import kernels
from .errors import InputError


class Signature:
    """Ordered relation symbols with arities."""

    __slots__ = ("_arity",)

    def __init__(self, symbols: Iterable[tuple[str, int]] | Mapping[str, int]):
        items = symbols.items() if isinstance(symbols, Mapping) else symbols
        arity: dict[str, int] = {}
        for name, k in items:
            if name in arity:
                raise InputError(f"duplicate symbol {name!r}")
            if k < 1:
                raise InputError(f"symbol {name!r} needs arity >= 1")
            arity[name] = int(k)
        self._arity = arity

    @classmethod
    def binary(cls, *names: str) -> "Signature":
        return cls([(n, 2) for n in names])

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(self._arity)

    def arity(self, symbol: str) -> int:
        return self._arity[symbol]

    def items(self):
        return self._arity.items()

    def union(self, other: "Signature") -> "Signature":
        merged = dict(self._arity)
        for s, k in other.items():
            if merged.setdefault(s, k) != k:
                raise InputError(f"symbol {s!r} used with arities {merged[s]} and {k}")
        return Signature(merged)

    def __contains__(self, symbol) -> bool:
        return symbol in self._arity

    def __iter__(self):
        return iter(self._arity)

    def __len__(self):
        return len(self._arity)

    def __eq__(self, other) -> bool:
        return isinstance(other, Signature) and self._arity == other._arity

    def __hash__(self):
        return hash(tuple(self._arity.items()))

    def __repr__(self):
        return "Signature(" + ", ".join(f"{s}/{k}" for s, k in self._arity.items()) + ")"


def _intern(relations, elements):
    order: dict = {}
    for e in elements or ():
        order.setdefault(e, len(order))
    for _, tuples in relations:
        for t in tuples:
            for e in t:
                order.setdefault(e, len(order))
    return order


class FiniteStructure:
    """Crisp structure on the domain ``0..n-1`` with optional element labels."""

    __slots__ = ("n", "labels", "signature", "relations")

    def __init__(
        self,
        n: int,
        relations: Mapping[str, Iterable[tuple[int, ...]]],
        signature: Signature | None = None,
        labels: Iterable | None = None,
    ):
        rels = {s: frozenset(tuple(int(x) for x in t) for t in ts) for s, ts in relations.items()}
        if signature is None:
            signature = Signature([(s, _infer_arity(ts, 2)) for s, ts in rels.items()])
        for s in signature:
            rels.setdefault(s, frozenset())
        for s, ts in rels.items():
            if s not in signature:
                raise InputError(f"symbol {s!r} not in signature")
            k = signature.arity(s)
            for t in ts:
                if len(t) != k:
                    raise InputError(f"tuple {t} has wrong arity for {s}/{k}")
                if any(x < 0 or x >= n for x in t):
                    raise InputError(f"tuple {t} leaves the domain 0..{n - 1}")
        self.n = int(n)
        self.labels = tuple(labels) if labels is not None else tuple(range(n))
        if len(self.labels) != self.n:
            raise InputError("label count does not match domain size")
        self.signature = signature
        self.relations = MappingProxyType({s: rels[s] for s in signature})

    @classmethod
    def from_tuples(cls, relations: Mapping[str, Iterable[tuple]], elements=None, signature=None):
        """Build from tuples over arbitrary hashable labels (first occurrence order)."""
        rel_items = [(s, [tuple(t) for t in ts]) for s, ts in relations.items()]
        order = _intern(rel_items, elements)
        idx = {s: [tuple(order[e] for e in t) for t in ts] for s, ts in rel_items}
        return cls(len(order), idx, signature=signature, labels=list(order))

    @classmethod
    def digraph(cls, n: int, edges: Iterable[tuple[int, int]], symbol: str = "R"):
        return cls(n, {symbol: edges}, signature=Signature.binary(symbol))

    def __getitem__(self, symbol: str) -> frozenset:
        return self.relations[symbol]

    def tuples(self):
        """All (symbol, tuple) facts in a deterministic order."""
        for s in self.signature:
            for t in sorted(self.relations[s]):
                yield s, t

    def size(self) -> int:
        return sum(len(ts) for ts in self.relations.values())

    def with_signature(self, signature: Signature) -> "FiniteStructure":
        rels = {s: self.relations.get(s, ()) for s in signature}
        extra = [s for s in self.signature if self.relations[s] and s not in signature]
        if extra:
            raise InputError(f"non-empty relations {extra} outside the target signature")
        return FiniteStructure(self.n, rels, signature=signature, labels=self.labels)

    def induced(self, keep: Iterable[int]) -> "FiniteStructure":
        keep = sorted(set(keep))
        pos = {v: i for i, v in enumerate(keep)}
        rels = {
            s: [tuple(pos[x] for x in t) for t in ts if all(x in pos for x in t)]
            for s, ts in self.relations.items()
        }
        return FiniteStructure(len(keep), rels, signature=self.signature, labels=[self.labels[v] for v in keep])

    def disjoint_union(self, other: "FiniteStructure") -> "FiniteStructure":
        sig = self.signature.union(other.signature)
        rels = {s: set(self.relations.get(s, ())) for s in sig}
        for s, ts in other.relations.items():
            rels[s] |= {tuple(x + self.n for x in t) for t in ts}
        labels = [("L", x) for x in self.labels] + [("R", x) for x in other.labels]
        return FiniteStructure(self.n + other.n, rels, signature=sig, labels=labels)

    def key(self):
        return (self.n, tuple((s, tuple(sorted(self.relations[s]))) for s in self.signature))

    def __eq__(self, other):
        return isinstance(other, FiniteStructure) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        body = "; ".join(f"{s}={sorted(ts)}" for s, ts in self.relations.items())
        return f"FiniteStructure(n={self.n}; {body})"


def _infer_arity(tuples, default):
    ks = {len(t) for t in tuples}
    if len(ks) > 1:
        raise InputError(f"mixed arities {sorted(ks)}")
    return ks.pop() if ks else default


class BagDatabase:
    """Structure whose tuples carry positive multiplicities."""

    __slots__ = ("n", "labels", "signature", "relations")

    def __init__(
        self,
        n: int,
        relations: Mapping[str, Mapping[tuple[int, ...], int]],
        signature: Signature | None = None,
        labels: Iterable | None = None,
    ):
        rels: dict[str, dict] = {}
        for s, table in relations.items():
            clean = {}
            for t, m in table.items():
                t = tuple(int(x) for x in t)
                m = int(m)
                if m < 0:
                    raise InputError(f"negative multiplicity for {s}{t}")
                if m:
                    clean[t] = clean.get(t, 0) + m
            rels[s] = clean
        if signature is None:
            signature = Signature([(s, _infer_arity(tb, 2)) for s, tb in rels.items()])
        for s in signature:
            rels.setdefault(s, {})
        for s, tb in rels.items():
            if s not in signature:
                raise InputError(f"symbol {s!r} not in signature")
            k = signature.arity(s)
            for t in tb:
                if len(t) != k or any(x < 0 or x >= n for x in t):
                    raise InputError(f"bad tuple {t} for {s}/{k} on domain of size {n}")
        self.n = int(n)
        self.labels = tuple(labels) if labels is not None else tuple(range(n))
        if len(self.labels) != self.n:
            raise InputError("label count does not match domain size")
        self.signature = signature
        self.relations = MappingProxyType(
            {s: MappingProxyType(dict(sorted(rels[s].items()))) for s in signature}
        )

    @classmethod
    def from_tuples(cls, relations: Mapping[str, Mapping[tuple, int]], elements=None, signature=None):
        rel_items = [(s, list(tb.items())) for s, tb in relations.items()]
        order = _intern([(s, [t for t, _ in items]) for s, items in rel_items], elements)
        idx = {}
        for s, items in rel_items:
            table: dict = {}
            for t, m in items:
                key = tuple(order[e] for e in t)
                table[key] = table.get(key, 0) + m
            idx[s] = table
        return cls(len(order), idx, signature=signature, labels=list(order))

    @classmethod
    def from_structure(cls, A: FiniteStructure, multiplicity: int = 1) -> "BagDatabase":
        rels = {s: {t: multiplicity for t in ts} for s, ts in A.relations.items()}
        return cls(A.n, rels, signature=A.signature, labels=A.labels)

    def support(self) -> FiniteStructure:
        """The set-semantics structure (multiplicities forgotten)."""
        return FiniteStructure(self.n, {s: tb.keys() for s, tb in self.relations.items()},
                               signature=self.signature, labels=self.labels)

    def facts(self) -> list[tuple[str, tuple[int, ...], int]]:
        """Distinct facts ``(symbol, tuple, multiplicity)`` in a fixed order."""
        return [(s, t, m) for s in self.signature for t, m in self.relations[s].items()]

    def multiplicity(self, symbol: str, t: tuple) -> int:
        return self.relations.get(symbol, {}).get(tuple(t), 0)

    def distinct_count(self) -> int:
        return sum(len(tb) for tb in self.relations.values())

    def total(self) -> int:
        return sum(sum(tb.values()) for tb in self.relations.values())

    def without(self, deleted: Iterable[tuple[str, tuple]]) -> "BagDatabase":
        """Remove every copy of the listed facts."""
        gone = {(s, tuple(t)) for s, t in deleted}
        rels = {s: {t: m for t, m in tb.items() if (s, t) not in gone} for s, tb in self.relations.items()}
        return BagDatabase(self.n, rels, signature=self.signature, labels=self.labels)

    def with_added(self, symbol: str, t: tuple, copies: int = 1) -> "BagDatabase":
        rels = {s: dict(tb) for s, tb in self.relations.items()}
        rels.setdefault(symbol, {})
        t = tuple(t)
        rels[symbol][t] = rels[symbol].get(t, 0) + copies
        sig = self.signature if symbol in self.signature else self.signature.union(Signature([(symbol, len(t))]))
        return BagDatabase(self.n, rels, signature=sig, labels=self.labels)

    def key(self):
        return (self.n, tuple((s, tuple(self.relations[s].items())) for s in self.signature))

    def __eq__(self, other):
        return isinstance(other, BagDatabase) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        body = "; ".join(f"{s}={dict(tb)}" for s, tb in self.relations.items())
        return f"BagDatabase(n={self.n}; {body})"


@dataclass(frozen=True)
class Homomorphism:
    map: tuple[int, ...]

    def __getitem__(self, i: int) -> int:
        return self.map[i]

    def __len__(self):
        return len(self.map)


def _as_structure(X) -> FiniteStructure:
    return X.support() if isinstance(X, BagDatabase) else X


def is_homomorphism(h, A: FiniteStructure, B: FiniteStructure) -> bool:
    A, B = _as_structure(A), _as_structure(B)
    h = tuple(h)
    if len(h) != A.n:
        return False
    for s, ts in A.relations.items():
        target = B.relations.get(s, frozenset())
        for t in ts:
            if tuple(h[x] for x in t) not in target:
                return False
    return True


def _check_signatures(A: FiniteStructure, B: FiniteStructure):
    for s in A.signature:
        if A.relations[s] and s not in B.signature:
            raise InputError(f"signature mismatch: {s!r} missing from target")
        if s in B.signature and A.signature.arity(s) != B.signature.arity(s):
            raise InputError(f"signature mismatch: arity of {s!r}")


def find_homomorphism(A, B, domains=None) -> Homomorphism | None:
    """Lexicographically least homomorphism from ``A`` to ``B``, or None.

    ``domains`` optionally restricts candidate images per source element
    (a list of iterables of target indices).
    """
    A, B = _as_structure(A), _as_structure(B)
    _check_signatures(A, B)
    dom = np.ones((A.n, B.n), dtype=np.uint8)
    if domains is not None:
        dom[:] = 0
        for i, allowed in enumerate(domains):
            for b in allowed:
                dom[i, b] = 1
    used = [s for s in A.signature if A.relations[s]]
    if all(A.signature.arity(s) == 2 for s in used):
        sym_index = {s: i for i, s in enumerate(used)}
        edges = np.array(
            [(sym_index[s], u, v) for s in used for (u, v) in sorted(A.relations[s])], dtype=np.int32
        ).reshape(-1, 3)
        adj = np.zeros((max(len(used), 1), B.n, B.n), dtype=np.uint8)
        for s, i in sym_index.items():
            for u, v in B.relations.get(s, ()):
                adj[i, u, v] = 1
        res = kernels.hom_search_binary(A.n, edges, B.n, adj, dom)
        return None if res is None else Homomorphism(tuple(int(x) for x in res))
    return _generic_search(A, B, dom)


def _generic_search(A: FiniteStructure, B: FiniteStructure, dom) -> Homomorphism | None:
    # any arity; plain backtracking with consistency checks on fully assigned tuples
    cands = [[b for b in range(B.n) if dom[i, b]] for i in range(A.n)]
    checks: list[list[tuple[str, tuple]]] = [[] for _ in range(A.n)]
    for s, ts in A.relations.items():
        for t in ts:
            checks[max(t)].append((s, t))
    assign = [0] * A.n

    def rec(i):
        if i == A.n:
            return True
        for b in cands[i]:
            assign[i] = b
            if all(tuple(assign[x] for x in t) in B.relations.get(s, ()) for s, t in checks[i]):
                if rec(i + 1):
                    return True
        return False

    return Homomorphism(tuple(assign)) if rec(0) else None


def all_maps_homomorphisms(A, B):
    """Every homomorphism by exhaustive enumeration of all maps (test oracle)."""
    A, B = _as_structure(A), _as_structure(B)
    for h in itertools.product(range(B.n), repeat=A.n):
        if is_homomorphism(h, A, B):
            yield h


def homomorphically_equivalent(A, B) -> bool:
    return find_homomorphism(A, B) is not None and find_homomorphism(B, A) is not None


def core(A: FiniteStructure) -> FiniteStructure:
    """Minimum-size retract: fold away elements while a non-injective endomorphism exists."""
    A = _as_structure(A)
    changed = True
    while changed:
        changed = False
        for v in range(A.n):
            others = [b for b in range(A.n) if b != v]
            h = find_homomorphism(A, A, domains=[others] * A.n)
            if h is not None:
                A = A.induced(set(h.map))
                changed = True
                break
    return A


def _union_adjacency(G: FiniteStructure, symbols) -> list[list[int]]:
    succ: list[set[int]] = [set() for _ in range(G.n)]
    for s in symbols:
        if G.signature.arity(s) != 2:
            raise InputError(f"symbol {s!r} is not binary")
        for u, v in G.relations[s]:
            succ[u].add(v)
    return [sorted(x) for x in succ]


def _find_cycle(succ: list[list[int]]) -> bool:
    WHITE, GREY, BLACK = 0, 1, 2
    color = [WHITE] * len(succ)
    for root in range(len(succ)):
        if color[root] != WHITE:
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = GREY
        while stack:
            v, it = stack[-1]
            for w in it:
                if color[w] == GREY:
                    return True
                if color[w] == WHITE:
                    color[w] = GREY
                    stack.append((w, iter(succ[w])))
                    break
            else:
                color[v] = BLACK
                stack.pop()
    return False


def has_closed_directed_walk(G, symbols: Iterable[str]) -> bool:
    """True iff the union digraph of ``symbols`` has a directed cycle (loops count)."""
    G = _as_structure(G)
    symbols = [s for s in symbols if s in G.signature]
    return _find_cycle(_union_adjacency(G, symbols))


@dataclass(frozen=True)
class PathProfile:
    has_directed_cycle: bool
    longest_path: int | None


def longest_paths_from(G, symbol: str = "R") -> list[int]:
    """Length of the longest directed path starting at each vertex (acyclic input)."""
    G = _as_structure(G)
    succ = _union_adjacency(G, [symbol])
    if _find_cycle(succ):
        raise InputError("graph has a directed cycle")
    memo: dict[int, int] = {}
    order = _topological_order(succ)
    for v in reversed(order):
        memo[v] = max((memo[w] + 1 for w in succ[v]), default=0)
    return [memo[v] for v in range(G.n)]


def _topological_order(succ):
    indeg = [0] * len(succ)
    for vs in succ:
        for w in vs:
            indeg[w] += 1
    ready = [v for v in range(len(succ)) if indeg[v] == 0]
    out = []
    while ready:
        v = ready.pop(0)
        out.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    return out


def path_profile(G, symbol: str = "R") -> PathProfile:
    G = _as_structure(G)
    succ = _union_adjacency(G, [symbol])
    if _find_cycle(succ):
        return PathProfile(True, None)
    return PathProfile(False, max(longest_paths_from(G, symbol), default=0))


def transitive_tournament(k: int, symbol: str = "R") -> FiniteStructure:
    return FiniteStructure.digraph(k, [(i, j) for i in range(k) for j in range(i + 1, k)], symbol)


def directed_cycle(k: int, symbol: str = "R") -> FiniteStructure:
    return FiniteStructure.digraph(k, [(i, (i + 1) % k) for i in range(k)], symbol)


# graph files: ``src dst [multiplicity] [symbol]`` per line, ``#`` comments

_INT = re.compile(r"^[0-9]+$")


def parse_graph(text: str, default_symbol: str = "R") -> BagDatabase:
    facts: dict[str, dict[tuple, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 2 or len(parts) > 4:
            raise InputError(f"line {lineno}: expected 'src dst [multiplicity] [symbol]'")
        src, dst, rest = parts[0], parts[1], parts[2:]
        mult, symbol = 1, default_symbol
        if rest and _INT.match(rest[0]):
            mult = int(rest.pop(0))
            if mult < 1:
                raise InputError(f"line {lineno}: multiplicity must be positive")
        if rest:
            symbol = rest.pop(0)
        if rest:
            raise InputError(f"line {lineno}: trailing tokens {rest}")
        table = facts.setdefault(symbol, {})
        table[(src, dst)] = table.get((src, dst), 0) + mult
    sig = Signature.binary(*facts) if facts else Signature.binary(default_symbol)
    return BagDatabase.from_tuples(facts, signature=sig)


def read_graph(path, default_symbol: str = "R") -> BagDatabase:
    return parse_graph(Path(path).read_text(encoding="utf-8"), default_symbol)


def format_graph(db: BagDatabase) -> str:
    lines = []
    for s, t, m in db.facts():
        if len(t) != 2:
            raise InputError("graph files hold binary relations only")
        a, b = (str(db.labels[x]).replace(" ", "_") for x in t)
        lines.append(f"{a} {b} {m} {s}")
    return "\n".join(lines) + ("\n" if lines else "")


def write_graph(db: BagDatabase, path) -> None:
    Path(path).write_text(format_graph(db), encoding="utf-8")
