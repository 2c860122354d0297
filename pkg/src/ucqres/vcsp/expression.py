"""Valued expressions: sums of atoms, plus pp-expression trees.

Leaf atoms use target symbols or the builtins ``=`` (crisp equality) and
``⊥`` (unary empty relation). Interior nodes mirror the valued-clone
operators: sum, projection, shift, scaling, Feas and Opt.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import InputError
from .values import INF, Value, format_value, to_value

EQ = "="
BOT = "⊥"
BUILTINS = {EQ: 2, BOT: 1}


class Node:
    """Base class of pp-expression tree nodes."""

    __slots__ = ()

    def free_vars(self) -> tuple:
        raise NotImplementedError

    def rename(self, ren: Mapping) -> "Node":
        raise NotImplementedError


@dataclass(frozen=True)
class Atom(Node):
    symbol: str
    args: tuple
    crisp: bool = False     # starred: stands for Opt(symbol)

    def free_vars(self):
        return tuple(dict.fromkeys(self.args))

    def rename(self, ren):
        return Atom(self.symbol, tuple(ren.get(a, a) for a in self.args), self.crisp)

    def __str__(self):
        star = "*" if self.crisp else ""
        return f"{self.symbol}{star}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Sum(Node):
    children: tuple

    def free_vars(self):
        return tuple(dict.fromkeys(v for c in self.children for v in c.free_vars()))

    def rename(self, ren):
        return Sum(tuple(c.rename(ren) for c in self.children))

    def __str__(self):
        return " + ".join(str(c) for c in self.children) if self.children else "0"


@dataclass(frozen=True)
class Project(Node):
    """Infimum over ``locals``."""

    child: Node
    locals: tuple

    def free_vars(self):
        hidden = set(self.locals)
        return tuple(v for v in self.child.free_vars() if v not in hidden)

    def rename(self, ren):
        inner = {k: v for k, v in ren.items() if k not in set(self.locals)}
        return Project(self.child.rename(inner), self.locals)

    def __str__(self):
        return f"inf[{','.join(map(str, self.locals))}]({self.child})"


@dataclass(frozen=True)
class Shift(Node):
    child: Node
    amount: Fraction

    def free_vars(self):
        return self.child.free_vars()

    def rename(self, ren):
        return Shift(self.child.rename(ren), self.amount)

    def __str__(self):
        return f"({self.child}) + {self.amount}"


@dataclass(frozen=True)
class Scale(Node):
    child: Node
    factor: Fraction

    def __post_init__(self):
        if Fraction(self.factor) < 0:
            raise InputError("scale factor must be non-negative")

    def free_vars(self):
        return self.child.free_vars()

    def rename(self, ren):
        return Scale(self.child.rename(ren), self.factor)

    def __str__(self):
        return f"{self.factor}·({self.child})"


@dataclass(frozen=True)
class Feas(Node):
    child: Node

    def free_vars(self):
        return self.child.free_vars()

    def rename(self, ren):
        return Feas(self.child.rename(ren))

    def __str__(self):
        return f"Feas({self.child})"


@dataclass(frozen=True)
class Opt(Node):
    """Crisp set of minimum-cost tuples of ``child``.

    ``certified_min`` optionally records the child's minimum (required by
    penalty flattening; recomputed and checked by the solver otherwise).
    """

    child: Node
    certified_min: object = None

    def free_vars(self):
        return self.child.free_vars()

    def rename(self, ren):
        return Opt(self.child.rename(ren), self.certified_min)

    def __str__(self):
        return f"Opt({self.child})"


def crisp_atom(symbol: str, *args) -> Atom:
    return Atom(symbol, tuple(args), True)


def atom(symbol: str, *args) -> Atom:
    return Atom(symbol, tuple(args))


def all_vars(node: Node) -> tuple:
    """Free and bound variables in first-occurrence order."""
    out: dict = {}

    def walk(n):
        if isinstance(n, Atom):
            for a in n.args:
                out.setdefault(a, None)
        elif isinstance(n, Sum):
            for c in n.children:
                walk(c)
        else:
            walk(n.child)

    walk(node)
    return tuple(out)


def is_flat(node: Node) -> bool:
    return isinstance(node, Atom) and not node.crisp


def canonical_form(node: Node, free: Sequence | None = None):
    """Hashable form with variables renamed by first occurrence (free ones first)."""
    order: dict = {}
    for v in free if free is not None else node.free_vars():
        order.setdefault(v, len(order))
    for v in all_vars(node):
        order.setdefault(v, len(order))

    def enc(n):
        if isinstance(n, Atom):
            return ("A", n.symbol, n.crisp, tuple(order[a] for a in n.args))
        if isinstance(n, Sum):
            return ("S",) + tuple(enc(c) for c in n.children)
        if isinstance(n, Project):
            return ("P", tuple(order.setdefault(v, len(order)) for v in n.locals), enc(n.child))
        if isinstance(n, Shift):
            return ("H", Fraction(n.amount), enc(n.child))
        if isinstance(n, Scale):
            return ("C", Fraction(n.factor), enc(n.child))
        if isinstance(n, Feas):
            return ("F", enc(n.child))
        if isinstance(n, Opt):
            return ("O", enc(n.child))
        raise InputError(f"unknown node {n!r}")

    return enc(node)


class Expression:
    """Sum of terms with multiplicities, over an ordered variable list.

    Plain atoms are the usual tau-expression occurrences; other terms are
    pp sub-gadgets (Opt/Feas/projection trees) kept symbolic.
    """

    def __init__(self, terms: Iterable = (), variables: Sequence | None = None):
        counts: Counter = Counter()
        for t in terms:
            if isinstance(t, tuple) and len(t) == 2 and isinstance(t[0], Node):
                node, mult = t
            else:
                node, mult = t, 1
            if not isinstance(node, Node):
                raise InputError(f"not an expression term: {node!r}")
            if int(mult) < 1:
                raise InputError("term multiplicity must be >= 1")
            counts[node] += int(mult)
        self.terms: dict[Node, int] = dict(counts)
        occurring: dict = {}
        for node in self.terms:
            for v in node.free_vars():
                occurring.setdefault(v, None)
        if variables is None:
            variables = tuple(occurring)
        else:
            variables = tuple(dict.fromkeys(variables))
            missing = [v for v in occurring if v not in set(variables)]
            if missing:
                raise InputError(f"variables {missing} occur but are not declared")
        self.variables = variables

    @classmethod
    def of(cls, *specs, variables=None) -> "Expression":
        """Shorthand: ``Expression.of(("R", "x", "y"), ("R", "y", "x"))``."""
        return cls([Atom(s[0], tuple(s[1:])) for s in specs], variables)

    def atoms(self):
        """Plain atom occurrences ``(Atom, multiplicity)``."""
        return [(n, m) for n, m in self.terms.items() if is_flat(n)]

    def gadgets(self):
        return [(n, m) for n, m in self.terms.items() if not is_flat(n)]

    def is_flat(self) -> bool:
        return all(is_flat(n) for n in self.terms)

    def as_node(self) -> Node:
        kids = []
        for n, m in self.terms.items():
            kids.append(n if m == 1 else Scale(n, Fraction(m)))
        return Sum(tuple(kids))

    def __add__(self, other: "Expression") -> "Expression":
        terms = list(self.terms.items()) + list(other.terms.items())
        return Expression(terms, tuple(dict.fromkeys(self.variables + other.variables)))

    def __len__(self):
        return sum(self.terms.values())

    def __str__(self):
        parts = []
        for n, m in self.terms.items():
            parts.append(str(n) if m == 1 else f"{m}·{n}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"Expression({self})"

    def to_dict(self) -> dict:
        if not self.is_flat():
            raise InputError("only flat expressions serialize")
        return {
            "variables": [str(v) for v in self.variables],
            "atoms": [{"symbol": n.symbol, "args": [str(a) for a in n.args], "multiplicity": m}
                      for n, m in self.terms.items()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Expression":
        return cls([(Atom(a["symbol"], tuple(a["args"])), a["multiplicity"]) for a in d["atoms"]], d["variables"])


# ------------------------------------------------------------ pp definitions

@dataclass(frozen=True)
class PPDefinition:
    """A tree whose free variables are ``params``; other variables are local."""

    params: tuple
    body: Node

    def __post_init__(self):
        extra = [v for v in self.body.free_vars() if v not in set(self.params)]
        if extra:
            # free variables beyond the parameters are implicitly projected away
            object.__setattr__(self, "body", Project(self.body, tuple(extra)))

    def instantiate(self, args: Sequence, fresh) -> Node:
        """Substitute ``args`` for the parameters; locals get names from ``fresh()``."""
        if len(args) != len(self.params):
            raise InputError(f"expected {len(self.params)} arguments, got {len(args)}")
        ren = dict(zip(self.params, args))
        for v in all_vars(self.body):
            if v not in ren:
                ren[v] = fresh()
        return _rename_all(self.body, ren)


def _rename_all(n: Node, ren: Mapping) -> Node:
    if isinstance(n, Atom):
        return Atom(n.symbol, tuple(ren[a] for a in n.args), n.crisp)
    if isinstance(n, Sum):
        return Sum(tuple(_rename_all(c, ren) for c in n.children))
    if isinstance(n, Project):
        return Project(_rename_all(n.child, ren), tuple(ren[v] for v in n.locals))
    if isinstance(n, Shift):
        return Shift(_rename_all(n.child, ren), n.amount)
    if isinstance(n, Scale):
        return Scale(_rename_all(n.child, ren), n.factor)
    if isinstance(n, Feas):
        return Feas(_rename_all(n.child, ren))
    if isinstance(n, Opt):
        return Opt(_rename_all(n.child, ren), n.certified_min)
    raise InputError(f"unknown node {n!r}")


@dataclass(frozen=True)
class PPPowerSpec:
    """d-th pp-power: each target symbol of arity k gets a definition with k*d params."""

    dimension: int
    definitions: Mapping[str, PPDefinition]
    arities: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension < 1:
            raise InputError("pp-power dimension must be >= 1")
        ar = dict(self.arities)
        for s, d in self.definitions.items():
            if len(d.params) % self.dimension:
                raise InputError(f"definition of {s} has {len(d.params)} params, not a multiple of {self.dimension}")
            k = len(d.params) // self.dimension
            if ar.setdefault(s, k) != k:
                raise InputError(f"arity mismatch for {s}")
        object.__setattr__(self, "arities", ar)


def _check_symbols(node: Node, signature) -> None:
    if isinstance(node, Atom):
        if node.symbol in BUILTINS:
            if len(node.args) != BUILTINS[node.symbol]:
                raise InputError(f"builtin {node.symbol} takes {BUILTINS[node.symbol]} arguments")
        elif node.symbol not in signature:
            raise InputError(f"symbol {node.symbol!r} not in the source structure")
        elif signature.arity(node.symbol) != len(node.args):
            raise InputError(f"arity mismatch for {node.symbol}")
        return
    for c in (node.children if isinstance(node, Sum) else (node.child,)):
        _check_symbols(c, signature)


def pp_reduce(e: Expression, spec: PPPowerSpec, gamma) -> Expression:
    """Replace each atom by its definition instance; variables become d-tuples.

    Variable ``v`` of ``e`` becomes ``(v, 0) .. (v, d-1)``; locals are named
    ``("_l", k)``. Multiplicities become scaling.
    """
    for d in spec.definitions.values():
        _check_symbols(d.body, gamma.signature)
    counter = itertools.count()

    def fresh():
        return ("_l", next(counter))

    d = spec.dimension
    terms = []
    for node, mult in e.terms.items():
        if not is_flat(node):
            raise InputError("pp_reduce expects a plain tau-expression")
        if node.symbol in BUILTINS:
            if node.symbol == EQ:
                inst = Sum(tuple(Atom(EQ, ((node.args[0], i), (node.args[1], i))) for i in range(d)))
            else:
                inst = Atom(BOT, ((node.args[0], 0),))
        else:
            if node.symbol not in spec.definitions:
                raise InputError(f"no definition for symbol {node.symbol!r}")
            if spec.arities[node.symbol] != len(node.args):
                raise InputError(f"arity mismatch for {node.symbol}")
            args = [(v, i) for v in node.args for i in range(d)]
            inst = spec.definitions[node.symbol].instantiate(args, fresh)
        terms.append((inst, mult))
    variables = [(v, i) for v in e.variables for i in range(d)]
    flat_terms = []
    for inst, mult in terms:
        for piece in _flatten_sums(inst):
            flat_terms.append((piece, mult))
    # lifted locals follow the declared variables
    for piece, _ in flat_terms:
        variables.extend(v for v in piece.free_vars() if v not in variables)
    return Expression(flat_terms, variables)


def _flatten_sums(n: Node):
    if isinstance(n, Sum):
        for c in n.children:
            yield from _flatten_sums(c)
    elif isinstance(n, Project) and isinstance(n.child, Sum):
        # top-level projection: locals are fresh, so the infimum distributes
        # into the global minimization; keep the pieces as separate terms
        for c in n.child.children:
            yield from _flatten_sums(c)
    elif isinstance(n, Project):
        yield from _flatten_sums(n.child)
    else:
        yield n


def expression_value_repr(v: Value) -> str:
    return format_value(v)


def parse_cost(x) -> Value:
    return to_value(x)
