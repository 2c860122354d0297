"""The OIT gadgets for self-join-free queries whose multigraph has a cycle of length >= 3.

A directed cycle x -> y -> z -> w -> ... -> x is designated with three
consecutive symbols R, S, T (``w = x`` when the cycle is a triangle). The
gadgets psi_R, psi_S, psi_T repeat copies of the query with one atom per
row made crisp; psi combines one copy with Opt of the three. The witness
structure instantiates the optimal patterns of the three gadgets and pins
the shared vertices a, b, c, d.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..errors import InputError, VerificationError
from ..query import Atom as QAtom
from ..query import ConjunctiveQuery, as_ucq, holds, is_connected, is_self_join_free, undirected_cycle
from ..structures import FiniteStructure, Signature, has_closed_directed_walk
from ..vcsp.expression import Atom, Expression, Opt, PPDefinition, Project, Sum
from ..vcsp.relations import ValuedRelation, valued_dual
from ..vcsp.solver import min_cost
from ..vcsp.values import INF

ROLES = ("R", "S", "T")

# rows: (x, y, z, w, starred role); params: free variables
GADGET_ROWS = {
    "R": (("x0", "y0", "x1", "y1"),
          [("x0", "y0", "z0", "w0", "T"),
           ("x1", "y0", "z0", "w1", "R"),
           ("x1", "y1", "z0", "w1", "S")]),
    "S": (("x0", "y0", "y2", "z1"),
          [("x0", "y0", "z0", "w0", "S"),
           ("x0", "y1", "z0", "w0", "R"),
           ("x1", "y1", "z0", "w1", "T"),
           ("x1", "y1", "z1", "w2", "S"),
           ("x1", "y2", "z1", "w2", "R")]),
    "T": (("x0", "y0", "z1", "w3"),
          [("x0", "y0", "z0", "w0", "T"),
           ("x1", "y0", "z0", "w1", "R"),
           ("x1", "y1", "z0", "w1", "S"),
           ("x1", "y1", "z1", "w2", "T"),
           ("x2", "y1", "z1", "w3", "R")]),
}

# the two optimal violation patterns of each gadget
VIOLATIONS = {
    ("R", 0): (("R", "x0", "y0"), ("T", "z0", "w1")),
    ("R", 1): (("S", "y0", "z0"), ("R", "x1", "y1")),
    ("S", 0): (("R", "x0", "y0"), ("S", "y1", "z0"), ("T", "z1", "w2")),
    ("S", 1): (("T", "z0", "w0"), ("R", "x1", "y1"), ("S", "y2", "z1")),
    ("T", 0): (("R", "x0", "y0"), ("T", "z0", "w1"), ("S", "y1", "z1")),
    ("T", 1): (("S", "y0", "z0"), ("R", "x1", "y1"), ("T", "z1", "w3")),
}

# alternating atom pairs implied by Opt of each gadget
ALTERNATION = {
    "R": (("R", "x0", "y0"), ("R", "x1", "y1")),
    "S": (("R", "x0", "y0"), ("S", "y2", "z1")),
    "T": (("R", "x0", "y0"), ("T", "z1", "w3")),
}

CLAIMED_OPTIMA = {"R": 3, "S": 5, "T": 5, "psi": 1}


@dataclass(frozen=True)
class CycleDecomposition:
    query: ConjunctiveQuery          # reoriented so the cycle is directed
    flipped: tuple                   # symbols whose direction was reversed
    symbols: dict                    # role -> symbol
    x: str
    y: str
    z: str
    w: str                           # equals x when r = 3
    length: int
    mu_c: tuple                      # remaining cycle atoms
    mu_rest: tuple                   # atoms off the cycle

    @property
    def star_atoms(self) -> tuple:
        return self.mu_c + self.mu_rest

    @property
    def cycle_signature(self) -> set:
        return {self.symbols[r] for r in ROLES} | {a.symbol for a in self.mu_c}


@dataclass
class PsiGadgets:
    cycle: CycleDecomposition
    definitions: dict                # "R" | "S" | "T" -> PPDefinition
    rows: dict                       # role -> list of row tuples after unification
    params: dict                     # role -> free variables after unification
    claimed_optima: dict = field(default_factory=lambda: dict(CLAIMED_OPTIMA))

    def gadget(self, role: str) -> Expression:
        """psi_role as an expression over its free variables (locals projected)."""
        d = self.definitions[role]
        return Expression([d.body], d.params)

    def psi_definition(self, certified: dict | None = None) -> PPDefinition:
        return _psi_definition(self, certified or {})

    def psi(self, certified: dict | None = None) -> Expression:
        d = self.psi_definition(certified)
        return Expression([d.body], d.params)

    def orient(self, A: FiniteStructure) -> FiniteStructure:
        """Translate a structure over the original query into the cycle orientation."""
        return _flip(A, self.cycle.flipped)

    def unorient(self, A: FiniteStructure) -> FiniteStructure:
        return _flip(A, self.cycle.flipped)

    def atom_count(self, role: str) -> tuple[int, int]:
        """(occurrences, crisp occurrences) in psi_role."""
        atoms = _atoms_of(self.definitions[role].body)
        return len(atoms), sum(1 for a in atoms if a.crisp)


def _flip(A: FiniteStructure, symbols) -> FiniteStructure:
    if not symbols:
        return A
    rels = {s: ({(v, u) for u, v in ts} if s in symbols else set(ts)) for s, ts in A.relations.items()}
    return FiniteStructure(A.n, rels, signature=A.signature, labels=A.labels)


def _atoms_of(node) -> list:
    if isinstance(node, Atom):
        return [node]
    if isinstance(node, Sum):
        return [a for c in node.children for a in _atoms_of(c)]
    return _atoms_of(node.child)


# ------------------------------------------------------------ decomposition

def decompose_cycle(nu) -> CycleDecomposition:
    """Find an oriented cycle of length >= 3 and orient it as a directed cycle."""
    nu = as_ucq(nu)
    if len(nu) != 1:
        raise InputError("the gadgets are built for a single conjunctive query")
    q = nu[0]
    if not is_self_join_free(nu):
        raise InputError("query has a self-join")
    if not is_connected(q):
        raise InputError("query must be connected")
    cyc = undirected_cycle(q)
    if cyc is None:
        raise InputError("the query's multigraph has no cycle of length >= 3")
    atom_pos = {a: i for i, a in enumerate(q.atoms)}

    def connecting(u, v):
        best = None
        for a in q.atoms:
            if {a.var_from, a.var_to} == {u, v} and a.var_from != a.var_to:
                if best is None or atom_pos[a] < atom_pos[best]:
                    best = a
        return best

    r = len(cyc)
    candidates = []
    for seq in (list(cyc), list(reversed(cyc))):
        for shift in range(r):
            vs = seq[shift:] + seq[:shift]
            edges = [connecting(vs[i], vs[(i + 1) % r]) for i in range(r)]
            flips = sum(1 for i, a in enumerate(edges) if a.var_from != vs[i])
            candidates.append((flips, atom_pos[edges[0]], vs, edges))
    flips, _, vs, edges = min(candidates, key=lambda c: (c[0], c[1]))
    flipped = tuple(sorted(a.symbol for i, a in enumerate(edges) if a.var_from != vs[i]))
    oriented = ConjunctiveQuery([QAtom(a.symbol, a.var_to, a.var_from) if a.symbol in flipped else a
                                 for a in q.atoms])
    edges = [QAtom(a.symbol, a.var_to, a.var_from) if a.symbol in flipped else a for a in edges]
    x, y, z = vs[0], vs[1], vs[2]
    w = vs[3] if r >= 4 else vs[0]
    cycle_atoms = set(edges)
    mu_c = tuple(edges[3:])
    rest = tuple(a for a in oriented.atoms if a not in cycle_atoms)
    symbols = {"R": edges[0].symbol, "S": edges[1].symbol, "T": edges[2].symbol}
    return CycleDecomposition(oriented, flipped, symbols, x, y, z, w, r, mu_c, rest)


# ---------------------------------------------------------------- gadgets

def _unify_rows(rows, params, triangle: bool):
    """For a triangle the closing variable w of every row is the row's x."""
    if not triangle:
        return rows, params, {}
    parent: dict = {}

    def find(v):
        while parent.get(v, v) != v:
            v = parent[v]
        return v

    for x, _, _, w, _ in rows:
        a, b = find(w), find(x)
        if a != b:
            # keep x-names as representatives
            if a.startswith("x"):
                parent[b] = a
            else:
                parent[a] = b
    ren = {v: find(v) for row in rows for v in row[:4]}
    rows = [tuple(ren[v] for v in row[:4]) + (row[4],) for row in rows]
    params = tuple(ren.get(p, p) for p in params)
    return rows, params, ren


def _star_copy(cyc: CycleDecomposition, pins: dict, tag: str, crisp: bool) -> list:
    """Atoms of mu* with x,y,z,w pinned and every other variable fresh (``tag`` prefixed)."""
    out = []
    for a in cyc.star_atoms:
        args = tuple(pins[v] if v in pins else f"{tag}.{v}" for v in (a.var_from, a.var_to))
        out.append(Atom(a.symbol, args, crisp))
    return out


def _row_pins(cyc: CycleDecomposition, row) -> dict:
    x, y, z, w = row[:4]
    pins = {cyc.x: x, cyc.y: y, cyc.z: z}
    if cyc.length >= 4:
        pins[cyc.w] = w
    return pins


def build_psi_gadgets(nu) -> PsiGadgets:
    cyc = decompose_cycle(nu)
    triangle = cyc.length == 3
    definitions, rows_out, params_out = {}, {}, {}
    for role, (params, rows) in GADGET_ROWS.items():
        rows, params, _ = _unify_rows(rows, params, triangle)
        body = []
        for i, row in enumerate(rows):
            x, y, z, w, star = row
            for r, (u, v) in zip(ROLES, ((x, y), (y, z), (z, w))):
                body.append(Atom(cyc.symbols[r], (u, v), r == star))
            body.extend(_star_copy(cyc, _row_pins(cyc, row), f"r{i}", True))
        definitions[role] = PPDefinition(params, Sum(tuple(body)))
        rows_out[role], params_out[role] = rows, params
    return PsiGadgets(cyc, definitions, rows_out, params_out)


def _psi_definition(g: PsiGadgets, certified: dict) -> PPDefinition:
    cyc = g.cycle
    S = cyc.symbols
    x, y, z = "x", "y", "z"
    w = "w" if cyc.length >= 4 else "x"
    body = [Atom(S["R"], (x, y)), Atom(S["S"], (y, z)), Atom(S["T"], (z, w))]
    pins = {cyc.x: x, cyc.y: y, cyc.z: z}
    if cyc.length >= 4:
        pins[cyc.w] = w
    body.extend(_star_copy(cyc, pins, "c", True))
    counter = itertools.count()

    def fresh():
        return f"g{next(counter)}"

    args = {"R": ("xR", "yR", x, y), "S": ("xS", "yS", y, z), "T": ("xT", "yT", z, w)}
    for role in ROLES:
        inst = g.definitions[role].instantiate(args[role], fresh)
        body.append(Opt(inst, certified.get(role)))
    return PPDefinition(("xR", "yR", "xS", "yS", "xT", "yT"), Sum(tuple(body)))


# -------------------------------------------------------- witness structure

@dataclass
class WitnessStructureA:
    structure: FiniteStructure
    designated: dict                  # name -> element index
    items: list                       # per item: (label, positive facts, negated facts)
    no_closed_walk: bool              # M restricted to {R,S,T} and the cycle symbols
    closed_walk: tuple | None         # element labels of a closed walk when one exists
    query_fails: bool                 # the query is false on the structure

    def element(self, name) -> int:
        return self.designated[name]


def _pattern_atoms(g: PsiGadgets, role: str, which: int | None, present_roles=None):
    """Positive and negated atoms of an optimal pattern over the gadget variables."""
    cyc = g.cycle
    rows = g.rows[role]
    triangle = cyc.length == 3
    _, _, ren = _unify_rows(GADGET_ROWS[role][1], GADGET_ROWS[role][0], triangle)
    violated = set()
    if which is not None:
        for r, u, v in VIOLATIONS[(role, which)]:
            violated.add((cyc.symbols[r], ren.get(u, u), ren.get(v, v)))
    pos, neg = [], []
    for i, row in enumerate(rows):
        x, y, z, w, _ = row
        for r, (u, v) in zip(ROLES, ((x, y), (y, z), (z, w))):
            key = (cyc.symbols[r], u, v)
            if key in violated:
                neg.append(key)
            elif present_roles is None or r in present_roles:
                pos.append(key)
        for a in _star_copy(cyc, _row_pins(cyc, row), f"r{i}", False):
            pos.append((a.symbol,) + a.args)
    return pos, neg


def build_witness_structure(nu, gadgets: PsiGadgets | None = None) -> WitnessStructureA:
    g = gadgets if gadgets is not None else build_psi_gadgets(nu)
    cyc = g.cycle
    triangle = cyc.length == 3
    names = {}
    for Q in ROLES:
        names[Q] = {"x": f"x{Q}", "y": f"y{Q}", "z": f"z{Q}", "w": f"x{Q}" if triangle else f"w{Q}"}
    items = []
    # (i), (v), (ix): one copy of the query with the Q-atom left out
    copy_rows = {"R": ("S", "T"), "S": ("R", "T"), "T": ("R", "S")}
    pattern_items = {
        "R": [("R", 1, ("a", "b")), ("S", 0, ("c", "d")), ("T", 0, ("c", "d"))],
        "S": [("R", 0, ("c", "d")), ("S", 1, ("a", "b")), ("T", 0, ("c", "d"))],
        "T": [("R", 0, ("c", "d")), ("S", 0, ("c", "d")), ("T", 1, ("a", "b"))],
    }
    roman = iter(["i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi", "xii"])
    for Q in ROLES:
        n = names[Q]
        label = next(roman)
        pos = []
        S = cyc.symbols
        full = {"R": (S["R"], n["x"], n["y"]), "S": (S["S"], n["y"], n["z"]), "T": (S["T"], n["z"], n["w"])}
        for r in copy_rows[Q]:
            pos.append(full[r])
        pins = {cyc.x: n["x"], cyc.y: n["y"], cyc.z: n["z"]}
        if not triangle:
            pins[cyc.w] = n["w"]
        for a in _star_copy(cyc, pins, f"{label}", False):
            pos.append((a.symbol,) + a.args)
        items.append((label, pos, [full[Q]]))
        # pattern items: designated first two params, copy vertices as the last two
        tail = {"R": (n["x"], n["y"]), "S": (n["y"], n["z"]), "T": (n["z"], n["w"])}
        for role, which, head in pattern_items[Q]:
            label = next(roman)
            p, neg = _pattern_atoms(g, role, which)
            params = g.params[role]
            sub = dict(zip(params, head + tail[role]))

            def rn(v, label=label, sub=sub):
                return sub.get(v, f"{label}.{v}")

            pos_i = [(s, rn(u), rn(v)) for s, u, v in p]
            neg_i = [(s, rn(u), rn(v)) for s, u, v in neg]
            items.append((label, pos_i, neg_i))
    # (xiii): relations hold exactly the forced tuples
    elements = ["a", "b", "c", "d"]
    for Q in ROLES:
        for k in ("x", "y", "z", "w"):
            if names[Q][k] not in elements:
                elements.append(names[Q][k])
    for _, pos, neg in items:
        for s, u, v in pos + neg:
            for e in (u, v):
                if e not in elements:
                    elements.append(e)
    idx = {e: i for i, e in enumerate(elements)}
    sig = Signature.binary(*cyc.query.symbols)
    rels = {s: set() for s in sig}
    forced_by: dict = {}
    for label, pos, _ in items:
        for s, u, v in pos:
            t = (idx[u], idx[v])
            rels[s].add(t)
            forced_by.setdefault((s, t), label)
    for label, _, neg in items:
        for s, u, v in neg:
            t = (idx[u], idx[v])
            if t in rels[s]:
                raise VerificationError(
                    f"items ({forced_by[(s, t)]}) and ({label}) conflict on {s}({u},{v})")
    A = FiniteStructure(len(elements), rels, signature=sig, labels=elements)
    walk = None
    if has_closed_directed_walk(A, cyc.cycle_signature):
        walk = tuple(elements[i] for i in closed_walk(A, cyc.cycle_signature))
    fails = not holds(cyc.query, A)
    designated = {e: idx[e] for e in elements[:4 + 4 * 3] if e in idx}
    return WitnessStructureA(A, designated, items, walk is None, walk, fails)


def closed_walk(A: FiniteStructure, symbols) -> list | None:
    """Vertices of some directed cycle in the union digraph, first vertex repeated at the end."""
    succ = [set() for _ in range(A.n)]
    for s in symbols:
        for u, v in A.relations.get(s, ()):
            succ[u].add(v)
    color = [0] * A.n
    for root in range(A.n):
        if color[root]:
            continue
        stack = [(root, iter(sorted(succ[root])))]
        path = [root]
        color[root] = 1
        while stack:
            u, it = stack[-1]
            v = next(it, None)
            if v is None:
                color[u] = 2
                stack.pop()
                path.pop()
            elif color[v] == 1:
                return path[path.index(v):] + [v]
            elif color[v] == 0:
                color[v] = 1
                path.append(v)
                stack.append((v, iter(sorted(succ[v]))))
    return None


# ------------------------------------------------------------ verification

def _pair_constraint(D: FiniteStructure, symbol: str, present: bool) -> ValuedRelation:
    n = D.n
    ts = D.relations[symbol]
    keep = ts if present else [t for t in itertools.product(range(n), repeat=2) if t not in ts]
    return ValuedRelation.crisp(2, n, keep)


def verify_gadget_optima(gadgets: PsiGadgets, target: FiniteStructure, check_alternation: bool = True) -> dict:
    """Minimum costs of the gadgets over the valued dual of ``target``.

    ``target`` is in the cycle orientation (see ``PsiGadgets.orient``).
    """
    cyc = gadgets.cycle
    if holds(cyc.query, target):
        raise InputError("target satisfies the query")
    Gam = valued_dual(target)
    report = {"optima": {}, "lower_bounds": {}, "attained": {}, "alternation": {}}
    certified = {}
    for role in ROLES:
        e = gadgets.gadget(role)
        sol = min_cost(e, Gam, argmin=False)
        v = sol.value
        certified[role] = v
        claim = CLAIMED_OPTIMA[role]
        report["optima"][role] = v
        report["lower_bounds"][role] = v >= claim
        report["attained"][role] = v == claim
        if check_alternation and v is not INF:
            (r1, u1, v1), (r2, u2, v2) = ALTERNATION[role]
            ren = _unify_rows(GADGET_ROWS[role][1], GADGET_ROWS[role][0], cyc.length == 3)[2]
            p = (cyc.symbols[r1], ren.get(u1, u1), ren.get(v1, v1))
            q = (cyc.symbols[r2], ren.get(u2, u2), ren.get(v2, v2))
            ok = True
            for both in (True, False):
                cons = [((p[1], p[2]), _pair_constraint(target, p[0], both)),
                        ((q[1], q[2]), _pair_constraint(target, q[0], both))]
                s2 = min_cost(e, Gam, constraints=cons, within=v, argmin=False)
                if s2.value is not INF:
                    ok = False
            report["alternation"][role] = ok
    if any(certified[r] is INF for r in ROLES):
        report["optima"]["psi"] = INF
        report["lower_bounds"]["psi"] = True
        report["attained"]["psi"] = False
        return report
    psi = gadgets.psi(certified)
    v = min_cost(psi, Gam, argmin=False).value
    report["optima"]["psi"] = v
    report["lower_bounds"]["psi"] = v >= 1
    report["attained"]["psi"] = v == 1
    if check_alternation and v is not INF:
        R = cyc.symbols["R"]
        pairs = [("xR", "yR"), ("xS", "yS"), ("xT", "yT")]
        ok = True
        for pattern in itertools.product((True, False), repeat=3):
            if sum(pattern) == 1:
                continue
            cons = [(pr, _pair_constraint(target, R, b)) for pr, b in zip(pairs, pattern)]
            if min_cost(psi, Gam, constraints=cons, within=v, argmin=False).value is not INF:
                ok = False
        report["alternation"]["psi"] = ok
    report["certified"] = certified
    return report


# ------------------------------------------------------------ OIT reduction

@dataclass
class OITReduction:
    instance: Expression             # over the OIT symbol
    reduced: Expression              # pp-power instance over the valued dual of the target
    artifact: object                 # flattened ReductionArtifact
    certified: dict
    soundness: dict


def oit_satisfying(clauses, variables) -> list[dict]:
    """All assignments making exactly one literal per clause true."""
    out = []
    for bits in itertools.product((False, True), repeat=len(variables)):
        a = dict(zip(variables, bits))
        if all(sum(a[v] for v in c) == 1 for c in clauses):
            out.append(a)
    return out


def oit_reduction(clauses, nu=None, gadgets: PsiGadgets | None = None,
                  target: FiniteStructure | None = None, search_target: bool = True) -> OITReduction:
    """Each boolean variable becomes a pair, each clause an Opt(psi) copy, then flatten at 0.

    ``target`` is in the cycle orientation and defaults to the witness
    structure. Soundness is checked by pinning satisfying assignments to the
    images of (a, b) and (c, d) under a homomorphism from the witness
    structure to the target.
    """
    from .flatten import flatten
    from ..structures import find_homomorphism
    from ..vcsp.expression import PPPowerSpec, pp_reduce

    g = gadgets if gadgets is not None else build_psi_gadgets(nu)
    W = build_witness_structure(None, g)
    if target is None:
        target = W.structure
    if holds(g.cycle.query, target):
        raise InputError("target satisfies the query")
    clauses = [tuple(c) for c in clauses]
    if any(len(c) != 3 for c in clauses):
        raise InputError("OIT clauses have exactly three variables")
    Gam = valued_dual(target)
    cert = {r: min_cost(g.gadget(r), Gam, argmin=False).value for r in ROLES}
    if any(v is INF for v in cert.values()):
        raise InputError(f"gadget optima are infinite on this target: {cert}")
    d = g.psi_definition(cert)
    c_psi = min_cost(Expression([d.body], d.params), Gam, argmin=False).value
    if c_psi is INF:
        raise InputError("psi has infinite cost on this target")
    cert["psi"] = c_psi
    variables = list(dict.fromkeys(v for c in clauses for v in c))
    inst = Expression([Atom("OIT", c) for c in clauses], variables)
    spec = PPPowerSpec(2, {"OIT": PPDefinition(d.params, Opt(d.body, c_psi))})
    reduced = pp_reduce(inst, spec, Gam)
    art = flatten(reduced, 0)
    art.provenance = {"reduction": "oit", "clauses": [list(c) for c in clauses], "certified": {
        k: str(v) for k, v in cert.items()}}

    sat = oit_satisfying(clauses, variables)
    report = {"satisfiable": bool(sat), "threshold": art.threshold,
              "converse": "not machine-checked"}
    if sat:
        h = find_homomorphism(W.structure, target)
        if h is None:
            raise InputError("witness structure does not map to the target")
        a, b, c, dd = (h[W.element(x)] for x in ("a", "b", "c", "d"))
        report["images"] = {"a": a, "b": b, "c": c, "d": dd}
        report["R(a',b')"] = (a, b) in target.relations[g.cycle.symbols["R"]]
        report["R(c',d')"] = (c, dd) in target.relations[g.cycle.symbols["R"]]
        pins = {}
        for v, val in sat[0].items():
            pins[(v, 0)], pins[(v, 1)] = (a, b) if val else (c, dd)
        sol = min_cost(art.expression, Gam, pins=pins, within=art.threshold, argmin=False)
        report["assignment"] = {str(k): v for k, v in sat[0].items()}
        report["sound"] = sol.value is not INF
        report["target_decision"] = report["sound"]
    else:
        report["sound"] = True            # nothing to certify
        if search_target:
            sol = min_cost(art.expression, Gam, within=art.threshold, argmin=False)
            report["target_decision"] = sol.value is not INF
    return OITReduction(inst, reduced, art, cert, report)
