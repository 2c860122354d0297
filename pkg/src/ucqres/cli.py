"""Command-line front end: classify, solve, reduce and verify.

Exit codes:
  0   success / decision "yes" / every check passed
  1   decision "no" / a verification check failed (the first failure is named)
  2   usage, parse, I/O or guard errors
  10  classify: resilience is polynomial
  11  classify: resilience is NP-complete

Every command prints a JSON run report. Its "body" (command, inputs digest,
seed, results) is byte-identical for identical inputs and seed; the wall time
sits outside the body.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from pathlib import Path

from .classify import classify
from .errors import InputError, VerificationError
from .query import (QuerySyntaxError, apply_map, as_ucq, factorize_self_joins, format_ucq, holds,
                    parse_ucq)
from .resilience import resilience
from .structures import BagDatabase, FiniteStructure, Signature, format_graph, parse_graph

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PTIME, EXIT_NPC = 0, 1, 2, 10, 11


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ----------------------------------------------------------------- helpers

class Run:
    """Collects input digests and assembles the run report."""

    def __init__(self, argv, seed):
        self.argv = list(argv)
        self.seed = seed
        self.rng = random.Random(seed)
        self.digest = hashlib.sha256()
        self.start = time.perf_counter()

    def read(self, path) -> str:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from exc
        self.digest.update(Path(path).name.encode() + b"\0" + text.encode() + b"\0")
        return text

    def report(self, results) -> dict:
        body = {"command": self.argv, "inputs_sha256": self.digest.hexdigest(),
                "seed": self.seed, "results": results}
        return {"body": body, "wall_time_s": round(time.perf_counter() - self.start, 6)}


def _query(run: Run, path):
    if path is None:
        raise UsageError("a query file is required (-q/--query)")
    return parse_ucq(run.read(path))


def _graph(run: Run, path) -> BagDatabase:
    if path is None:
        raise UsageError("a graph file is required (-g/--graph)")
    return parse_graph(run.read(path))


def _structure(db: BagDatabase, symbols) -> FiniteStructure:
    extra = set(db.signature) - set(symbols)
    if extra:
        raise InputError(f"structure uses symbols {sorted(extra)} outside {sorted(symbols)}")
    return db.support().with_signature(Signature.binary(*sorted(symbols)))


def _dual(run: Run, spec, validate_up_to: int = 0):
    from .gadgets.duals import USER, DualCandidate, builtin_dual_for_path
    if spec is None:
        raise UsageError("--dual path:K|FILE is required")
    if spec.startswith("path:"):
        try:
            k = int(spec[5:])
        except ValueError:
            raise UsageError(f"bad dual spec {spec!r}") from None
        return builtin_dual_for_path(k, validate_up_to=validate_up_to or 0)
    D = _structure(_graph(run, spec), {"R"})
    return DualCandidate(D, USER, 0, None)


def _edges(db: BagDatabase) -> list:
    return [[db.labels[t[0]], db.labels[t[1]], m, s] for s, t, m in db.facts()]


def _emit(report: dict, json_path) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, default=str)
    print(text)
    if json_path:
        Path(json_path).write_text(text + "\n", encoding="utf-8")


# ---------------------------------------------------------------- commands

def cmd_classify(args, run):
    path = args.query_file or args.query
    v = classify(_query(run, path))
    return v.to_dict(), EXIT_PTIME if v.is_ptime else EXIT_NPC


def cmd_solve(args, run):
    mu = _query(run, args.query)
    db = _graph(run, args.graph)
    res = resilience(db, mu, args.method)
    out = res.to_dict(db)
    if set(as_ucq(mu).symbols) <= {"R"}:
        out["verdict"] = str(classify(mu))
    if args.u is None:
        return out, EXIT_OK
    out["threshold"] = args.u
    out["decision"] = res.value <= args.u
    return out, EXIT_OK if out["decision"] else EXIT_FAIL


def _reduce_maxcut(args, run):
    from .gadgets.maxcut import maxcut_maps, maxcut_reduction
    if args.t is None:
        raise UsageError("reduce maxcut needs -t")
    G = _graph(run, args.graph)
    D = _dual(run, args.dual)
    maps = maxcut_maps(D)
    if not maps.ok:
        raise VerificationError(f"dual candidate fails the max-cut maps: {maps.failures[0]}")
    art = maxcut_reduction(G, args.t, D)
    query = format_ucq(D.query) if D.query is not None else None
    if args.query:
        query = format_ucq(_query(run, args.query))
    art.provenance["source"] = {
        "graph": _edges(G), "t": args.t, "query": query,
        "dual": {"n": D.structure.n, "edges": sorted(map(list, D.structure.relations["R"]))},
    }
    return art


def _reduce_oit(args, run):
    from .gadgets.psi import build_psi_gadgets, oit_reduction
    nu = _query(run, args.query)
    if args.clauses is None:
        raise UsageError("reduce oit needs --clauses FILE")
    clauses = []
    for lineno, line in enumerate(run.read(args.clauses).splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        c = line.replace(",", " ").split()
        if len(c) != 3:
            raise InputError(f"{args.clauses}:{lineno}: a clause has exactly three variables")
        clauses.append(tuple(c))
    g = build_psi_gadgets(nu)
    target = None
    if args.target:
        target = g.orient(_structure(_graph(run, args.target), set(nu.symbols)))
    red = oit_reduction(clauses, gadgets=g, target=target)
    art = red.artifact
    art.provenance["source"] = {"query": format_ucq(nu), "clauses": [list(c) for c in clauses],
                                "target": None if target is None else _edges(BagDatabase.from_structure(
                                    g.unorient(target)))}
    art.provenance["soundness"] = red.soundness
    return art


def _reduce_sjlift(args, run):
    from .gadgets.selfjoin import self_join_lift
    mu = _query(run, args.query)
    if args.map:
        f = {}
        for part in args.map.split(","):
            k, _, v = part.partition("=")
            if not k.strip() or not v.strip():
                raise UsageError(f"bad --map entry {part!r}, expected S=R")
            f[k.strip()] = v.strip()
        nu = mu
    else:
        nu, f = factorize_self_joins(mu)
    db = _graph(run, args.graph)
    stray = set(db.signature) - set(nu.symbols)
    if stray:
        raise InputError(f"database symbols {sorted(stray)} do not occur in {format_ucq(nu)}")
    lifted = self_join_lift(db, nu, f)
    return lifted, {"reduction": "sjlift", "query": format_ucq(nu), "map": dict(f),
                    "image_query": format_ucq(apply_map(f, nu)),
                    "source": {"graph": _edges(db)}}


def cmd_reduce(args, run):
    if not args.out:
        raise UsageError("reduce needs -o/--out GRAPH")
    if args.kind == "sjlift":
        lifted, side = _reduce_sjlift(args, run)
        out = Path(args.out)
        out.write_text(format_graph(lifted), encoding="utf-8")
        side_path = out.with_suffix(".json")
        side_path.write_text(json.dumps(side, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return {"graph": str(out), "sidecar": str(side_path), "elements": lifted.n,
                "tuples": lifted.total()}, EXIT_OK
    art = _reduce_maxcut(args, run) if args.kind == "maxcut" else _reduce_oit(args, run)
    gpath, spath = art.write(args.out)
    res = {"graph": str(gpath), "sidecar": str(spath), "threshold": art.threshold,
           "baseline": art.baseline, "elements": art.db.n, "tuples": art.db.total()}
    if "soundness" in art.provenance:
        res["soundness"] = art.provenance["soundness"]
        if art.provenance["soundness"].get("sound") is False:
            return res, EXIT_FAIL
    return res, EXIT_OK


# ------------------------------------------------------------------ verify

def _first_failure(checks: dict):
    for name, ok in checks.items():
        if ok is not True:
            return name
    return None


def _verify_gadgets(args, run):
    from .gadgets.psi import build_psi_gadgets, build_witness_structure, verify_gadget_optima
    nu = _query(run, args.query)
    g = build_psi_gadgets(nu)
    W = build_witness_structure(None, g)
    checks = {"query fails on witness structure": W.query_fails}
    if args.target:
        T = g.orient(_structure(_graph(run, args.target), set(nu.symbols)))
        rep = verify_gadget_optima(g, T, check_alternation=False)
        for k, ok in rep["lower_bounds"].items():
            checks[f"lower bound {k}"] = ok
    else:
        rep = verify_gadget_optima(g, W.structure, check_alternation=not args.skip_alternation)
        for k, v in rep["optima"].items():
            checks[f"optimum {k} = {g.claimed_optima[k]}"] = v == g.claimed_optima[k]
        for k, ok in rep["alternation"].items():
            checks[f"alternation {k}"] = ok
    results = {
        "optima": {k: str(v) for k, v in rep["optima"].items()},
        # reported, not gated on: see README
        "closed_walk_in_witness": list(W.closed_walk) if W.closed_walk else None,
    }
    return results, checks


def _verify_polymorphism(args, run):
    from .gadgets.tournament import tournament_polymorphism_check
    rep = tournament_polymorphism_check(seed=args.seed)
    checks = {f"edge type {'/'.join(c['inputs'])}": c["holds"] for c in rep["cases"]}
    checks["T_majo is a tournament"] = rep["majo_tournament"]
    checks["T_mino is a tournament"] = rep["mino_tournament"]
    results = {"passed_cases": rep["passed_cases"], "total_cases": rep["total_cases"],
               "pairs": rep["pairs"], "problems": rep["problems"], "failed": rep["failed"]}
    return results, checks


def _verify_dual(args, run):
    from .gadgets.duals import validate_dual
    D = _dual(run, args.dual)
    mu = _query(run, args.query) if args.query else D.query
    if mu is None:
        raise UsageError("verify dual with a file dual needs -q")
    rep = validate_dual(D.structure, mu, args.size)
    checks = {"query fails on the dual": rep.query_fails_on_dual,
              f"duality up to {args.size} vertices": rep.passed}
    return rep.to_dict(), checks


def _verify_artifact(args, run):
    from .gadgets.maxcut import maxcut_brute
    from .vcsp import INF, min_cost, resilience_to_vcsp, valued_dual
    if args.graph is None:
        raise UsageError("verify artifact needs -g GRAPH (sidecar next to it)")
    db = _graph(run, args.graph)
    side_path = Path(args.sidecar) if args.sidecar else Path(args.graph).with_suffix(".json")
    side = json.loads(run.read(side_path))
    kind = side.get("reduction")
    src = side.get("source", {})
    checks = {}
    results = {"reduction": kind}
    if kind == "maxcut":
        G = parse_graph("\n".join(f"{a} {b} {m} {s}" for a, b, m, s in src["graph"]))
        t = src["t"]
        D = FiniteStructure(src["dual"]["n"], {"R": [tuple(e) for e in src["dual"]["edges"]]})
        want = maxcut_brute(G, t)
        sol = min_cost(resilience_to_vcsp(db), valued_dual(D), within=side["threshold"], argmin=False)
        got = sol.value is not INF
        results.update({"maxcut_decision": want, "vcsp_decision": got})
        checks["vcsp decision matches max-cut"] = want == got
        if src.get("query"):
            r = resilience(db, parse_ucq(src["query"]), "brute" if db.distinct_count() <= 24 else "exact")
            results["resilience"] = r.value
            checks["resilience decision matches max-cut"] = (r.value <= side["threshold"]) == want
    elif kind == "oit":
        from .gadgets.psi import build_psi_gadgets, build_witness_structure, oit_satisfying
        nu = parse_ucq(src["query"])
        g = build_psi_gadgets(nu)
        if src.get("target"):
            tdb = parse_graph("\n".join(f"{a} {b} {m} {s}" for a, b, m, s in src["target"]))
            T = g.orient(_structure(tdb, set(nu.symbols)))
        else:
            T = build_witness_structure(None, g).structure
        clauses = [tuple(c) for c in src["clauses"]]
        variables = list(dict.fromkeys(v for c in clauses for v in c))
        sat = bool(oit_satisfying(clauses, variables))
        sol = min_cost(resilience_to_vcsp(db), valued_dual(T), within=side["threshold"], argmin=False)
        got = sol.value is not INF
        results.update({"satisfiable": sat, "target_decision": got})
        # only satisfiable => yes is machine-checked; the converse is not claimed here
        checks["satisfiable instance decides yes"] = got or not sat
    elif kind == "sjlift":
        nu = parse_ucq(side["query"])
        image = apply_map(side["map"], nu)
        src_db = parse_graph("\n".join(f"{a} {b} {m} {s}" for a, b, m, s in src["graph"]))
        checks["holds preserved"] = holds(nu, src_db) == holds(image, db)
        a = resilience(src_db, nu, "exact").value
        b = resilience(db, image, "exact").value
        results.update({"source_resilience": a, "lifted_resilience": b})
        checks["resilience preserved"] = a == b
    else:
        raise InputError(f"sidecar names no known reduction: {kind!r}")
    return results, checks


def cmd_verify(args, run):
    fn = {"gadgets": _verify_gadgets, "polymorphism": _verify_polymorphism,
          "dual": _verify_dual, "artifact": _verify_artifact}[args.kind]
    results, checks = fn(args, run)
    failed = _first_failure(checks)
    results["checks"] = checks
    results["checks_passed"] = sum(1 for v in checks.values() if v is True)
    results["checks_total"] = len(checks)
    results["first_failure"] = failed
    if failed is not None:
        print(f"verification failed: {failed}", file=sys.stderr)
        return results, EXIT_FAIL
    return results, EXIT_OK


# -------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-q", "--query", metavar="FILE", help="query file (.ucq)")
    common.add_argument("-g", "--graph", metavar="FILE", help="graph file: 'src dst [mult] [symbol]' per line")
    common.add_argument("--seed", type=int, default=0, help="seed for generated suites (default 0)")
    common.add_argument("--json", metavar="PATH", help="also write the run report here")

    p = _Parser(prog="ucqres", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="classify resilience of a query")
    c.add_argument("query_file", nargs="?", help="query file (alternative to -q)")

    s = sub.add_parser("solve", parents=[common], help="compute resilience of a database")
    s.add_argument("-u", type=int, default=None, metavar="N", help="decide: resilience <= N (exit 0/1)")
    s.add_argument("--method", choices=("auto", "poly", "exact", "brute"), default="auto")

    r = sub.add_parser("reduce", parents=[common], help="build a reduction artifact")
    r.add_argument("kind", choices=("maxcut", "oit", "sjlift"))
    r.add_argument("-t", type=int, default=None, metavar="N", help="max-cut threshold")
    r.add_argument("--dual", metavar="path:K|FILE", help="finite dual for maxcut")
    r.add_argument("--clauses", metavar="FILE", help="OIT clauses, three variables per line")
    r.add_argument("--target", metavar="FILE", help="OIT target structure (default: witness structure)")
    r.add_argument("--map", metavar="S=R,...", help="sjlift symbol map (default: factorize the query)")
    r.add_argument("-o", "--out", metavar="GRAPH", help="artifact graph path; sidecar gets .json")

    v = sub.add_parser("verify", parents=[common], help="machine-check a construction")
    v.add_argument("kind", choices=("gadgets", "polymorphism", "dual", "artifact"))
    v.add_argument("--dual", metavar="path:K|FILE")
    v.add_argument("--target", metavar="FILE", help="gadgets: check lower bounds over this target")
    v.add_argument("--size", type=int, default=4, help="dual: largest digraph size checked")
    v.add_argument("--sidecar", metavar="FILE")
    v.add_argument("--skip-alternation", action="store_true", help="gadgets: only check the optima")
    return p


COMMANDS = {"classify": cmd_classify, "solve": cmd_solve, "reduce": cmd_reduce, "verify": cmd_verify}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:          # --help
        return int(exc.code or 0)
    run = Run(argv, args.seed)
    try:
        results, code = COMMANDS[args.command](args, run)
    except QuerySyntaxError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(run.report(results), args.json)
    return code


if __name__ == "__main__":
    sys.exit(main())
