"""``hypquot`` command line.

Every subcommand writes one JSON report (``--out`` or stdout).  Exit codes:
0 ok, 1 a checked inequality was violated, 2 usage error, 3 resource or
convergence failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__, certify
from .chains import Chain, decompose, lp_norm
from .errors import (
    EpsilonSearchError,
    GraphError,
    HypquotError,
    ResourceError,
    UnsupportedOperationError,
)
from .graph import read_graph, write_graph
from .groups import GroupSpec, cayley_ball
from .hyperbolicity import build_visual_metric, four_point_delta, suggest_epsilon
from .lp_flow import min_norm_flow, quotient_norm_l1

SCHEMA_VERSION = 1
STATEMENTS = ("2.4", "2.5", "2.6", "2.7", "2.9")

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(HypquotError):
    pass


class ConvergenceError(HypquotError):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


# input -----------------------------------------------------------------------------

def _load_graph(args):
    if args.graph:
        return read_graph(args.graph)
    if args.radius is None:
        raise UsageError("--group needs --radius")
    return cayley_ball(GroupSpec.parse(args.group, args.radius))


def _vertex(g, token):
    token = token.strip()
    if token.isdigit():
        return g.check_vertex(int(token))
    if not g.is_cayley:
        raise UsageError(f"{token!r} is not a vertex id and the graph carries no labels")
    return g.vertex_of(token)


def _input_config(args):
    if args.graph:
        return {"graph_file": args.graph}
    return {"group": args.group, "radius": args.radius}


def _pairs(g, count, rng):
    n = g.vertex_count
    if n < 2:
        return []
    total = n * (n - 1) // 2
    if total <= count:
        return [(x, y) for x in range(n) for y in range(x + 1, n)]
    out = set()
    while len(out) < count:
        x, y = (int(v) for v in rng.choice(n, 2, replace=False))
        out.add((min(x, y), max(x, y)))
    return sorted(out)


# subcommands --------------------------------------------------------------------------
# each returns (result dict, violated flag, csv rows or None)

def cmd_graph(g, args):
    if args.write:
        write_graph(g, args.write)
    res = {
        "vertex_count": g.vertex_count,
        "edge_count": g.edge_count,
        "degree_bound": g.degree_bound,
        "cycle_rank": g.cycle_rank,
        "is_tree": g.is_tree(),
        "group": repr(g.group) if g.group is not None else None,
    }
    return res, False, None


def cmd_delta(g, args):
    est = four_point_delta(g, args.mode, samples=args.samples, seed=args.seed, cap=args.cap)
    return {"delta": est.delta, "exact": est.exact, "lower_bound": est.is_lower_bound,
            "witness": list(est.witness) if est.witness else None,
            "samples": est.samples}, False, None


def cmd_visual(g, args):
    delta = four_point_delta(g, "exact" if g.vertex_count <= args.cap or g.is_tree()
                             else "sampled", seed=args.seed).delta
    if args.epsilon is None:
        eps, worst = suggest_epsilon(g, delta, args.C_cap)
    else:
        eps, worst = args.epsilon, None
    vm = build_visual_metric(g, _vertex(g, args.center), eps)
    rows = None
    if args.csv:
        rows = [["x", "y", "d_t", "rho"]] + [
            [x, y, float(vm.values[x, y]), float(vm.rho[x, y])]
            for x in range(g.vertex_count) for y in range(g.vertex_count)]
    return {"delta": delta, "epsilon": eps, "suggested_worst_C": worst,
            "center": vm.center, "sandwich_C": vm.sandwich_C}, False, rows


def cmd_norm(g, args):
    x, y = _vertex(g, args.source), _vertex(g, args.sink)
    if args.p == 1:
        d, chain = quotient_norm_l1(g, x, y)
        return {"x": x, "y": y, "p": 1.0, "value": float(d), "distance": d,
                "chain": chain.to_triples()}, False, None
    if x == y:
        return {"x": x, "y": y, "p": args.p, "value": 0.0, "distance": 0}, False, None
    sol = min_norm_flow(g, x, y, args.p, tol=args.tol, max_iter=args.max_iter)
    res = sol.to_dict()
    res["distance"] = int(g.distances_from(x)[y])
    if not sol.converged:
        raise ConvergenceError(f"solver stopped at kkt residual {sol.kkt_residual:.3e} "
                               f"after {sol.iterations} iterations")
    return res, False, None


def cmd_decompose(g, args):
    with open(args.chain) as fh:
        text = fh.read()
    exact = args.exact
    if text.lstrip().startswith("[") or text.lstrip().startswith("{"):
        c = Chain.from_json(g, text, exact=exact)
    else:
        triples = []
        for line in text.splitlines():
            line = line.split("#")[0].strip()
            if line:
                u, v, w = line.split()
                triples.append((int(u), int(v), w))
        c = Chain.from_triples(g, triples, exact=exact)
    dec = decompose(c)
    num = (lambda v: str(v)) if exact else float
    l1a, l1b = dec.l1_sides(g)
    res = {
        "source": dec.source, "sink": dec.sink, "iterations": dec.iterations,
        "alpha_sum": num(dec.alpha_sum),
        "path_terms": [{"weight": num(t.weight), "vertices": list(t.vertices)}
                       for t in dec.path_terms],
        "cycle_terms": [{"weight": num(t.weight), "vertices": list(t.vertices)}
                        for t in dec.cycle_terms],
        "l1_norm": num(lp_norm(c, 1)),
        "l1_sides": [num(l1a), num(l1b)],
    }
    return res, False, None


def _constants(g, args):
    return certify.measure_constants(g, C_cap=args.C_cap, seed=args.seed)


def cmd_certify(g, args):
    rng = np.random.default_rng(args.seed)
    pc = _constants(g, args)
    wanted = STATEMENTS if args.statement == "all" else (args.statement,)
    reports = {}
    if "2.4" in wanted:
        reports["2.4"] = certify.verify_lemma_2_4(g, pc.delta, samples=args.samples,
                                                  seed=args.seed)
    if "2.5" in wanted:
        r = certify.verify_lemma_2_5(g, pc.epsilon, pc.C, samples=args.samples,
                                     delta=pc.delta, seed=args.seed)
        if g.vertex_count <= args.cap:
            r = r.merge(certify.verify_gromov_neighbor_bounds(g))
        reports["2.5"] = r
    if "2.6" in wanted:
        paths = [certify.detour_path(g, rng) for _ in range(args.paths)]
        reports["2.6"] = certify.verify_prop_2_6_pipeline(
            g, pc.epsilon, pc.C, pc.delta, paths, pc.delta1, pc.delta2, workers=args.workers)
    if "2.7" in wanted:
        chains = []
        for x, y in _pairs(g, args.pairs, rng)[: max(1, args.pairs // 4)]:
            chains.append((min_norm_flow(g, x, y, args.p, tol=args.tol).chain, x, y))
        reports["2.7"] = certify.verify_cor_2_7(g, pc.epsilon, chains, pc.beta_formula)
    if "2.9" in wanted:
        r, _ = certify.verify_prop_2_9(g, args.p, pc, _pairs(g, args.pairs, rng),
                                       workers=args.workers, tol=args.tol)
        if r.measured.get("unconverged"):
            reports["2.9"] = r
            raise ConvergenceError(f"{r.measured['unconverged']} solves did not converge")
        reports["2.9"] = r
    out = {k: v.to_dict() for k, v in reports.items()}
    violated = any(v.violations for v in reports.values())
    ledger = pc.to_dict()
    if "2.9" in reports:
        ledger = reports["2.9"].measured["constants"]
    return {"statements": out, "constants": ledger}, violated, None


def cmd_profile(g, args):
    rows = certify.properness_profile(g, args.p, _vertex(g, args.basepoint),
                                      workers=args.workers, tol=args.tol)
    mins = [r[1] for r in rows]
    monotone = all(b >= a - 1e-9 for a, b in zip(mins, mins[1:]))
    csv_rows = [["radius", "min_norm", "max_norm", "p"]] + [[r, lo, hi, args.p]
                                                            for r, lo, hi in rows]
    return {"p": args.p, "rows": [list(r) for r in rows],
            "min_nondecreasing": monotone}, not monotone, csv_rows


def cmd_counterexample(g, args):
    formula, built = certify.euclid_counterexample(args.m, args.d, args.epsilon, g)
    bound = certify.euclid_bound(args.m, args.d, args.epsilon)
    ok = built == formula or abs(built - formula) <= 1e-12 * max(1.0, formula)
    ok = ok and formula <= bound + 1e-12
    res = {"m": args.m, "d_len": args.d, "epsilon": args.epsilon,
           "formula_value": formula, "constructed_value": built, "bound": bound,
           "beta_emp": built / args.d}
    rows = [["m", "d_len", "epsilon", "formula_value", "constructed_value", "bound"],
            [args.m, args.d, args.epsilon, formula, built, bound]]
    return res, not ok, rows


COMMANDS = {
    "graph": cmd_graph, "delta": cmd_delta, "visual": cmd_visual, "norm": cmd_norm,
    "decompose": cmd_decompose, "certify": cmd_certify, "profile": cmd_profile,
    "counterexample": cmd_counterexample,
}


# parser ----------------------------------------------------------------------------------

def _positive(kind):
    def conv(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--graph", help="graph file: 'n m' then m lines 'u v'")
    src.add_argument("--group", help="free:RANK | grid2d | z2z3 | surface2")
    common.add_argument("--radius", type=int, help="Cayley ball radius")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=_positive(int), default=None,
                        help="parallel workers (default: $HYPQUOT_THREADS or 1)")
    common.add_argument("--out", help="JSON report path (default stdout)")
    common.add_argument("--csv", help="CSV table path")
    common.add_argument("--tol", type=_positive(float), default=1e-8)
    common.add_argument("--cap", type=int, default=400, help="exact δ vertex cap")

    parser = argparse.ArgumentParser(prog="hypquot", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph", parents=[common], help="build, validate and describe a graph")
    p.add_argument("--write", help="write the graph in edge-list format")

    p = sub.add_parser("delta", parents=[common], help="four-point hyperbolicity constant")
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--samples", type=_positive(int), default=20000)

    p = sub.add_parser("visual", parents=[common], help="visual metric and suggested ϵ")
    p.add_argument("--center", default="0")
    p.add_argument("--epsilon", type=_positive(float))
    p.add_argument("--C-cap", dest="C_cap", type=float, default=2.0)

    p = sub.add_parser("norm", parents=[common], help="quotient norm of δ_y − δ_x")
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="sink", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--max-iter", dest="max_iter", type=_positive(int), default=10_000)

    p = sub.add_parser("decompose", parents=[common], help="path/loop decomposition")
    p.add_argument("--chain", required=True, help="JSON triples or lines 'u v coeff'")
    p.add_argument("--exact", action="store_true", help="rational arithmetic")

    p = sub.add_parser("certify", parents=[common], help="run the inequality harness")
    p.add_argument("statement", choices=STATEMENTS + ("all",))
    p.add_argument("--p", type=float, default=1.05)
    p.add_argument("--C-cap", dest="C_cap", type=float, default=2.0)
    p.add_argument("--samples", type=_positive(int), default=500)
    p.add_argument("--paths", type=_positive(int), default=200)
    p.add_argument("--pairs", type=_positive(int), default=300)

    p = sub.add_parser("profile", parents=[common], help="properness profile over spheres")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--basepoint", default="0")

    p = sub.add_parser("counterexample", parents=[common], help="Euclidean rectangle path")
    p.add_argument("--m", type=_positive(int), required=True)
    p.add_argument("--d", type=_positive(int), required=True)
    p.add_argument("--epsilon", type=_positive(float), required=True)
    return parser


def _config(args):
    skip = {"out", "csv", "workers", "command", "graph", "group", "radius", "write"}
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    cfg.update(_input_config(args) if (args.graph or args.group) else {})
    return cfg


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    report = {"schema_version": SCHEMA_VERSION, "command": args.command, "seed": args.seed,
              "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
              "config": _config(args)}
    code = EXIT_OK
    try:
        if args.command == "counterexample" and not (args.graph or args.group):
            g = None
        elif not (args.graph or args.group):
            raise UsageError("one of --graph or --group is required")
        else:
            g = _load_graph(args)
        result, violated, rows = COMMANDS[args.command](g, args)
        report["result"] = result
        report["status"] = "violated" if violated else "ok"
        code = EXIT_VIOLATED if violated else EXIT_OK
        if rows is not None and args.csv:
            _write_csv(args.csv, rows)
    except (ResourceError, ConvergenceError, EpsilonSearchError) as exc:
        report.update(status="error", error={"kind": type(exc).__name__, "message": str(exc)})
        code = EXIT_RESOURCE
    except (UsageError, GraphError, UnsupportedOperationError, ValueError, OSError) as exc:
        report.update(status="error", error={"kind": type(exc).__name__, "message": str(exc)})
        code = EXIT_USAGE
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True, ensure_ascii=False)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    if code == EXIT_USAGE and "error" in report:
        print(f"hypquot: error: {report['error']['message']}", file=sys.stderr)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
