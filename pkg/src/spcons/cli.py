"""``spc`` command-line interface.

Exit codes: 0 ok, 1 usage or I/O error, 2 domain error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
import warnings

import numpy as np

from . import dense_oracle as oracle
from . import generators as gen
from .electrical import effective_resistance, round_count, solve
from .errors import MaxItersExceeded, NotSeriesParallel, SPConsError
from .formats import format_graph, parse_graph
from .graph_core import LeaderFollowerSystem
from .h2_perf import h2_all_input, h2_single_source
from .reweight import Problem, optimize
from .sp_decomp import decompose, from_sexpr, realization, to_sexpr, tree_stats

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3
CHECK_TOL = 1e-9


def fmt(x: float) -> str:
    return f"{x:.17g}"


def _rel(a: float, b: float, floor: float = 1e-12) -> float:
    return abs(a - b) / max(abs(a), abs(b), floor)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_tree(args):
    """Tree from an s-expression file, or from a graph file plus terminals."""
    text = _read_text(args.input)
    if text.lstrip().startswith("("):
        return from_sexpr(text)
    if args.source is None or args.sink is None:
        raise _UsageError("graph input needs --source and --sink")
    g, _ = parse_graph(text)
    return decompose(g, args.source, args.sink)


class _UsageError(Exception):
    pass


# -- subcommands --------------------------------------------------------------


def cmd_decompose(args, out):
    g, _ = parse_graph(_read_text(args.graph))
    try:
        t = decompose(g, args.source, args.sink)
    except NotSeriesParallel as exc:
        print(
            f"not series-parallel between {args.source} and {args.sink}: "
            f"stuck at {exc.remaining_nodes} nodes, {exc.remaining_edges} edges",
            file=sys.stderr,
        )
        return EXIT_DOMAIN
    print(to_sexpr(t), file=out)
    return EXIT_OK


def cmd_realize(args, out):
    t = from_sexpr(_read_text(args.tree))
    r = realization(t)
    print(f"# source {r.source}", file=out)
    print(f"# sink {r.sink}", file=out)
    out.write(format_graph(r.graph))
    return EXIT_OK


def cmd_reff(args, out):
    t = _load_tree(args)
    reff = effective_resistance(t)
    print(f"reff {fmt(reff)}", file=out)
    if args.check:
        r = realization(t)
        dev = _rel(reff, oracle.effective_resistance_dense(r.graph, r.source, r.sink))
        print(f"oracle_dev {dev:.3e}", file=out)
        return EXIT_OK if dev <= CHECK_TOL else EXIT_VERIFY
    return EXIT_OK


def cmd_voltages(args, out):
    t = _load_tree(args)
    sol = solve(t, args.current)
    for node in sorted(sol.potentials):
        print(f"node {node} {fmt(sol.potentials[node])}", file=out)
    print(f"reff {fmt(sol.reff)}", file=out)
    if args.check:
        r = realization(t)
        ref = oracle.potentials_dense(r.graph, r.source, r.sink)
        dev = max(_rel(sol.potentials[n], args.current * ref[n]) for n in ref)
        print(f"oracle_dev {dev:.3e}", file=out)
        return EXIT_OK if dev <= CHECK_TOL else EXIT_VERIFY
    return EXIT_OK


def _load_system(path) -> LeaderFollowerSystem:
    g, inputs = parse_graph(_read_text(path))
    return LeaderFollowerSystem(g, inputs)


def cmd_h2(args, out):
    sys_ = _load_system(args.graph)
    val = h2_all_input(sys_, jobs=args.jobs)
    print(f"h2_squared {fmt(val.squared)}", file=out)
    for s, v in val.per_source.items():
        print(f"source {s} {fmt(v)}", file=out)
    if args.check:
        ref = oracle.h2_dense(sys_)
        dev = max(
            _rel(val.squared, ref),
            _rel(val.squared, oracle.h2_gramian(sys_)),
            _rel(val.squared, oracle.h2_resistance_sum(sys_)),
        )
        print(f"oracle_dev {dev:.3e}", file=out)
        return EXIT_OK if dev <= CHECK_TOL else EXIT_VERIFY
    return EXIT_OK


def cmd_optimize(args, out):
    sys_ = _load_system(args.graph)
    rows = []

    def record(it, f, gnorm, w):
        rows.append([it, fmt(f), fmt(gnorm), *map(fmt, w)])

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", MaxItersExceeded)
        W, report = optimize(
            sys_,
            mode=args.mode,
            h_reg=args.h_reg,
            w_min=args.w_min,
            tol=args.tol,
            max_iters=args.max_iters,
            method=args.method,
            callback=record if args.trace else None,
        )
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if args.trace:
        with open(args.trace, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iter", "f", "grad_inf_norm"] + [f"w{e.id}" for e in sys_.followers.edges])
            writer.writerows(rows)
    for e, w in zip(sys_.followers.edges, W):
        print(f"edge {e.id} {e.u} {e.v} {fmt(w)}", file=out)
    print(f"f {fmt(report.f)}", file=out)
    print(f"grad_inf_norm {report.grad_inf_norm:.3e}", file=out)
    print(f"iterations {report.iterations}", file=out)
    print(f"route {report.route}", file=out)
    print(f"converged {str(report.converged).lower()}", file=out)
    return EXIT_OK


def run_checks(seed: int, max_leaves: int = 60) -> dict[str, float]:
    """Max relative deviation of every fast path from its dense counterpart."""
    rng = np.random.default_rng(seed)
    devs = {}
    t = gen.random_tree(rng, int(rng.integers(1, max_leaves + 1)))
    r = realization(t)
    sol = solve(t)
    devs["reff"] = _rel(sol.reff, oracle.effective_resistance_dense(r.graph, r.source, r.sink))
    ref = oracle.potentials_dense(r.graph, r.source, r.sink)
    devs["potentials"] = max(abs(sol.potentials[n] - ref[n]) / max(abs(ref[n]), 1e-12) for n in ref)
    leaves = t.arena.leaves
    power = float(np.sum(sol.current[leaves] ** 2 / t.arena.w[leaves]))
    devs["energy"] = _rel(power, sol.reff)
    back = decompose(r.graph, r.source, r.sink)
    devs["roundtrip"] = _rel(effective_resistance(back), sol.reff)

    sys_ = gen.random_all_input_system(rng, int(rng.integers(1, 9)))
    h2 = h2_all_input(sys_).squared
    devs["h2_trace"] = _rel(h2, oracle.h2_dense(sys_))
    devs["h2_gramian"] = _rel(h2, oracle.h2_gramian(sys_))
    devs["h2_resistance"] = _rel(h2, oracle.h2_resistance_sum(sys_))
    if sys_.followers.n_edges:
        W = gen.log_uniform_weights(rng, sys_.followers.n_edges)
        g_tree = Problem(sys_, 1.0, "tree").gradient(W)
        g_dense = Problem(sys_, 1.0, "dense").gradient(W)
        devs["gradient_routes"] = float(np.abs(g_tree - g_dense).max() / max(np.abs(g_dense).max(), 1e-12))
    return devs


def cmd_check(args, out):
    worst: dict[str, float] = {}
    for seed in range(args.seed, args.seed + args.seeds):
        for name, dev in run_checks(seed, args.max_leaves).items():
            worst[name] = max(worst.get(name, 0.0), dev)
    ok = True
    for name, dev in worst.items():
        passed = dev <= CHECK_TOL
        ok &= passed
        print(f"{name} max_dev {dev:.3e} {'PASS' if passed else 'FAIL'}", file=out)
    print(f"seeds {args.seeds} {'PASS' if ok else 'FAIL'}", file=out)
    return EXIT_OK if ok else EXIT_VERIFY


BENCH_FIELDS = [
    "generator", "leaves", "height", "rounds_per_pass", "sources",
    "rounds", "total_rounds", "wall_time_s",
]


def bench_records(generator: str, sizes, sources: int, seed: int = 0):
    """One record per size; ``rounds`` is one pass summed over all sources.

    ``total_rounds`` counts the three electrical passes plus the H2 pass for
    every source.
    """
    rng = np.random.default_rng(seed)
    records = []
    for E in sizes:
        if generator == "balanced":
            t = gen.balanced_tree(E, rng)
        elif generator == "chain":
            t = gen.chain_tree(E, "alternate", rng)
        else:
            raise ValueError(f"unknown generator {generator!r}")
        per_pass = round_count(t)
        start = time.perf_counter()
        for _ in range(sources):
            solve(t)
            h2_single_source(t)
        wall = time.perf_counter() - start
        records.append({
            "generator": generator,
            "leaves": E,
            "height": tree_stats(t).height,
            "rounds_per_pass": per_pass,
            "sources": sources,
            "rounds": per_pass * sources,
            "total_rounds": 4 * per_pass * sources,
            "wall_time_s": wall,
        })
    return records


def cmd_bench(args, out):
    sizes = [int(x) for x in args.sizes.split(",") if x.strip()]
    if not sizes or min(sizes) < 1:
        raise _UsageError("--sizes needs positive integers")
    writer = csv.DictWriter(out, BENCH_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rec in bench_records(args.generator, sizes, args.sources, args.seed):
        rec["wall_time_s"] = fmt(rec["wall_time_s"])
        writer.writerow(rec)
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def _default_seed() -> int:
    try:
        return int(os.environ.get("SPC_SEED", "0"))
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spc", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=_default_seed(), help="random seed (env SPC_SEED)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("decompose", help="graph file -> tree s-expression")
    s.add_argument("graph")
    s.add_argument("--source", type=int, required=True)
    s.add_argument("--sink", type=int, required=True)
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("realize", help="tree s-expression -> graph file")
    s.add_argument("tree")
    s.set_defaults(func=cmd_realize)

    for name, func in (("reff", cmd_reff), ("voltages", cmd_voltages)):
        s = sub.add_parser(name, help=f"{name} from a tree or a graph with terminals")
        s.add_argument("input", help="tree s-expression or graph file ('-' for stdin)")
        s.add_argument("--source", type=int)
        s.add_argument("--sink", type=int)
        s.add_argument("--check", action="store_true", help="compare with the dense oracle")
        if name == "voltages":
            s.add_argument("--current", type=float, default=1.0)
        s.set_defaults(func=func)

    s = sub.add_parser("h2", help="squared H2 norm of an all-input series-parallel system")
    s.add_argument("graph")
    s.add_argument("--check", action="store_true")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_h2)

    s = sub.add_parser("optimize", help="re-weight follower edges")
    s.add_argument("graph")
    s.add_argument("--mode", choices=["paper", "projected_gradient"], default="projected_gradient")
    s.add_argument("--h-reg", type=float, default=1.0)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--max-iters", type=int, default=100_000)
    s.add_argument("--w-min", type=float, default=1e-8)
    s.add_argument("--method", choices=["auto", "tree", "dense"], default="auto")
    s.add_argument("--trace", help="CSV file: iter, f, grad_inf_norm, weights")
    s.set_defaults(func=cmd_optimize)

    s = sub.add_parser("check", help="cross-check fast paths against the dense oracle")
    s.add_argument("--seeds", type=int, default=100)
    s.add_argument("--max-leaves", type=int, default=60)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("bench", help="round counts per tree size as CSV")
    s.add_argument("--generator", choices=["balanced", "chain"], default="balanced")
    s.add_argument("--sizes", default="2,4,8,16,32,64,128,256")
    s.add_argument("--sources", type=int, default=1)
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except _UsageError as exc:
        print(f"spc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"spc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SPConsError, ValueError) as exc:
        print(f"spc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
