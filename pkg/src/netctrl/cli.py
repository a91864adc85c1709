"""Command-line front end: ``netctrl <command> GRAPH [flags]``.

GRAPH is a file path, ``-`` for stdin, or ``fixture:NAME`` for a bundled graph.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ctrb import DEFAULT_TOL_RANK, independent_row_sets, kalman_decompose, target_ctrb_matrix
from .extensions import (
    GeneralLinearSpec,
    lift_high_order,
    lifted_zero_columns_ok,
    prop5_check,
    scc_analyze,
    theorem3_check,
)
from .fixtures import FIXTURES, fixture_text, random_graph, random_prop5_graph, seed_from_env
from .graph import Graph, GraphFormatError, parse_graph, serialize_graph, system_triple
from .partition import theorem1_check
from .reachability import analyze_reachability
from .report import AnalysisOptions, build_report, dumps, graph_summary
from .steering import SteeringError, SteeringProblem, simulate_high_order

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONTROLLABLE = 3
EXIT_UNDETERMINED = 4


class InputError(Exception):
    pass


def read_graph(ref: str) -> Graph:
    if ref.startswith("fixture:"):
        name = ref.split(":", 1)[1]
        try:
            text = fixture_text(name)
        except KeyError as exc:
            raise InputError(exc.args[0]) from None
        source = ref
    elif ref == "-":
        text, source = sys.stdin.read(), "<stdin>"
    else:
        try:
            text = Path(ref).read_text()
        except OSError as exc:
            raise InputError(f"{ref}: {exc.strerror}") from None
        source = ref
    try:
        return parse_graph(text)
    except GraphFormatError as exc:
        where = f"{source}:{exc.line}" if exc.line else source
        if exc.line and exc.column:
            where += f":{exc.column}"
        raise InputError(f"{where}: {exc.message}") from None
    except ValueError as exc:
        raise InputError(f"{source}: {exc}") from None


def _read_spec(path: str | None) -> GeneralLinearSpec | None:
    if path is None:
        return None
    try:
        return GeneralLinearSpec.from_json(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def _parse_vector(text: str, what: str) -> np.ndarray:
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        return np.array([float(p) for p in parts], dtype=float)
    except ValueError:
        raise InputError(f"{what}: not a list of numbers: {text!r}") from None


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj) + "\n")


def cmd_analyze(args) -> int:
    g = read_graph(args.graph)
    opts = AnalysisOptions(
        exact=not args.no_exact,
        tol_eig=args.tol_eig,
        tol_rank=args.tol_rank,
        cap=args.cap,
        order=args.order,
        general_linear=_read_spec(args.general_linear),
    )
    report = build_report(g, opts)
    _emit(report)
    verdict = report["verdict"]["target_controllable"]
    if verdict is True:
        return EXIT_OK
    if verdict is False:
        return EXIT_NOT_CONTROLLABLE
    return EXIT_UNDETERMINED


def cmd_partition(args) -> int:
    g = read_graph(args.graph)
    _emit(theorem1_check(g, exact=not args.no_exact).to_dict())
    return EXIT_OK


def cmd_reach(args) -> int:
    _emit(analyze_reachability(read_graph(args.graph)).to_dict())
    return EXIT_OK


def cmd_decompose(args) -> int:
    dec = kalman_decompose(system_triple(read_graph(args.graph)))
    _emit(dec.to_dict())
    return EXIT_OK


def cmd_select_targets(args) -> int:
    dec = kalman_decompose(system_triple(read_graph(args.graph)))
    sets, truncated = independent_row_sets(dec.p1, args.count, args.cap)
    _emit({"kappa": dec.kappa, "count": args.count, "cap": args.cap,
           "sets": [list(s) for s in sets], "truncated": truncated})
    return EXIT_OK


def cmd_scc(args) -> int:
    g = read_graph(args.graph)
    spec = _read_spec(args.general_linear)
    rep = scc_analyze(g)
    out = rep.to_dict()
    out["prop5"] = prop5_check(g, spec, exact=not args.no_exact, scc=rep).to_dict()
    _emit(out)
    return EXIT_OK


def cmd_lift(args) -> int:
    g = read_graph(args.graph)
    t = system_triple(g)
    lifted = lift_high_order(t, args.order)
    w = target_ctrb_matrix(lifted, lifted.n)
    res = theorem3_check(t, args.order)
    _emit({"order": args.order, "n_lifted": lifted.n, **res.to_dict(),
           "zero_column_structure": lifted_zero_columns_ok(w, args.order, t.l)})
    return EXIT_OK


def cmd_simulate(args) -> int:
    g = read_graph(args.graph)
    t = system_triple(g)
    if args.x0 == "zero":
        x0 = np.zeros(g.n)
    else:
        try:
            x0 = _parse_vector(Path(args.x0).read_text(), "--x0")
        except OSError as exc:
            raise InputError(f"{args.x0}: {exc.strerror}") from None
    yf = _parse_vector(args.yf, "--yf")
    try:
        problem = SteeringProblem(t, x0, yf, args.tf, args.steps)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    try:
        traj = simulate_high_order(problem, args.order)
    except SteeringError as exc:
        sys.stderr.write(f"netctrl: {exc}\n")
        _emit({"error": "gramian", "condition": exc.condition if np.isfinite(exc.condition) else None,
               "rank": exc.rank, "p": len(g.targets)})
        return EXIT_NOT_CONTROLLABLE
    sys.stdout.write(traj.to_csv())
    return EXIT_OK


def cmd_gen_random(args) -> int:
    seed = seed_from_env() if args.seed is None else args.seed
    rng = random.Random(seed)
    if args.kind == "prop5":
        g = random_prop5_graph(rng, args.n_min, args.n_max)
    else:
        g = random_graph(rng, args.n_min, args.n_max)
    sys.stdout.write(f"# seed {seed}\n" + serialize_graph(g))
    return EXIT_OK


def cmd_fixtures(args) -> int:
    if args.name:
        try:
            sys.stdout.write(fixture_text(args.name))
        except KeyError as exc:
            raise InputError(exc.args[0]) from None
    else:
        _emit({name: graph_summary(parse_graph(fixture_text(name))) for name in FIXTURES})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netctrl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"netctrl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def graph_cmd(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("graph", help="graph file, '-' for stdin, or fixture:NAME")
        p.set_defaults(func=func)
        return p

    p = graph_cmd("analyze", cmd_analyze, "full target-controllability report")
    p.add_argument("--no-exact", action="store_true", help="skip exact rational rank computations")
    p.add_argument("--tol-eig", type=float, default=None,
                   help="eigenvalue clustering tolerance (default 1e-8*max(1,||A||_inf))")
    p.add_argument("--tol-rank", type=float, default=DEFAULT_TOL_RANK,
                   help="relative singular-value cutoff for numeric ranks")
    p.add_argument("--cap", type=int, default=64, help="maximum number of listed target sets")
    p.add_argument("--order", type=int, default=1, help="also check the order-m lift")
    p.add_argument("--general-linear", metavar="SPEC", help="JSON with A, M, N, K agent matrices")

    p = graph_cmd("partition", cmd_partition, "pi0 equitable partition and its verdict")
    p.add_argument("--no-exact", action="store_true")
    graph_cmd("reach", cmd_reach, "delta-reachability classes")
    graph_cmd("decompose", cmd_decompose, "exact Kalman decomposition")

    p = graph_cmd("select-targets", cmd_select_targets, "admissible target sets")
    p.add_argument("--count", type=int, default=None, help="set size p (default kappa)")
    p.add_argument("--cap", type=int, default=1000)

    p = graph_cmd("scc", cmd_scc, "strongly connected components and LTF test")
    p.add_argument("--general-linear", metavar="SPEC")
    p.add_argument("--no-exact", action="store_true")

    p = graph_cmd("lift", cmd_lift, "rank check of the high-order lift")
    p.add_argument("--order", type=int, default=2)

    p = graph_cmd("simulate", cmd_simulate, "minimum-energy steering trajectory as CSV")
    p.add_argument("--x0", default="zero", help="file of initial positions, or 'zero'")
    p.add_argument("--yf", required=True, help="comma-separated terminal target values")
    p.add_argument("--tf", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--order", type=int, default=1)

    p = sub.add_parser("gen-random", help="seeded random graph (seed from NETCTRL_SEED)")
    p.add_argument("--kind", choices=("plain", "prop5"), default="plain")
    p.add_argument("--n-min", type=int, default=4)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_gen_random)

    p = sub.add_parser("fixtures", help="list bundled graphs or print one")
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "order", 1) < 1:
            raise InputError("--order must be >= 1")
        if getattr(args, "cap", 1) is not None and getattr(args, "cap", 1) < 1:
            raise InputError("--cap must be >= 1")
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"netctrl: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
