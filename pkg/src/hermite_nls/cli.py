"""Command-line entry point: ``hermite-nls {solve,converge,bench,plot,nodes}``.

Exit status is 0 on success, 1 for invalid input (arguments, configs, CSV
files, I/O) and 2 when a time integrator diverges.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings

from .harness.config import ConfigError, load_config
from .harness.csvio import CsvFormatError, dumps_table
from .harness.presets import UnknownPresetError
from .quadrature import InvalidDegreeError, gauss_hermite_rule
from .schemes import DivergenceError

EXIT_OK, EXIT_INPUT, EXIT_DIVERGED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _taus(text: str) -> list[float]:
    try:
        taus = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid tau list {text!r}") from None
    if not taus or any(not t > 0 for t in taus):
        raise argparse.ArgumentTypeError("taus must be a non-empty list of positive numbers")
    return taus


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hermite-nls", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run one configuration")
    p.add_argument("config")
    p.add_argument("--ref", help="reference config; adds l2_error to the records")

    p = sub.add_parser("converge", help="temporal convergence study over a tau ladder")
    p.add_argument("config")
    p.add_argument("--taus", required=True, type=_taus, help="comma-separated time steps")
    p.add_argument("--ref", required=True, help="reference config (tau at least 10x below min tau)")
    p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("bench", help="final error and CPU time for several configurations")
    p.add_argument("configs", nargs="+")
    p.add_argument("--ref", help="reference config (default: RK4/fine Strang, see README)")
    p.add_argument("--repeats", type=int, default=1, help="keep the fastest of N timings")
    p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("plot", help="render a study or benchmark CSV as SVG")
    p.add_argument("csv")
    p.add_argument("--kind", required=True, choices=("order", "cpu"))
    p.add_argument("--out", required=True)

    p = sub.add_parser("nodes", help="print Gauss-Hermite nodes and weights")
    p.add_argument("--degree", required=True, type=int)
    return parser


def _cmd_solve(args):
    from .harness.experiments import RECORD_HEADER, reference_solution, run_evolution

    cfg = load_config(args.config)
    reference = None
    if args.ref:
        ref_cfg = load_config(args.ref)
        steps = range(0, cfg.n_steps + 1, cfg.record_interval)
        times = sorted({k * cfg.tau for k in steps} | {cfg.final_time})
        reference = reference_solution(ref_cfg, times)
    result = run_evolution(cfg, reference=reference)
    if not cfg.output:
        sys.stdout.write(dumps_table(RECORD_HEADER, [r.row() for r in result.records]))
    return EXIT_OK


def _cmd_converge(args):
    from .harness.experiments import STUDY_HEADER, convergence_study

    study = convergence_study(load_config(args.config), args.taus, load_config(args.ref), output=args.out)
    if not args.out:
        sys.stdout.write(dumps_table(STUDY_HEADER, study.rows()))
    return EXIT_OK


def _cmd_bench(args):
    from .harness.experiments import BENCH_HEADER, benchmark

    cfgs = [load_config(path) for path in args.configs]
    ref = load_config(args.ref) if args.ref else None
    rows = benchmark(cfgs, reference_cfg=ref, repeats=args.repeats, output=args.out)
    if not args.out:
        sys.stdout.write(dumps_table(BENCH_HEADER, rows))
    return EXIT_OK


def _cmd_plot(args):
    from .harness.plotting import render_plot

    render_plot(args.csv, args.kind, args.out)
    return EXIT_OK


def _cmd_nodes(args):
    rule = gauss_hermite_rule(args.degree)
    rows = zip(range(rule.M), rule.nodes, rule.weights, rule.christoffel)
    sys.stdout.write(dumps_table(["index", "node", "weight", "christoffel"], rows))
    return EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "converge": _cmd_converge,
    "bench": _cmd_bench,
    "plot": _cmd_plot,
    "nodes": _cmd_nodes,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return _COMMANDS[args.command](args)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ConfigError, CsvFormatError, UnknownPresetError, InvalidDegreeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
