"""Command line entry point: ``suslov <command> ...``.

Exit codes: 0 success, 1 a verification check failed (or the state blew up), 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import commands
from .harness.config import ConfigError, load_config
from .harness.io import dumps_json
from .harness.verify import SUITES, report_dict, run_suite
from .numerics import IntegrationError

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG = 0, 1, 2


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got {text!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, newline="")
    else:
        sys.stdout.write(text)


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    report = commands.simulate(cfg, base_dir=Path(args.config).resolve().parent)
    if not cfg.outputs.report_json:
        sys.stdout.write(dumps_json(report))
    return EXIT_OK


def _cmd_verify(args) -> int:
    def progress(res):
        if args.verbose:
            status = "PASS" if res.passed else "FAIL"
            print(f"{status} {res.name}: {res.value:.3e} (tol {res.tolerance:.1e})", file=sys.stderr)

    results = run_suite(args.suite, args.seed, args.tolerance_scale, progress)
    report = report_dict(results, args.seed, args.suite, timings=args.timings)
    _emit(dumps_json(report), args.out)
    return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED


def _cmd_classify(args) -> int:
    result = commands.classify(args.c, args.inertia, args.b, args.tol)
    sys.stdout.write(dumps_json(result))
    return EXIT_OK


def _cmd_scan(args) -> int:
    try:
        grid = json.loads(Path(args.grid).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read grid: {exc}") from None
    if not isinstance(grid, dict):
        raise ConfigError("grid must be a JSON object")
    _emit(commands.scan_csv(commands.scan(grid, args.workers)), args.out)
    return EXIT_OK


def _cmd_compare(args) -> int:
    result = commands.compare(load_config(args.config), window=args.window)
    sys.stdout.write(dumps_json(result))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="suslov", description="n-dimensional Suslov rigid body toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="propagate a configured initial state and write outputs")
    p.add_argument("config")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", help="run a seeded verification suite")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--timings", action="store_true", help="include per-check runtime (breaks byte equality)")
    p.add_argument("--tolerance-scale", type=float, default=1.0,
                   help="multiply every tolerance; values below 1 tighten the checks")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("classify", help="topology of a KT level set")
    p.add_argument("--c", type=_floats, required=True, help="integral values c_1..c_{n-1}")
    p.add_argument("--inertia", type=_floats, required=True, help="mass tensor I_1..I_n")
    p.add_argument("--b", type=_floats, required=True, help="potential coefficients B_1..B_n")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("scan", help="classify every point of a grid of c values")
    p.add_argument("grid")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("compare", help="full vs reduced vs Hamiltonized propagation")
    p.add_argument("config")
    p.add_argument("--window", type=float, default=0.1)
    p.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:  # ConfigError, OnBoundary and invalid parameters
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
