"""Command line interface.

Exit codes: 0 ok, 1 configuration error, 2 numerical or tolerance failure,
3 I/O error.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import load_config, parse_number, parse_overrides
from .decoherence import DegenerateModesError, UndersampledPhaseError
from .model import ParameterError
from .oracles import IntegrationError
from .runner import PRESETS, SWEEP_AXES, compare_oracles, format_csv, reproduce, run, sweep, write_csv

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="key = value configuration file")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                   help="override a configuration key (repeatable)")
    p.add_argument("--seed", type=int, help="Monte Carlo master seed")
    p.add_argument("--mc-traj", type=int, help="Monte Carlo trajectory count")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--inject-residue-error", type=float, default=0.0, help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dephasing-geometry",
        description="Dephasing qubit under nonstationary telegraph noise: "
                    "decoherence factor, Bloch path, geometric phases, non-Markovianity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="time series for one parameter point")
    _common(p)
    p.add_argument("--out", metavar="PATH", help="output .csv file or directory (default: stdout)")

    p = sub.add_parser("sweep", help="one run per value of a parameter")
    _common(p)
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma separated, e.g. -1,-0.5,0,pi/4")
    p.add_argument("--out", metavar="DIR", default="sweep")

    p = sub.add_parser("compare-oracles", help="analytic vs ODE vs Monte Carlo deviations")
    _common(p)

    p = sub.add_parser("reproduce", help="figure presets")
    _common(p)
    p.add_argument("preset", choices=sorted(PRESETS))
    p.add_argument("--out", metavar="DIR", default="results")
    return parser


def _config(args):
    overrides = parse_overrides(args.set)
    if args.seed is not None:
        overrides["mc.seed"] = str(args.seed)
    if args.mc_traj is not None:
        overrides["mc.n_traj"] = str(args.mc_traj)
    if args.workers is not None:
        overrides["mc.workers"] = str(args.workers)
    if args.config and not Path(args.config).is_file():
        raise ParameterError("--config", f"no such file: {args.config}")
    cfg = load_config(args.config, overrides)
    if args.inject_residue_error:
        cfg = replace(cfg, inject_residue_error=args.inject_residue_error)
    return cfg


def _dispatch(args) -> int:
    cfg = _config(args)
    if args.command == "run":
        result = run(cfg)
        if args.out is None:
            sys.stdout.write(format_csv(result))
        else:
            out = Path(args.out)
            write_csv(result, out if out.suffix == ".csv" else out / "run.csv")
        return EXIT_OK

    if args.command == "sweep":
        values = [parse_number(v, "values") for v in args.values.split(",") if v.strip()]
        summary = sweep(args.axis, values, cfg, args.out, workers=cfg.workers)
        print(summary)
        return EXIT_OK

    if args.command == "compare-oracles":
        checks = compare_oracles(cfg)
        failed = [c for c in checks if not c.passed]
        for c in checks:
            status = "PASS" if c.passed else "FAIL"
            print(f"{status}  {c.name}: max deviation {c.deviation:.3e} (tolerance {c.tolerance:.1e})")
        if failed:
            print(f"tolerance exceeded: {', '.join(c.name for c in failed)}", file=sys.stderr)
            return EXIT_NUMERICAL
        return EXIT_OK

    if args.command == "reproduce":
        for path in reproduce(args.preset, args.out, base=cfg):
            print(path)
        return EXIT_OK
    raise AssertionError(args.command)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ParameterError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (UndersampledPhaseError, DegenerateModesError, IntegrationError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BrokenPipeError:
        # reader went away (e.g. piped into head); not an error
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
