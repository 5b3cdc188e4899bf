"""Batch front end for running scenarios, benchmarking and fitting profiles.

Exit codes: 0 success, 1 configuration or input error, 2 numerical
instability, 3 finished without reaching the steady-state tolerance.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numba

from .config import ConfigError, Scenario, parse_config, with_overrides
from .interface import FitError
from .io import OutputError, emit_outputs, output_dir
from .lattice import NumericalInstability
from .runner import BenchError, run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_UNSTABLE, EXIT_UNCONVERGED = 0, 1, 2, 3

log = logging.getLogger("porelbm")


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    common.add_argument("--seed", type=int, help="override the scenario seed")
    common.add_argument("--out", help="override the output directory")
    common.add_argument("--max-steps", type=int, help="override [run] max_steps")
    common.add_argument("--vtk", action="store_true", help="also write legacy VTK fields")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="porelbm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="run a scenario file")
    run.add_argument("config")
    bench = sub.add_parser("bench", parents=[common], help="SBB vs CLI throughput")
    bench.add_argument("config")
    fit = sub.add_parser("fit", parents=[common], help="interface coefficients from a profile CSV")
    fit.add_argument("profile")
    fit.add_argument("--interface-z", type=float, help="interface height (default: porosity edge)")
    fit.add_argument("--nu", type=float, help="viscosity if not recorded in the profile")
    fit.add_argument("--force", type=float, help="body force if not recorded in the profile")
    return p


def set_threads(n):
    if n is None:
        return
    if n < 1:
        raise ConfigError(f"--threads must be >= 1, got {n}")
    cap = numba.config.NUMBA_NUM_THREADS
    if n > cap:
        log.warning("only %d threads available; using %d", cap, cap)
        n = cap
    numba.set_num_threads(n)


def _fit_scenario(args) -> Scenario:
    from pathlib import Path

    params = {"extract": {"profile": str(Path(args.profile).resolve()),
                          "interface_z": args.interface_z, "nu": args.nu, "force": args.force}}
    return Scenario("extract_params", Path(args.profile).stem + "_fit", 0, "out", params)


def _print_report(report):
    for k, v in report.items():
        print(f"{k} = {v}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        set_threads(args.threads)
        if args.command == "fit":
            scn = _fit_scenario(args)
        else:
            scn = parse_config(args.config)
            if args.command == "bench" and scn.kind != "bench":
                raise ConfigError(f"bench needs a scenario of kind 'bench', got {scn.kind!r}",
                                  args.config)
        scn = with_overrides(scn, args.seed, args.out, args.max_steps)
        results = run_scenario(scn)
        paths = emit_outputs(results, scn, vtk=args.vtk)
    except (ConfigError, OutputError, BenchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalInstability as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (ValueError, FitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _print_report(results.report)
    print(f"outputs in {output_dir(scn)} ({len(paths)} files)")
    if not results.converged:
        print("warning: steady-state tolerance not reached", file=sys.stderr)
        return EXIT_UNCONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
