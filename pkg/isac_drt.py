"""
This script evaluates the deterministic-random tradeoff of an ISAC scenario.

It loads a scenario file, runs the verification suites, optimizes the sensing
covariance, evaluates communication rates, reports the sensing MI of a
signaling scheme, or traces the tradeoff curve, and writes JSON reports and
CSV tables with reproducible seeds.

Usage:
    python isac_drt.py verify scalar|vector|bounds --config F [--trials N]
                       [--seed S] [--out report.json]
    python isac_drt.py optimize --config F --method wf|pg [--out cov.csv]
    python isac_drt.py capacity --config F [--out cap.json]
    python isac_drt.py mi --config F --scheme NAME [--trials N]
    python isac_drt.py drt --config F --points N [--trials N] --out curve.csv

Exit codes: 0 success, 1 failed checks, 2 usage or config error,
3 numeric failure.
"""

import argparse
import os
import sys
from functools import cache

import numpy as np
from rich.table import Table

from drt.capacity import comm_optimal_cov, ergodic_gaussian_rate, high_snr_rate
from drt.covopt import solve_sensing_cov
from drt.errors import (
    EXIT_CHECKS_FAILED,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    DrtError,
    exit_code_for,
)
from drt.experiments import (
    drt_curve,
    scalar_tradeoff,
    verify_bounds,
    verify_scalar,
    verify_vector,
    write_curve_csv,
)
from drt.infomeasures import ergodic_sensing_mi
from drt.model import RngStream, sample_comm_channels

from helpers.cli_config import SCHEME_NAMES, CliConfig
from helpers.config import CURVE_FOLDER
from helpers.file_utils import save_complex_csv, write_json
from helpers.general_utils import (
    console,
    ensure_parent_directory,
    print_error,
    setup_logging,
)
from helpers.progress_utils import track_experiment

SUITES = ("scalar", "vector", "bounds")
PSK_ORDERS = (2, 4, 8, 16)

def load_config(args):
    """Loads the scenario file and applies the command-line overrides."""
    cfg = CliConfig.load(args.config)
    return cfg.with_run(seed=args.seed, trials=args.trials, jobs=args.jobs)

def sensing_cov_provider(scn):
    """Returns a cached callable computing the sensing-optimal covariance."""
    @cache
    def sensing_cov():
        return solve_sensing_cov(scn).R_star
    return sensing_cov

def print_report(suite, report):
    """Prints the checks of a verification report as a table."""
    table = Table(title=f"verify {suite}", title_justify="left")
    for column in ("check", "lhs", "relation", "rhs", "pass"):
        table.add_column(column)

    for check in report.checks:
        lhs = "-" if check.lhs is None else f"{check.lhs:.6g}"
        rhs = "-" if check.rhs is None else f"{check.rhs:.6g}"
        status = "[green]pass" if check.passed else "[red]FAIL"
        table.add_row(check.name, lhs, check.relation, rhs, status)
    console.print(table)

def cmd_verify(args):
    """Runs one verification suite and writes its JSON report."""
    cfg = load_config(args)
    scn, run = cfg.scenario, cfg.run
    rng = RngStream(run.seed).child("verify").child(args.suite)

    def work(job_progress):
        if args.suite == "scalar":
            return verify_scalar(
                scn, run.trials, rng, run.jobs, job_progress, cfg.schemes.psk_order
            )
        if args.suite == "vector":
            return verify_vector(scn, run.trials, rng, run.jobs, job_progress)
        schemes = cfg.schemes.build(scn, sensing_cov_provider(scn))
        return verify_bounds(scn, schemes, run.trials, rng, run.jobs, job_progress)

    report = track_experiment(
        f"verify {args.suite}", work, run.seed, run.trials
    )
    out = args.out or run.report
    if out:
        write_json(ensure_parent_directory(out), report.to_dict())

    print_report(args.suite, report)
    return EXIT_OK if report.passed else EXIT_CHECKS_FAILED

def cmd_optimize(args):
    """Computes the sensing-optimal covariance."""
    cfg = load_config(args)
    result = solve_sensing_cov(cfg.scenario, method=args.method)

    console.print(f"method: {args.method}")
    console.print(f"sensing MI: {result.mi_bits!r} bits")
    console.print(f"iterations: {result.iterations}")
    console.print(f"KKT residual: {result.kkt_residual:.3e}")
    console.print(f"converged: {result.converged}")
    if args.out:
        save_complex_csv(ensure_parent_directory(args.out), result.R_star)
    else:
        console.print(result.R_star)
    return EXIT_OK

def cmd_capacity(args):
    """Evaluates communication rates at the sensing and communication optima."""
    cfg = load_config(args)
    scn, run = cfg.scenario, cfg.run
    rng = RngStream(run.seed).child("capacity")

    R_star = solve_sensing_cov(scn).R_star
    channels = sample_comm_channels(scn, scn.comm_samples, rng.child("comm_channels"))
    high_snr = high_snr_rate(channels, R_star, scn.sigma_c2, scn.T)
    at_sensing = ergodic_gaussian_rate(channels, R_star, scn.sigma_c2)
    R_comm = comm_optimal_cov(channels, scn.sigma_c2, scn.P_T)
    at_comm = ergodic_gaussian_rate(channels, R_comm, scn.sigma_c2)

    payload = {
        "scenario": scn.summary(),
        "seed": run.seed,
        "channel_samples": len(channels),
        "high_snr": {
            "rate_bits_per_symbol": high_snr.rate_bits_per_symbol,
            "stderr": high_snr.stderr,
            "L": high_snr.L,
            "pre_log": high_snr.pre_log,
            "c0_bits": high_snr.c0_bits,
            "rank_deficient": high_snr.rank_deficient,
        },
        "gaussian_at_sensing_optimum": {
            "rate_bits": at_sensing.mean, "stderr": at_sensing.stderr,
        },
        "gaussian_at_comm_optimum": {
            "rate_bits": at_comm.mean, "stderr": at_comm.stderr,
        },
    }

    if scn.is_scalar:
        orders = sorted(set(PSK_ORDERS) | {cfg.schemes.psk_order})
        points = scalar_tradeoff(scn, orders, run.trials, rng.child("psk"), run.jobs)
        payload["scalar_tradeoff"] = [
            {
                "scheme": point.scheme_label,
                "comm_rate_bits": point.comm_rate_bits,
                "comm_rate_stderr": point.comm_rate_stderr,
                "sensing_mse": point.sensing_mse,
            }
            for point in points
        ]

    if args.out:
        write_json(ensure_parent_directory(args.out), payload)
    console.print_json(data=payload)
    return EXIT_OK

def cmd_mi(args):
    """Prints the ergodic sensing MI of one signaling scheme."""
    cfg = load_config(args)
    scn, run = cfg.scenario, cfg.run
    rng = RngStream(run.seed).child("mi").child(args.scheme)
    scheme, = cfg.schemes.build(scn, sensing_cov_provider(scn), names=[args.scheme])

    estimate = track_experiment(
        f"sensing MI ({args.scheme})",
        lambda job_progress: ergodic_sensing_mi(
            scheme, scn, run.trials, rng, jobs=run.jobs, job_progress=job_progress
        ),
        run.seed, run.trials
    )
    console.print(
        f"{estimate.mean!r} bits (stderr {estimate.stderr:.3g}, "
        f"{estimate.trials} trials)"
    )
    return EXIT_OK

def cmd_drt(args):
    """Traces the tradeoff curve and writes it as CSV."""
    cfg = load_config(args)
    scn, run = cfg.scenario, cfg.run
    points = args.points or run.points
    out = args.out or run.curve or os.path.join(
        CURVE_FOLDER, os.path.splitext(os.path.basename(args.config))[0] + ".csv"
    )
    rng = RngStream(run.seed).child("drt")

    rows = track_experiment(
        "tradeoff curve",
        lambda job_progress: drt_curve(
            scn, points, run.trials, rng, run.jobs, job_progress
        ),
        run.seed, run.trials
    )
    write_curve_csv(rows, ensure_parent_directory(out))
    console.print(f"{len(rows)} rows written to {out}")
    return EXIT_OK

def positive_int(text):
    """argparse type accepting integers >= 1."""
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value

def setup_parser():
    """
    Set up the argument parser of the tradeoff tool.

    Returns:
        argparse.ArgumentParser: The configured argument parser instance.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--config', required=True, help="Path of the scenario file."
    )
    common.add_argument(
        '--seed', type=int, default=None, help="Root seed (overrides [run])."
    )
    common.add_argument(
        '--trials', type=positive_int, default=None,
        help="Monte Carlo trials per estimate (overrides [run])."
    )
    common.add_argument(
        '--jobs', type=positive_int, default=None,
        help="Worker threads; results do not depend on it."
    )
    common.add_argument(
        '-v', '--verbose', action='store_true', help="Log debug messages."
    )

    parser = argparse.ArgumentParser(
        description="Deterministic-random tradeoff of integrated sensing "
                    "and communications."
    )
    commands = parser.add_subparsers(dest='command', required=True)

    verify = commands.add_parser(
        'verify', parents=[common], help="Run a verification suite."
    )
    verify.add_argument('suite', choices=SUITES)
    verify.add_argument('--out', default=None, help="JSON report path.")
    verify.set_defaults(handler=cmd_verify)

    optimize = commands.add_parser(
        'optimize', parents=[common], help="Sensing-optimal covariance."
    )
    optimize.add_argument('--method', choices=("wf", "pg"), default="wf")
    optimize.add_argument('--out', default=None, help="CSV path of R*.")
    optimize.set_defaults(handler=cmd_optimize)

    capacity = commands.add_parser(
        'capacity', parents=[common], help="Communication rates."
    )
    capacity.add_argument('--out', default=None, help="JSON output path.")
    capacity.set_defaults(handler=cmd_capacity)

    mi = commands.add_parser(
        'mi', parents=[common], help="Ergodic sensing MI of a scheme."
    )
    mi.add_argument('--scheme', required=True, choices=SCHEME_NAMES)
    mi.set_defaults(handler=cmd_mi)

    curve = commands.add_parser(
        'drt', parents=[common], help="Trace the tradeoff curve."
    )
    curve.add_argument('--points', type=int, default=None, help="Grid size.")
    curve.add_argument('--out', default=None, help="CSV output path.")
    curve.set_defaults(handler=cmd_drt)

    return parser

def run(argv=None):
    """
    Runs the tool and returns its exit code.

    Args:
        argv (list, optional): Arguments without the program name. Defaults
                               to `sys.argv[1:]`.

    Returns:
        int: 0 on success, 1 when checks fail, 2 for usage or configuration
             errors, 3 for numeric failures.
    """
    parser = setup_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_err:
        return EXIT_OK if exit_err.code in (0, None) else EXIT_CONFIG_ERROR

    setup_logging(args.verbose)
    try:
        return args.handler(args)

    except (DrtError, OSError, ValueError, KeyError, ArithmeticError,
            np.linalg.LinAlgError) as err:
        print_error(err)
        return exit_code_for(err)

def main():
    """
    Main function of the tradeoff tool.

    Command-line Arguments:
        See `setup_parser`.
    """
    sys.exit(run())

if __name__ == '__main__':
    main()
