"""
Command-line harness.

Subcommands:
  verify    numerical property suites (criterion equivalence, projector
            identity, annihilation, gauge invariance, vec/trace lemmas)
  mc        Monte Carlo sweep over SNR / snapshot count, CSV output
  estimate  run one estimator on a snapshot file
  simulate  write a snapshot file for a synthetic scenario

Exit codes: 0 success, 1 validation error, 2 numerical or property
failure, 3 I/O error.
"""

import argparse
import sys

import numpy as np

from . import bench, snapshot_io
from .array_model import AngleSet
from .errors import NumericalError, SingularityError, ValidationError
from .estimators import estimate as run_estimator
from .sample_stats import (
    Scenario,
    sample_covariance,
    signal_weight,
    simulate_snapshots,
    subspace_decomposition,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="modepuma",
        description="Subspace-fitting DOA estimation for uniform linear arrays",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the numerical property suites")
    p.add_argument("--instances", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-m", type=int, default=12)
    p.add_argument("--max-r", type=int, default=4)
    p.add_argument(
        "--inject-fault",
        action="store_true",
        help="self-test: perturb one code path so the checks must fail",
    )

    p = sub.add_parser("mc", help="Monte Carlo sweep to CSV")
    p.add_argument("--config", required=True, help="sweep config file (key = value lines)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--trials", type=int, default=None, help="override n_trials")
    p.add_argument("--seed", type=int, default=None, help="override base_seed")
    p.add_argument("--success-threshold", type=float, default=bench.DEFAULT_SUCCESS_THRESHOLD)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="fill the wall_time_ms column")

    p = sub.add_parser("estimate", help="estimate angles from a snapshot file")
    p.add_argument("input", help="snapshot file ('# m=<m> T=<T>' header)")
    p.add_argument("--r", type=int, required=True, help="number of sources")
    p.add_argument("--method", default="mode", help="mode | puma | modex | epuma")
    p.add_argument("--p-extra", type=int, default=0)

    p = sub.add_parser("simulate", help="write a synthetic snapshot file")
    p.add_argument("--out", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--angles", required=True, help="comma-separated radians")
    p.add_argument("--snapshots", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-power", type=float, default=1.0)
    p.add_argument("--snr-db", type=float, default=None, help="overrides --noise-power (P = I)")
    return parser


def _cmd_verify(args):
    fault = 1.0 + 1e-6 if args.inject_fault else 1.0
    reports = bench.verify_properties(
        n_instances=args.instances,
        seed=args.seed,
        max_m=args.max_m,
        max_r=args.max_r,
        fault_scale=fault,
    )
    failed = False
    for rep in reports:
        status = "ok" if rep.ok else "FAIL"
        print(f"{rep.name:26s} max deviation {rep.max_deviation:.3e} "
              f"(tolerance {rep.tolerance:.0e})  {status}")
        failed = failed or not rep.ok
    return EXIT_NUMERICAL if failed else EXIT_OK


def _cmd_mc(args):
    sweep = bench.parse_sweep_config(args.config)
    if args.trials is not None:
        from dataclasses import replace

        sweep = replace(sweep, n_trials=args.trials)
    if args.seed is not None:
        from dataclasses import replace

        sweep = replace(sweep, base_seed=args.seed)
    rows = bench.run_sweep(
        sweep,
        success_threshold=args.success_threshold,
        jobs=args.jobs,
        timing=args.timing,
    )
    bench.write_csv(args.out, rows, sweep, args.success_threshold)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def _method_config(method, p_extra):
    token = method.lower()
    if token in ("modex", "epuma"):
        token = f"{token}:{p_extra}"
    elif p_extra:
        raise ValidationError("--p-extra requires --method modex or epuma")
    return bench.parse_method_token(token)


def _cmd_estimate(args):
    Y = snapshot_io.read_snapshots(args.input)
    config = _method_config(args.method, args.p_extra)
    cov = sample_covariance(Y)
    if not (0 < args.r < cov.m):
        raise ValidationError(f"need 0 < r < m, got r={args.r}, m={cov.m}")
    if config.method == "MODEX" and config.p_extra >= cov.m - args.r:
        raise ValidationError(
            f"p_extra must satisfy p < m - r (= {cov.m - args.r})"
        )
    decomp = subspace_decomposition(cov, args.r)
    weight = signal_weight(decomp)
    result = run_estimator(cov, decomp, weight, args.r, config)
    print("angles_rad: " + " ".join(f"{a:.9f}" for a in np.sort(result.angles)))
    print(f"criterion_value: {result.criterion_value:.6e}")
    print(f"iterations: {result.iterations_used}")
    print(f"converged: {result.converged}")
    return EXIT_OK


def _cmd_simulate(args):
    angles = AngleSet([float(a) for a in args.angles.split(",")])
    r = angles.r
    P = np.eye(r, dtype=complex)
    noise = args.noise_power
    if args.snr_db is not None:
        noise = bench.noise_power_for_snr(P, r, args.snr_db)
    scenario = Scenario(
        m=args.m,
        r=r,
        angles=angles,
        source_cov=P,
        noise_power=noise,
        n_snapshots=args.snapshots,
        seed=args.seed,
    )
    snaps = simulate_snapshots(scenario)
    snapshot_io.write_snapshots(args.out, snaps.snapshots)
    print(f"wrote {scenario.n_snapshots} snapshots to {args.out}")
    return EXIT_OK


def main(argv=None):
    args = _build_parser().parse_args(argv)
    handlers = {
        "verify": _cmd_verify,
        "mc": _cmd_mc,
        "estimate": _cmd_estimate,
        "simulate": _cmd_simulate,
    }
    try:
        return handlers[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SingularityError, NumericalError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
