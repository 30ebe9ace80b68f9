"""Command line interface.

Subcommands:
    rlct      exact coefficients for a range of fitted topic counts
    simulate  run the replicate schedule from a JSON config
    curve     asymptotic learning-curve table for one coefficient
    report    re-aggregate an existing replicate CSV
"""

from __future__ import annotations

import argparse
import csv
import sys
from fractions import Fraction
from pathlib import Path

from .harness import (
    ExperimentConfig,
    read_replicate_csv,
    run_experiment,
    summarize_replicates,
    write_report_csv,
    write_summary,
)
from .model import intrinsic_rank
from .rlct import curve_rows, lda_dimension, lda_rlct


def _out_dir(args: argparse.Namespace) -> Path:
    path = Path(args.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_rlct(args: argparse.Namespace) -> int:
    if (args.r is None) == (args.truth is None):
        print("rlct: give exactly one of --r or --truth", file=sys.stderr)
        return 2
    if args.truth is not None:
        from .io import read_true_model

        truth = read_true_model(args.truth)
        if (truth.M, truth.N) != (args.M, args.N):
            print(
                f"rlct: truth file is {truth.M} x {truth.N}, "
                f"flags say {args.M} x {args.N}",
                file=sys.stderr,
            )
            return 2
        r = intrinsic_rank(truth.A0, truth.B0)
    else:
        r = args.r
    rows = []
    for H in range(args.h_min, args.h_max + 1):
        res = lda_rlct(args.M, args.N, H, r)
        rows.append([
            H, str(res.lam), res.multiplicity,
            str(Fraction(lda_dimension(args.M, args.N, H), 2)),
        ])
    writer = csv.writer(sys.stdout)
    writer.writerow(["H", "lambda", "multiplicity", "half_dim"])
    writer.writerows(rows)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        config.master_seed = args.seed
    if args.gn_mode is not None:
        config.gn_mode = args.gn_mode
    out = _out_dir(args)
    report, rows = run_experiment(config, threads=args.threads, out_dir=out)
    for row in report.rows:
        print(
            f"H={row.H}: lambda={row.lambda_theory} lambda_hat={row.lambda_hat:.4f} "
            f"std={row.std:.4f} abs_diff={row.abs_diff:.4f}"
        )
    print(f"wrote {out / 'replicates.csv'} ({len(rows)} rows)")
    return 0


def cmd_curve(args: argparse.Namespace) -> int:
    lam = Fraction(args.lam)
    if args.n_min < 16:
        print("curve: n values must be >= 16", file=sys.stderr)
        return 2
    if args.n_points < 2 or args.n_max < args.n_min:
        print("curve: need n_max >= n_min and at least 2 points", file=sys.stderr)
        return 2
    # geometric grid, deduplicated after rounding to integers
    ratio = (args.n_max / args.n_min) ** (1.0 / (args.n_points - 1))
    grid = sorted({int(round(args.n_min * ratio**k)) for k in range(args.n_points)})
    rows = curve_rows(lam, args.mult, grid, dimension=args.dim)
    writer = csv.writer(sys.stdout)
    if args.dim is None:
        writer.writerow(["n", "e_gen_lda"])
        writer.writerows([n, f"{e:.17g}"] for n, e, _ in rows)
    else:
        writer.writerow(["n", "e_gen_lda", "e_gen_regular"])
        writer.writerows([n, f"{e:.17g}", f"{er:.17g}"] for n, e, er in rows)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    rows = read_replicate_csv(args.replicates)
    report = summarize_replicates(rows, args.M, args.N, args.r)
    out = _out_dir(args)
    write_report_csv(report, out / "report.csv")
    write_summary(report, out / "summary.txt")
    for row in report.rows:
        print(
            f"H={row.H}: lambda={row.lambda_theory} lambda_hat={row.lambda_hat:.4f} "
            f"std={row.std:.4f} abs_diff={row.abs_diff:.4f}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lda-rlct",
        description="Exact LDA learning coefficients and their simulation check",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rlct", help="print exact coefficients per topic count")
    p.add_argument("--m", dest="M", type=int, required=True, help="vocabulary size")
    p.add_argument("--n", dest="N", type=int, required=True, help="document count")
    p.add_argument("--h-min", type=int, required=True)
    p.add_argument("--h-max", type=int, required=True)
    p.add_argument("--r", type=int, help="intrinsic rank of the truth")
    p.add_argument("--truth", help="truth file to take the rank from instead")
    p.set_defaults(func=cmd_rlct)

    p = sub.add_parser("simulate", help="run the replicate schedule from a config")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--gn-mode", choices=["exact", "mc"],
                   help="override generalization-error mode")
    p.add_argument("--out-dir", default="out", help="directory for CSVs and summary")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("curve", help="asymptotic learning-curve table")
    p.add_argument("--lam", required=True,
                   help="coefficient as a fraction, e.g. 21/2")
    p.add_argument("--mult", type=int, default=1, help="multiplicity")
    p.add_argument("--n-min", type=int, default=16)
    p.add_argument("--n-max", type=int, default=100_000)
    p.add_argument("--n-points", type=int, default=50)
    p.add_argument("--dim", type=int,
                   help="parameter count for the d/(2n) comparison column")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("report", help="re-aggregate a replicate CSV")
    p.add_argument("replicates", help="replicates.csv produced by simulate")
    p.add_argument("--m", dest="M", type=int, required=True)
    p.add_argument("--n", dest="N", type=int, required=True)
    p.add_argument("--r", type=int, required=True, help="intrinsic rank")
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
