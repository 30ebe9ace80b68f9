"""Experiment orchestration: replicate scheduling, aggregation, reports.

An experiment fixes one truth (drawn once from the master seed, shared
by every fitted topic count H and every replicate), runs D independent
replicates per H, and compares the averaged coefficient samples with
the exact values from ``lda_rlct.rlct``.  Per-replicate seeds are
derived by hashing (master_seed, H, replicate) with sha256, so any
subset of the schedule can be reproduced in isolation and the emitted
CSV bytes do not depend on thread count or completion order.
"""

from __future__ import annotations

import csv
import hashlib
import json
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .estimator import LossReport, aggregate, run_replicate
from .gibbs import GibbsConfig
from .model import TrueModel, intrinsic_rank, sample_true_model
from .rlct import InvalidShapeError, LdaShape, lda_dimension, lda_rlct

__all__ = [
    "ExperimentConfig",
    "ReplicateRow",
    "ReportRow",
    "ExperimentReport",
    "derive_seed",
    "run_experiment",
    "summarize_replicates",
    "write_replicate_csv",
    "read_replicate_csv",
    "write_report_csv",
    "write_summary",
]

REPLICATE_FIELDS = (
    "replicate", "H", "n", "G_n", "S_n", "T_n", "V_n", "W_n",
    "lambda_sample", "seed",
)
REPORT_FIELDS = (
    "H", "lambda_theory", "multiplicity", "lambda_hat", "std",
    "abs_diff", "half_dim",
)


def derive_seed(master_seed: int, *parts: object) -> int:
    """Stable 64-bit seed from the master seed and a label tuple."""
    text = ":".join([str(master_seed), *(str(p) for p in parts)])
    digest = hashlib.sha256(text.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass
class ExperimentConfig:
    """Everything one simulation needs, loadable from JSON.

    H_list are the fitted topic counts; H0 the true one.  n is tokens
    per dataset, D replicates per H, num_test_tokens the Monte Carlo
    test-set size when gn_mode is "mc".  doc_dist of None means
    uniform.  fresh_truth_per_replicate redraws the truth for each
    replicate instead of sharing one; dump_draws writes every
    replicate's retained draws beside the CSVs.
    """

    M: int = 10
    N: int = 5
    H0: int = 2
    n: int = 1_000
    D: int = 100
    H_list: tuple[int, ...] = (2, 3, 4, 5)
    num_test_tokens: int = 200_000
    gn_mode: str = "exact"
    master_seed: int = 0
    doc_dist: tuple[float, ...] | None = None
    fresh_truth_per_replicate: bool = False
    dump_draws: bool = False
    gibbs: GibbsConfig = field(default_factory=GibbsConfig)

    def __post_init__(self) -> None:
        if isinstance(self.gibbs, dict):
            self.gibbs = GibbsConfig(**self.gibbs)
        self.H_list = tuple(int(h) for h in self.H_list)
        if not self.H_list:
            raise InvalidShapeError("H_list must not be empty")
        if self.D < 2:
            raise InvalidShapeError(f"D >= 2 required, got D={self.D}")
        if self.n < 1:
            raise InvalidShapeError(f"n >= 1 required, got n={self.n}")
        if self.num_test_tokens < 2:
            raise InvalidShapeError(
                f"num_test_tokens >= 2 required, got {self.num_test_tokens}"
            )
        if self.gn_mode not in ("exact", "mc"):
            raise ValueError(f"gn_mode must be 'exact' or 'mc', got {self.gn_mode!r}")
        if self.doc_dist is not None:
            self.doc_dist = tuple(float(x) for x in self.doc_dist)
        # the generic intrinsic rank this truth will have; also checks
        # every H in H_list gives a valid shape before any work starts
        r = min(self.M - 1, self.N - 1, self.H0 - 1)
        for H in self.H_list:
            LdaShape(self.M, self.N, H, self.H0, r)

    @property
    def generic_rank(self) -> int:
        return min(self.M - 1, self.N - 1, self.H0 - 1)

    @classmethod
    def from_json(cls, path: Path | str) -> "ExperimentConfig":
        with open(path, encoding="ascii") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: invalid JSON ({exc})") from None
        known = {f for f in cls.__dataclass_fields__}
        extra = set(raw) - known
        if extra:
            raise ValueError(f"{path}: unknown config keys {sorted(extra)}")
        return cls(**raw)

    def to_json(self, path: Path | str) -> None:
        data = asdict(self)
        Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="ascii")


@dataclass(frozen=True)
class ReplicateRow:
    """One CSV row of the per-replicate record."""

    replicate: int
    H: int
    n: int
    losses: LossReport
    seed: int


@dataclass(frozen=True)
class ReportRow:
    H: int
    lambda_theory: Fraction
    multiplicity: int
    lambda_hat: float
    std: float
    abs_diff: float
    half_dim: Fraction


@dataclass
class ExperimentReport:
    rows: list[ReportRow]
    provenance: dict


def _truth_for(config: ExperimentConfig, replicate: int | None) -> TrueModel:
    if replicate is None:
        seed = derive_seed(config.master_seed, "truth")
    else:
        seed = derive_seed(config.master_seed, "truth", replicate)
    doc_dist = np.asarray(config.doc_dist) if config.doc_dist is not None else None
    return sample_true_model(
        config.M, config.N, config.H0, np.random.default_rng(seed), doc_dist=doc_dist
    )


def run_experiment(config: ExperimentConfig, threads: int = 1,
                   out_dir: Path | str | None = None
                   ) -> tuple[ExperimentReport, list[ReplicateRow]]:
    """Run the whole replicate schedule and aggregate per H.

    Returns the report and the flat replicate rows, ordered by (H,
    replicate) regardless of scheduling.  With out_dir set, also
    writes replicates.csv, report.csv, summary.txt, truth.txt and,
    if configured, per-replicate draw dumps.
    """
    shared_truth = None if config.fresh_truth_per_replicate else _truth_for(config, None)
    rank = (shared_truth.r if shared_truth is not None else config.generic_rank)

    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)

    def one(task: tuple[int, int]) -> ReplicateRow:
        H, d = task
        seed = derive_seed(config.master_seed, H, d)
        truth = shared_truth if shared_truth is not None else _truth_for(config, d)
        gibbs = GibbsConfig(
            alpha=config.gibbs.alpha, beta=config.gibbs.beta,
            burn_in=config.gibbs.burn_in, thinning=config.gibbs.thinning,
            num_draws=config.gibbs.num_draws, seed=seed,
        )
        losses = run_replicate(
            truth, H, config.n, gibbs,
            gn_mode=config.gn_mode, num_test_tokens=config.num_test_tokens,
        )
        return ReplicateRow(replicate=d, H=H, n=config.n, losses=losses, seed=seed)

    tasks = [(H, d) for H in config.H_list for d in range(config.D)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, tasks))
    else:
        rows = [one(t) for t in tasks]
    rows.sort(key=lambda row: (row.H, row.replicate))

    report = summarize_replicates(rows, config.M, config.N, rank)
    report.provenance.update(_provenance(config, rank))

    if out_path is not None:
        write_replicate_csv(rows, out_path / "replicates.csv")
        write_report_csv(report, out_path / "report.csv")
        write_summary(report, out_path / "summary.txt")
        if shared_truth is not None:
            from .io import write_true_model

            write_true_model(shared_truth, out_path / "truth.txt")
        if config.dump_draws:
            _dump_all_draws(config, out_path)
    return report, rows


def _dump_all_draws(config: ExperimentConfig, out_path: Path) -> None:
    # rerun each replicate's chain deterministically and dump its draws;
    # heavy, so only behind the config flag
    from .gibbs import run
    from .io import write_draws
    from .model import generate_dataset

    draw_dir = out_path / "draws"
    draw_dir.mkdir(exist_ok=True)
    shared_truth = None if config.fresh_truth_per_replicate else _truth_for(config, None)
    for H in config.H_list:
        for d in range(config.D):
            seed = derive_seed(config.master_seed, H, d)
            truth = shared_truth if shared_truth is not None else _truth_for(config, d)
            rng_data, rng_chain, _ = (
                np.random.default_rng(s)
                for s in np.random.SeedSequence(seed).spawn(3)
            )
            dataset = generate_dataset(truth, config.n, rng_data)
            gibbs = GibbsConfig(
                alpha=config.gibbs.alpha, beta=config.gibbs.beta,
                burn_in=config.gibbs.burn_in, thinning=config.gibbs.thinning,
                num_draws=config.gibbs.num_draws, seed=seed,
            )
            draws = run(dataset, H, gibbs, rng=rng_chain)
            write_draws(draws, draw_dir / f"H{H}_rep{d:03d}.txt")


def summarize_replicates(rows: list[ReplicateRow], M: int, N: int,
                         rank: int) -> ExperimentReport:
    """Aggregate replicate rows per H against the exact coefficients.

    The theory column is always recomputed from the closed form, never
    read from any file.  Rows are sorted before aggregation, so row
    order in the input cannot change the output.
    """
    if not rows:
        raise ValueError("no replicate rows to summarize")
    report_rows = []
    for H in sorted({row.H for row in rows}):
        group = sorted(
            (row for row in rows if row.H == H), key=lambda row: row.replicate
        )
        est = aggregate([row.losses.lambda_sample for row in group])
        theory = lda_rlct(M, N, H, rank)
        report_rows.append(ReportRow(
            H=H,
            lambda_theory=theory.lam,
            multiplicity=theory.multiplicity,
            lambda_hat=est.lambda_hat,
            std=est.std,
            abs_diff=abs(est.lambda_hat - float(theory.lam)),
            half_dim=Fraction(lda_dimension(M, N, H), 2),
        ))
    return ExperimentReport(rows=report_rows, provenance={})


def _provenance(config: ExperimentConfig, rank: int) -> dict:
    import numba

    notes = [
        "truth columns drawn Dirichlet(1,...,1), rejected until full rank "
        "and generic intrinsic rank",
        "seed scheme: sha256(master_seed:H:replicate), truth from "
        "sha256(master_seed:truth)",
    ]
    if config.gibbs.alpha != 1.0 or config.gibbs.beta != 1.0:
        notes.append(
            f"non-uniform Dirichlet prior in effect (alpha={config.gibbs.alpha}, "
            f"beta={config.gibbs.beta}); coefficient estimates can be mildly "
            "prior sensitive at finite n"
        )
    return {
        "config": asdict(config),
        "intrinsic_rank": rank,
        "master_seed": config.master_seed,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "numba": numba.__version__,
            "lda_rlct": __version__,
        },
        "notes": notes,
    }


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_replicate_csv(rows: list[ReplicateRow], path: Path | str) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPLICATE_FIELDS)
        for row in rows:
            ls = row.losses
            writer.writerow([
                row.replicate, row.H, row.n,
                _fmt(ls.g_n), _fmt(ls.s_n), _fmt(ls.t_n), _fmt(ls.v_n),
                _fmt(ls.w_n), _fmt(ls.lambda_sample), row.seed,
            ])


def read_replicate_csv(path: Path | str) -> list[ReplicateRow]:
    """Parse a replicate CSV, pointing at the first offending line."""
    rows = []
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != REPLICATE_FIELDS:
            raise ValueError(
                f"{path}:1: expected header {','.join(REPLICATE_FIELDS)}"
            )
        for line_num, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(REPLICATE_FIELDS):
                raise ValueError(
                    f"{path}:{line_num}: expected {len(REPLICATE_FIELDS)} fields, "
                    f"got {len(record)}"
                )
            try:
                rows.append(ReplicateRow(
                    replicate=int(record[0]), H=int(record[1]), n=int(record[2]),
                    losses=LossReport(
                        g_n=float(record[3]), s_n=float(record[4]),
                        t_n=float(record[5]), v_n=float(record[6]),
                        w_n=float(record[7]), lambda_sample=float(record[8]),
                    ),
                    seed=int(record[9]),
                ))
            except ValueError:
                raise ValueError(
                    f"{path}:{line_num}: malformed record {record!r}"
                ) from None
    if not rows:
        raise ValueError(f"{path}: no replicate rows")
    return rows


def write_report_csv(report: ExperimentReport, path: Path | str) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_FIELDS)
        for row in report.rows:
            writer.writerow([
                row.H, str(row.lambda_theory), row.multiplicity,
                _fmt(row.lambda_hat), _fmt(row.std), _fmt(row.abs_diff),
                str(row.half_dim),
            ])


def write_summary(report: ExperimentReport, path: Path | str) -> None:
    """Human-readable summary; only its timestamp varies between runs."""
    from datetime import datetime, timezone

    lines = ["coefficient recovery summary", "=" * 28, ""]
    header = f"{'H':>3} {'lambda':>10} {'mult':>4} {'lambda_hat':>12} {'std':>10} {'abs_diff':>10} {'half_dim':>9}"
    lines.append(header)
    for row in report.rows:
        lines.append(
            f"{row.H:>3} {str(row.lambda_theory):>10} {row.multiplicity:>4} "
            f"{row.lambda_hat:>12.4f} {row.std:>10.4f} {row.abs_diff:>10.4f} "
            f"{str(row.half_dim):>9}"
        )
    lines.append("")
    if report.provenance:
        lines.append("provenance:")
        for key in ("master_seed", "intrinsic_rank", "versions"):
            if key in report.provenance:
                lines.append(f"  {key}: {report.provenance[key]}")
        for note in report.provenance.get("notes", []):
            lines.append(f"  note: {note}")
        lines.append(f"  timestamp: {datetime.now(timezone.utc).isoformat()}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
