"""Ranking quality metrics and their aggregation across evaluation runs.

Per-report metrics over a ranked candidate list and a non-empty relevant
set, all evaluated at a cutoff ``k``:

* Accuracy@k: 1 if any relevant id appears in the top k, else 0.
* MRR@k: 1/rank of the first relevant id when that rank is <= k, else 0.
* NDCG@k: binary-gain DCG over the top k divided by the ideal DCG, whose
  sum is truncated at ``min(len(relevant), k)`` positions.

Aggregation first averages per-report values within a run, then reports
the mean and sample standard deviation across runs (zero for one run).
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "MetricSummary",
    "MetricReport",
    "accuracy_at_k",
    "mrr_at_k",
    "ndcg_at_k",
    "aggregate",
    "report_rows",
    "write_reports_csv",
    "write_reports_json",
]

METRIC_NAMES = ("accuracy", "mrr", "ndcg")


def _ranked_ids(ranked: object) -> Sequence[str]:
    ids = getattr(ranked, "incident_ids", None)
    if ids is not None:
        return ids
    return ranked  # type: ignore[return-value]


def _check_inputs(relevant: frozenset[str] | set[str], k: int) -> None:
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if not relevant:
        raise ValueError("relevant set must be non-empty")


def accuracy_at_k(ranked: object, relevant: set[str] | frozenset[str], k: int) -> int:
    """1 if any relevant id is ranked within the top k, else 0."""
    _check_inputs(relevant, k)
    ids = _ranked_ids(ranked)
    return int(any(candidate in relevant for candidate in ids[:k]))


def mrr_at_k(ranked: object, relevant: set[str] | frozenset[str], k: int) -> float:
    """Reciprocal rank of the first relevant id, or 0 if none within k."""
    _check_inputs(relevant, k)
    ids = _ranked_ids(ranked)
    for position, candidate in enumerate(ids[:k], start=1):
        if candidate in relevant:
            return 1.0 / position
    return 0.0


def ndcg_at_k(ranked: object, relevant: set[str] | frozenset[str], k: int) -> float:
    """Binary-gain NDCG with the ideal DCG truncated at min(|relevant|, k)."""
    _check_inputs(relevant, k)
    ids = _ranked_ids(ranked)
    dcg = 0.0
    for position, candidate in enumerate(ids[:k], start=1):
        if candidate in relevant:
            dcg += 1.0 / math.log2(position + 1)
    ideal_positions = min(len(relevant), k)
    idcg = sum(1.0 / math.log2(position + 1) for position in range(1, ideal_positions + 1))
    return dcg / idcg


@dataclass(frozen=True)
class MetricSummary:
    """Mean and run-to-run spread for a single metric at a single k."""

    mean: float
    std: float
    n_reports: int
    n_runs: int


def aggregate(runs: Sequence[Sequence[float]]) -> MetricSummary:
    """Collapse per-report values from one or more runs into a summary.

    Each inner sequence holds one run's per-report values over the same
    evaluation set; runs must be non-empty and equally sized.
    """
    if not runs:
        raise ValueError("aggregate requires at least one run")
    sizes = {len(run) for run in runs}
    if 0 in sizes:
        raise ValueError("each run must contain at least one report value")
    if len(sizes) != 1:
        raise ValueError(f"runs cover different report counts: {sorted(sizes)}")
    run_means = [statistics.fmean(run) for run in runs]
    mean = statistics.fmean(run_means)
    std = statistics.stdev(run_means) if len(run_means) > 1 else 0.0
    return MetricSummary(
        mean=mean, std=std, n_reports=sizes.pop(), n_runs=len(runs)
    )


@dataclass(frozen=True)
class MetricReport:
    """All three metric summaries for one cutoff."""

    k: int
    accuracy: MetricSummary
    mrr: MetricSummary
    ndcg: MetricSummary

    def __post_init__(self) -> None:
        counts = {
            (s.n_reports, s.n_runs) for s in (self.accuracy, self.mrr, self.ndcg)
        }
        if len(counts) != 1:
            raise ValueError("metric summaries disagree on report/run counts")

    @property
    def n_reports(self) -> int:
        return self.accuracy.n_reports

    @property
    def n_runs(self) -> int:
        return self.accuracy.n_runs

    @classmethod
    def from_runs(
        cls,
        k: int,
        accuracy_runs: Sequence[Sequence[float]],
        mrr_runs: Sequence[Sequence[float]],
        ndcg_runs: Sequence[Sequence[float]],
    ) -> "MetricReport":
        return cls(
            k=k,
            accuracy=aggregate(accuracy_runs),
            mrr=aggregate(mrr_runs),
            ndcg=aggregate(ndcg_runs),
        )


def report_rows(reports: Iterable[MetricReport]) -> list[dict[str, object]]:
    """Flatten reports to rows with the fixed column order (k, metric, mean, std, n)."""
    rows: list[dict[str, object]] = []
    for report in reports:
        for name in METRIC_NAMES:
            summary: MetricSummary = getattr(report, name)
            rows.append(
                {
                    "k": report.k,
                    "metric": name,
                    "mean": summary.mean,
                    "std": summary.std,
                    "n": summary.n_reports,
                }
            )
    return rows


def write_reports_csv(reports: Iterable[MetricReport], path: str | Path) -> None:
    rows = report_rows(reports)
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["k", "metric", "mean", "std", "n"])
        for row in rows:
            writer.writerow([row["k"], row["metric"], repr(row["mean"]), repr(row["std"]), row["n"]])


def write_reports_json(reports: Iterable[MetricReport], path: str | Path) -> None:
    rows = report_rows(reports)
    Path(path).write_text(
        json.dumps(rows, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
