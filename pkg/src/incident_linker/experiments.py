"""Evaluation protocols over a corpus and a fixed dataset split.

Four protocols share one harness:

* ``baselines``: compare retrieval backends at several cutoffs.
* ``rq1``: ablate the input mode (title only vs. title plus description).
* ``rq2``: stratify test reports by raw description length around a
  median or 25th-percentile threshold.
* ``rq3``: grow the training pool in chronological batches and refit the
  trainable state (hashing-provider statistics) per fold.

Runs are seeded: the dense backend re-derives its hash seed per run so the
spread across seeds is meaningful, while deterministic backends simply
repeat and report zero spread. Identical corpus, config, and seeds produce
byte-identical output tables.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .corpus import Corpus, DatasetSplit, Report, load_snapshot, split as split_corpus
from .embedding import HashingEmbedderConfig, HashingProvider, fit_stats
from .lexical import BM25Params
from .metrics import MetricReport, accuracy_at_k, mrr_at_k, ndcg_at_k
from .retrieval import PipelineConfig, index_incidents, rank
from .textprep import DEFAULT_CONFIG, InputMode, PreprocessConfig, load_stopwords, prepare

logger = logging.getLogger(__name__)

__all__ = [
    "TemporalFoldPlan",
    "StratificationSpec",
    "BackendSpec",
    "ExperimentRun",
    "ExperimentConfig",
    "make_temporal_folds",
    "run_model_comparison",
    "run_input_mode_ablation",
    "run_length_stratification",
    "run_temporal_growth",
    "run_protocol",
    "percentage_gain",
    "format_gain",
    "write_run_csv",
    "write_run_json",
    "PROTOCOLS",
]

PROTOCOLS = ("baselines", "rq1", "rq2", "rq3")


@dataclass(frozen=True)
class TemporalFoldPlan:
    """Nested chronological prefixes of the training reports.

    Fold ``i`` (1-based) holds the first ``i * batch_size`` reports in
    submission order; the last fold absorbs the remainder, so it always
    equals the full training pool.
    """

    batch_size: int
    fold_count: int
    fold_sizes: tuple[int, ...]
    ordered_report_ids: tuple[str, ...]

    def fold_ids(self, fold: int) -> tuple[str, ...]:
        if not 1 <= fold <= self.fold_count:
            raise ValueError(f"fold must be in [1, {self.fold_count}], got {fold}")
        return self.ordered_report_ids[: self.fold_sizes[fold - 1]]


def make_temporal_folds(reports: Sequence[Report], batch_size: int) -> TemporalFoldPlan:
    """Order reports by (submission date, id) and plan prefix folds.

    Reports without a submission date cannot be ordered and abort the plan.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be at least 1, got {batch_size}")
    if not reports:
        raise ValueError("cannot plan folds over an empty report list")
    undated = sorted(r.id for r in reports if r.submitted_at is None)
    if undated:
        raise ValueError(f"reports missing submission dates: {undated[:5]}")
    ordered = sorted(reports, key=lambda r: (r.submitted_at, r.id))
    total = len(ordered)
    fold_count = -(-total // batch_size)
    sizes = tuple(
        min(fold * batch_size, total) for fold in range(1, fold_count + 1)
    )
    return TemporalFoldPlan(
        batch_size=batch_size,
        fold_count=fold_count,
        fold_sizes=sizes,
        ordered_report_ids=tuple(r.id for r in ordered),
    )


@dataclass(frozen=True)
class StratificationSpec:
    """How to threshold raw description lengths for the length protocol.

    The threshold is computed over the test set by default; setting
    ``full_dataset`` widens it to every report in the corpus.
    """

    kind: str = "median"
    full_dataset: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("median", "p25"):
            raise ValueError(f"stratification kind must be median or p25, got {self.kind!r}")

    @property
    def percentile(self) -> float:
        return 50.0 if self.kind == "median" else 25.0


@dataclass(frozen=True)
class BackendSpec:
    """A backend condition in a comparison table."""

    kind: str
    label: str = ""
    bm25: BM25Params = field(default_factory=BM25Params)
    dim: int = 4096

    def __post_init__(self) -> None:
        if self.kind not in ("bm25", "dense"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if not self.label:
            object.__setattr__(self, "label", self.kind)


@dataclass(frozen=True)
class ExperimentRun:
    """A completed protocol run: metric reports keyed by (k, condition)."""

    protocol: str
    k_values: tuple[int, ...]
    conditions: tuple[str, ...]
    seeds: tuple[int, ...]
    split: DatasetSplit
    outputs: Mapping[tuple[int, str], MetricReport]
    details: Mapping[str, Any] = field(default_factory=dict)


def _prepare_tokens(
    title: str, description: str, mode: InputMode, preprocess: PreprocessConfig
) -> tuple[str, ...]:
    return prepare(title, description, mode, preprocess).tokens


def _fit_provider(
    corpus: Corpus,
    fit_report_ids: Iterable[str],
    mode: InputMode,
    preprocess: PreprocessConfig,
    dim: int,
    seed: int,
) -> HashingProvider:
    """Fit hashing statistics on the given reports plus every incident text."""
    documents: list[tuple[str, ...]] = []
    for report_id in sorted(fit_report_ids):
        report = corpus.reports[report_id]
        documents.append(_prepare_tokens(report.title, report.description, mode, preprocess))
    for incident_id in sorted(corpus.incidents):
        incident = corpus.incidents[incident_id]
        documents.append(
            _prepare_tokens(incident.title, incident.description, mode, preprocess)
        )
    return HashingProvider(
        fit_stats(documents),
        HashingEmbedderConfig(dim=dim, hash_seed=seed),
        preprocess,
    )


def _pipeline_for(
    spec: BackendSpec,
    corpus: Corpus,
    fit_report_ids: Sequence[str],
    seed: int,
    mode: InputMode,
    preprocess: PreprocessConfig,
    k: int,
) -> PipelineConfig:
    if spec.kind == "bm25":
        return PipelineConfig(
            backend="bm25", input_mode=mode, preprocess=preprocess, k=k, bm25=spec.bm25
        )
    provider = _fit_provider(corpus, fit_report_ids, mode, preprocess, spec.dim, seed)
    return PipelineConfig(
        backend="dense", input_mode=mode, preprocess=preprocess, k=k, provider=provider
    )


def _rank_test_set(
    corpus: Corpus, test_ids: Sequence[str], config: PipelineConfig, kmax: int
) -> dict[str, tuple[str, ...]]:
    index = index_incidents(corpus, config)
    rankings: dict[str, tuple[str, ...]] = {}
    for report_id in sorted(test_ids):
        report = corpus.reports[report_id]
        rankings[report_id] = rank(report, index, config, k=kmax).incident_ids
    return rankings


def _metric_run(
    corpus: Corpus,
    rankings: Mapping[str, tuple[str, ...]],
    report_ids: Sequence[str],
    k: int,
) -> tuple[list[float], list[float], list[float]]:
    accuracy: list[float] = []
    mrr: list[float] = []
    ndcg: list[float] = []
    for report_id in sorted(report_ids):
        relevant = corpus.reports[report_id].incident_ids
        ranked = rankings[report_id]
        accuracy.append(float(accuracy_at_k(ranked, relevant, k)))
        mrr.append(mrr_at_k(ranked, relevant, k))
        ndcg.append(ndcg_at_k(ranked, relevant, k))
    return accuracy, mrr, ndcg


def _reports_from_rankings(
    corpus: Corpus,
    per_seed_rankings: Sequence[Mapping[str, tuple[str, ...]]],
    report_ids: Sequence[str],
    k_values: Sequence[int],
) -> dict[int, MetricReport]:
    reports: dict[int, MetricReport] = {}
    for k in k_values:
        accuracy_runs, mrr_runs, ndcg_runs = [], [], []
        for rankings in per_seed_rankings:
            accuracy, mrr, ndcg = _metric_run(corpus, rankings, report_ids, k)
            accuracy_runs.append(accuracy)
            mrr_runs.append(mrr)
            ndcg_runs.append(ndcg)
        reports[k] = MetricReport.from_runs(k, accuracy_runs, mrr_runs, ndcg_runs)
    return reports


def run_model_comparison(
    corpus: Corpus,
    split: DatasetSplit,
    backends: Sequence[BackendSpec],
    seeds: Sequence[int] = (1, 2, 3, 4, 5),
    *,
    k_values: Sequence[int] = (3, 5, 10),
    input_mode: InputMode = InputMode.TITLE_AND_DESCRIPTION,
    preprocess: PreprocessConfig = DEFAULT_CONFIG,
) -> ExperimentRun:
    """Evaluate each backend on the test split at each cutoff."""
    if not backends:
        raise ValueError("at least one backend is required")
    if not seeds:
        raise ValueError("at least one seed is required")
    kmax = max(k_values)
    outputs: dict[tuple[int, str], MetricReport] = {}
    for spec in backends:
        per_seed = [
            _rank_test_set(
                corpus,
                split.test,
                _pipeline_for(spec, corpus, split.train, seed, input_mode, preprocess, kmax),
                kmax,
            )
            for seed in seeds
        ]
        for k, report in _reports_from_rankings(corpus, per_seed, split.test, k_values).items():
            outputs[(k, spec.label)] = report
    return ExperimentRun(
        protocol="baselines",
        k_values=tuple(k_values),
        conditions=tuple(spec.label for spec in backends),
        seeds=tuple(seeds),
        split=split,
        outputs=outputs,
    )


def run_input_mode_ablation(
    corpus: Corpus,
    split: DatasetSplit,
    backend: BackendSpec,
    seeds: Sequence[int] = (1, 2, 3, 4, 5),
    *,
    k_values: Sequence[int] = (3, 5, 10),
    preprocess: PreprocessConfig = DEFAULT_CONFIG,
) -> ExperimentRun:
    """Compare title-only against title-plus-description on the same test ids."""
    if not seeds:
        raise ValueError("at least one seed is required")
    kmax = max(k_values)
    outputs: dict[tuple[int, str], MetricReport] = {}
    modes = (InputMode.TITLE_ONLY, InputMode.TITLE_AND_DESCRIPTION)
    for mode in modes:
        per_seed = [
            _rank_test_set(
                corpus,
                split.test,
                _pipeline_for(backend, corpus, split.train, seed, mode, preprocess, kmax),
                kmax,
            )
            for seed in seeds
        ]
        for k, report in _reports_from_rankings(corpus, per_seed, split.test, k_values).items():
            outputs[(k, mode.value)] = report
    return ExperimentRun(
        protocol="rq1",
        k_values=tuple(k_values),
        conditions=tuple(mode.value for mode in modes),
        seeds=tuple(seeds),
        split=split,
        outputs=outputs,
        details={"backend": backend.label},
    )


def run_length_stratification(
    corpus: Corpus,
    split: DatasetSplit,
    backend: BackendSpec,
    stratification: StratificationSpec = StratificationSpec(),
    seeds: Sequence[int] = (1, 2, 3, 4, 5),
    *,
    k_values: Sequence[int] = (3, 5, 10),
    input_mode: InputMode = InputMode.TITLE_AND_DESCRIPTION,
    preprocess: PreprocessConfig = DEFAULT_CONFIG,
) -> ExperimentRun:
    """Split test reports into short/long strata around a length threshold.

    The threshold is a linear-interpolation percentile of raw description
    lengths; a report is short when its length falls strictly below it. An
    empty stratum is reported as a warning, not an error.
    """
    if not seeds:
        raise ValueError("at least one seed is required")
    pool = sorted(corpus.reports) if stratification.full_dataset else sorted(split.test)
    lengths = [len(corpus.reports[rid].description) for rid in pool]
    threshold = float(np.percentile(lengths, stratification.percentile))

    short_ids = [
        rid for rid in sorted(split.test) if len(corpus.reports[rid].description) < threshold
    ]
    long_ids = [
        rid for rid in sorted(split.test) if len(corpus.reports[rid].description) >= threshold
    ]
    strata = {"short": short_ids, "long": long_ids}
    warnings: list[str] = []

    kmax = max(k_values)
    per_seed = [
        _rank_test_set(
            corpus,
            split.test,
            _pipeline_for(backend, corpus, split.train, seed, input_mode, preprocess, kmax),
            kmax,
        )
        for seed in seeds
    ]
    outputs: dict[tuple[int, str], MetricReport] = {}
    for label, report_ids in strata.items():
        if not report_ids:
            message = f"stratum {label!r} is empty at threshold {threshold}"
            warnings.append(message)
            logger.warning(message)
            continue
        for k, report in _reports_from_rankings(corpus, per_seed, report_ids, k_values).items():
            outputs[(k, label)] = report
    return ExperimentRun(
        protocol="rq2",
        k_values=tuple(k_values),
        conditions=tuple(strata),
        seeds=tuple(seeds),
        split=split,
        outputs=outputs,
        details={
            "backend": backend.label,
            "threshold_kind": stratification.kind,
            "threshold": threshold,
            "threshold_over_full_dataset": stratification.full_dataset,
            "stratum_sizes": {label: len(ids) for label, ids in strata.items()},
            "warnings": warnings,
        },
    )


def percentage_gain(later: float, earlier: float) -> float | None:
    """Relative change from ``earlier`` to ``later``; undefined for zero base."""
    if earlier == 0:
        return None
    return (later - earlier) / earlier


def format_gain(gain: float | None) -> str:
    return "" if gain is None else f"{gain * 100:+.2f}%"


def run_temporal_growth(
    corpus: Corpus,
    split: DatasetSplit,
    backend: BackendSpec,
    batch_size: int,
    seeds: Sequence[int] = (1, 2, 3, 4, 5),
    *,
    k_values: Sequence[int] = (3, 5, 10),
    input_mode: InputMode = InputMode.TITLE_AND_DESCRIPTION,
    preprocess: PreprocessConfig = DEFAULT_CONFIG,
) -> ExperimentRun:
    """Evaluate nested chronological training folds against a fixed test set.

    Each fold refits the trainable state (hashing statistics) on that
    fold's reports only; validation and test ids never change. The details
    carry the relative gain of the last fold over the first per (k, metric).
    """
    if not seeds:
        raise ValueError("at least one seed is required")
    plan = make_temporal_folds([corpus.reports[rid] for rid in split.train], batch_size)
    kmax = max(k_values)
    fold_labels = [f"fold{i}" for i in range(1, plan.fold_count + 1)]

    outputs: dict[tuple[int, str], MetricReport] = {}
    for fold, label in enumerate(fold_labels, start=1):
        fold_ids = plan.fold_ids(fold)
        per_seed = [
            _rank_test_set(
                corpus,
                split.test,
                _pipeline_for(backend, corpus, fold_ids, seed, input_mode, preprocess, kmax),
                kmax,
            )
            for seed in seeds
        ]
        for k, report in _reports_from_rankings(corpus, per_seed, split.test, k_values).items():
            outputs[(k, label)] = report

    gains: dict[str, float | None] = {}
    first, last = fold_labels[0], fold_labels[-1]
    for k in k_values:
        for metric in ("accuracy", "mrr", "ndcg"):
            earlier = getattr(outputs[(k, first)], metric).mean
            later = getattr(outputs[(k, last)], metric).mean
            gains[f"{k}:{metric}"] = percentage_gain(later, earlier)
    return ExperimentRun(
        protocol="rq3",
        k_values=tuple(k_values),
        conditions=tuple(fold_labels),
        seeds=tuple(seeds),
        split=split,
        outputs=outputs,
        details={
            "backend": backend.label,
            "batch_size": batch_size,
            "fold_sizes": list(plan.fold_sizes),
            "gains": gains,
        },
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative protocol settings, usually read from a JSON file."""

    corpus_path: Path
    corpus_format: str = "canonical-jsonl"
    backends: tuple[str, ...] = ("bm25", "dense")
    backend: str = "bm25"
    input_mode: InputMode = InputMode.TITLE_AND_DESCRIPTION
    k_values: tuple[int, ...] = (3, 5, 10)
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    stratification: StratificationSpec = field(default_factory=StratificationSpec)
    fold_batch_size: int = 571
    split_ratios: tuple[float, float, float] = (0.75, 0.125, 0.125)
    split_seed: int = 0
    dense_dim: int = 4096
    stopword_file: Path | None = None

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        corpus_section = raw.get("corpus") or {}
        if "path" not in corpus_section:
            raise ValueError("config must name a corpus path under the 'corpus' key")
        strat_raw = raw.get("stratification", "median")
        if isinstance(strat_raw, str):
            strat = StratificationSpec(kind=strat_raw)
        else:
            strat = StratificationSpec(
                kind=strat_raw.get("kind", "median"),
                full_dataset=bool(strat_raw.get("full_dataset", False)),
            )
        backends = tuple(raw.get("backends") or ("bm25", "dense"))
        split_section = raw.get("split") or {}
        dense_section = raw.get("dense") or {}
        return cls(
            corpus_path=Path(corpus_section["path"]),
            corpus_format=corpus_section.get("format", "canonical-jsonl"),
            backends=backends,
            backend=raw.get("backend", backends[0]),
            input_mode=InputMode(raw.get("input_mode", "title_description")),
            k_values=tuple(raw.get("k_values") or (3, 5, 10)),
            seeds=tuple(raw.get("seeds") or (1, 2, 3, 4, 5)),
            stratification=strat,
            fold_batch_size=int(raw.get("fold_batch_size", 571)),
            split_ratios=tuple(split_section.get("ratios") or (0.75, 0.125, 0.125)),
            split_seed=int(split_section.get("seed", 0)),
            dense_dim=int(dense_section.get("dim", 4096)),
            stopword_file=Path(raw["stopword_file"]) if raw.get("stopword_file") else None,
        )

    def preprocess(self) -> PreprocessConfig:
        if self.stopword_file is None:
            return DEFAULT_CONFIG
        return PreprocessConfig(stopwords=load_stopwords(self.stopword_file))

    def backend_spec(self, name: str) -> BackendSpec:
        return BackendSpec(kind=name, dim=self.dense_dim)


def run_protocol(protocol: str, config: ExperimentConfig) -> ExperimentRun:
    """Load the corpus, derive the split, and run one named protocol."""
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    corpus = load_snapshot(config.corpus_path, config.corpus_format)
    dataset_split = split_corpus(corpus, config.split_ratios, config.split_seed)
    preprocess = config.preprocess()
    common = dict(k_values=config.k_values, preprocess=preprocess)
    if protocol == "baselines":
        return run_model_comparison(
            corpus,
            dataset_split,
            [config.backend_spec(name) for name in config.backends],
            config.seeds,
            input_mode=config.input_mode,
            **common,
        )
    backend = config.backend_spec(config.backend)
    if protocol == "rq1":
        return run_input_mode_ablation(corpus, dataset_split, backend, config.seeds, **common)
    if protocol == "rq2":
        return run_length_stratification(
            corpus,
            dataset_split,
            backend,
            config.stratification,
            config.seeds,
            input_mode=config.input_mode,
            **common,
        )
    return run_temporal_growth(
        corpus,
        dataset_split,
        backend,
        config.fold_batch_size,
        config.seeds,
        input_mode=config.input_mode,
        **common,
    )


_CSV_COLUMNS = [
    "k",
    "condition",
    "accuracy_mean",
    "accuracy_std",
    "mrr_mean",
    "mrr_std",
    "ndcg_mean",
    "ndcg_std",
    "n_reports",
    "n_runs",
]


def run_to_rows(run: ExperimentRun) -> list[dict[str, object]]:
    """Flatten a run to table rows ordered by cutoff, then condition."""
    gains: Mapping[str, float | None] = run.details.get("gains", {})
    last_condition = run.conditions[-1] if run.conditions else None
    rows: list[dict[str, object]] = []
    for k in run.k_values:
        for condition in run.conditions:
            report = run.outputs.get((k, condition))
            if report is None:
                continue
            row: dict[str, object] = {
                "k": k,
                "condition": condition,
                "accuracy_mean": report.accuracy.mean,
                "accuracy_std": report.accuracy.std,
                "mrr_mean": report.mrr.mean,
                "mrr_std": report.mrr.std,
                "ndcg_mean": report.ndcg.mean,
                "ndcg_std": report.ndcg.std,
                "n_reports": report.n_reports,
                "n_runs": report.n_runs,
            }
            if run.protocol == "rq3":
                is_last = condition == last_condition
                for metric in ("accuracy", "mrr", "ndcg"):
                    gain = gains.get(f"{k}:{metric}") if is_last else None
                    row[f"{metric}_gain"] = format_gain(gain)
            rows.append(row)
    return rows


def write_run_csv(run: ExperimentRun, path: str | Path) -> None:
    columns = list(_CSV_COLUMNS)
    if run.protocol == "rq3":
        columns += ["accuracy_gain", "mrr_gain", "ndcg_gain"]
    rows = run_to_rows(run)
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                [
                    repr(row[name]) if isinstance(row[name], float) else row[name]
                    for name in columns
                ]
            )


def write_run_json(run: ExperimentRun, path: str | Path) -> None:
    payload = {
        "protocol": run.protocol,
        "k_values": list(run.k_values),
        "conditions": list(run.conditions),
        "seeds": list(run.seeds),
        "split": {
            "seed": run.split.seed,
            "ratios": list(run.split.ratios),
            "sizes": {
                "train": len(run.split.train),
                "validation": len(run.split.validation),
                "test": len(run.split.test),
            },
        },
        "rows": run_to_rows(run),
        "details": dict(run.details),
    }
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
