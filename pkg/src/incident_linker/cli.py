"""Command-line interface: ingest, rank, eval, serve.

Conventions: machine-readable results go to stdout, diagnostics to stderr.
Exit code 0 on success, 1 on data or validation problems, 2 on usage
errors (bad flags, handled by the argument parser).
"""

from __future__ import annotations

import json
import socket
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from .corpus import AiidAdapterConfig, CorpusError, load_snapshot, write_canonical
from .embedding import HashingEmbedderConfig, HashingProvider, fit_stats
from .experiments import PROTOCOLS, ExperimentConfig, run_protocol, write_run_csv, write_run_json
from .lexical import BM25Params
from .retrieval import PipelineConfig, index_incidents, rank
from .service import ServiceConfig, TriageService, create_app
from .textprep import DEFAULT_CONFIG, InputMode, prepare

_FORMATS = ["canonical", "canonical-jsonl", "aiid", "aiid-snapshot"]


@dataclass(frozen=True)
class _Query:
    id: str
    title: str
    description: str


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Link incoming failure reports to known incident records."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(path_type=Path))
@click.option("--format", "source_format", type=click.Choice(_FORMATS), default="canonical")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option(
    "--issue-field",
    default="is_incident_report",
    show_default=True,
    help="Editor classification field that marks Issue reports in snapshot exports.",
)
def ingest(input_path: Path, source_format: str, out_path: Path, issue_field: str) -> None:
    """Load a snapshot, validate it, and write the canonical form.

    Prints a JSON summary with record counts on stdout. Issue reports are
    excluded from the output and only counted.
    """
    try:
        corpus = load_snapshot(
            input_path,
            source_format,
            aiid_config=AiidAdapterConfig(issue_field=issue_field),
        )
        write_canonical(corpus, out_path)
    except (CorpusError, OSError) as exc:
        _fail(str(exc))
    summary = {
        "incidents": len(corpus.incidents),
        "reports": len(corpus.reports),
        "excluded_issues": corpus.excluded_issue_count,
        "short_descriptions": corpus.short_description_count,
        "out": str(out_path),
    }
    click.echo(json.dumps(summary, sort_keys=True))
    click.echo(
        f"{summary['incidents']} incidents, {summary['reports']} reports "
        f"({summary['excluded_issues']} issues excluded)",
        err=True,
    )


@main.command("rank")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(path_type=Path))
@click.option("--format", "source_format", type=click.Choice(_FORMATS), default="canonical")
@click.option("--report-file", required=True, type=click.Path(path_type=Path))
@click.option("--backend", type=click.Choice(["bm25", "dense"]), default="bm25")
@click.option("--k", type=click.IntRange(min=1), default=10, show_default=True)
@click.option(
    "--mode",
    type=click.Choice([m.value for m in InputMode]),
    default=InputMode.TITLE_AND_DESCRIPTION.value,
    show_default=True,
)
@click.option("--k1", type=float, default=1.2, show_default=True, help="BM25 k1.")
@click.option("--b", type=click.FloatRange(0.0, 1.0), default=0.75, show_default=True, help="BM25 b.")
@click.option("--dim", type=click.IntRange(min=2), default=4096, show_default=True)
@click.option("--hash-seed", type=int, default=0, show_default=True)
@click.option("--as-of", type=click.DateTime(formats=["%Y-%m-%d"]), default=None,
              help="Only rank incidents that occurred on or before this date.")
def rank_command(
    corpus_path: Path,
    source_format: str,
    report_file: Path,
    backend: str,
    k: int,
    mode: str,
    k1: float,
    b: float,
    dim: int,
    hash_seed: int,
    as_of,
) -> None:
    """Rank incidents for one or more reports given as JSON.

    The report file holds either one object or a list of objects with
    ``title`` and optional ``description``. Results are JSON on stdout.
    """
    try:
        corpus = load_snapshot(corpus_path, source_format)
        raw = json.loads(Path(report_file).read_text(encoding="utf-8"))
        queries = raw if isinstance(raw, list) else [raw]
        input_mode = InputMode(mode)
        if backend == "bm25":
            config = PipelineConfig(
                backend="bm25", input_mode=input_mode, k=k, bm25=BM25Params(k1=k1, b=b)
            )
        else:
            documents = []
            for report in corpus.reports.values():
                documents.append(
                    prepare(report.title, report.description, input_mode, DEFAULT_CONFIG).tokens
                )
            for incident in corpus.incidents.values():
                documents.append(
                    prepare(incident.title, incident.description, input_mode, DEFAULT_CONFIG).tokens
                )
            provider = HashingProvider(
                fit_stats(documents), HashingEmbedderConfig(dim=dim, hash_seed=hash_seed)
            )
            config = PipelineConfig(
                backend="dense", input_mode=input_mode, k=k, provider=provider
            )
        index = index_incidents(corpus, config)
        results = []
        for position, query in enumerate(queries):
            record = _Query(
                id=str(query.get("id", f"query-{position}")),
                title=str(query.get("title", "")),
                description=str(query.get("description", "")),
            )
            ranked = rank(
                record, index, config, k=k, as_of=as_of.date() if as_of else None
            )
            results.append(
                {
                    "report_id": ranked.report_id,
                    "backend": ranked.backend,
                    "entries": [
                        {"incident_id": incident_id, "score": score}
                        for incident_id, score in ranked.entries
                    ],
                }
            )
    except (CorpusError, ValueError, OSError, json.JSONDecodeError) as exc:
        _fail(str(exc))
    click.echo(json.dumps(results if isinstance(raw, list) else results[0], sort_keys=True))


@main.command("eval")
@click.option("--protocol", type=click.Choice(list(PROTOCOLS)), required=True)
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path))
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def eval_command(protocol: str, config_path: Path, out_dir: Path) -> None:
    """Run one evaluation protocol and write CSV/JSON tables.

    Identical corpus, config, and seeds produce byte-identical outputs.
    """
    try:
        config = ExperimentConfig.from_file(config_path)
        run = run_protocol(protocol, config)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{protocol}.csv"
        json_path = out_dir / f"{protocol}.json"
        write_run_csv(run, csv_path)
        write_run_json(run, json_path)
    except (CorpusError, ValueError, OSError, json.JSONDecodeError) as exc:
        _fail(str(exc))
    click.echo(json.dumps({"protocol": protocol, "csv": str(csv_path), "json": str(json_path)}))
    click.echo(f"wrote {csv_path} and {json_path}", err=True)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path))
def serve(config_path: Path) -> None:
    """Start the triage HTTP service."""
    try:
        config = ServiceConfig.from_file(config_path)
        service = TriageService.start(config)
    except (CorpusError, ValueError, OSError, json.JSONDecodeError) as exc:
        _fail(str(exc))

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((config.host, config.port))
    except OSError as exc:
        _fail(f"cannot listen on {config.listen}: {exc}")
    finally:
        probe.close()

    import uvicorn

    app = create_app(service)
    click.echo(f"listening on {config.listen}", err=True)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")


if __name__ == "__main__":
    main()
