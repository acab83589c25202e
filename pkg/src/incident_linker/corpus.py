"""Corpus ingestion, validation, and dataset splitting.

Two on-disk formats are supported:

* ``canonical-jsonl``: one JSON object per line with keys ``kind``
  (``incident`` | ``report`` | ``issue``), ``id``, ``title``,
  ``description``, ``date``, and ``incident_ids``. This is the hermetic
  format used by tests and written by ``incident-linker ingest``.
* ``aiid-snapshot``: the published AI Incident Database backup layout, a
  directory holding ``incidents.json`` and ``reports.json`` (JSON arrays or
  one object per line). Reports flagged as Issues by the editor
  classification field are excluded and counted, never silently dropped.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path
from typing import Any, Mapping

logger = logging.getLogger(__name__)

__all__ = [
    "CorpusError",
    "Incident",
    "Report",
    "Corpus",
    "DatasetSplit",
    "Violation",
    "AiidAdapterConfig",
    "load_snapshot",
    "write_canonical",
    "validate",
    "split",
    "SHORT_DESCRIPTION_CHARS",
]

CANONICAL_FORMATS = {"canonical", "canonical-jsonl"}
AIID_FORMATS = {"aiid", "aiid-snapshot"}

# The upstream database enforces a minimum description length; short ones
# are counted for reporting but never rejected here.
SHORT_DESCRIPTION_CHARS = 80


class CorpusError(ValueError):
    """Raised when a snapshot cannot be parsed into a valid corpus."""


@dataclass(frozen=True)
class Incident:
    """A documented incident record that reports link to."""

    id: str
    title: str
    description: str = ""
    occurred_at: date | None = None


@dataclass(frozen=True)
class Report:
    """A report describing one or more incidents.

    ``incident_ids`` is the ground-truth linkage and is never empty in a
    valid corpus; ``submitted_at`` orders reports for temporal protocols
    and may be absent in hand-built fixtures.
    """

    id: str
    title: str
    description: str
    submitted_at: date | None
    incident_ids: frozenset[str]


@dataclass(frozen=True)
class Corpus:
    incidents: dict[str, Incident]
    reports: dict[str, Report]
    excluded_issue_count: int = 0

    @property
    def short_description_count(self) -> int:
        """Reports whose description is shorter than the upstream minimum."""
        return sum(
            1
            for r in self.reports.values()
            if len(r.description) < SHORT_DESCRIPTION_CHARS
        )

    def split(
        self,
        ratios: tuple[float, float, float] = (0.75, 0.125, 0.125),
        seed: int = 0,
    ) -> "DatasetSplit":
        return split(self, ratios, seed)


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train/validation/test report ids covering the corpus."""

    train: tuple[str, ...]
    validation: tuple[str, ...]
    test: tuple[str, ...]
    ratios: tuple[float, float, float]
    seed: int


@dataclass(frozen=True)
class Violation:
    """One broken invariant found by :func:`validate`."""

    record_kind: str
    record_id: str
    message: str


@dataclass(frozen=True)
class AiidAdapterConfig:
    """Knobs for reading the published snapshot layout.

    ``issue_field``/``issue_value`` name the editor classification that
    marks a report as an Issue; a report is excluded when the field equals
    the value. Records missing the field are kept.
    """

    issue_field: str = "is_incident_report"
    issue_value: Any = False
    incidents_file: str = "incidents.json"
    reports_file: str = "reports.json"


def _parse_date(value: Any, *, context: str) -> date | None:
    if value is None or value == "":
        return None
    if isinstance(value, datetime):
        return value.date()
    if isinstance(value, date):
        return value
    if isinstance(value, Mapping) and "$date" in value:
        return _parse_date(value["$date"], context=context)
    if isinstance(value, str):
        text = value.strip().replace("Z", "+00:00")
        try:
            return date.fromisoformat(text[:10]) if len(text) >= 10 else None
        except ValueError:
            try:
                return datetime.fromisoformat(text).date()
            except ValueError as exc:
                raise CorpusError(f"{context}: unparseable date {value!r}") from exc
    raise CorpusError(f"{context}: unparseable date {value!r}")


def _require(record: Mapping[str, Any], key: str, context: str) -> Any:
    if key not in record:
        raise CorpusError(f"{context}: missing required key {key!r}")
    return record[key]


def _load_canonical(path: Path) -> Corpus:
    incidents: dict[str, Incident] = {}
    reports: dict[str, Report] = {}
    issue_count = 0
    seen_ids: set[str] = set()
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            context = f"{path.name}:{line_no}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{context}: invalid JSON ({exc.msg})") from exc
            kind = _require(record, "kind", context)
            if kind == "issue":
                issue_count += 1
                continue
            record_id = str(_require(record, "id", context))
            if record_id in seen_ids:
                raise CorpusError(f"{context}: duplicate id {record_id!r}")
            seen_ids.add(record_id)
            title = str(_require(record, "title", context))
            description = str(record.get("description") or "")
            when = _parse_date(record.get("date"), context=context)
            if kind == "incident":
                incidents[record_id] = Incident(
                    id=record_id,
                    title=title,
                    description=description,
                    occurred_at=when,
                )
            elif kind == "report":
                linked = record.get("incident_ids") or []
                reports[record_id] = Report(
                    id=record_id,
                    title=title,
                    description=description,
                    submitted_at=when,
                    incident_ids=frozenset(str(i) for i in linked),
                )
            else:
                raise CorpusError(f"{context}: unknown record kind {kind!r}")
    return Corpus(incidents=incidents, reports=reports, excluded_issue_count=issue_count)


def _read_json_records(path: Path) -> list[dict[str, Any]]:
    """Accept either a whole-file JSON array or one object per line."""
    text = path.read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("["):
        records = json.loads(text)
        if not isinstance(records, list):
            raise CorpusError(f"{path.name}: expected a JSON array")
        return records
    records = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path.name}:{line_no}: invalid JSON ({exc.msg})") from exc
    return records


def _load_aiid(path: Path, config: AiidAdapterConfig) -> Corpus:
    if path.is_dir():
        incident_records = _read_json_records(path / config.incidents_file)
        report_records = _read_json_records(path / config.reports_file)
    else:
        blob = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(blob, Mapping):
            raise CorpusError(f"{path.name}: expected an object with incidents/reports")
        incident_records = list(blob.get("incidents") or [])
        report_records = list(blob.get("reports") or [])

    incidents: dict[str, Incident] = {}
    links: dict[str, set[str]] = {}
    for record in incident_records:
        incident_id = str(_require(record, "incident_id", "incident record"))
        if incident_id in incidents:
            raise CorpusError(f"duplicate incident id {incident_id!r}")
        incidents[incident_id] = Incident(
            id=incident_id,
            title=str(record.get("title") or ""),
            description=str(record.get("description") or ""),
            occurred_at=_parse_date(record.get("date"), context=f"incident {incident_id}"),
        )
        for number in record.get("reports") or []:
            links.setdefault(str(number), set()).add(incident_id)

    reports: dict[str, Report] = {}
    issue_count = 0
    for record in report_records:
        report_id = str(_require(record, "report_number", "report record"))
        if record.get(config.issue_field, object()) == config.issue_value:
            issue_count += 1
            continue
        if report_id in reports:
            raise CorpusError(f"duplicate report id {report_id!r}")
        description = str(record.get("text") or record.get("description") or "")
        reports[report_id] = Report(
            id=report_id,
            title=str(record.get("title") or ""),
            description=description,
            submitted_at=_parse_date(
                record.get("date_submitted"), context=f"report {report_id}"
            ),
            incident_ids=frozenset(links.get(report_id, set())),
        )
    return Corpus(incidents=incidents, reports=reports, excluded_issue_count=issue_count)


def load_snapshot(
    path: str | Path,
    format: str = "canonical-jsonl",
    *,
    aiid_config: AiidAdapterConfig | None = None,
) -> Corpus:
    """Load and fully validate a corpus snapshot.

    Loading the same file twice yields structurally equal corpora. Any
    validation violation (dangling link, unlinked report, blank incident
    title) aborts with a :class:`CorpusError` naming the offender.
    """
    source = Path(path)
    if not source.exists():
        raise CorpusError(f"snapshot path does not exist: {source}")
    if format in CANONICAL_FORMATS:
        corpus = _load_canonical(source)
    elif format in AIID_FORMATS:
        corpus = _load_aiid(source, aiid_config or AiidAdapterConfig())
    else:
        raise CorpusError(f"unknown snapshot format {format!r}")

    violations = validate(corpus)
    if violations:
        shown = "; ".join(
            f"{v.record_kind} {v.record_id}: {v.message}" for v in violations[:5]
        )
        more = "" if len(violations) <= 5 else f" (+{len(violations) - 5} more)"
        raise CorpusError(f"snapshot failed validation: {shown}{more}")
    logger.info(
        "loaded %d incidents, %d reports (%d issues excluded, %d short descriptions)",
        len(corpus.incidents),
        len(corpus.reports),
        corpus.excluded_issue_count,
        corpus.short_description_count,
    )
    return corpus


def write_canonical(corpus: Corpus, path: str | Path) -> None:
    """Write the filtered corpus in canonical line-delimited form.

    Excluded Issues are not retained, so a round trip reports an
    ``excluded_issue_count`` of zero.
    """
    target = Path(path)
    with target.open("w", encoding="utf-8") as handle:
        for incident_id in sorted(corpus.incidents):
            incident = corpus.incidents[incident_id]
            handle.write(
                json.dumps(
                    {
                        "kind": "incident",
                        "id": incident.id,
                        "title": incident.title,
                        "description": incident.description,
                        "date": incident.occurred_at.isoformat()
                        if incident.occurred_at
                        else None,
                        "incident_ids": [],
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
        for report_id in sorted(corpus.reports):
            report = corpus.reports[report_id]
            handle.write(
                json.dumps(
                    {
                        "kind": "report",
                        "id": report.id,
                        "title": report.title,
                        "description": report.description,
                        "date": report.submitted_at.isoformat()
                        if report.submitted_at
                        else None,
                        "incident_ids": sorted(report.incident_ids),
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )


def validate(corpus: Corpus) -> list[Violation]:
    """Check referential integrity; an empty list means the corpus is valid."""
    violations: list[Violation] = []
    for incident_id, incident in corpus.incidents.items():
        if incident_id != incident.id:
            violations.append(
                Violation("incident", incident_id, f"keyed as {incident_id!r} but id is {incident.id!r}")
            )
        if not incident.title.strip():
            violations.append(Violation("incident", incident_id, "blank title"))
    for report_id, report in corpus.reports.items():
        if report_id != report.id:
            violations.append(
                Violation("report", report_id, f"keyed as {report_id!r} but id is {report.id!r}")
            )
        if not report.incident_ids:
            violations.append(Violation("report", report_id, "no incident links"))
        for incident_id in sorted(report.incident_ids):
            if incident_id not in corpus.incidents:
                violations.append(
                    Violation("report", report_id, f"links to unknown incident {incident_id!r}")
                )
    return violations


def _largest_remainder_sizes(total: int, ratios: tuple[float, ...]) -> list[int]:
    quotas = [total * r for r in ratios]
    sizes = [math.floor(q) for q in quotas]
    leftover = total - sum(sizes)
    by_remainder = sorted(range(len(ratios)), key=lambda i: (sizes[i] - quotas[i], i))
    for i in by_remainder[:leftover]:
        sizes[i] += 1
    return sizes


def split(
    corpus: Corpus,
    ratios: tuple[float, float, float] = (0.75, 0.125, 0.125),
    seed: int = 0,
) -> DatasetSplit:
    """Partition report ids into train/validation/test by seeded shuffle.

    Sizes follow largest-remainder rounding of ``len(reports) * ratio``,
    with ties broken toward the earlier part, so every report lands in
    exactly one part. The same corpus, ratios, and seed always produce the
    same split.
    """
    if len(ratios) != 3:
        raise ValueError("ratios must have exactly three entries")
    if any(r < 0 for r in ratios):
        raise ValueError("ratios must be non-negative")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)!r}")
    if not corpus.reports:
        raise ValueError("cannot split an empty corpus")

    ids = sorted(corpus.reports)
    rng = random.Random(seed)
    rng.shuffle(ids)
    n_train, n_val, n_test = _largest_remainder_sizes(len(ids), tuple(ratios))
    return DatasetSplit(
        train=tuple(ids[:n_train]),
        validation=tuple(ids[n_train : n_train + n_val]),
        test=tuple(ids[n_train + n_val :]),
        ratios=tuple(ratios),
        seed=seed,
    )
