"""Triage service: accept reports, suggest incidents, record decisions.

State is event-sourced. Every mutation appends to the event log first and
then applies the event to in-memory state, so replaying the log (plus the
optional snapshot) reproduces the exact state after a crash. Incident
indexes are immutable; mutations build a replacement and swap the
reference, which keeps reads lock-free.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping

from pydantic import BaseModel

from .corpus import Corpus, Incident, load_snapshot
from .embedding import HashingEmbedderConfig, HashingProvider, fit_stats
from .eventlog import EventLog, EventLogError, TriageEvent
from .retrieval import IncidentIndex, PipelineConfig, index_incidents, rank, upsert_incident
from .textprep import DEFAULT_CONFIG, InputMode, clean, prepare

logger = logging.getLogger(__name__)

__all__ = [
    "NotFoundError",
    "ConflictError",
    "ValidationFailure",
    "ServiceConfig",
    "QueueEntry",
    "TriageState",
    "apply_event",
    "replay",
    "TriageService",
    "create_app",
]

PENDING = "pending"
LINKED = "linked"
NEW_INCIDENT = "new_incident_created"

_ENV_PREFIX = "INCIDENT_LINKER_"


class NotFoundError(LookupError):
    """Referenced report or incident does not exist."""


class ConflictError(RuntimeError):
    """The request contradicts current state (e.g. double decision)."""


class ValidationFailure(ValueError):
    """The request payload is structurally invalid."""


@dataclass
class ServiceConfig:
    corpus_path: Path
    data_dir: Path
    corpus_format: str = "canonical-jsonl"
    listen: str = "127.0.0.1:8080"
    backend: str = "bm25"
    k: int = 10
    embedding_endpoint: str | None = None
    dense_dim: int = 4096
    hash_seed: int = 0
    index_augmentation: bool = False
    compact_every: int = 0
    ui_dir: Path | None = None

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        """Read JSON config; selected keys can be overridden via environment.

        Recognized overrides: ``INCIDENT_LINKER_LISTEN``, ``_DATA_DIR``,
        ``_BACKEND``, ``_K``, and ``_EMBEDDING_ENDPOINT``.
        """
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        for key in ("corpus_path", "data_dir"):
            if key not in raw:
                raise ValueError(f"service config missing required key {key!r}")
        env = os.environ
        listen = env.get(_ENV_PREFIX + "LISTEN", raw.get("listen", "127.0.0.1:8080"))
        data_dir = env.get(_ENV_PREFIX + "DATA_DIR", raw["data_dir"])
        backend = env.get(_ENV_PREFIX + "BACKEND", raw.get("backend", "bm25"))
        k = int(env.get(_ENV_PREFIX + "K", raw.get("k", 10)))
        endpoint = env.get(
            _ENV_PREFIX + "EMBEDDING_ENDPOINT", raw.get("embedding_endpoint")
        )
        if backend not in ("bm25", "dense"):
            raise ValueError(f"unknown backend {backend!r}")
        if k < 1:
            raise ValueError(f"k must be at least 1, got {k}")
        return cls(
            corpus_path=Path(raw["corpus_path"]),
            data_dir=Path(data_dir),
            corpus_format=raw.get("corpus_format", "canonical-jsonl"),
            listen=listen,
            backend=backend,
            k=k,
            embedding_endpoint=endpoint or None,
            dense_dim=int(raw.get("dense_dim", 4096)),
            hash_seed=int(raw.get("hash_seed", 0)),
            index_augmentation=bool(raw.get("index_augmentation", False)),
            compact_every=int(raw.get("compact_every", 0)),
            ui_dir=Path(raw["ui_dir"]) if raw.get("ui_dir") else None,
        )


@dataclass(frozen=True)
class QueueEntry:
    """External view of one triage queue item."""

    report_id: str
    status: str
    title: str
    submitted_at: str
    description_length: int
    decided_at: str | None = None
    decided_incident_id: str | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "report_id": self.report_id,
            "status": self.status,
            "title": self.title,
            "submitted_at": self.submitted_at,
            "description_length": self.description_length,
            "decided_at": self.decided_at,
            "decided_incident_id": self.decided_incident_id,
        }


@dataclass
class TriageState:
    """Everything the event log determines, in JSON-friendly form."""

    reports: dict[str, dict[str, Any]] = field(default_factory=dict)
    queue: dict[str, dict[str, Any]] = field(default_factory=dict)
    created_incidents: dict[str, dict[str, Any]] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "reports": {k: dict(v) for k, v in self.reports.items()},
            "queue": {k: dict(v) for k, v in self.queue.items()},
            "created_incidents": {k: dict(v) for k, v in self.created_incidents.items()},
        }

    @classmethod
    def from_dict(cls, blob: Mapping[str, Any]) -> "TriageState":
        return cls(
            reports={k: dict(v) for k, v in blob.get("reports", {}).items()},
            queue={k: dict(v) for k, v in blob.get("queue", {}).items()},
            created_incidents={
                k: dict(v) for k, v in blob.get("created_incidents", {}).items()
            },
        )


def apply_event(state: TriageState, event: TriageEvent) -> None:
    """Advance state by one event; inconsistencies indicate a corrupt log."""
    payload = event.payload
    if event.kind == "report_submitted":
        report_id = payload["report_id"]
        if report_id in state.reports:
            raise EventLogError(f"duplicate report id {report_id!r} at seq {event.seq}")
        state.reports[report_id] = {
            "title": payload["title"],
            "description": payload.get("description", ""),
            "submitted_at": payload["submitted_at"],
        }
        state.queue[report_id] = {
            "status": PENDING,
            "seq": event.seq,
            "decided_at": None,
            "decided_incident_id": None,
        }
        return
    if event.kind == "link_committed":
        report_id = payload["report_id"]
        entry = state.queue.get(report_id)
        if entry is None:
            raise EventLogError(f"link for unknown report {report_id!r} at seq {event.seq}")
        if entry["status"] != PENDING:
            raise EventLogError(f"link for decided report {report_id!r} at seq {event.seq}")
        entry["status"] = LINKED
        entry["decided_at"] = payload["decided_at"]
        entry["decided_incident_id"] = payload["incident_id"]
        return
    if event.kind == "incident_created":
        report_id = payload["report_id"]
        incident_id = payload["incident_id"]
        entry = state.queue.get(report_id)
        if entry is None:
            raise EventLogError(
                f"incident creation for unknown report {report_id!r} at seq {event.seq}"
            )
        if entry["status"] != PENDING:
            raise EventLogError(
                f"incident creation for decided report {report_id!r} at seq {event.seq}"
            )
        if incident_id in state.created_incidents:
            raise EventLogError(f"duplicate incident id {incident_id!r} at seq {event.seq}")
        state.created_incidents[incident_id] = {
            "title": payload["title"],
            "description": payload.get("description", ""),
            "from_report_id": report_id,
            "created_at": payload["decided_at"],
        }
        entry["status"] = NEW_INCIDENT
        entry["decided_at"] = payload["decided_at"]
        entry["decided_incident_id"] = incident_id
        return
    raise EventLogError(f"unknown event kind {event.kind!r} at seq {event.seq}")


def replay(
    events: list[TriageEvent], snapshot_state: Mapping[str, Any] | None = None
) -> TriageState:
    """Rebuild state from an optional snapshot plus subsequent events."""
    state = TriageState.from_dict(snapshot_state) if snapshot_state else TriageState()
    for event in events:
        apply_event(state, event)
    return state


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class _QueryRecord:
    id: str
    title: str
    description: str


class TriageService:
    """Single-writer triage core shared by the HTTP app and tests."""

    def __init__(self, corpus: Corpus, config: ServiceConfig) -> None:
        self.corpus = corpus
        self.config = config
        self._lock = threading.RLock()
        self._log = EventLog(config.data_dir)
        self._state = replay(self._log.events, self._log.snapshot_state)
        self._pipelines = {mode: self._build_pipeline(mode) for mode in InputMode}
        self._indexes: dict[InputMode, IncidentIndex] = {}
        self._rebuild_indexes()

    @classmethod
    def start(cls, config: ServiceConfig) -> "TriageService":
        corpus = load_snapshot(config.corpus_path, config.corpus_format)
        return cls(corpus, config)

    # -- pipeline plumbing -------------------------------------------------

    def _build_pipeline(self, mode: InputMode) -> PipelineConfig:
        if self.config.backend == "bm25":
            return PipelineConfig(backend="bm25", input_mode=mode, k=self.config.k)
        if self.config.embedding_endpoint:
            from .remote import RemoteEmbeddingProvider

            provider: Any = RemoteEmbeddingProvider(self.config.embedding_endpoint)
        else:
            documents = []
            for report in self.corpus.reports.values():
                documents.append(
                    prepare(report.title, report.description, mode, DEFAULT_CONFIG).tokens
                )
            for incident in self.corpus.incidents.values():
                documents.append(
                    prepare(incident.title, incident.description, mode, DEFAULT_CONFIG).tokens
                )
            provider = HashingProvider(
                fit_stats(documents),
                HashingEmbedderConfig(
                    dim=self.config.dense_dim, hash_seed=self.config.hash_seed
                ),
            )
        return PipelineConfig(
            backend="dense", input_mode=mode, k=self.config.k, provider=provider
        )

    def _current_incidents(self) -> dict[str, Incident]:
        merged = dict(self.corpus.incidents)
        for incident_id, record in self._state.created_incidents.items():
            merged[incident_id] = Incident(
                id=incident_id,
                title=record["title"],
                description=record.get("description", ""),
            )
        return merged

    def _aux_texts(self) -> dict[str, str]:
        """Auxiliary evidence per incident: titles of reports linked to it."""
        if not self.config.index_augmentation:
            return {}
        linked: dict[str, list[tuple[int, str]]] = {}
        for report_id, entry in self._state.queue.items():
            if entry["status"] == LINKED:
                incident_id = entry["decided_incident_id"]
                title = self._state.reports[report_id]["title"]
                linked.setdefault(incident_id, []).append((entry["seq"], title))
        return {
            incident_id: " ".join(title for _, title in sorted(pairs))
            for incident_id, pairs in linked.items()
        }

    def _rebuild_indexes(self) -> None:
        incidents = self._current_incidents()
        snapshot = Corpus(
            incidents=incidents,
            reports=self.corpus.reports,
            excluded_issue_count=self.corpus.excluded_issue_count,
        )
        aux = self._aux_texts()
        self._indexes = {
            mode: index_incidents(snapshot, self._pipelines[mode], extra_texts=aux)
            for mode in InputMode
        }

    def _upsert_everywhere(self, incident: Incident, extra_text: str = "") -> None:
        self._indexes = {
            mode: upsert_incident(
                self._indexes[mode], incident, self._pipelines[mode], extra_text=extra_text
            )
            for mode in InputMode
        }

    def _maybe_compact(self) -> None:
        if self.config.compact_every and len(self._log.events) >= self.config.compact_every:
            self._log.compact(self._state.to_dict())

    # -- views ---------------------------------------------------------------

    def _entry_view(self, report_id: str) -> QueueEntry:
        entry = self._state.queue[report_id]
        report = self._state.reports[report_id]
        return QueueEntry(
            report_id=report_id,
            status=entry["status"],
            title=report["title"],
            submitted_at=report["submitted_at"],
            description_length=len(report.get("description", "")),
            decided_at=entry["decided_at"],
            decided_incident_id=entry["decided_incident_id"],
        )

    def queue(self, status: str | None = PENDING) -> list[QueueEntry]:
        """Queue entries, newest submission first."""
        with self._lock:
            ids = sorted(
                self._state.queue, key=lambda rid: -self._state.queue[rid]["seq"]
            )
            views = [self._entry_view(rid) for rid in ids]
        if status:
            views = [v for v in views if v.status == status]
        return views

    def incident(self, incident_id: str) -> dict[str, Any]:
        with self._lock:
            incidents = self._current_incidents()
        if incident_id not in incidents:
            raise NotFoundError(f"unknown incident {incident_id!r}")
        record = incidents[incident_id]
        created = self._state.created_incidents.get(incident_id)
        return {
            "incident_id": record.id,
            "title": record.title,
            "description": record.description,
            "occurred_at": record.occurred_at.isoformat() if record.occurred_at else None,
            "created_from_report_id": created["from_report_id"] if created else None,
        }

    def state_snapshot(self) -> dict[str, Any]:
        """Deterministic copy of replayable state, for tests and compaction."""
        with self._lock:
            return self._state.to_dict()

    # -- mutations -----------------------------------------------------------

    def submit_report(
        self, title: str, description: str = ""
    ) -> tuple[QueueEntry, list[dict[str, Any]]]:
        """Queue a report and return it with its ranked candidates."""
        if not title or not title.strip():
            raise ValidationFailure("title must be non-empty")
        with self._lock:
            report_id = f"r-{uuid.uuid4().hex[:12]}"
            event = self._log.append(
                "report_submitted",
                {
                    "report_id": report_id,
                    "title": title,
                    "description": description,
                    "submitted_at": _now(),
                },
            )
            apply_event(self._state, event)
            self._maybe_compact()
            entry = self._entry_view(report_id)
        return entry, self.candidates_for(report_id)

    def candidates_for(
        self, report_id: str, k: int | None = None, mode: InputMode | str | None = None
    ) -> list[dict[str, Any]]:
        """Rank current incidents for a queued report; read-only."""
        try:
            input_mode = InputMode(mode) if mode is not None else InputMode.TITLE_AND_DESCRIPTION
        except ValueError:
            raise ValidationFailure(f"unknown mode {mode!r}") from None
        if k is not None and k < 1:
            raise ValidationFailure(f"k must be at least 1, got {k}")
        with self._lock:
            record = self._state.reports.get(report_id)
            if record is None:
                raise NotFoundError(f"unknown report {report_id!r}")
            index = self._indexes[input_mode]
            incidents = self._current_incidents()
        query = _QueryRecord(
            id=report_id, title=record["title"], description=record.get("description", "")
        )
        ranked = rank(query, index, self._pipelines[input_mode], k=k or self.config.k)
        candidates = []
        for incident_id, score in ranked.entries:
            incident = incidents[incident_id]
            source = incident.description or incident.title
            candidates.append(
                {
                    "incident_id": incident_id,
                    "score": score,
                    "title": incident.title,
                    "snippet": clean(source)[:200],
                }
            )
        return candidates

    def commit_link(self, report_id: str, incident_id: str) -> QueueEntry:
        """Record that a pending report belongs to an existing incident."""
        with self._lock:
            entry = self._state.queue.get(report_id)
            if entry is None:
                raise NotFoundError(f"unknown report {report_id!r}")
            if entry["status"] != PENDING:
                raise ConflictError(
                    f"report {report_id!r} already decided ({entry['status']})"
                )
            incidents = self._current_incidents()
            if incident_id not in incidents:
                raise NotFoundError(f"unknown incident {incident_id!r}")
            event = self._log.append(
                "link_committed",
                {"report_id": report_id, "incident_id": incident_id, "decided_at": _now()},
            )
            apply_event(self._state, event)
            if self.config.index_augmentation:
                aux = self._aux_texts().get(incident_id, "")
                self._upsert_everywhere(incidents[incident_id], extra_text=aux)
            self._maybe_compact()
            return self._entry_view(report_id)

    def create_incident_from_report(
        self, report_id: str, title: str | None = None, description: str | None = None
    ) -> tuple[dict[str, Any], QueueEntry]:
        """Promote a pending report to a brand-new incident, atomically.

        The new incident is immediately searchable: the next ranking call
        sees it without a restart.
        """
        with self._lock:
            entry = self._state.queue.get(report_id)
            if entry is None:
                raise NotFoundError(f"unknown report {report_id!r}")
            if entry["status"] != PENDING:
                raise ConflictError(
                    f"report {report_id!r} already decided ({entry['status']})"
                )
            report = self._state.reports[report_id]
            final_title = title if title and title.strip() else report["title"]
            final_description = (
                description if description is not None else report.get("description", "")
            )
            incident_id = f"n-{uuid.uuid4().hex[:12]}"
            event = self._log.append(
                "incident_created",
                {
                    "incident_id": incident_id,
                    "report_id": report_id,
                    "title": final_title,
                    "description": final_description,
                    "decided_at": _now(),
                },
            )
            apply_event(self._state, event)
            incident = Incident(
                id=incident_id, title=final_title, description=final_description
            )
            self._upsert_everywhere(incident)
            self._maybe_compact()
            return self.incident(incident_id), self._entry_view(report_id)

    def compact(self) -> None:
        with self._lock:
            self._log.compact(self._state.to_dict())


# request bodies live at module scope so FastAPI can resolve the
# (string-form) annotations of the endpoints defined in create_app
class SubmitReportBody(BaseModel):
    title: str = ""
    description: str = ""


class LinkBody(BaseModel):
    report_id: str
    incident_id: str


class CreateIncidentBody(BaseModel):
    from_report_id: str
    title: str | None = None
    description: str | None = None


def create_app(service: TriageService):
    """Wire a TriageService into a FastAPI application."""
    from fastapi import FastAPI, Query
    from fastapi.exceptions import RequestValidationError
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import JSONResponse

    app = FastAPI(title="incident-linker triage", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def _error(status: int, error: str, detail: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": error, "detail": detail})

    @app.exception_handler(NotFoundError)
    async def _not_found(_, exc: NotFoundError) -> JSONResponse:
        return _error(404, "not_found", str(exc))

    @app.exception_handler(ConflictError)
    async def _conflict(_, exc: ConflictError) -> JSONResponse:
        return _error(409, "conflict", str(exc))

    @app.exception_handler(ValidationFailure)
    async def _invalid(_, exc: ValidationFailure) -> JSONResponse:
        return _error(422, "validation_error", str(exc))

    @app.exception_handler(RequestValidationError)
    async def _schema_invalid(_, exc: RequestValidationError) -> JSONResponse:
        return _error(422, "validation_error", str(exc.errors()))

    @app.get("/api/health")
    def health() -> dict[str, Any]:
        return {
            "status": "ok",
            "backend": service.config.backend,
            "incidents": len(service._current_incidents()),
            "pending": len(service.queue(PENDING)),
        }

    @app.post("/api/reports")
    def submit_report(body: SubmitReportBody) -> dict[str, Any]:
        entry, candidates = service.submit_report(body.title, body.description)
        return {
            "report_id": entry.report_id,
            "backend": service.config.backend,
            "candidates": candidates,
        }

    @app.get("/api/queue")
    def get_queue(status: str = Query(default=PENDING)) -> dict[str, Any]:
        wanted = None if status in ("", "all") else status
        if wanted not in (None, PENDING, LINKED, NEW_INCIDENT):
            raise ValidationFailure(f"unknown status {status!r}")
        return {"entries": [entry.to_json() for entry in service.queue(wanted)]}

    @app.get("/api/reports/{report_id}/candidates")
    def get_candidates(
        report_id: str,
        k: int | None = Query(default=None),
        mode: str = Query(default=InputMode.TITLE_AND_DESCRIPTION.value),
    ) -> dict[str, Any]:
        with service._lock:
            record = service._state.reports.get(report_id)
            if record is None:
                raise NotFoundError(f"unknown report {report_id!r}")
            report_view = {
                "title": record["title"],
                "description": record.get("description", ""),
            }
        candidates = service.candidates_for(report_id, k=k, mode=mode)
        return {
            "report_id": report_id,
            "mode": mode,
            "backend": service.config.backend,
            "report": report_view,
            "candidates": candidates,
        }

    @app.post("/api/links")
    def post_link(body: LinkBody) -> dict[str, Any]:
        entry = service.commit_link(body.report_id, body.incident_id)
        return entry.to_json()

    @app.post("/api/incidents")
    def post_incident(body: CreateIncidentBody) -> dict[str, Any]:
        incident, entry = service.create_incident_from_report(
            body.from_report_id, body.title, body.description
        )
        return {"incident": incident, "entry": entry.to_json()}

    @app.get("/api/incidents/{incident_id}")
    def get_incident(incident_id: str) -> dict[str, Any]:
        return service.incident(incident_id)

    if service.config.ui_dir and Path(service.config.ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=service.config.ui_dir, html=True))

    return app
