"""Append-only event log with strict replay and snapshot compaction.

Each line is one JSON event carrying a strictly increasing sequence
number. Replay refuses gaps, duplicates, and unparseable (e.g. truncated)
lines, naming the offending line number, so any whole-line prefix of a log
is a valid history. ``compact`` folds the current state into a snapshot
file and truncates the log; sequence numbers keep counting from where they
left off.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping

__all__ = ["EventLogError", "TriageEvent", "EVENT_KINDS", "EventLog"]

EVENT_KINDS = ("report_submitted", "link_committed", "incident_created")


class EventLogError(RuntimeError):
    """The log is unreadable or internally inconsistent."""

    def __init__(self, message: str, line_no: int | None = None) -> None:
        super().__init__(message if line_no is None else f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class TriageEvent:
    seq: int
    kind: str
    payload: Mapping[str, Any]
    timestamp: str


class EventLog:
    """Durable event storage under one directory.

    ``events.jsonl`` holds events appended since the last compaction;
    ``snapshot.json`` (optional) holds folded state plus the sequence
    number it covers.
    """

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.log_path = self.directory / "events.jsonl"
        self.snapshot_path = self.directory / "snapshot.json"
        self._base_seq = 0
        self._snapshot_state: dict[str, Any] | None = None
        self._events: list[TriageEvent] = []
        self._load()

    def _load(self) -> None:
        if self.snapshot_path.exists():
            try:
                blob = json.loads(self.snapshot_path.read_text(encoding="utf-8"))
                self._base_seq = int(blob["seq"])
                self._snapshot_state = dict(blob["state"])
            except (ValueError, KeyError, TypeError) as exc:
                raise EventLogError(f"unreadable snapshot: {exc}") from exc
        if not self.log_path.exists():
            return
        expected = self._base_seq + 1
        with self.log_path.open(encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    raise EventLogError("blank line in event log", line_no)
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise EventLogError(
                        f"unparseable event ({exc.msg}); log may be truncated", line_no
                    ) from exc
                try:
                    event = TriageEvent(
                        seq=int(record["seq"]),
                        kind=str(record["kind"]),
                        payload=dict(record["payload"]),
                        timestamp=str(record["timestamp"]),
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    raise EventLogError(f"malformed event: {exc}", line_no) from exc
                if event.kind not in EVENT_KINDS:
                    raise EventLogError(f"unknown event kind {event.kind!r}", line_no)
                if event.seq != expected:
                    raise EventLogError(
                        f"sequence gap: expected {expected}, found {event.seq}", line_no
                    )
                expected += 1
                self._events.append(event)

    @property
    def snapshot_state(self) -> dict[str, Any] | None:
        """State folded by the last compaction, if any."""
        return self._snapshot_state

    @property
    def events(self) -> list[TriageEvent]:
        """Events after the snapshot, oldest first."""
        return list(self._events)

    @property
    def next_seq(self) -> int:
        last = self._events[-1].seq if self._events else self._base_seq
        return last + 1

    def append(self, kind: str, payload: Mapping[str, Any]) -> TriageEvent:
        """Durably append one event and return it with its sequence number."""
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        event = TriageEvent(
            seq=self.next_seq,
            kind=kind,
            payload=dict(payload),
            timestamp=datetime.now(timezone.utc).isoformat(),
        )
        line = json.dumps(
            {
                "seq": event.seq,
                "kind": event.kind,
                "payload": event.payload,
                "timestamp": event.timestamp,
            },
            ensure_ascii=False,
            sort_keys=True,
        )
        with self.log_path.open("a", encoding="utf-8") as handle:
            handle.write(line + "\n")
            handle.flush()
            os.fsync(handle.fileno())
        self._events.append(event)
        return event

    def compact(self, state: Mapping[str, Any]) -> None:
        """Fold ``state`` into the snapshot and truncate the log atomically."""
        seq = self.next_seq - 1
        blob = json.dumps({"seq": seq, "state": dict(state)}, ensure_ascii=False, sort_keys=True)
        tmp_path = self.snapshot_path.with_suffix(".json.tmp")
        tmp_path.write_text(blob, encoding="utf-8")
        os.replace(tmp_path, self.snapshot_path)
        self.log_path.write_text("", encoding="utf-8")
        self._base_seq = seq
        self._snapshot_state = dict(state)
        self._events = []
