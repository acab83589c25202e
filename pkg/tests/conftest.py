from __future__ import annotations

import json
import sys
from datetime import date
from pathlib import Path

import pytest

from incident_linker.corpus import Corpus, Incident, Report, write_canonical


def build_tiny_corpus() -> Corpus:
    incidents = {
        "i1": Incident(
            id="i1",
            title="Warehouse robot arm injures technician",
            description="A factory robot arm struck a maintenance technician during a calibration pass.",
            occurred_at=date(2022, 11, 2),
        ),
        "i2": Incident(
            id="i2",
            title="Chatbot exposes private medical records",
            description="A hospital support chatbot revealed patient medical histories to unrelated users.",
            occurred_at=date(2022, 12, 14),
        ),
        "i3": Incident(
            id="i3",
            title="Self-driving shuttle runs red light",
            description="An autonomous downtown shuttle crossed an intersection against a red traffic signal.",
            occurred_at=date(2023, 1, 21),
        ),
    }

    def report(rid: str, title: str, description: str, when: date, links: set[str]) -> Report:
        return Report(
            id=rid,
            title=title,
            description=description,
            submitted_at=when,
            incident_ids=frozenset(links),
        )

    reports = {
        "r1": report(
            "r1",
            "Robot arm strikes worker at distribution hub",
            "A warehouse robot arm injured a technician while recalibrating overnight.",
            date(2023, 1, 5),
            {"i1"},
        ),
        "r2": report(
            "r2",
            "Factory automation injury under investigation",
            "Regulators are reviewing a robot arm incident that left a technician hurt.",
            date(2023, 2, 10),
            {"i1"},
        ),
        "r3": report(
            "r3",
            "Hospital chatbot leaks patient data",
            "A support chatbot surfaced private medical histories to strangers.",
            date(2023, 3, 15),
            {"i2"},
        ),
        "r4": report(
            "r4",
            "Autonomous shuttle ignores red signal",
            "Witnesses saw a self-driving shuttle cross against a red light downtown.",
            date(2023, 4, 20),
            {"i3"},
        ),
        "r5": report(
            "r5",
            "AI failures span privacy and traffic systems",
            "A chatbot privacy leak and a shuttle signal violation drew scrutiny this week.",
            date(2023, 5, 25),
            {"i2", "i3"},
        ),
        "r6": report(
            "r6",
            "Second robot arm mishap at the same warehouse",
            "Another technician narrowly avoided a moving robot arm near the packing line.",
            date(2023, 6, 30),
            {"i1"},
        ),
        "r7": report(
            "r7",
            "Medical chatbot privacy complaint filed",
            "A patient advocacy group filed a complaint over chatbot medical record exposure.",
            date(2023, 7, 4),
            {"i2"},
        ),
        "r8": report(
            "r8",
            "City audits autonomous shuttle program",
            "The city opened an audit after the shuttle ran a red light at a crowded crossing.",
            date(2023, 8, 9),
            {"i3"},
        ),
    }
    return Corpus(incidents=incidents, reports=reports)


@pytest.fixture
def tiny_corpus() -> Corpus:
    return build_tiny_corpus()


@pytest.fixture
def tiny_corpus_path(tmp_path: Path, tiny_corpus: Corpus) -> Path:
    path = tmp_path / "corpus.jsonl"
    write_canonical(tiny_corpus, path)
    return path


def append_issue_lines(path: Path, count: int) -> None:
    with path.open("a", encoding="utf-8") as handle:
        for i in range(count):
            handle.write(
                json.dumps(
                    {
                        "kind": "issue",
                        "id": f"issue-{i}",
                        "title": f"Speculative concern {i}",
                        "description": "Flagged as a concern, not a documented failure.",
                        "date": "2023-09-01",
                        "incident_ids": [],
                    }
                )
                + "\n"
            )


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    """Print acceptance verdicts outside capture so they reach the log."""
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
