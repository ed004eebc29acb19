"""Shared fixtures and the acceptance-criteria summary block.

Tests marked ``@pytest.mark.acceptance("...")`` get one PASS/FAIL line each
at the end of the run, so the release gate is readable at a glance.
"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: dict = {}
_OUTCOMES: dict = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker and marker.args:
            _CRITERIA[item.nodeid] = str(marker.args[0])


def pytest_runtest_logreport(report):
    if report.nodeid not in _CRITERIA:
        return
    if report.when == "call":
        _OUTCOMES[report.nodeid] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        _OUTCOMES[report.nodeid] = "error" if report.failed else report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    lines = []
    for nodeid, text in _CRITERIA.items():
        outcome = _OUTCOMES.get(nodeid, "not run")
        word = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(outcome, outcome.upper())
        lines.append((text, word))
    terminalreporter.write_sep("=", "acceptance criteria")
    for text, word in sorted(lines):
        terminalreporter.write_line(f"{word:5s} {text}")
