from __future__ import annotations

import sys
from pathlib import Path

import pytest


@pytest.fixture
def write_project(tmp_path):
    """Write {relative path: source} into a fresh directory and return it."""

    def _write(files: dict[str, str]) -> Path:
        for rel, text in files.items():
            p = tmp_path / rel
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text, encoding="utf-8")
        return tmp_path

    return _write


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in sorted(acceptance.TITLES.items()):
        status = acceptance.RESULTS.get(n, ("NOT RUN", title))[0]
        terminalreporter.write_line(f"criterion {n}: {status} - {title}")
