"""Shared paths and scan shortcuts for the test suite."""

from __future__ import annotations

import json
from pathlib import Path

from statesentinel.rules import RuleConfig
from statesentinel.scanner import ScanConfig, scan

TESTS = Path(__file__).parent
FIXTURES = TESTS / "fixtures"
CORPUS = FIXTURES / "corpus"
SARIF_SCHEMA = FIXTURES / "sarif-schema-2.1.0.json"


def corpus_cases() -> list[str]:
    return sorted(p.name for p in CORPUS.iterdir() if p.is_dir())


def corpus_sources() -> list[Path]:
    return sorted(CORPUS.rglob("*.sol"))


def case_sources(case: str) -> list[tuple[str, str]]:
    """(relative path, text) pairs of one corpus case."""
    root = CORPUS / case
    return [(p.relative_to(root).as_posix(), p.read_text(encoding="utf-8")) for p in sorted(root.rglob("*.sol"))]


def expected_r1(case: str) -> list[dict]:
    return json.loads((CORPUS / case / "expected_r1.json").read_text())["findings"]


def run_scan(root, rules=None, **kwargs):
    rc = RuleConfig() if rules is None else RuleConfig(enabled=frozenset(rules))
    return scan(ScanConfig(str(root), rule_config=rc, **kwargs))
