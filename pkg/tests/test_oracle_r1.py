"""R1 against an independent text oracle on generated projects, plus the metamorphic relation."""

from __future__ import annotations

import random

import pytest

from helpers import run_scan
from projectgen import generate_project, insert_assignment, oracle_r1

SEEDS = range(60)
# seeds whose projects have at least one oracle finding to remove
METAMORPHIC_SEEDS = [s for s in range(200) if oracle_r1(generate_project(s).files())][:40]


def r1_pairs(root) -> set[tuple[str, str]]:
    report = run_scan(root, rules=["R1"])
    assert report.analysis_complete
    return {(f.subject, f.remediation) for f in report.findings}


@pytest.mark.parametrize("seed", SEEDS)
def test_r1_equals_oracle(tmp_path, seed):
    project = generate_project(seed)
    project.write(tmp_path)
    assert r1_pairs(tmp_path) == oracle_r1(project.files())


@pytest.mark.parametrize("seed", METAMORPHIC_SEEDS)
def test_inserting_assignment_removes_exactly_that_finding(tmp_path, seed):
    rng = random.Random(seed)
    project = generate_project(seed)
    before_root = tmp_path / "before"
    project.write(before_root)
    before = r1_pairs(before_root)
    flagged = sorted(s for s, _ in before)
    subject = rng.choice(flagged)
    insert_assignment(project, subject.split(".", 1)[1], rng)
    after_root = tmp_path / "after"
    project.write(after_root)
    after = r1_pairs(after_root)
    assert after == {p for p in before if p[0] != subject}
