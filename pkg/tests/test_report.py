from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor

import jsonschema
import pytest

from helpers import CORPUS, SARIF_SCHEMA, corpus_cases, run_scan
from statesentinel.report import (
    GasNote,
    emit_json,
    emit_sarif,
    emit_text,
    render_gas_note,
    report_to_dict,
    rule_help,
)
from statesentinel.scanner import Report

VALIDATOR = jsonschema.Draft4Validator(json.loads(SARIF_SCHEMA.read_text()))


def r1_report(write_project, src: str = "contract A { uint256 cap = 10; }"):
    return run_scan(write_project({"A.sol": src}), rules=["R1"])


# -- text ----------------------------------------------------------------------------


def test_text_one_finding_plus_footer(write_project):
    lines = emit_text(r1_report(write_project)).splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("warning R1 A.sol:1:22 A.cap — ")
    assert lines[1].startswith("1 finding (1 warning, 0 info, 0 suppressed)")
    assert lines[1].endswith("analysis complete: yes")


def test_text_zero_findings_is_footer_only(write_project):
    report = r1_report(write_project, "contract A { uint x; function f() public { x = 1; } }")
    (line,) = emit_text(report).splitlines()
    assert line.startswith("0 findings")


def test_text_suppressed_prefix_and_count(write_project):
    report = r1_report(write_project, "contract A {\n    uint256 cap = 10; // state-sentinel: allow R1\n}\n")
    lines = emit_text(report).splitlines()
    assert lines[0].startswith("[suppressed] warning R1 ")
    assert lines[1].startswith("0 findings (0 warning, 0 info, 1 suppressed)")


def test_text_mentions_gas_for_r1(write_project):
    text = emit_text(r1_report(write_project))
    assert "2,100" in text and "20,000" in text


# -- JSON ------------------------------------------------------------------------------


def test_empty_report_json():
    data = json.loads(emit_json(Report()))
    assert data["findings"] == []
    assert data["summary"]["analysisComplete"] is True
    assert data["tool"]["name"] == "state-sentinel"


def test_json_is_canonical_and_repeatable():
    report = run_scan(CORPUS / "approval_revocation")
    a, b = emit_json(report), emit_json(report)
    assert a == b and a.endswith("\n")
    assert a == json.dumps(json.loads(a), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def test_json_sorted_across_two_files(write_project):
    root = write_project({
        "b/Z.sol": "contract Z {\n  uint256 late = 1;\n}\n",
        "a/Y.sol": "contract Y {\n  uint256 two = 2;\n  uint256 one;\n  function f() public view returns (uint) { return one; }\n}\n",
    })
    data = json.loads(emit_json(run_scan(root, rules=["R1", "R3"])))
    keys = [(f["file"], f["line"], f["column"], f["ruleId"]) for f in data["findings"]]
    assert keys == [("a/Y.sol", 2, 11, "R1"), ("a/Y.sol", 3, 11, "R1"), ("a/Y.sol", 3, 11, "R3"), ("b/Z.sol", 2, 11, "R1")]


def test_json_byte_identical_across_runs_and_concurrency():
    root = CORPUS / "juicebox_credits"
    sequential = [emit_json(run_scan(root)) for _ in range(2)]
    with ThreadPoolExecutor(4) as pool:
        threaded = list(pool.map(lambda _: emit_json(run_scan(root)), range(4)))
    parallel_parse = emit_json(run_scan(root, jobs=2))
    assert len(set(sequential + threaded + [parallel_parse])) == 1


def test_json_injective_over_fixture_reports():
    seen = {}
    for case in corpus_cases():
        report = run_scan(CORPUS / case)
        for f in report.findings:
            blob = json.dumps(report_to_dict(Report(findings=[f]))["findings"][0], sort_keys=True)
            assert seen.setdefault(blob, f) == f


# -- SARIF -----------------------------------------------------------------------------


@pytest.mark.parametrize("case", corpus_cases())
def test_sarif_validates_for_every_fixture(case):
    doc = json.loads(emit_sarif(run_scan(CORPUS / case)))
    errors = sorted(VALIDATOR.iter_errors(doc), key=str)
    assert errors == []


def test_sarif_single_r1(write_project):
    doc = json.loads(emit_sarif(r1_report(write_project)))
    VALIDATOR.validate(doc)
    (run,) = doc["runs"]
    (res,) = run["results"]
    assert doc["version"] == "2.1.0"
    assert res["ruleId"] == "R1" and res["level"] == "warning"
    assert res["locations"][0]["physicalLocation"]["artifactLocation"]["uri"] == "A.sol"
    assert [r["id"] for r in run["tool"]["driver"]["rules"]] == ["R1"]


def test_sarif_empty_report_is_valid():
    doc = json.loads(emit_sarif(Report()))
    VALIDATOR.validate(doc)
    assert doc["runs"][0]["results"] == []


def test_sarif_skips_suppressed(write_project):
    report = r1_report(write_project, "contract A {\n    uint256 cap = 10; // state-sentinel: allow R1\n}\n")
    assert json.loads(emit_sarif(report))["runs"][0]["results"] == []


def test_sarif_info_maps_to_note():
    doc = json.loads(emit_sarif(run_scan(CORPUS / "handle_fees")))
    levels = {r["ruleId"]: r["level"] for r in doc["runs"][0]["results"]}
    assert levels["R3"] == "note" and levels["R1"] == "warning"


def test_r1_help_contains_store_cost():
    assert "20,000" in rule_help("R1")
    doc = json.loads(emit_sarif(Report()))
    r1 = next(r for r in doc["runs"][0]["tool"]["driver"]["rules"] if r["id"] == "R1")
    assert "20,000" in r1["help"]["text"] and "2,100" in r1["help"]["text"]


def test_emitters_agree_on_count_and_order():
    report = run_scan(CORPUS / "approval_revocation")
    active = report.unsuppressed
    text_lines = emit_text(report).splitlines()[:-1]
    json_subjects = [f["subject"] for f in json.loads(emit_json(report))["findings"]]
    sarif_subjects = [r["properties"]["subject"] for r in json.loads(emit_sarif(report))["runs"][0]["results"]]
    assert len(text_lines) == len(json_subjects) == len(report.findings)
    assert sarif_subjects == [f.subject for f in active] == json_subjects


# -- gas note --------------------------------------------------------------------------


def test_gas_note_for_constant_finding(write_project):
    (f,) = r1_report(write_project).findings
    note = render_gas_note(f)
    assert "2,100" in note and " 100 gas" in note


def test_gas_note_empty_for_other_rules():
    report = run_scan(CORPUS / "axelar_express_receive")
    r2 = next(f for f in report.findings if f.rule_id == "R2")
    assert render_gas_note(r2) == ""


def test_gas_note_overrides(write_project):
    (f,) = r1_report(write_project).findings
    note = render_gas_note(f, GasNote(1000, 50, 15000))
    assert "1,000" in note and "50 gas" in note and "15,000" in note
    assert "2,100" not in note


def test_default_gas_figures():
    assert GasNote() == GasNote(2100, 100, 20000)
