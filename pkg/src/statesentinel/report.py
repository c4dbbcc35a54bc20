"""Report serialization: plain text, canonical JSON and SARIF 2.1.0."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .rules import REMEDY_MISSED, RULE_NAMES, Finding
from .scanner import Report

SARIF_VERSION = "2.1.0"
SARIF_SCHEMA_URI = "https://json.schemastore.org/sarif-2.1.0.json"
_SARIF_LEVEL = {"warning": "warning", "info": "note"}


@dataclass(frozen=True)
class GasNote:
    cold_read_gas: int = 2100
    warm_read_gas: int = 100
    store_min_gas: int = 20000


DEFAULT_GAS = GasNote()


def _gas(n: int) -> str:
    return f"{n:,}"


RULE_DOCS = {
    "R1": {
        "short": "State variable is never reassigned",
        "full": (
            "A state variable without the constant or immutable modifier is never written outside "
            "constructors anywhere in the scanned project."
        ),
        "help": (
            "Variables that never change after deployment can be declared constant (value fixed at "
            "compile time) or immutable (value fixed by the constructor). Both live in the contract "
            "bytecode, so reads skip SLOAD ({cold} gas for the first read in a transaction, {warm} gas "
            "for later reads) and no storage slot is ever initialized with SSTORE (at least {store} "
            "gas). A variable that is read but never assigned can also mean that an update was "
            "forgotten, which leaves dependent logic working on a stale value."
        ),
    },
    "R2": {
        "short": "State write after an external call",
        "full": (
            "A function writes a state variable after making an external call, and the same variable "
            "is checked in a condition or require-style guard somewhere in the project."
        ),
        "help": (
            "Until the late write happens, the guard still sees the old value. Reentrant calls, "
            "callbacks or a failing call can therefore pass the guard again or act on a record that "
            "was never marked as processed. Move the state update before every external call."
        ),
    },
    "R3": {
        "short": "State variable read before any initialization",
        "full": (
            "A state variable has no initializer and is not assigned in a constructor, yet it is read."
        ),
        "help": (
            "Until some function assigns it, every read returns the type's default value (zero, "
            "false or the zero address). Timestamps and counters that start at zero are a common "
            "source of wrong calculations. Initialize the variable or make the first-use path explicit."
        ),
    },
    "R4": {
        "short": "Co-updated state variables updated asymmetrically",
        "full": (
            "Most functions that update one variable also update a second one, but this function "
            "updates only the first."
        ),
        "help": (
            "Variables that are normally updated together usually encode one logical record, such as "
            "an owner and its approval. A function that changes one of them without the other can "
            "leave the record inconsistent, for example an approval that survives a transfer. The "
            "thresholds are configurable through the minimum support and confidence settings."
        ),
    },
}


def rule_help(rule_id: str, gas: GasNote = DEFAULT_GAS) -> str:
    return RULE_DOCS[rule_id]["help"].format(
        cold=_gas(gas.cold_read_gas), warm=_gas(gas.warm_read_gas), store=_gas(gas.store_min_gas)
    )


def render_gas_note(finding: Finding, gas: GasNote = DEFAULT_GAS) -> str:
    """Per-transaction storage costs an R1 remediation would avoid; "" otherwise."""
    if finding.rule_id != "R1":
        return ""
    costs = (
        f"each storage read costs {_gas(gas.cold_read_gas)} gas the first time in a transaction and "
        f"{_gas(gas.warm_read_gas)} gas afterwards, and initializing the slot costs at least "
        f"{_gas(gas.store_min_gas)} gas"
    )
    if finding.remediation == REMEDY_MISSED:
        return f"If the value is meant to stay fixed, a constant avoids storage entirely: {costs}."
    return f"Moving the value into bytecode avoids storage access: {costs}."


def with_gas_note(message: str, note: str) -> str:
    if not note:
        return message
    return f"{message.rstrip('.')}. {note}"


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# -- text ---------------------------------------------------------------------


def _finding_line(f: Finding) -> str:
    prefix = "[suppressed] " if f.suppressed else ""
    return f"{prefix}{f.severity} {f.rule_id} {f.file}:{f.line}:{f.column} {f.subject} — {f.message}"


def _plural(n: int, word: str) -> str:
    return f"{n} {word}" if n == 1 else f"{n} {word}s"


def emit_text(report: Report, gas: GasNote = DEFAULT_GAS) -> str:
    lines = []
    for f in report.findings:
        lines.append(with_gas_note(_finding_line(f), render_gas_note(f, gas)))
    active = report.unsuppressed
    suppressed = len(report.findings) - len(active)
    warnings = sum(1 for f in active if f.severity == "warning")
    lines.append(
        f"{_plural(len(active), 'finding')} ({warnings} warning, {len(active) - warnings} info, "
        f"{suppressed} suppressed); scanned {_plural(report.scanned_file_count, 'file')}, "
        f"excluded {report.excluded_file_count}, degraded {report.degraded_file_count}; "
        f"analysis complete: {'yes' if report.analysis_complete else 'no'}"
    )
    return "\n".join(lines) + "\n"


# -- JSON ---------------------------------------------------------------------


def finding_to_dict(f: Finding, gas: GasNote = DEFAULT_GAS) -> dict:
    return {
        "ruleId": f.rule_id,
        "ruleName": RULE_NAMES[f.rule_id],
        "severity": f.severity,
        "subject": f.subject,
        "file": f.file,
        "line": f.line,
        "column": f.column,
        "message": f.message,
        "remediation": f.remediation,
        "confidence": f.confidence,
        "suppressed": f.suppressed,
        "variables": [{"contract": v.contract, "name": v.name} for v in f.variables],
        "function": None if f.function is None else {"contract": f.function.contract, "signature": f.function.signature},
        "gasNote": render_gas_note(f, gas) or None,
    }


def report_to_dict(report: Report, gas: GasNote = DEFAULT_GAS) -> dict:
    active = report.unsuppressed
    return {
        "tool": {"name": report.tool_name, "version": report.tool_version},
        "summary": {
            "scannedFileCount": report.scanned_file_count,
            "excludedFileCount": report.excluded_file_count,
            "degradedFileCount": report.degraded_file_count,
            "analysisComplete": report.analysis_complete,
            "findingCount": len(active),
            "suppressedCount": len(report.findings) - len(active),
            "enabledRules": list(report.enabled_rules),
        },
        "findings": [finding_to_dict(f, gas) for f in report.findings],
        "diagnostics": [
            {"file": d.file, "line": d.line, "column": d.column, "message": d.message} for d in report.diagnostics
        ],
        "warnings": list(report.warnings),
    }


def emit_json(report: Report, gas: GasNote = DEFAULT_GAS) -> str:
    return canonical_json(report_to_dict(report, gas))


# -- SARIF --------------------------------------------------------------------


def sarif_document(report: Report, gas: GasNote = DEFAULT_GAS) -> dict:
    rules = []
    index = {}
    for rule_id in report.enabled_rules:
        doc = RULE_DOCS[rule_id]
        index[rule_id] = len(rules)
        severity = "warning" if rule_id in ("R1", "R2") else "info"
        rules.append({
            "id": rule_id,
            "name": RULE_NAMES[rule_id],
            "shortDescription": {"text": doc["short"]},
            "fullDescription": {"text": doc["full"]},
            "help": {"text": rule_help(rule_id, gas)},
            "defaultConfiguration": {"level": _SARIF_LEVEL[severity]},
        })
    results = []
    for f in report.findings:
        if f.suppressed:
            continue
        text = with_gas_note(f.message, render_gas_note(f, gas))
        result = {
            "ruleId": f.rule_id,
            "level": _SARIF_LEVEL[f.severity],
            "message": {"text": text},
            "locations": [{
                "physicalLocation": {
                    "artifactLocation": {"uri": f.file},
                    "region": {"startLine": max(1, f.line), "startColumn": max(1, f.column)},
                }
            }],
            "properties": {"subject": f.subject, "confidence": f.confidence, "remediation": f.remediation},
        }
        if f.rule_id in index:
            result["ruleIndex"] = index[f.rule_id]
        results.append(result)
    return {
        "$schema": SARIF_SCHEMA_URI,
        "version": SARIF_VERSION,
        "runs": [{
            "tool": {"driver": {"name": report.tool_name, "version": report.tool_version, "rules": rules}},
            "columnKind": "unicodeCodePoints",
            "results": results,
            "properties": {
                "analysisComplete": report.analysis_complete,
                "scannedFileCount": report.scanned_file_count,
                "excludedFileCount": report.excluded_file_count,
                "degradedFileCount": report.degraded_file_count,
            },
        }],
    }


def emit_sarif(report: Report, gas: GasNote = DEFAULT_GAS) -> str:
    return canonical_json(sarif_document(report, gas))


EMITTERS = {"text": emit_text, "json": emit_json, "sarif": emit_sarif}
