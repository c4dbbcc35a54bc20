"""The four detectors.

R1  state variable that is never reassigned outside constructors
R2  state write after an external call, where the variable feeds a guard
R3  state variable read without an initializer or constructor write
R4  function that updates one variable of a co-updated pair but not the other
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .dataflow import (
    CONSERVATIVE, EXACT, EXTERNAL_CALL, READ, WRITE, DataflowResult, FunctionId,
)
from .frontend import ast as A
from .model import ProjectModel, StateVarId

ALL_RULES = ("R1", "R2", "R3", "R4")
SEVERITY = {"R1": "warning", "R2": "warning", "R3": "info", "R4": "info"}
RULE_NAMES = {
    "R1": "const-candidate",
    "R2": "write-after-external-call",
    "R3": "uninitialized-state-read",
    "R4": "co-update-asymmetry",
}
DEFAULT_SUPPRESSION_TOKEN = "state-sentinel: allow"

REMEDY_CONSTANT = "declare constant"
REMEDY_IMMUTABLE = "declare immutable"
REMEDY_MISSED = "possible missed update"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RuleConfig:
    enabled: frozenset = frozenset(ALL_RULES)
    r4_support: int = 2
    r4_confidence: float = 0.7
    suppression_token: str = DEFAULT_SUPPRESSION_TOKEN

    def __post_init__(self):
        unknown = set(self.enabled) - set(ALL_RULES)
        if unknown:
            raise ConfigError(f"unknown rule id(s): {', '.join(sorted(unknown))}")
        if isinstance(self.r4_support, bool) or not isinstance(self.r4_support, int) or self.r4_support < 1:
            raise ConfigError("R4 support must be an integer >= 1")
        if not 0 < self.r4_confidence <= 1:
            raise ConfigError("R4 confidence must be in (0, 1]")


@dataclass(frozen=True)
class Finding:
    rule_id: str
    severity: str
    subject: str  # display text, e.g. "Vault.fee" or "Vault.f(uint256)"
    file: str
    line: int
    column: int
    message: str
    remediation: str
    confidence: str = EXACT
    suppressed: bool = False
    variables: tuple[StateVarId, ...] = ()
    function: Optional[FunctionId] = None

    def sort_key(self):
        return (self.file, self.line, self.column, self.rule_id, self.subject, self.message)


# -- helpers ----------------------------------------------------------------


def _var_name(model: ProjectModel, sid: StateVarId) -> str:
    return f"{model.contracts[sid.contract].name}.{sid.name}"


def _fn_name(model: ProjectModel, fid: FunctionId) -> str:
    return f"{model.contracts[fid.contract].name}.{fid.signature}"


def _decl(model: ProjectModel, sid: StateVarId) -> A.StateVarDecl:
    return model.state_var_index[StateVarId(sid.contract, sid.name)]


def _is_constructor(result: DataflowResult, fid: FunctionId) -> bool:
    facts = result.functions.get(fid)
    return facts is not None and facts.kind == "constructor"


def _candidate_vars(model: ProjectModel) -> list[StateVarId]:
    out = []
    for sid in sorted(model.state_var_index):
        if model.contracts[sid.contract].kind in ("interface", "library"):
            continue
        out.append(sid)
    return out


@dataclass
class _Summary:
    writes: dict[StateVarId, str] = field(default_factory=dict)  # var -> confidence
    reads: set[StateVarId] = field(default_factory=set)
    external: Optional[str] = None  # first external callee text
    external_confidence: str = EXACT


def _merge_conf(a: str, b: str) -> str:
    return CONSERVATIVE if CONSERVATIVE in (a, b) else EXACT


def transitive_summaries(result: DataflowResult) -> dict[FunctionId, _Summary]:
    """Writes, reads and external calls of each function including its callees."""
    summaries: dict[FunctionId, _Summary] = {}
    for fid, facts in result.functions.items():
        s = _Summary()
        for e in facts.events:
            if e.kind == WRITE:
                # one exact write is enough for the variable to count as exactly written
                if s.writes.get(e.subject) != EXACT:
                    s.writes[e.subject] = e.confidence
            elif e.kind == READ:
                s.reads.add(e.subject)
            elif e.kind == EXTERNAL_CALL and s.external is None:
                s.external, s.external_confidence = e.detail, e.confidence
        summaries[fid] = s
    changed = True
    while changed:
        changed = False
        for fid in sorted(result.functions):
            s = summaries[fid]
            for site in result.functions[fid].calls:
                for callee in site.callees:
                    c = summaries.get(callee)
                    if c is None or callee == fid:
                        continue
                    for sid, conf in c.writes.items():
                        if sid not in s.writes:
                            s.writes[sid] = conf
                            changed = True
                    if not c.reads <= s.reads:
                        s.reads |= c.reads
                        changed = True
                    if s.external is None and c.external is not None:
                        s.external, s.external_confidence = c.external, c.external_confidence
                        changed = True
    return summaries


# -- R1 ---------------------------------------------------------------------


def rule_const_candidate(model: ProjectModel, result: DataflowResult, config: RuleConfig) -> list[Finding]:
    other_writes: set[StateVarId] = set()
    ctor_writes: set[StateVarId] = set()
    for e in result.events:
        if e.kind != WRITE:
            continue
        if _is_constructor(result, e.function):
            ctor_writes.add(e.subject)
        else:
            other_writes.add(e.subject)
    degraded = model.degraded_file_count > 0
    findings = []
    for sid in _candidate_vars(model):
        decl = _decl(model, sid)
        if decl.mutability != "none" or sid in other_writes:
            continue
        name = _var_name(model, sid)
        if sid in ctor_writes:
            remedy = REMEDY_IMMUTABLE
            msg = f"state variable '{sid.name}' is assigned only in a constructor and never reassigned; it could be declared immutable"
        elif decl.has_initializer:
            remedy = REMEDY_CONSTANT
            msg = f"state variable '{sid.name}' is initialized at declaration and never reassigned; it could be declared constant"
        else:
            remedy = REMEDY_MISSED
            msg = f"state variable '{sid.name}' is never assigned anywhere in the project; an update may be missing"
        partial = model.is_partial(sid.contract) or sid.partial
        findings.append(Finding(
            "R1", SEVERITY["R1"], name, model.contract_file[sid.contract], decl.loc.line, decl.loc.column,
            msg, remedy, CONSERVATIVE if degraded or partial else EXACT, variables=(sid,),
        ))
    return findings


# -- R2 ---------------------------------------------------------------------


def guard_reads(result: DataflowResult, summaries: Optional[dict] = None) -> set[StateVarId]:
    """State variables read inside a condition or require-style check."""
    summaries = summaries if summaries is not None else transitive_summaries(result)
    out = {e.subject for e in result.events if e.kind == READ and e.in_guard}
    for facts in result.functions.values():
        for site in facts.calls:
            if site.in_guard:
                for callee in site.callees:
                    if callee in summaries:
                        out |= summaries[callee].reads
    return out


def rule_write_after_external_call(model: ProjectModel, result: DataflowResult, config: RuleConfig) -> list[Finding]:
    summaries = transitive_summaries(result)
    guarded = guard_reads(result, summaries)
    findings = []
    for fid in sorted(result.functions):
        facts = result.functions[fid]
        if facts.kind not in ("function", "receive", "fallback") or facts.func.body is None:
            continue
        # (seq, kind, subject, line, column, confidence, text)
        timeline = []
        for e in facts.events:
            if e.kind in (WRITE, EXTERNAL_CALL):
                timeline.append((e.seq, e.kind, e.subject, e.line, e.column, e.confidence, e.detail))
        for site in facts.calls:
            if site.via_modifier:
                continue
            for callee in site.callees:
                s = summaries.get(callee)
                if s is None:
                    continue
                if s.external is not None:
                    timeline.append((site.seq, EXTERNAL_CALL, None, site.line, site.column, s.external_confidence,
                                     f"{s.external} (via {callee.signature})"))
                for sid, conf in s.writes.items():
                    timeline.append((site.seq, WRITE, sid, site.line, site.column, conf, f"via {callee.signature}"))
        calls = sorted(t for t in timeline if t[1] == EXTERNAL_CALL)
        if not calls:
            continue
        first = calls[0]
        late: dict[StateVarId, tuple] = {}
        for t in sorted(timeline, key=lambda t: (t[0], t[3], t[4])):
            if t[1] == WRITE and t[0] > first[0] and t[2] in guarded and t[2] not in late:
                late[t[2]] = t
        for sid, w in sorted(late.items()):
            conf = _merge_conf(first[5], w[5])
            how = f" {w[6]}" if w[6].startswith("via") else ""
            msg = (
                f"'{sid.name}' is written{how} at line {w[3]} after the external call '{first[6]}' at line {first[3]}; "
                f"'{sid.name}' is checked in a guard, so the call can observe or act on the stale value"
            )
            findings.append(Finding(
                "R2", SEVERITY["R2"], f"{_fn_name(model, fid)}: {sid.name}", facts.file, w[3], w[4], msg,
                f"update '{sid.name}' before any external call (checks-effects-interactions)", conf,
                variables=(sid,), function=fid,
            ))
    return findings


# -- R3 ---------------------------------------------------------------------


def rule_uninitialized_state_read(model: ProjectModel, result: DataflowResult, config: RuleConfig) -> list[Finding]:
    summaries = transitive_summaries(result)
    ctor_writes: set[StateVarId] = set()
    reads: set[StateVarId] = set()
    later: dict[StateVarId, list[tuple[str, int]]] = {}
    for fid, facts in result.functions.items():
        if facts.kind == "constructor":
            ctor_writes |= set(summaries[fid].writes)
    for e in result.events:
        if e.kind == READ:
            reads.add(e.subject)
        elif e.kind == WRITE and not _is_constructor(result, e.function):
            later.setdefault(e.subject, []).append((e.file, e.line))
    findings = []
    for sid in _candidate_vars(model):
        decl = _decl(model, sid)
        if decl.has_initializer or decl.mutability == "constant" or sid in ctor_writes or sid not in reads:
            continue
        msg = f"state variable '{sid.name}' is read but has no initializer and no constructor assignment, so early reads see the default value"
        sites = sorted(set(later.get(sid, [])))
        if sites:
            shown = ", ".join(f"{f}:{line}" for f, line in sites[:5])
            more = f" and {len(sites) - 5} more" if len(sites) > 5 else ""
            msg += f"; later writes exist at {shown}{more}"
        findings.append(Finding(
            "R3", SEVERITY["R3"], _var_name(model, sid), model.contract_file[sid.contract], decl.loc.line,
            decl.loc.column, msg, f"initialize '{sid.name}' at declaration or in the constructor",
            variables=(sid,),
        ))
    return findings


# -- R4 ---------------------------------------------------------------------


def _leaf_families(model: ProjectModel) -> list[str]:
    bases = {b for key, lin in model.linearizations.items() for b in lin[1:]}
    return [k for k in sorted(model.contracts) if k not in bases and model.contracts[k].kind != "interface"]


def rule_co_update_asymmetry(model: ProjectModel, result: DataflowResult, config: RuleConfig) -> list[Finding]:
    threshold = Fraction(str(config.r4_confidence))
    seen: set[tuple] = set()
    findings = []
    for family in _leaf_families(model):
        write_sets: dict[FunctionId, set[StateVarId]] = {}
        for member, fn in model.functions_in_family(family):
            fid = FunctionId(member, fn.signature)
            facts = result.functions.get(fid)
            if facts is None or fn.kind == "constructor":
                continue
            ws = facts.write_set()
            if ws:
                write_sets[fid] = ws
        variables = sorted(set().union(*write_sets.values())) if write_sets else []
        for u in variables:
            writers_u = {f for f, ws in write_sets.items() if u in ws}
            for v in variables:
                if u == v:
                    continue
                both = {f for f in writers_u if v in write_sets[f]}
                u_only = writers_u - both
                if len(both) < config.r4_support or not u_only:
                    continue
                ratio = Fraction(len(both), len(both) + len(u_only))
                if ratio < threshold:
                    continue
                for fid in sorted(u_only):
                    if (u, v, fid) in seen:
                        continue
                    seen.add((u, v, fid))
                    fn = result.functions[fid].func
                    msg = (
                        f"'{fid.signature}' updates '{u.name}' but not '{v.name}'; {len(both)} of "
                        f"{len(both) + len(u_only)} functions that update '{u.name}' also update '{v.name}'"
                    )
                    findings.append(Finding(
                        "R4", SEVERITY["R4"], f"{_fn_name(model, fid)}: {v.name}", result.functions[fid].file,
                        fn.loc.line, fn.loc.column, msg, f"check whether '{fid.signature}' should also update '{v.name}'",
                        variables=(u, v), function=fid,
                    ))
    return findings


# -- driver -----------------------------------------------------------------

RULES = {
    "R1": rule_const_candidate,
    "R2": rule_write_after_external_call,
    "R3": rule_uninitialized_state_read,
    "R4": rule_co_update_asymmetry,
}


def suppressed_rules(comment: str, token: str = DEFAULT_SUPPRESSION_TOKEN) -> set[str]:
    m = re.search(re.escape(token) + r"\s+(R\d(?:\s*,\s*R\d)*)", comment)
    if not m:
        return set()
    return {part.strip() for part in m.group(1).split(",")}


def apply_suppressions(findings: list[Finding], model: ProjectModel, token: str) -> list[Finding]:
    by_line: dict[tuple[str, int], set[str]] = {}
    for unit in model.units:
        for c in unit.comments:
            ids = suppressed_rules(c.text, token)
            if ids:
                by_line.setdefault((unit.path, c.line), set()).update(ids)
    out = []
    for f in findings:
        if f.rule_id in by_line.get((f.file, f.line), ()):
            f = Finding(**{**f.__dict__, "suppressed": True})
        out.append(f)
    return out


def run_rules(model: ProjectModel, result: DataflowResult, config: RuleConfig = RuleConfig()) -> list[Finding]:
    findings: list[Finding] = []
    for rule_id in ALL_RULES:
        if rule_id in config.enabled:
            findings.extend(RULES[rule_id](model, result, config))
    findings = apply_suppressions(findings, model, config.suppression_token)
    return sorted(findings, key=Finding.sort_key)
