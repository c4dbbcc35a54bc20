"""Whole-project view: contract registry, inheritance linearization and
state-variable resolution."""

from __future__ import annotations

import posixpath
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .frontend import ast as A


@dataclass(frozen=True, order=True)
class StateVarId:
    contract: str  # registry key of the defining contract
    name: str
    partial: bool = field(default=False, compare=False)

    def __str__(self) -> str:
        return f"{self.contract}.{self.name}"


class LinearizationError(Exception):
    pass


def c3_merge(sequences: list[list[str]]) -> list[str]:
    """Standard C3 merge; raises LinearizationError when no order exists."""
    seqs = [list(s) for s in sequences if s]
    result: list[str] = []
    while seqs:
        for seq in seqs:
            head = seq[0]
            if not any(head in other[1:] for other in seqs):
                break
        else:
            raise LinearizationError("inconsistent base order")
        result.append(head)
        seqs = [s[1:] if s[0] == head else s for s in seqs]
        seqs = [s for s in seqs if s]
    return result


@dataclass
class ProjectModel:
    units: list[A.SourceUnit] = field(default_factory=list)
    contracts: dict[str, A.ContractDef] = field(default_factory=dict)
    linearizations: dict[str, list[str]] = field(default_factory=dict)
    state_var_index: dict[StateVarId, A.StateVarDecl] = field(default_factory=dict)
    file_count: int = 0
    degraded_file_count: int = 0
    warnings: list[str] = field(default_factory=list)
    unresolved: dict[str, str] = field(default_factory=dict)
    contract_file: dict[str, str] = field(default_factory=dict)
    # per contract key: var name -> defining StateVarId (most-derived wins)
    var_tables: dict[str, dict[str, StateVarId]] = field(default_factory=dict)
    _imports: dict[str, set[str]] = field(default_factory=dict, repr=False)
    _by_name: dict[str, list[str]] = field(default_factory=dict, repr=False)
    _base_keys: dict[str, list[str]] = field(default_factory=dict, repr=False)

    # -- lookup -------------------------------------------------------------

    def find_contract(self, name: str, from_file: str = "") -> Optional[str]:
        """Registry key for a contract name as seen from ``from_file``."""
        name = name.rsplit(".", 1)[-1]
        keys = self._by_name.get(name, [])
        if not keys:
            return None
        if len(keys) == 1:
            return keys[0]
        same = [k for k in keys if self.contract_file[k] == from_file]
        if same:
            return same[0]
        imported = self._imports.get(from_file, set())
        via_import = [k for k in keys if self.contract_file[k] in imported]
        if via_import:
            return sorted(via_import)[0]
        return sorted(keys)[0]

    def is_partial(self, key: str) -> bool:
        return key in self.unresolved

    def resolve_state_var(self, key: str, name: str) -> Optional[StateVarId]:
        return self.var_tables.get(key, {}).get(name)

    def state_vars_of_family(self, key: str) -> list[StateVarId]:
        """Every state variable visible in ``key`` (its whole linearization)."""
        return sorted(set(self.var_tables.get(key, {}).values()))

    def functions_in_family(self, key: str) -> Iterable[tuple[str, A.FunctionDef]]:
        for member in self.linearizations.get(key, [key]):
            for fn in self.contracts[member].functions:
                yield member, fn

    def lookup_function(self, key: str, name: str, start_after: Optional[str] = None) -> list[tuple[str, A.FunctionDef]]:
        """Functions/modifiers named ``name`` visible from ``key``, most-derived first.

        ``start_after`` skips linearization entries up to and including that
        contract (used for ``super`` calls).
        """
        lin = self.linearizations.get(key, [key])
        if start_after is not None and start_after in lin:
            lin = lin[lin.index(start_after) + 1:]
        found: list[tuple[str, A.FunctionDef]] = []
        for member in lin:
            hits = [(member, fn) for fn in self.contracts[member].functions if fn.name == name and fn.kind in ("function", "modifier")]
            if hits:
                found.extend(hits)
                # overloads are resolved by arity later; the most-derived holder wins
                break
        return found


def linearize(key: str, model: ProjectModel) -> list[str]:
    return model.linearizations[key]


def resolve_state_var(key: str, name: str, model: ProjectModel) -> Optional[StateVarId]:
    return model.resolve_state_var(key, name)


def _resolve_import(unit_path: str, spec: str, paths: set[str]) -> Optional[str]:
    if spec.startswith("."):
        candidate = posixpath.normpath(posixpath.join(posixpath.dirname(unit_path), spec))
    else:
        candidate = posixpath.normpath(spec)
    if candidate in paths:
        return candidate
    # remapped library imports: accept a unique suffix match
    matches = [p for p in paths if p.endswith("/" + candidate)]
    return matches[0] if len(matches) == 1 else None


def build_project_model(units: list[A.SourceUnit]) -> ProjectModel:
    """Register every contract and compute linearizations and var tables.

    Unit order does not matter: units are processed in path order.
    """
    model = ProjectModel()
    units = sorted(units, key=lambda u: u.path)
    model.units = units
    model.file_count = len(units)
    model.degraded_file_count = sum(1 for u in units if u.diagnostics)

    paths = {u.path for u in units}
    for unit in units:
        resolved = set()
        for spec in unit.imports:
            target = _resolve_import(unit.path, spec, paths)
            if target is None:
                model.warnings.append(f"{unit.path}: unresolved import {spec!r}")
            else:
                resolved.add(target)
        model._imports[unit.path] = resolved

    by_name: dict[str, list[tuple[str, A.ContractDef]]] = defaultdict(list)
    for unit in units:
        for contract in unit.contracts:
            by_name[contract.name].append((unit.path, contract))
    for name in sorted(by_name):
        entries = by_name[name]
        if len(entries) > 1:
            model.warnings.append(
                f"contract {name!r} is defined in {len(entries)} files: " + ", ".join(p for p, _ in entries)
            )
        for path, contract in entries:
            key = name if len(entries) == 1 else f"{path}:{name}"
            model.contracts[key] = contract
            model.contract_file[key] = path
            model._by_name.setdefault(name, []).append(key)

    for key in sorted(model.contracts):
        contract = model.contracts[key]
        bases = []
        for base in contract.bases:
            target = model.find_contract(base, model.contract_file[key])
            if target is None:
                model.unresolved.setdefault(key, f"unknown base contract {base!r}")
                model.warnings.append(f"{model.contract_file[key]}: contract {contract.name!r} has unresolved base {base!r}")
            else:
                bases.append(target)
        model._base_keys[key] = bases

    for key in sorted(model.contracts):
        cycle = _find_cycle(key, model)
        if cycle:
            model.unresolved.setdefault(key, "inheritance cycle: " + " -> ".join(model.contracts[k].name for k in cycle))
            model.warnings.append(f"{model.contract_file[key]}: {model.unresolved[key]}")
            model.linearizations[key] = _fallback_order(key, model)
    for key in sorted(model.contracts):
        _linearize(key, model)
    # an unreliable ancestor makes every descendant's linearization unreliable too
    broken = set(model.unresolved)
    for key in sorted(model.contracts):
        bad = [m for m in model.linearizations[key][1:] if m in broken]
        if bad and key not in model.unresolved:
            model.unresolved[key] = f"inherits from unresolved contract {model.contracts[bad[0]].name!r}"
    for key in sorted(model.contracts):
        _build_var_table(key, model)
    return model


def _find_cycle(key: str, model: ProjectModel) -> Optional[list[str]]:
    """Path ``key -> ... -> key`` through the base graph, if one exists."""
    stack = [(key, [key])]
    seen: set[str] = set()
    while stack:
        cur, path = stack.pop()
        for base in model._base_keys.get(cur, []):
            if base == key:
                return path + [key]
            if base not in seen:
                seen.add(base)
                stack.append((base, path + [base]))
    return None


def _linearize(key: str, model: ProjectModel) -> list[str]:
    # cycle members were assigned a fallback order beforehand, so recursion terminates
    if key in model.linearizations:
        return model.linearizations[key]
    # Solidity lists bases from most base-like to most derived
    rev = list(reversed(model._base_keys[key]))
    try:
        result = [key] + c3_merge([_linearize(b, model) for b in rev] + [rev])
        if key in result[1:]:
            raise LinearizationError("contract inherits from itself")
    except LinearizationError as exc:
        model.unresolved.setdefault(key, str(exc))
        model.warnings.append(f"{model.contract_file[key]}: cannot linearize {model.contracts[key].name!r}: {exc}")
        result = _fallback_order(key, model)
    model.linearizations[key] = result
    return result


def _fallback_order(key: str, model: ProjectModel) -> list[str]:
    """Best-effort order for contracts whose bases do not linearize."""
    order: list[str] = []
    todo = [key]
    while todo:
        cur = todo.pop(0)
        if cur in order:
            continue
        order.append(cur)
        todo.extend(reversed(model._base_keys.get(cur, [])))
    return order


def _build_var_table(key: str, model: ProjectModel) -> None:
    table: dict[str, StateVarId] = {}
    partial = key in model.unresolved or any(m in model.unresolved for m in model.linearizations[key])
    for member in model.linearizations[key]:
        for var in model.contracts[member].state_vars:
            sid = StateVarId(member, var.name, partial)
            model.state_var_index.setdefault(StateVarId(member, var.name), var)
            if var.name in table:
                winner = table[var.name].contract
                if winner != member:
                    msg = (
                        f"state variable {var.name!r} of {model.contracts[winner].name!r} "
                        f"shadows the one declared in {model.contracts[member].name!r}"
                    )
                    if msg not in model.warnings:
                        model.warnings.append(msg)
                continue
            table[var.name] = sid
    model.var_tables[key] = table
