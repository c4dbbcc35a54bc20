"""Taxonomy statistics over labeled vulnerability datasets.

Category distributions, pairwise lift and Cohen's kappa. Arithmetic is
exact (``Fraction``); floats appear only at the presentation boundary.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

DIMENSIONS: dict[str, tuple[str, ...]] = {
    "cause": (
        "DynamicDependentUpdateOmission",
        "IncorrectLogicUpdate",
        "VariableOmission",
        "InitReinitOmission",
    ),
    "fix": (
        "DirectVariableChange",
        "RedesignAlgorithmDataStructure",
        "ReorderSequence",
        "ChangeConditions",
    ),
    "exploit": (
        "NumericalCalculationErrors",
        "RepeatedTransactions",
        "InterimStateExploits",
        "ParalyzingContractFunctionality",
    ),
}
COLUMNS = ("id", "cause", "fix", "exploit")


class DatasetError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class StudyRecord:
    id: str
    cause: str
    fixes: frozenset
    exploit: str

    def has(self, dimension: str, category: str) -> bool:
        if dimension == "fix":
            return category in self.fixes
        return getattr(self, dimension) == category


def load_label_map(path: str) -> dict[str, str]:
    """JSON object mapping alternative spellings to category identifiers."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetError([f"cannot read label map {path}: {exc}"]) from exc
    known = {c for cats in DIMENSIONS.values() for c in cats}
    if not isinstance(data, dict):
        raise DatasetError([f"label map {path} must be a JSON object"])
    bad = [f"label map: {k!r} maps to unknown category {v!r}" for k, v in data.items() if v not in known]
    if bad:
        raise DatasetError(bad)
    return {str(k).strip(): v for k, v in data.items()}


def parse_dataset(text: str, label_map: Optional[dict[str, str]] = None) -> list[StudyRecord]:
    label_map = label_map or {}
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise DatasetError(["dataset is empty"])
    header = [h.strip() for h in rows[0]]
    missing = [c for c in COLUMNS if c not in header]
    if missing:
        raise DatasetError([f"missing column(s): {', '.join(missing)}"])
    col = {name: header.index(name) for name in COLUMNS}
    errors: list[str] = []
    records: list[StudyRecord] = []
    seen: dict[str, int] = {}

    def label(raw: str) -> str:
        raw = raw.strip()
        return label_map.get(raw, raw)

    for rowno, row in enumerate(rows[1:], start=2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) < len(header):
            errors.append(f"row {rowno}: expected {len(header)} cells, found {len(row)}")
            continue
        rid = row[col["id"]].strip()
        cause = label(row[col["cause"]])
        exploit = label(row[col["exploit"]])
        fix_cell = row[col["fix"]].strip()
        fixes = [label(f) for f in fix_cell.split(";") if f.strip()]
        row_errors = []
        if not rid:
            row_errors.append(f"row {rowno}: empty id")
        elif rid in seen:
            row_errors.append(f"row {rowno}: duplicate id {rid!r} (first seen in row {seen[rid]})")
        if cause not in DIMENSIONS["cause"]:
            row_errors.append(f"row {rowno}: unknown cause {cause!r}")
        if not fixes:
            row_errors.append(f"row {rowno}: empty fix cell")
        for f in fixes:
            if f not in DIMENSIONS["fix"]:
                row_errors.append(f"row {rowno}: unknown fix {f!r}")
        if exploit not in DIMENSIONS["exploit"]:
            row_errors.append(f"row {rowno}: unknown exploit {exploit!r}")
        if rid and rid not in seen:
            seen[rid] = rowno
        if row_errors:
            errors.extend(row_errors)
            continue
        records.append(StudyRecord(rid, cause, frozenset(fixes), exploit))
    if errors:
        raise DatasetError(errors)
    return records


def load_dataset(path: str, label_map: Optional[dict[str, str]] = None) -> list[StudyRecord]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise DatasetError([f"cannot read dataset {path}: {exc.strerror or exc}"]) from exc
    return parse_dataset(text, label_map)


def _check(dimension: str, category: Optional[str] = None) -> None:
    if dimension not in DIMENSIONS:
        raise StatsError(f"unknown dimension {dimension!r}; expected one of {', '.join(DIMENSIONS)}")
    if category is not None and category not in DIMENSIONS[dimension]:
        raise StatsError(f"unknown {dimension} category {category!r}")


def round_half_up(value: Fraction, places: int = 2) -> Fraction:
    scale = 10 ** places
    return Fraction(math.floor(value * scale + Fraction(1, 2)), scale)


@dataclass(frozen=True)
class DistributionRow:
    category: str
    count: int
    percentage: Fraction  # already rounded to two decimals

    @property
    def percentage_text(self) -> str:
        return f"{float(self.percentage):.2f}"


def category_distribution(records: Sequence[StudyRecord], dimension: str) -> list[DistributionRow]:
    """Counts and percentages of N per category; multi-label fixes may sum above N."""
    _check(dimension)
    if not records:
        raise StatsError("dataset is empty")
    n = len(records)
    rows = []
    for cat in DIMENSIONS[dimension]:
        count = sum(1 for r in records if r.has(dimension, cat))
        rows.append(DistributionRow(cat, count, round_half_up(Fraction(100 * count, n))))
    return rows


def lift(records: Sequence[StudyRecord], dim_a: str, cat_a: str, dim_b: str, cat_b: str) -> Optional[Fraction]:
    """P(AB) / (P(A) P(B)); None when either marginal is zero."""
    _check(dim_a, cat_a)
    _check(dim_b, cat_b)
    if not records:
        raise StatsError("dataset is empty")
    return _lift_cell(records, dim_a, cat_a, dim_b, cat_b).lift


@dataclass(frozen=True)
class LiftCell:
    cat_a: str
    cat_b: str
    joint: int
    count_a: int
    count_b: int
    n: int

    @property
    def lift(self) -> Optional[Fraction]:
        if self.count_a == 0 or self.count_b == 0:
            return None
        return Fraction(self.joint * self.n, self.count_a * self.count_b)


def _lift_cell(records, dim_a, cat_a, dim_b, cat_b) -> LiftCell:
    in_a = [r.has(dim_a, cat_a) for r in records]
    in_b = [r.has(dim_b, cat_b) for r in records]
    joint = sum(1 for a, b in zip(in_a, in_b) if a and b)
    return LiftCell(cat_a, cat_b, joint, sum(in_a), sum(in_b), len(records))


@dataclass(frozen=True)
class LiftMatrix:
    dim_a: str
    dim_b: str
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    cells: tuple[tuple[LiftCell, ...], ...]

    def cell(self, cat_a: str, cat_b: str) -> LiftCell:
        return self.cells[self.rows.index(cat_a)][self.cols.index(cat_b)]

    def to_dict(self) -> dict:
        return {
            "dimA": self.dim_a,
            "dimB": self.dim_b,
            "n": self.cells[0][0].n if self.cells and self.cells[0] else 0,
            "rows": list(self.rows),
            "cols": list(self.cols),
            "cells": [
                {
                    "a": c.cat_a,
                    "b": c.cat_b,
                    "lift": None if c.lift is None else float(c.lift),
                    "jointCount": c.joint,
                    "countA": c.count_a,
                    "countB": c.count_b,
                }
                for row in self.cells
                for c in row
            ],
        }


def lift_matrix(records: Sequence[StudyRecord], dim_a: str, dim_b: str) -> LiftMatrix:
    _check(dim_a)
    _check(dim_b)
    if not records:
        raise StatsError("dataset is empty")
    rows = DIMENSIONS[dim_a]
    cols = DIMENSIONS[dim_b]
    cells = tuple(tuple(_lift_cell(records, dim_a, a, dim_b, b) for b in cols) for a in rows)
    return LiftMatrix(dim_a, dim_b, rows, cols, cells)


def cohen_kappa_exact(labels_a: Sequence, labels_b: Sequence) -> Fraction:
    if len(labels_a) != len(labels_b):
        raise StatsError(f"label sequences differ in length ({len(labels_a)} vs {len(labels_b)})")
    if not labels_a:
        raise StatsError("label sequences are empty")
    n = len(labels_a)
    p_o = Fraction(sum(1 for a, b in zip(labels_a, labels_b) if a == b), n)
    cats = set(labels_a) | set(labels_b)
    p_e = sum((Fraction(list(labels_a).count(c), n) * Fraction(list(labels_b).count(c), n) for c in cats), Fraction(0))
    if p_e == 1:
        if p_o == 1:
            return Fraction(1)
        raise StatsError("kappa is undefined: chance agreement is 1 but observed agreement is not")
    return (p_o - p_e) / (1 - p_e)


def cohen_kappa(labels_a: Sequence, labels_b: Sequence) -> float:
    return float(cohen_kappa_exact(labels_a, labels_b))


def load_labels(path: str) -> list[str]:
    """One label per line; a leading ``label`` header line is skipped."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DatasetError([f"cannot read label file {path}: {exc.strerror or exc}"]) from exc
    labels: list[str] = []
    errors: list[str] = []
    for rowno, row in enumerate(rows, start=1):
        cells = [c.strip() for c in row if c.strip()]
        if not cells:
            continue
        if len(cells) > 1:
            errors.append(f"{path}: line {rowno}: expected a single label, found {len(cells)} cells")
            continue
        if rowno == 1 and cells[0].lower() == "label":
            continue
        labels.append(cells[0])
    if errors:
        raise DatasetError(errors)
    return labels


# -- presentation -----------------------------------------------------------


def format_distribution(rows: list[DistributionRow], n: int) -> str:
    width = max(len("category"), *(len(r.category) for r in rows))
    lines = [f"{'category':<{width}}  {'count':>5}  {'percent':>7}"]
    for r in rows:
        lines.append(f"{r.category:<{width}}  {r.count:>5}  {r.percentage_text + '%':>7}")
    lines.append(f"N = {n}")
    return "\n".join(lines) + "\n"


def format_lift_matrix(m: LiftMatrix) -> str:
    corner = f"{m.dim_a} / {m.dim_b}"
    width = max(len(corner), *(len(r) for r in m.rows))
    colw = [max(9, len(c)) for c in m.cols]
    lines = [f"{corner:<{width}}  " + "  ".join(f"{c:>{w}}" for c, w in zip(m.cols, colw))]
    for row_name, row in zip(m.rows, m.cells):
        vals = []
        for c, w in zip(row, colw):
            vals.append(f"{'undefined' if c.lift is None else f'{float(c.lift):.4f}':>{w}}")
        lines.append(f"{row_name:<{width}}  " + "  ".join(vals))
    n = m.cells[0][0].n if m.cells and m.cells[0] else 0
    lines.append(f"N = {n}")
    return "\n".join(lines) + "\n"
