"""Project discovery and the parse -> model -> dataflow -> rules pipeline."""

from __future__ import annotations

import fnmatch
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath
from typing import Optional

from . import TOOL_NAME, __version__
from .dataflow import analyze_project
from .frontend import ast as A
from .frontend.parser import parse
from .model import build_project_model
from .rules import ALL_RULES, ConfigError, Finding, RuleConfig, run_rules

DEFAULT_EXCLUDED_NAMES = frozenset({"test", "script", "mock", "deploy"})
OUTPUT_FORMATS = ("text", "json", "sarif")


class ScanError(Exception):
    """Fatal scan failure (exit code 2 at the command line)."""


@dataclass(frozen=True)
class ScanConfig:
    root: str
    excluded_names: frozenset = DEFAULT_EXCLUDED_NAMES
    extra_excludes: tuple = ()
    rule_config: RuleConfig = RuleConfig()
    output_format: str = "text"
    jobs: int = 1

    def __post_init__(self):
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"unknown output format {self.output_format!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")


@dataclass(frozen=True)
class Diag:
    file: str
    line: int
    column: int
    message: str


@dataclass
class Report:
    tool_name: str = TOOL_NAME
    tool_version: str = __version__
    scanned_file_count: int = 0
    excluded_file_count: int = 0
    degraded_file_count: int = 0
    findings: list[Finding] = field(default_factory=list)
    enabled_rules: tuple = ALL_RULES
    diagnostics: list[Diag] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def analysis_complete(self) -> bool:
        return self.degraded_file_count == 0

    @property
    def unsuppressed(self) -> list[Finding]:
        return [f for f in self.findings if not f.suppressed]


# -- configuration ------------------------------------------------------------

_CONFIG_KEYS = {"rootPath", "excludedNames", "extraExcludes", "ruleConfig", "outputFormat", "jobs"}
_RULE_KEYS = {"enabled", "r4Support", "r4Confidence", "suppressionToken"}


def load_config_file(path: str) -> dict:
    """Read a JSON config document; keys mirror ScanConfig in camelCase."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    rules = data.get("ruleConfig", {})
    if not isinstance(rules, dict) or set(rules) - _RULE_KEYS:
        raise ConfigError("ruleConfig must be an object with keys " + ", ".join(sorted(_RULE_KEYS)))
    return data


def config_from_mapping(data: dict, **overrides) -> ScanConfig:
    """Build a ScanConfig from a config document; non-None overrides win."""
    rules = data.get("ruleConfig", {})
    rule_kwargs = {}
    if "enabled" in rules:
        rule_kwargs["enabled"] = frozenset(rules["enabled"])
    if "r4Support" in rules:
        rule_kwargs["r4_support"] = rules["r4Support"]
    if "r4Confidence" in rules:
        rule_kwargs["r4_confidence"] = float(rules["r4Confidence"])
    if "suppressionToken" in rules:
        rule_kwargs["suppression_token"] = str(rules["suppressionToken"])
    if overrides.get("enabled") is not None:
        rule_kwargs["enabled"] = frozenset(overrides["enabled"])
    kwargs = {
        "root": data.get("rootPath"),
        "excluded_names": frozenset(n.lower() for n in data.get("excludedNames", DEFAULT_EXCLUDED_NAMES)),
        "extra_excludes": tuple(data.get("extraExcludes", ())),
        "rule_config": RuleConfig(**rule_kwargs),
        "output_format": data.get("outputFormat", "text"),
        "jobs": int(data.get("jobs", 1)),
    }
    for name in ("root", "excluded_names", "output_format", "jobs"):
        if overrides.get(name) is not None:
            kwargs[name] = overrides[name]
    if overrides.get("extra_excludes"):
        kwargs["extra_excludes"] = tuple(kwargs["extra_excludes"]) + tuple(overrides["extra_excludes"])
    if not kwargs["root"]:
        raise ConfigError("no project root given")
    return ScanConfig(**kwargs)


# -- discovery ----------------------------------------------------------------


def _component_excluded(rel: PurePosixPath, names: frozenset) -> bool:
    parts = list(rel.parts)
    last = parts[-1]
    if last.lower().endswith(".sol"):
        last = last[:-4]
    parts[-1] = last
    return any(p.lower() in names for p in parts)


def _glob_excluded(rel: PurePosixPath, globs) -> bool:
    text = rel.as_posix()
    for pattern in globs:
        if fnmatch.fnmatchcase(text, pattern) or fnmatch.fnmatchcase(rel.name, pattern):
            return True
        # "lib/**" style patterns should also match the directory prefix
        if pattern.endswith("/**") and (text + "/").startswith(pattern[:-2]):
            return True
    return False


def discover_sources(root: str, config: Optional[ScanConfig] = None, warnings: Optional[list] = None):
    """Split every ``.sol`` file under ``root`` into (included, excluded).

    Paths are relative, POSIX-style and sorted.
    """
    names = config.excluded_names if config is not None else DEFAULT_EXCLUDED_NAMES
    globs = config.extra_excludes if config is not None else ()
    base = Path(root)
    if not base.is_dir():
        raise ScanError(f"project root {root} is not a directory")
    try:
        os.listdir(base)
    except OSError as exc:
        raise ScanError(f"cannot read project root {root}: {exc.strerror or exc}") from exc

    def onerror(exc: OSError) -> None:
        if warnings is not None:
            warnings.append(f"cannot read directory {exc.filename}: {exc.strerror}")

    included: list[str] = []
    excluded: list[str] = []
    for dirpath, dirnames, filenames in os.walk(base, onerror=onerror):
        dirnames.sort()
        for name in sorted(filenames):
            if not name.endswith(".sol"):
                continue
            rel = PurePosixPath(Path(dirpath, name).relative_to(base).as_posix())
            if _component_excluded(rel, names) or _glob_excluded(rel, globs):
                excluded.append(rel.as_posix())
            else:
                included.append(rel.as_posix())
    return sorted(included), sorted(excluded)


# -- pipeline -----------------------------------------------------------------


def _parse_file(item: tuple[str, str]) -> A.SourceUnit:
    root, rel = item
    try:
        data = Path(root, rel).read_bytes()
    except OSError as exc:
        unit = A.SourceUnit(path=rel)
        unit.diagnostics.append(A.Diagnostic(f"cannot read file: {exc.strerror or exc}", 1, 1))
        return unit
    try:
        text = data.decode("utf-8")
        bad_encoding = False
    except UnicodeDecodeError:
        text = data.decode("utf-8", errors="replace")
        bad_encoding = True
    unit = parse(text, rel)
    if bad_encoding:
        unit.diagnostics.insert(0, A.Diagnostic("file is not valid UTF-8", 1, 1))
    return unit


def parse_files(root: str, files: list[str], jobs: int = 1) -> list[A.SourceUnit]:
    items = [(root, f) for f in files]
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_parse_file, items, chunksize=max(1, len(items) // (jobs * 4))))
    return [_parse_file(i) for i in items]


def scan(config: ScanConfig) -> Report:
    warnings: list[str] = []
    included, excluded = discover_sources(config.root, config, warnings)
    if not included:
        raise ScanError("no Solidity sources found")
    units = parse_files(config.root, included, config.jobs)
    if all(u.diagnostics and not u.contracts for u in units):
        raise ScanError("no parseable Solidity sources found")
    model = build_project_model(units)
    result = analyze_project(model)
    findings = run_rules(model, result, config.rule_config)
    diags = [Diag(u.path, d.line, d.column, d.message) for u in model.units for d in u.diagnostics]
    return Report(
        scanned_file_count=len(included),
        excluded_file_count=len(excluded),
        degraded_file_count=model.degraded_file_count,
        findings=findings,
        enabled_rules=tuple(r for r in ALL_RULES if r in config.rule_config.enabled),
        diagnostics=diags,
        warnings=warnings + model.warnings,
    )
