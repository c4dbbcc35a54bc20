"""Command-line entry point.

Exit codes: 0 when the emitted report has no unsuppressed findings (or a
stats/explain command succeeded), 1 when unsuppressed findings are present,
2 on usage, configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import TOOL_NAME, __version__
from . import studystats as S
from .report import EMITTERS, RULE_DOCS, canonical_json, rule_help
from .rules import ALL_RULES, RULE_NAMES, SEVERITY, ConfigError
from .scanner import ScanError, config_from_mapping, load_config_file, scan

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2

USAGE_LINES = (
    "scan <root> [--format text|json|sarif] [--rules R1,R2,R3,R4] [--no-default-excludes] "
    "[--exclude <glob>]... [--config <file>] [--out <file>] [--jobs <n>]",
    "stats dist <dataset.csv> --dim cause|fix|exploit [--labels <map.json>]",
    "stats lift <dataset.csv> --dims cause:fix|cause:exploit [--format text|json] [--labels <map.json>]",
    "stats kappa <a.csv> <b.csv>",
    "explain <ruleId>",
)

EPILOG = "commands:\n" + "\n".join(f"  {TOOL_NAME} {line}" for line in USAGE_LINES) + (
    "\n\nexit codes: 0 no unsuppressed findings, 1 unsuppressed findings present, "
    "2 usage or I/O error"
)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so main() owns the exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _rules_arg(text: str) -> frozenset:
    ids = [t.strip().upper() for t in text.split(",") if t.strip()]
    bad = [t for t in ids if t not in ALL_RULES]
    if not ids or bad:
        raise argparse.ArgumentTypeError(
            f"invalid rule list {text!r}; expected a comma-separated subset of {','.join(ALL_RULES)}"
        )
    return frozenset(ids)


def _dims_arg(text: str) -> tuple[str, str]:
    parts = text.split(":")
    if len(parts) != 2 or any(p not in S.DIMENSIONS for p in parts) or parts[0] == parts[1]:
        raise argparse.ArgumentTypeError(f"invalid dimension pair {text!r}; expected e.g. cause:fix")
    return parts[0], parts[1]


def _jobs_arg(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        n = 0
    if n < 1:
        raise argparse.ArgumentTypeError(f"invalid job count {text!r}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog=TOOL_NAME,
        description="Static checks for inconsistent state updates in Solidity projects.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="{scan,stats,explain}")
    sub.required = True

    p = sub.add_parser("scan", help="scan a project directory", epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("root", nargs="?", help="project root (may come from --config)")
    p.add_argument("--format", choices=("text", "json", "sarif"), default=None, help="output format (default text)")
    p.add_argument("--rules", type=_rules_arg, default=None, metavar="R1,R2,R3,R4", help="rules to run")
    p.add_argument("--no-default-excludes", action="store_true",
                   help="also scan test/, script/, mock/ and deploy/ paths")
    p.add_argument("--exclude", action="append", default=[], metavar="<glob>", help="extra exclusion glob (repeatable)")
    p.add_argument("--config", metavar="<file>", help="JSON config file; flags override its values")
    p.add_argument("--out", metavar="<file>", help="write the report here instead of stdout")
    p.add_argument("--jobs", type=_jobs_arg, default=None, metavar="<n>", help="parallel parse workers")

    stats = sub.add_parser("stats", help="taxonomy statistics", epilog=EPILOG,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
    ssub = stats.add_subparsers(dest="stats_command", parser_class=_Parser, metavar="{dist,lift,kappa}")
    ssub.required = True
    d = ssub.add_parser("dist", help="category distribution")
    d.add_argument("dataset")
    d.add_argument("--dim", required=True, choices=tuple(S.DIMENSIONS))
    d.add_argument("--labels", metavar="<map.json>", help="label-mapping file")
    lf = ssub.add_parser("lift", help="pairwise lift matrix")
    lf.add_argument("dataset")
    lf.add_argument("--dims", required=True, type=_dims_arg, metavar="cause:fix|cause:exploit")
    lf.add_argument("--format", choices=("text", "json"), default="text")
    lf.add_argument("--labels", metavar="<map.json>", help="label-mapping file")
    k = ssub.add_parser("kappa", help="Cohen's kappa between two label files")
    k.add_argument("a")
    k.add_argument("b")

    e = sub.add_parser("explain", help="describe a rule")
    e.add_argument("rule_id")
    return parser


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _cmd_scan(args) -> int:
    data = load_config_file(args.config) if args.config else {}
    config = config_from_mapping(
        data,
        root=args.root,
        output_format=args.format,
        enabled=args.rules,
        excluded_names=frozenset() if args.no_default_excludes else None,
        extra_excludes=args.exclude,
        jobs=args.jobs,
    )
    report = scan(config)
    _write(EMITTERS[config.output_format](report), args.out)
    return EXIT_FINDINGS if report.unsuppressed else EXIT_CLEAN


def _label_map(args):
    return S.load_label_map(args.labels) if getattr(args, "labels", None) else None


def _cmd_stats(args) -> int:
    if args.stats_command == "dist":
        records = S.load_dataset(args.dataset, _label_map(args))
        rows = S.category_distribution(records, args.dim)
        sys.stdout.write(S.format_distribution(rows, len(records)))
    elif args.stats_command == "lift":
        records = S.load_dataset(args.dataset, _label_map(args))
        matrix = S.lift_matrix(records, *args.dims)
        sys.stdout.write(canonical_json(matrix.to_dict()) if args.format == "json" else S.format_lift_matrix(matrix))
    else:
        a = S.load_labels(args.a)
        b = S.load_labels(args.b)
        sys.stdout.write(f"kappa = {S.cohen_kappa(a, b):.4f} (n = {len(a)})\n")
    return EXIT_CLEAN


def _cmd_explain(args) -> int:
    rule_id = args.rule_id.upper()
    if rule_id not in RULE_DOCS:
        raise _UsageError(f"{TOOL_NAME} explain: error: unknown rule {args.rule_id!r}; known rules: {', '.join(ALL_RULES)}")
    doc = RULE_DOCS[rule_id]
    sys.stdout.write(
        f"{rule_id} {RULE_NAMES[rule_id]} ({SEVERITY[rule_id]})\n"
        f"{doc['short']}.\n\n{doc['full']}\n\n{rule_help(rule_id)}\n"
    )
    return EXIT_CLEAN


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as exc:  # --help / --version
        return EXIT_CLEAN if exc.code in (0, None) else EXIT_ERROR
    try:
        if args.command == "scan":
            return _cmd_scan(args)
        if args.command == "stats":
            return _cmd_stats(args)
        return _cmd_explain(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    except S.DatasetError as exc:
        for line in exc.errors:
            print(f"{TOOL_NAME}: error: {line}", file=sys.stderr)
        return EXIT_ERROR
    except (ScanError, ConfigError, S.StatsError, OSError) as exc:
        print(f"{TOOL_NAME}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
