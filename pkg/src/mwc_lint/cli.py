"""The ``mwc`` command line.

Exit codes for ``scan``: 0 clean (or below the fail-on threshold), 1 findings
at or above it, 2 parse or semantic errors, 3 usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence, TextIO

from . import __version__
from .analysis import build_model, collect_move_files, parse_files
from .config import ConfigError, Config, default_config_document, load_config
from .corpus import CorpusError, EvaluationError, evaluate_corpus, load_corpus
from .detectors.engine import run_all
from .registry import PRIMARY_FRAMES, SEVERITIES, STRATEGIES, FRAME_CODES, UnknownRuleError, load_registry
from .report import build_report, render
from .semantics.model import SemanticError

EXIT_OK, EXIT_FINDINGS, EXIT_ERRORS, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2; we reserve 2 for analysis errors
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mwc", description="Static checks for the MoveEVM Weakness Classification.")
    parser.add_argument("--version", action="version", version=f"mwc {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    scan = sub.add_parser("scan", help="analyze .move files or directories")
    scan.add_argument("paths", nargs="+")
    scan.add_argument("--config")
    scan.add_argument("--format", choices=["json", "sarif", "md"])
    scan.add_argument("--rules", help="comma-separated rule ids to enable")
    scan.add_argument("--fail-on", choices=list(SEVERITIES))
    scan.add_argument("--jobs", type=int, default=1, help="worker threads (default 1)")

    rules = sub.add_parser("rules", help="list registry entries")
    rules.add_argument("--frame", choices=list(FRAME_CODES))
    rules.add_argument("--strategy", choices=list(STRATEGIES))

    explain = sub.add_parser("explain", help="describe one MWC id")
    explain.add_argument("id")

    mapping = sub.add_parser("map", help="show the SWC crosswalk")
    mapping.add_argument("id", nargs="?")

    ev = sub.add_parser("eval", help="evaluate the detectors on a labeled corpus")
    ev.add_argument("--corpus", required=True)
    ev.add_argument("--config")
    ev.add_argument("--rules")
    ev.add_argument("--jobs", type=int, default=1)

    sub.add_parser("init-config", help="print a default configuration file")
    return parser


def _config(args) -> Config:
    config = load_config(getattr(args, "config", None))
    if getattr(args, "rules", None):
        registry = load_registry()
        ids = set()
        for raw in args.rules.split(","):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = registry.lookup(raw)
            except UnknownRuleError as exc:
                raise ConfigError(str(exc)) from None
            if rec.strategy == "advisory":
                raise ConfigError(f"{rec.id} is advisory and cannot be enabled as a detector")
            ids.add(rec.id)
        config = config.with_rules(frozenset(ids))
    if getattr(args, "fail_on", None):
        config = replace(config, fail_on=args.fail_on)
    if getattr(args, "format", None):
        config = replace(config, format=args.format)
    return config


def cmd_scan(args, out: TextIO, err: TextIO) -> int:
    config = _config(args)
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    for p in args.paths:
        if not Path(p).exists():
            raise UsageError(f"no such file or directory: {p}")
    files = collect_move_files(args.paths)
    texts = []
    for f in files:
        try:
            texts.append((f, Path(f).read_text(encoding="utf-8")))
        except (OSError, UnicodeDecodeError) as exc:
            raise UsageError(f"cannot read {f}: {exc}") from None
    parsed = parse_files(texts, workers=args.jobs)
    status = EXIT_OK
    for p in parsed:
        for e in p.errors:
            err.write(f"{e.span.file}:{e.span.line}:{e.span.column}: error: {e.message}\n")
            status = EXIT_ERRORS
    try:
        model = build_model(parsed, config)
        findings = run_all(model, config, workers=args.jobs)
    except SemanticError as exc:
        for d in exc.diagnostics:
            err.write(f"{d}\n")
        model = build_model([], config)
        model.sources = {p.source.path: p.source for p in parsed}
        findings = []
        status = EXIT_ERRORS
    report = build_report(findings, model, config, paths=list(args.paths))
    out.write(render(report, config.format))
    if status == EXIT_OK and report.verdict == "Failed":
        status = EXIT_FINDINGS
    return status


def cmd_rules(args, out: TextIO, err: TextIO) -> int:
    registry = load_registry()
    for rec in registry.categories:
        if args.frame and rec.frame != args.frame:
            continue
        if args.strategy and rec.strategy != args.strategy:
            continue
        out.write(f"{rec.id}\t{rec.frame}\t{rec.strategy}\t{rec.severity_default}\t{rec.title_frame or rec.title_taxonomy}\n")
    return EXIT_OK


def cmd_explain(args, out: TextIO, err: TextIO) -> int:
    registry = load_registry()
    try:
        rec, note = registry.resolve(args.id)
    except UnknownRuleError as exc:
        err.write(f"mwc: {exc}\n")
        return EXIT_USAGE
    frame = registry.frame(rec.frame)
    lines = [
        f"{rec.id}: {rec.title_taxonomy}",
        f"Frame title: {rec.title_frame or '-'}",
        f"Frame: {frame.code} ({frame.name})",
        f"Analysis hint: {rec.analysis_hint}",
        f"Strategy: {rec.strategy}",
        f"Default severity: {rec.severity_default}",
        f"Example: {rec.box_title}",
        f"Description: {rec.description}",
        f"Fix: {rec.fix_hint}",
    ]
    if rec.aliases:
        lines.append(f"Aliases: {', '.join(rec.aliases)}")
    if note:
        lines.append(f"Note: {note}")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_map(args, out: TextIO, err: TextIO) -> int:
    registry = load_registry()
    try:
        rows = registry.swc_crosswalk(args.id)
    except UnknownRuleError as exc:
        err.write(f"mwc: {exc}\n")
        return EXIT_USAGE
    for row in rows:
        pairs = ", ".join(f"{s}<->{m}" for s, m in row.direct_id_pairs) or "-"
        out.write(f"{row.aspect}\n  SWC: {row.swc_side}\n  MWC: {row.mwc_side}\n  direct pairs: {pairs}\n")
    if args.id and not rows:
        out.write(f"no crosswalk rows mention {args.id}\n")
    return EXIT_OK


def cmd_eval(args, out: TextIO, err: TextIO) -> int:
    config = _config(args)
    if not Path(args.corpus).is_dir():
        raise UsageError(f"corpus directory not found: {args.corpus}")
    try:
        fixtures = load_corpus(args.corpus)
        metrics = evaluate_corpus(fixtures, config=config, workers=args.jobs)
    except (CorpusError, EvaluationError) as exc:
        err.write(f"mwc: {exc}\n")
        return EXIT_ERRORS
    doc = metrics.to_dict()
    doc["fixtures"] = len(fixtures)
    out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if metrics.recall == 1.0 and metrics.fixed_false_positives == 0 else EXIT_FINDINGS


def cmd_init_config(args, out: TextIO, err: TextIO) -> int:
    out.write(default_config_document())
    return EXIT_OK


COMMANDS = {
    "scan": cmd_scan,
    "rules": cmd_rules,
    "explain": cmd_explain,
    "map": cmd_map,
    "eval": cmd_eval,
    "init-config": cmd_init_config,
}


def execute(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
        if not args.command:
            raise UsageError(parser.format_usage().strip())
        return COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except ConfigError as exc:
        err.write(f"mwc: config error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(execute())


__all__ = ["execute", "main", "build_parser", "PRIMARY_FRAMES"]
