"""Rule engine: runs the detector catalog and post-processes findings."""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from ..config import Config
from ..frontend import ast as A
from ..registry import UnknownRuleError, load_registry
from ..semantics.model import SemanticModel
from .rules import CATALOG, DetectorEntry, RuleContext

log = logging.getLogger(__name__)

PRAGMA = re.compile(r"mwc:\s*(review|allow)\s+(MWC-\d{3}[ab]?)\b")


class UnsupportedRuleError(LookupError):
    """Raised for advisory or unknown rule ids."""


@dataclass(frozen=True)
class Finding:
    rule_id: str
    frame: str
    severity: str
    confidence: str
    span: A.Span
    message: str
    snippet: str = ""
    fix_hint: str = ""

    @property
    def file(self) -> str:
        return self.span.file

    @property
    def line(self) -> int:
        return self.span.line

    @property
    def column(self) -> int:
        return self.span.column

    def sort_key(self) -> tuple:
        return (self.span.file, self.span.line, self.rule_id, self.span.column, self.message)

    def to_dict(self) -> dict[str, Any]:
        return {
            "rule": self.rule_id,
            "frame": self.frame,
            "severity": self.severity,
            "confidence": self.confidence,
            "file": self.file,
            "line": self.line,
            "column": self.column,
            "message": self.message,
            "fix_hint": self.fix_hint,
        }


@dataclass
class DetectorCatalog:
    entries: dict[str, DetectorEntry] = field(default_factory=lambda: dict(CATALOG))

    def __contains__(self, rule_id: object) -> bool:
        return rule_id in self.entries

    def __getitem__(self, rule_id: str) -> DetectorEntry:
        return self.entries[rule_id]

    def ids(self) -> list[str]:
        return sorted(self.entries)

    def confidence(self, rule_id: str) -> str:
        entry = self.entries.get(rule_id)
        return entry.confidence if entry else "advisory"


DEFAULT_CATALOG = DetectorCatalog()


def _span_of(node: object) -> A.Span:
    return node if isinstance(node, A.Span) else node.span  # type: ignore[attr-defined]


def _make(rule_id: str, confidence: str, span: A.Span, message: str, model: SemanticModel, config: Config) -> Finding:
    rec = load_registry().lookup(rule_id)
    src = model.source(span.file)
    snippet = src.line(span.line).strip() if src else ""
    if confidence == "heuristic":
        message = f"{message} (heuristic)"
    return Finding(rule_id, rec.frame, config.severity_for(rule_id), confidence, span, message, snippet, rec.fix_hint)


def _run_entry(entry: DetectorEntry, ctx: RuleContext, strict: bool) -> list[Finding]:
    try:
        hits = list(entry.procedure(ctx))
    except Exception:
        if strict:
            raise
        log.warning("detector %s failed; emitting nothing", entry.rule_id, exc_info=True)
        return []
    return [_make(entry.rule_id, entry.confidence, _span_of(node), msg, ctx.model, ctx.config) for node, msg in hits]


def _pragmas(model: SemanticModel):
    """Yield ``(kind, rule_id, comment_token, trailing)`` for each pragma comment."""
    for path in sorted(model.sources):
        src = model.sources[path]
        for tok in src.comments:
            m = PRAGMA.search(tok.text)
            if not m:
                continue
            before = src.line(tok.span.line)[: tok.span.column - 1]
            yield m.group(1), m.group(2), tok, bool(before.strip())


def _statement_lines(model: SemanticModel) -> dict[str, list[int]]:
    lines: dict[str, set[int]] = {}
    for tree in model.asts:
        bucket = lines.setdefault(tree.file, set())
        for mod in tree.modules:
            if not mod.implicit:
                bucket.add(mod.span.line)
            for item in [*mod.uses, *mod.consts, *mod.structs]:
                bucket.add(item.span.line)
            for fn in mod.functions:
                if not fn.implicit:
                    bucket.add(fn.span.line)
                bucket.update(s.span.line for s in A.walk_stmts(fn.body))
    return {f: sorted(v) for f, v in lines.items()}


def _review_findings(model: SemanticModel, config: Config) -> list[Finding]:
    if not config.review_pragmas:
        return []
    registry = load_registry()
    out = []
    for kind, rid, tok, _ in _pragmas(model):
        if kind != "review" or rid not in registry:
            continue
        rec = registry.lookup(rid)
        if rec.strategy != "advisory":
            continue
        src = model.source(tok.span.file)
        out.append(Finding(
            rid, rec.frame, config.severity_for(rid), "advisory", tok.span,
            f"manual review requested: {rec.box_title}",
            src.line(tok.span.line).strip() if src else "", rec.fix_hint,
        ))
    return out


def _suppressed(model: SemanticModel) -> set[tuple[str, int, str]]:
    """``(file, line, rule)`` triples silenced by allow pragmas."""
    stmt_lines = _statement_lines(model)
    out = set()
    for kind, rid, tok, trailing in _pragmas(model):
        if kind != "allow":
            continue
        line = tok.span.line
        if not trailing:
            later = [n for n in stmt_lines.get(tok.span.file, []) if n > line]
            if not later:
                continue
            line = later[0]
        out.add((tok.span.file, line, rid))
    return out


def finalize(findings: list[Finding], model: SemanticModel) -> list[Finding]:
    """Drop suppressed findings, collapse duplicates and sort canonically."""
    silenced = _suppressed(model)
    unique: dict[tuple, Finding] = {}
    for f in findings:
        if (f.file, f.line, f.rule_id) in silenced:
            continue
        key = (f.rule_id, f.span.file, f.span.line, f.span.column, f.span.length)
        if key not in unique or f.sort_key() < unique[key].sort_key():
            unique[key] = f
    return sorted(unique.values(), key=Finding.sort_key)


def run_all(
    model: SemanticModel,
    config: Config | None = None,
    workers: int = 1,
    catalog: DetectorCatalog = DEFAULT_CATALOG,
    strict: bool = False,
) -> list[Finding]:
    """Run every enabled detector over *model* and return sorted findings."""
    config = config or model.config
    ctx = RuleContext(model, config)
    entries = [catalog[r] for r in sorted(config.enabled_rules) if r in catalog]
    if workers > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(lambda e: _run_entry(e, ctx, strict), entries))
    else:
        batches = [_run_entry(e, ctx, strict) for e in entries]
    findings = [f for batch in batches for f in batch] + _review_findings(model, config)
    return finalize(findings, model)


def run_rule(rule_id: str, model: SemanticModel, config: Config | None = None, strict: bool = False) -> list[Finding]:
    """Findings for a single rule, exactly as :func:`run_all` would report them."""
    registry = load_registry()
    try:
        rec, _ = registry.resolve(rule_id)
    except UnknownRuleError as exc:
        raise UnsupportedRuleError(str(exc)) from None
    if rec.strategy == "advisory" or rec.id not in DEFAULT_CATALOG:
        raise UnsupportedRuleError(f"{rec.id} is advisory and has no detector")
    config = config or model.config
    ctx = RuleContext(model, config)
    return finalize(_run_entry(DEFAULT_CATALOG[rec.id], ctx, strict), model)
