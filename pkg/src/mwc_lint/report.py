"""Audit report assembly and rendering (JSON, SARIF, markdown)."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

from . import __version__
from .config import Config
from .detectors.engine import Finding
from .frontend import ast as A
from .registry import FRAME_CODES, PRIMARY_FRAMES, SEVERITIES, load_registry, severity_rank
from .semantics.model import SemanticModel

TOOL_NAME = "mwc"
SARIF_VERSION = "2.1.0"
SARIF_SCHEMA = "https://json.schemastore.org/sarif-2.1.0.json"
RENDER_FORMATS = ("json", "sarif", "md", "markdown")

FRAUD_ITEMS = (
    "fee_scam_pattern",
    "redirection",
    "unlimited_minting",
    "emergency_fees",
    "ownership_concentration",
    "blacklisting",
    "transaction_restrictions",
)
FRAUD_RULES = {"unlimited_minting": "MWC-111", "transaction_restrictions": "MWC-100"}
FRAUD_STATES = ("flagged", "clear", "not-assessed")

_SARIF_LEVEL = {"critical": "error", "high": "error", "medium": "warning", "low": "note"}


class RenderError(ValueError):
    """Unknown output format."""


@dataclass(frozen=True)
class AuditDimensions:
    code_quality: dict[str, Any]
    security_practices: dict[str, dict[str, int]]
    fraud_analysis: dict[str, str]

    def to_dict(self) -> dict[str, Any]:
        return {
            "code_quality": dict(self.code_quality),
            "security_practices": {k: dict(v) for k, v in self.security_practices.items()},
            "fraud_analysis": dict(self.fraud_analysis),
        }


@dataclass(frozen=True)
class Report:
    target: dict[str, Any]
    tool_version: str
    findings: tuple[Finding, ...]
    dimensions: AuditDimensions
    verdict: str
    summary: tuple[str, ...]
    fail_on: str = "high"
    rules_enabled: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict[str, Any]:
        return {
            "tool": TOOL_NAME,
            "version": self.tool_version,
            "target": dict(self.target),
            "findings": [f.to_dict() for f in self.findings],
            "dimensions": self.dimensions.to_dict(),
            "verdict": self.verdict,
            "summary": list(self.summary),
        }


def verdict_for(findings: list[Finding] | tuple[Finding, ...], fail_on: str) -> str:
    threshold = severity_rank(fail_on)
    return "Failed" if any(severity_rank(f.severity) >= threshold for f in findings) else "Passed"


def _code_quality(model: SemanticModel | None) -> dict[str, Any]:
    if model is None:
        return {"comment_density": 0.0, "avg_function_length": 0.0, "parse_error_count": 0}
    code_lines = comment_lines = 0
    for src in model.sources.values():
        commented = {line for tok in src.comments for line in range(tok.span.line, tok.span.line + tok.text.count("\n") + 1)}
        for n, text in enumerate(src.lines, start=1):
            if text.strip():
                code_lines += 1
                comment_lines += n in commented
    lengths = [
        sum(1 for _ in A.walk_stmts(fn.decl.body))
        for fn in model.functions()
        if fn.decl.body is not None and not fn.decl.implicit
    ]
    return {
        "comment_density": round(comment_lines / code_lines, 4) if code_lines else 0.0,
        "avg_function_length": round(sum(lengths) / len(lengths), 2) if lengths else 0.0,
        "parse_error_count": model.parse_error_count,
    }


def _security_practices(findings) -> dict[str, dict[str, int]]:
    out = {code: {"precise": 0, "heuristic": 0, "advisory": 0} for code in FRAME_CODES}
    for f in findings:
        out[f.frame][f.confidence] += 1
    return out


def _fraud(findings, config: Config) -> dict[str, str]:
    fired = {f.rule_id for f in findings}
    out = {}
    for item in FRAUD_ITEMS:
        rule = FRAUD_RULES.get(item)
        if rule is None:
            out[item] = "not-assessed"
        elif rule in fired:
            out[item] = "flagged"
        elif rule in config.enabled_rules:
            out[item] = "clear"
        else:
            out[item] = "not-assessed"
    return out


def _summary(findings, dims: AuditDimensions, verdict: str, config: Config) -> tuple[str, ...]:
    registry = load_registry()
    n = len(findings)
    frames = Counter(f.frame for f in findings)
    if frames:
        top_frame, top_count = sorted(frames.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        s1 = f"The {registry.frame(top_frame).name} ({top_frame}) frame has the most findings, {top_count} of {n}."
    else:
        s1 = "No frame has any findings."
    blocking = [f for f in findings if severity_rank(f.severity) >= severity_rank(config.fail_on)]
    if verdict == "Failed":
        s2 = f"The verdict is Failed because {len(blocking)} finding(s) are at or above the {config.fail_on} threshold."
    else:
        s2 = f"The verdict is Passed because no finding reaches the {config.fail_on} threshold."
    heuristic = sum(f.confidence == "heuristic" for f in findings)
    share = f"{100 * heuristic / n:.0f}%" if n else "0%"
    s3 = f"Heuristic detectors account for {heuristic} finding(s), {share} of the total."
    advisory = sorted({f.rule_id for f in findings if f.confidence == "advisory"})
    s4 = (
        f"Manual review was requested for {len(advisory)} advisory categor{'y' if len(advisory) == 1 else 'ies'}: {', '.join(advisory)}."
        if advisory else "No advisory review pragmas were present."
    )
    errors = dims.code_quality["parse_error_count"]
    s5 = f"The parser reported {errors} error(s); {'all files were analyzed' if not errors else 'files with errors were skipped'}."
    covered = sorted(c for c in PRIMARY_FRAMES if frames.get(c))
    s6 = f"Findings touch {len(covered)} of {len(PRIMARY_FRAMES)} primary frames{': ' + ', '.join(covered) if covered else ''}."
    top = max((f.severity for f in findings), key=severity_rank, default=None)
    s7 = f"The highest severity observed is {top}." if top else "No severity was observed."
    if verdict == "Failed":
        s8 = "Address the blocking findings first, starting with the highest severity, then re-run the scan."
    elif n:
        s8 = "Review the remaining lower-severity findings before deployment."
    else:
        s8 = "Keep the scan in continuous integration to catch regressions."
    return (s1, s2, s3, s4, s5, s6, s7, s8)


def build_report(
    findings: list[Finding],
    model: SemanticModel | None = None,
    config: Config | None = None,
    paths: list[str] | None = None,
) -> Report:
    """Aggregate *findings* into a deterministic report."""
    config = config or (model.config if model else Config())
    ordered = tuple(sorted(findings, key=Finding.sort_key))
    files = sorted(model.sources) if model else sorted({f.file for f in ordered})
    dims = AuditDimensions(_code_quality(model), _security_practices(ordered), _fraud(ordered, config))
    verdict = verdict_for(ordered, config.fail_on)
    return Report(
        target={"paths": sorted(paths) if paths is not None else files, "file_count": len(files)},
        tool_version=__version__,
        findings=ordered,
        dimensions=dims,
        verdict=verdict,
        summary=_summary(ordered, dims, verdict, config),
        fail_on=config.fail_on,
        rules_enabled=tuple(sorted(config.enabled_rules)),
    )


def render_json(report: Report) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def render_sarif(report: Report) -> str:
    registry = load_registry()
    rule_ids = sorted({f.rule_id for f in report.findings})
    index = {rid: i for i, rid in enumerate(rule_ids)}
    rules = []
    for rid in rule_ids:
        rec = registry.lookup(rid)
        rules.append({
            "id": rid,
            "name": rec.box_title,
            "shortDescription": {"text": rec.title_frame or rec.title_taxonomy},
            "fullDescription": {"text": rec.description},
            "help": {"text": rec.fix_hint},
            "properties": {"frame": rec.frame, "strategy": rec.strategy},
        })
    results = []
    for f in report.findings:
        results.append({
            "ruleId": f.rule_id,
            "ruleIndex": index[f.rule_id],
            "level": _SARIF_LEVEL[f.severity],
            "message": {"text": f.message},
            "locations": [{
                "physicalLocation": {
                    "artifactLocation": {"uri": f.file},
                    "region": {"startLine": f.line, "startColumn": f.column, "snippet": {"text": f.snippet}},
                }
            }],
            "properties": {"confidence": f.confidence, "severity": f.severity},
        })
    doc = {
        "$schema": SARIF_SCHEMA,
        "version": SARIF_VERSION,
        "runs": [{
            "tool": {"driver": {"name": TOOL_NAME, "version": report.tool_version, "rules": rules}},
            "results": results,
        }],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _md_escape(text: str) -> str:
    return text.replace("|", "\\|")


def render_markdown(report: Report) -> str:
    dims = report.dimensions
    out = ["# MWC Audit Report", ""]
    out.append(f"Scanned {report.target['file_count']} file(s) with {TOOL_NAME} {report.tool_version}.")
    out += ["", "## Findings", ""]
    if report.findings:
        out.append("| Rule | Frame | Severity | Confidence | Location | Message |")
        out.append("|---|---|---|---|---|---|")
        for f in report.findings:
            out.append(
                f"| {f.rule_id} | {f.frame} | {f.severity} | {f.confidence} | "
                f"{_md_escape(f.file)}:{f.line}:{f.column} | {_md_escape(f.message)} |"
            )
    else:
        out.append("No findings.")
    cq = dims.code_quality
    out += [
        "", "## Code Quality", "",
        f"- Comment density: {cq['comment_density']}",
        f"- Average function length: {cq['avg_function_length']} statements",
        f"- Parse errors: {cq['parse_error_count']}",
        "", "## Security Practices", "",
        "| Frame | Precise | Heuristic | Advisory |", "|---|---|---|---|",
    ]
    for code, counts in dims.security_practices.items():
        out.append(f"| {code} | {counts['precise']} | {counts['heuristic']} | {counts['advisory']} |")
    out += ["", "## Fraud Analysis", ""]
    out += [f"- {item.replace('_', ' ')}: {state}" for item, state in dims.fraud_analysis.items()]
    out += ["", "## Overall Assessment", "", f"**{report.verdict}** (fail-on threshold: {report.fail_on})"]
    out += ["", "## General Security Posture", ""]
    out += [f"{i}. {s}" for i, s in enumerate(report.summary, start=1)]
    return "\n".join(out) + "\n"


def render(report: Report, fmt: str = "json") -> str:
    if fmt == "json":
        return render_json(report)
    if fmt == "sarif":
        return render_sarif(report)
    if fmt in ("md", "markdown"):
        return render_markdown(report)
    raise RenderError(f"unknown format {fmt!r}; choose one of json, sarif, md")


__all__ = [
    "AuditDimensions",
    "FRAUD_ITEMS",
    "Report",
    "RenderError",
    "SEVERITIES",
    "build_report",
    "render",
    "verdict_for",
]
