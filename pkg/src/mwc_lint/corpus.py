"""Labeled fixture corpus and the recall / false-positive harness."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .analysis import build_model, parse_file
from .config import Config
from .detectors.engine import Finding, run_all
from .registry import UnknownRuleError, load_registry
from .semantics.model import SemanticModel

VARIANTS = ("vulnerable", "fixed")
_SUFFIX = {".vuln.move": "vulnerable", ".fixed.move": "fixed"}

Engine = Callable[[SemanticModel, Config], list[Finding]]


class CorpusError(Exception):
    """Malformed corpus layout or expected.json."""


class EvaluationError(Exception):
    """A fixture could not be analyzed."""


@dataclass(frozen=True)
class Fixture:
    path: str
    rule_id: str
    variant: str
    expected: tuple[tuple[str, int], ...] = ()

    @property
    def base_name(self) -> str:
        name = Path(self.path).name
        for suffix in _SUFFIX:
            if name.endswith(suffix):
                return name[: -len(suffix)]
        return name


@dataclass
class RuleMetrics:
    true_positives: int = 0
    false_negatives: int = 0
    false_positives_on_fixed: int = 0

    @property
    def recall(self) -> float:
        total = self.true_positives + self.false_negatives
        return self.true_positives / total if total else 1.0


@dataclass
class Metrics:
    per_rule: dict[str, RuleMetrics] = field(default_factory=dict)
    misses: list[tuple[str, str, int]] = field(default_factory=list)  # (path, rule, line)
    fixed_hits: list[tuple[str, str, int]] = field(default_factory=list)

    @property
    def true_positives(self) -> int:
        return sum(m.true_positives for m in self.per_rule.values())

    @property
    def false_negatives(self) -> int:
        return sum(m.false_negatives for m in self.per_rule.values())

    @property
    def recall(self) -> float:
        total = self.true_positives + self.false_negatives
        return self.true_positives / total if total else 1.0

    @property
    def fixed_false_positives(self) -> int:
        return sum(m.false_positives_on_fixed for m in self.per_rule.values())

    def to_dict(self) -> dict:
        return {
            "recall": self.recall,
            "fixed_false_positives": self.fixed_false_positives,
            "per_rule": {
                rid: {
                    "true_positives": m.true_positives,
                    "false_negatives": m.false_negatives,
                    "false_positives_on_fixed": m.false_positives_on_fixed,
                    "recall": m.recall,
                }
                for rid, m in sorted(self.per_rule.items())
            },
            "misses": [list(x) for x in self.misses],
            "fixed_hits": [list(x) for x in self.fixed_hits],
        }


def _read_expected(path: Path, rule_id: str) -> list[tuple[str, int]]:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorpusError(f"{path}: cannot read expected file: {exc}") from None
    if not isinstance(doc, dict) or set(doc) != {"rule", "findings"}:
        raise CorpusError(f"{path}: expected keys 'rule' and 'findings'")
    if doc["rule"] != rule_id:
        raise CorpusError(f"{path}: rule {doc['rule']!r} does not match directory {rule_id}")
    items = doc["findings"]
    if not isinstance(items, list) or not items:
        raise CorpusError(f"{path}: 'findings' must be a non-empty list")
    out = []
    for item in items:
        if not isinstance(item, dict) or set(item) != {"rule", "line"}:
            raise CorpusError(f"{path}: each finding needs exactly 'rule' and 'line'")
        if item["rule"] not in load_registry():
            raise CorpusError(f"{path}: unknown rule {item['rule']!r}")
        if not isinstance(item["line"], int) or isinstance(item["line"], bool) or item["line"] < 1:
            raise CorpusError(f"{path}: line must be a positive integer")
        out.append((item["rule"], item["line"]))
    if [line for _, line in out] != sorted(line for _, line in out):
        raise CorpusError(f"{path}: findings must be sorted by line")
    return out


def load_corpus(directory: str | Path) -> list[Fixture]:
    """Load ``<rule>/<name>.vuln.move`` / ``.fixed.move`` pairs with labels."""
    root = Path(directory)
    registry = load_registry()
    fixtures: list[Fixture] = []
    for rule_dir in sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith(".")):
        try:
            rule_id = registry.lookup(rule_dir.name).id
        except UnknownRuleError as exc:
            raise CorpusError(f"{rule_dir}: {exc}") from None
        if rule_id != rule_dir.name:
            raise CorpusError(f"{rule_dir}: directory must be named {rule_id}")
        files: dict[str, dict[str, Path]] = {}
        for f in sorted(rule_dir.glob("*.move")):
            variant = next((v for s, v in _SUFFIX.items() if f.name.endswith(s)), None)
            if variant is None:
                raise CorpusError(f"{f}: fixture names must end in .vuln.move or .fixed.move")
            base = f.name[: -len(next(s for s, v in _SUFFIX.items() if v == variant))]
            files.setdefault(base, {})[variant] = f
        if not files:
            raise CorpusError(f"{rule_dir}: no fixtures")
        expected_path = rule_dir / "expected.json"
        if not expected_path.is_file():
            raise CorpusError(f"{expected_path}: missing")
        expected = tuple(_read_expected(expected_path, rule_id))
        vulns = [b for b in files if "vulnerable" in files[b]]
        if len(vulns) != 1:
            raise CorpusError(f"{rule_dir}: expected exactly one vulnerable fixture, found {len(vulns)}")
        for base, pair in sorted(files.items()):
            missing = [v for v in VARIANTS if v not in pair]
            if missing:
                raise CorpusError(f"{rule_dir}: fixture {base!r} lacks its {missing[0]} variant")
            fixtures.append(Fixture(str(pair["vulnerable"]), rule_id, "vulnerable", expected))
            fixtures.append(Fixture(str(pair["fixed"]), rule_id, "fixed", ()))
    return fixtures


def _analyze(fixture: Fixture, engine: Engine, config: Config) -> list[Finding]:
    text = Path(fixture.path).read_text(encoding="utf-8")
    parsed = parse_file(fixture.path, text)
    if parsed.errors:
        first = parsed.errors[0]
        raise EvaluationError(f"{fixture.path}:{first.span.line}:{first.span.column}: {first.message}")
    return engine(build_model([parsed], config), config)


def evaluate_corpus(
    fixtures: list[Fixture],
    engine: Engine | None = None,
    config: Config | None = None,
    workers: int = 1,
) -> Metrics:
    """Run the engine per fixture and tally recall and fixed-set false positives."""
    config = config or Config()
    engine = engine or (lambda model, cfg: run_all(model, cfg))
    ordered = sorted(fixtures, key=lambda f: f.path)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda f: _analyze(f, engine, config), ordered))
    else:
        results = [_analyze(f, engine, config) for f in ordered]

    metrics = Metrics()
    for fixture, findings in zip(ordered, results):
        got = {(f.rule_id, f.line) for f in findings}
        if fixture.variant == "vulnerable":
            for rule, line in fixture.expected:
                m = metrics.per_rule.setdefault(rule, RuleMetrics())
                if (rule, line) in got:
                    m.true_positives += 1
                else:
                    m.false_negatives += 1
                    metrics.misses.append((fixture.path, rule, line))
        else:
            m = metrics.per_rule.setdefault(fixture.rule_id, RuleMetrics())
            for f in findings:
                if f.rule_id == fixture.rule_id:
                    m.false_positives_on_fixed += 1
                    metrics.fixed_hits.append((fixture.path, f.rule_id, f.line))
    return metrics
