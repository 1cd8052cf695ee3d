"""End-to-end acceptance checks, one ``criterion`` marker per numbered item.

Run ``pytest tests/test_acceptance.py`` and read the "acceptance criteria"
section of the terminal summary for one PASS/FAIL line per criterion.
"""

import io
import itertools
import json
import random
import time
from pathlib import Path

import pytest

from mwc_lint import registry as registry_mod
from mwc_lint.analysis import build_model, parse_file
from mwc_lint.cli import execute
from mwc_lint.config import Config
from mwc_lint.corpus import load_corpus
from mwc_lint.detectors import CATALOG, Finding, run_all
from mwc_lint.detectors.flow import check_dominating_guard, loop_nontermination
from mwc_lint.frontend import ast as A
from mwc_lint.frontend import parse_source, pretty_print
from mwc_lint.analysis import analyze_source
from mwc_lint.registry import PRIMARY_FRAMES
from mwc_lint.report import build_report, render
from mwc_lint.semantics import reachable_set

from oracles import GUARD, PLAIN, is_guard_stmt, make_cfg, oracle_guard, oracle_reachable, random_cfg, simple_paths

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
SEVERITIES = ["low", "medium", "high", "critical"]


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = execute(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


# 1


@pytest.mark.criterion(1, "registry integrity, runtime < 0.1 s")
def test_registry_integrity():
    registry_mod.load_registry.cache_clear()
    start = time.perf_counter()
    reg = registry_mod.load_registry()
    elapsed = time.perf_counter() - start
    assert reg.numeric_ids() == list(range(100, 137))
    assert len(reg.numeric_ids()) == 37
    assert len(reg.categories) == 38
    assert {"MWC-120a", "MWC-120b"} <= set(reg.ids())
    assert [len(reg.frame(c).member_ids) for c in PRIMARY_FRAMES] == [3, 3, 4, 3, 3, 4]
    pairs = {p for row in reg.swc_crosswalk() for p in row.direct_id_pairs}
    assert ("SWC-101", "MWC-101") in pairs
    print(f"registry load {elapsed * 1000:.1f} ms")
    assert elapsed < 0.1


# 2


@pytest.mark.criterion(2, "corpus gate: recall 1.0, fixed-set FP 0, runtime < 1 s")
def test_corpus_gate():
    fixtures = load_corpus(CORPUS)
    vulnerable = [f for f in fixtures if f.variant == "vulnerable"]
    assert len(vulnerable) >= 30
    assert len(fixtures) == 2 * len(vulnerable)
    start = time.perf_counter()
    code, out, err = cli("eval", "--corpus", str(CORPUS))
    elapsed = time.perf_counter() - start
    doc = json.loads(out)
    print(f"corpus eval {elapsed:.3f} s")
    assert code == 0, err
    assert doc["recall"] == 1.0 and doc["fixed_false_positives"] == 0
    assert set(doc["per_rule"]) == set(CATALOG)
    for rid, m in doc["per_rule"].items():
        assert m["recall"] == 1.0 and m["false_positives_on_fixed"] == 0, rid
    assert elapsed < 1.0


# 3


@pytest.mark.criterion(3, "parser totality and round trip on every corpus file")
def test_parser_round_trip():
    files = sorted(CORPUS.glob("*/*.move"))
    assert len(files) >= 60
    for path in files:
        parsed = parse_file(str(path), path.read_text())
        assert parsed.errors == [], path
        again = parse_source(pretty_print(parsed.ast), str(path))
        assert again == parsed.ast, path


# 4


def _check_cfg(cfg):
    bad = []
    if reachable_set(cfg) != oracle_reachable(cfg):
        bad.append("reach")
    paths = list(simple_paths(cfg))
    for use in range(len(cfg.stmts)):
        if check_dominating_guard(cfg, use, lambda e: e == A.Name("guard")) != oracle_guard(cfg, use, is_guard_stmt, paths):
            bad.append(use)
    return bad


@pytest.mark.criterion(4, "flow oracle equivalence: >= 1000 random CFGs up to 12 blocks plus exhaustive small cases")
def test_oracle_equivalence_random():
    rng = random.Random(20240601)
    disagreements = 0
    sizes = set()
    for _ in range(1500):
        n = rng.randint(1, 12)
        sizes.add(n)
        disagreements += bool(_check_cfg(random_cfg(rng, n)))
    assert sizes == set(range(1, 13))
    assert disagreements == 0


@pytest.mark.criterion(4, "flow oracle equivalence: >= 1000 random CFGs up to 12 blocks plus exhaustive small cases")
def test_oracle_equivalence_exhaustive():
    count = disagreements = 0
    for n in (1, 2, 3):
        pairs = [(s, d) for s in range(n) for d in range(n)]
        for mask in range(1 << len(pairs)):
            edges = [p for i, p in enumerate(pairs) if mask >> i & 1]
            for kinds in itertools.product((PLAIN, GUARD), repeat=n):
                count += 1
                disagreements += bool(_check_cfg(make_cfg(n, edges, [[k] for k in kinds])))
    assert count == 2 * 2 + 16 * 4 + 512 * 8
    assert disagreements == 0


# 5


def _loop_hits(src):
    fn = analyze_source(src).functions()[0]
    return loop_nontermination(fn.cfg, fn.scope)


@pytest.mark.criterion(5, "MWC-103 loop check")
def test_mwc_103_loops():
    verbatim = "let mut i = 0;\nwhile (i >= 0) {\n    i = i + 1;\n}\n"
    assert len(_loop_hits(verbatim)) == 1
    assert _loop_hits("fun f(n: u64) {\n let mut i = 0;\n while (i < n) {\n  i = i + 1;\n }\n}") == []
    assert _loop_hits("fun f() {\n let mut i = 10;\n while (i >= 0) {\n  i = i - 1;\n }\n}") == []


# 6


@pytest.mark.criterion(6, "determinism: 1 vs N workers give byte-identical JSON")
def test_scan_determinism():
    code1, one, _ = cli("scan", str(CORPUS), "--jobs", "1")
    code8, many, _ = cli("scan", str(CORPUS), "--jobs", "8")
    assert code1 == code8
    assert one.encode() == many.encode()
    assert json.loads(one)["findings"]


# 7


def _random_findings(rng):
    reg = registry_mod.load_registry()
    ids = reg.ids()
    out = []
    for _ in range(rng.randint(0, 8)):
        rid = rng.choice(ids)
        out.append(Finding(
            rid, reg.lookup(rid).frame, rng.choice(SEVERITIES),
            rng.choice(["precise", "heuristic", "advisory"]),
            A.Span(f"f{rng.randint(0, 2)}.move", rng.randint(1, 40), rng.randint(1, 20), 0, 1),
            "m",
        ))
    return out


@pytest.mark.criterion(7, "report contract: verdict, 8 summary entries, SARIF counts")
def test_report_contract():
    rng = random.Random(77)
    for i in range(100):
        findings = _random_findings(rng)
        fail_on = rng.choice(SEVERITIES)
        report = build_report(findings, config=Config(fail_on=fail_on))
        expected = any(SEVERITIES.index(f.severity) >= SEVERITIES.index(fail_on) for f in findings)
        assert report.verdict == ("Failed" if expected else "Passed")
        assert len(report.summary) == 8
        assert len(json.loads(render(report, "json"))["summary"]) == 8
        if i % 10 == 0:
            sarif = json.loads(render(report, "sarif"))
            assert len(sarif["runs"][0]["results"]) == len(report.findings) == len(findings)


# 8


def _corpus_model():
    parsed = [parse_file(str(p), p.read_text()) for p in sorted(CORPUS.glob("*/*.move"))]
    return build_model(parsed, Config())


@pytest.mark.criterion(8, "config monotonicity: disabling one rule removes exactly its findings")
def test_config_monotonicity():
    model = _corpus_model()
    full_cfg = Config()
    full = set(run_all(model, full_cfg))
    assert full
    for rid in sorted(full_cfg.enabled_rules):
        reduced = set(run_all(model, full_cfg.with_rules(full_cfg.enabled_rules - {rid})))
        assert full - reduced == {f for f in full if f.rule_id == rid}, rid
        assert reduced <= full, rid
