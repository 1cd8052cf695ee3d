import json
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwc_lint.analysis import analyze_source, build_model, parse_file
from mwc_lint.config import Config
from mwc_lint.detectors import CATALOG, UnsupportedRuleError, run_all, run_rule
from mwc_lint.registry import load_registry

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
RULES = sorted(p.name for p in CORPUS.iterdir() if p.is_dir())


def model_of(path, config=None):
    return build_model([parse_file(str(path), path.read_text())], config or Config())


def fixture_pair(rule):
    vuln = next((CORPUS / rule).glob("*.vuln.move"))
    fixed = vuln.with_name(vuln.name.replace(".vuln.", ".fixed."))
    expected = json.loads((CORPUS / rule / "expected.json").read_text())
    return vuln, fixed, [(f["rule"], f["line"]) for f in expected["findings"]]


def test_catalog_matches_registry():
    registry = load_registry()
    assert sorted(CATALOG) == sorted(registry.detectable_ids())
    for rid, entry in CATALOG.items():
        assert entry.strategy == registry.lookup(rid).strategy


@pytest.mark.parametrize("rule", RULES)
def test_rule_on_fixture_pair(rule):
    vuln, fixed, expected = fixture_pair(rule)
    got = [(f.rule_id, f.line) for f in run_rule(rule, model_of(vuln), strict=True)]
    assert got == expected
    assert run_rule(rule, model_of(fixed), strict=True) == []


def test_mwc_101_box():
    src = "public fun get_counter(addr: address): u64 {\n    let c = borrow_global<Counter>(addr);\n    c.value\n}"
    findings = run_rule("MWC-101", analyze_source(src))
    assert [(f.line, f.severity, f.confidence) for f in findings] == [(2, "medium", "precise")]


def test_empty_module():
    assert run_all(analyze_source("module M {}"), strict=True) == []
    assert run_all(analyze_source(""), strict=True) == []


def test_run_rule_rejects_advisory_and_unknown():
    model = analyze_source("module M {}")
    with pytest.raises(UnsupportedRuleError):
        run_rule("MWC-112", model)
    with pytest.raises(UnsupportedRuleError):
        run_rule("MWC-999", model)


def test_wildcard_import():
    findings = run_rule("MWC-117", analyze_source("use 0x1::Coin::*;\nmodule M {}"))
    assert [f.line for f in findings] == [1]


def test_dead_code_straight_line_clean():
    assert run_rule("MWC-105", analyze_source("fun f() { a(); b(); return; }")) == []


def test_heuristic_suffix():
    vuln, _, _ = fixture_pair("MWC-107")
    for f in run_rule("MWC-107", model_of(vuln)):
        assert f.confidence == "heuristic" and f.message.endswith("(heuristic)")


def test_allow_pragma_trailing_and_preceding():
    base = "fun f(a: address) {\n let s = borrow_global<S>(a);%s\n}"
    assert len(run_rule("MWC-101", analyze_source(base % ""))) == 1
    assert run_rule("MWC-101", analyze_source(base % " // mwc: allow MWC-101")) == []
    pre = "fun f(a: address) {\n // mwc: allow MWC-101\n let s = borrow_global<S>(a);\n}"
    assert run_rule("MWC-101", analyze_source(pre)) == []
    other = "fun f(a: address) {\n // mwc: allow MWC-103\n let s = borrow_global<S>(a);\n}"
    assert len(run_rule("MWC-101", analyze_source(other))) == 1


def test_review_pragma_for_advisory_ids():
    src = "module M {\n // mwc: review MWC-112\n fun f() {}\n // mwc: review MWC-101\n}"
    findings = run_all(analyze_source(src))
    assert [(f.rule_id, f.line, f.confidence) for f in findings] == [("MWC-112", 2, "advisory")]
    quiet = Config(review_pragmas=False)
    assert run_all(analyze_source(src, config=quiet), quiet) == []


def test_broken_detector_is_isolated(monkeypatch):
    from mwc_lint.detectors import engine

    entry = engine.DEFAULT_CATALOG["MWC-117"]
    def boom(ctx):
        raise RuntimeError("boom")
        yield
    monkeypatch.setitem(engine.DEFAULT_CATALOG.entries, "MWC-117", entry.__class__(entry.rule_id, entry.strategy, entry.confidence, boom))
    model = analyze_source("use 0x1::Coin::*;\nfun f(a: address) { let s = borrow_global<S>(a); }")
    assert [f.rule_id for f in run_all(model)] == ["MWC-101"]
    with pytest.raises(RuntimeError):
        run_all(model, strict=True)


def _all_sources():
    return sorted(CORPUS.glob("*/*.move"))


def test_worker_count_does_not_change_findings():
    for path in _all_sources():
        model = model_of(path)
        one = run_all(model, workers=1)
        assert run_all(model, workers=8) == one
        assert run_all(model, workers=3) == one


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_enabling_rules_only_adds_findings(data):
    path = data.draw(st.sampled_from(_all_sources()))
    rules = sorted(CATALOG)
    small = frozenset(data.draw(st.lists(st.sampled_from(rules), unique=True)))
    extra = frozenset(data.draw(st.lists(st.sampled_from(rules), unique=True)))
    model = model_of(path)
    a = run_all(model, Config().with_rules(small))
    b = run_all(model, Config().with_rules(small | extra))
    assert set(a) <= set(b)
    assert [f for f in b if f.rule_id in small] == a
