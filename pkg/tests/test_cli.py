import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from mwc_lint.cli import execute

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
MINT = CORPUS / "MWC-111" / "mint.vuln.move"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = execute(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_scan_failed_verdict():
    code, out, _ = run("scan", str(MINT))
    doc = json.loads(out)
    assert code == 1
    assert [f["rule"] for f in doc["findings"]] == ["MWC-111"]
    assert doc["dimensions"]["fraud_analysis"]["unlimited_minting"] == "flagged"


def test_scan_clean_and_fail_on(tmp_path):
    clean = tmp_path / "ok.move"
    clean.write_text("module M {}\n")
    assert run("scan", str(clean))[0] == 0
    medium = CORPUS / "MWC-101" / "counter.vuln.move"
    assert run("scan", str(medium))[0] == 0
    assert run("scan", str(medium), "--fail-on", "medium")[0] == 1


def test_scan_parse_error_still_reports(tmp_path):
    bad = tmp_path / "bad.move"
    bad.write_text("fun f( {\n")
    code, out, err = run("scan", str(bad))
    assert code == 2
    assert "bad.move:1:" in err
    assert json.loads(out)["dimensions"]["code_quality"]["parse_error_count"] >= 1


def test_scan_semantic_error(tmp_path):
    dup = tmp_path / "dup.move"
    dup.write_text("module M { fun a() {} fun a() {} }\n")
    code, out, err = run("scan", str(dup))
    assert code == 2 and "duplicate" in err
    assert json.loads(out)["findings"] == []


@pytest.mark.parametrize(
    "argv",
    [
        ["scan"],
        ["scan", "nope.move"],
        ["scan", str(MINT), "--rules", "MWC-112"],
        ["scan", str(MINT), "--rules", "MWC-999"],
        ["scan", str(MINT), "--jobs", "0"],
        ["scan", str(MINT), "--format", "xml"],
        ["bogus"],
        [],
    ],
)
def test_usage_errors_exit_3(argv):
    assert run(*argv)[0] == 3


def test_bad_config_exit_3(tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"fail_on": "never"}')
    assert run("scan", str(MINT), "--config", str(cfg))[0] == 3
    monkeypatch.setenv("MWC_CONFIG", str(cfg))
    assert run("scan", str(MINT))[0] == 3


def test_env_config_applies(tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"enabled_rules": ["MWC-101"]}')
    monkeypatch.setenv("MWC_CONFIG", str(cfg))
    code, out, _ = run("scan", str(MINT))
    assert code == 0 and json.loads(out)["findings"] == []


def test_rules_filter_by_rule_subset():
    code, out, _ = run("scan", str(MINT), "--rules", "MWC-101,MWC-103")
    assert code == 0 and json.loads(out)["findings"] == []


def test_scan_formats():
    _, sarif, _ = run("scan", str(CORPUS), "--format", "sarif")
    assert json.loads(sarif)["version"] == "2.1.0"
    _, md, _ = run("scan", str(MINT), "--format", "md")
    assert md.startswith("# MWC Audit Report")


def test_scan_jobs_is_byte_identical():
    a = run("scan", str(CORPUS))[1]
    b = run("scan", str(CORPUS), "--jobs", "6")[1]
    assert a == b


def test_rules_listing():
    code, out, _ = run("rules", "--frame", "SRS")
    assert code == 0
    assert [line.split("\t")[0] for line in out.splitlines()] == ["MWC-106", "MWC-107", "MWC-108", "MWC-109"]
    _, adv, _ = run("rules", "--strategy", "advisory")
    assert len(adv.splitlines()) == 8


def test_explain():
    code, out, _ = run("explain", "MWC-103")
    assert code == 0
    assert out.splitlines()[0].startswith("MWC-103: ")
    assert "Analysis hint: loop termination analysis" in out and "Strategy: flow" in out
    code, _, err = run("explain", "MWC-777")
    assert code == 3 and "MWC-777" in err


def test_explain_split_id_note():
    code, out, _ = run("explain", "MWC-120")
    assert code == 0 and "Note:" in out


def test_map():
    code, out, _ = run("map")
    assert code == 0 and "SWC:" in out
    code, out, _ = run("map", "MWC-106")
    assert code == 0 and "MWC-106" in out


def test_eval(tmp_path):
    code, out, _ = run("eval", "--corpus", str(CORPUS))
    doc = json.loads(out)
    assert code == 0 and doc["recall"] == 1.0 and doc["fixtures"] == 60
    assert run("eval", "--corpus", str(CORPUS), "--rules", "MWC-101")[0] == 1
    broken = tmp_path / "MWC-999"
    broken.mkdir()
    assert run("eval", "--corpus", str(tmp_path))[0] == 2


def test_init_config_round_trip(tmp_path):
    code, out, _ = run("init-config")
    cfg = tmp_path / "mwc.json"
    cfg.write_text(out)
    assert code == 0
    assert run("scan", str(MINT), "--config", str(cfg))[0] == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mwc_lint", "rules"], capture_output=True, text=True)
    assert proc.returncode == 0 and len(proc.stdout.splitlines()) == 38
