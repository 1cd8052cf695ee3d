import random

import pytest

from mwc_lint.analysis import analyze_source
from mwc_lint.config import Config, config_from_dict
from mwc_lint.frontend import ast as A
from mwc_lint.frontend import parse_source
from mwc_lint.semantics import SemanticError, build_cfg, classify_call, reachable_set, resolve
from mwc_lint.semantics.effects import Scope, statement_effects

from oracles import oracle_reachable, random_cfg


def fn_of(src, name=None):
    model = analyze_source(src)
    fns = model.functions()
    return next(f for f in fns if name is None or f.name == name)


@pytest.mark.parametrize(
    "path,cls",
    [
        ("borrow_global", "storage-primitive"),
        ("exists", "storage-primitive"),
        ("External::trigger", "external"),
        ("EVM::cheap_call", "evm"),
        ("crypto::verify", "crypto"),
        ("verify", "crypto"),
        ("hash::sha3_256", "crypto"),
        ("Oracle::get", "oracle"),
        ("Bridge::send", "bridge"),
        ("lock_a", "lock"),
        ("callback::trigger", "external"),
        ("helper", "internal"),
        ("log::info", "unknown"),
    ],
)
def test_classify(path, cls):
    assert classify_call(path, Config()).cls == cls


def test_evm_flag_on_external_callback():
    cc = classify_call("External::evm_callback", Config())
    assert cc.cls == "external" and cc.evm and cc.is_external


def test_classify_is_configurable():
    cfg = config_from_dict({"call_classes": {"oracle": ["PriceFeed"]}})
    assert classify_call("PriceFeed::latest", cfg).cls == "oracle"


def test_effects_of_box_statements():
    fn = fn_of("public fun t() {\n  External::evm_callback();\n  update_balance();\n  state.value = 10;\n  let x = 1;\n}")
    eff = fn.cfg.effects
    assert {"external-call", "evm-call"} <= eff[0]
    assert "writes-global" in eff[1]
    assert "writes-global" in eff[2]
    assert "writes-global" not in eff[3]


def test_write_through_borrowed_local_and_mut_param():
    fn = fn_of("fun f(t: &mut T, r: &T) {\n let s = borrow_global<S>(a);\n s.n = 1;\n t.x = 2;\n let v = 0;\n v = 3;\n}")
    eff = fn.cfg.effects
    assert "writes-global" in eff[1] and "writes-global" in eff[2]
    assert "writes-global" not in eff[4]


def test_lock_effect_names():
    fn = fn_of("fun f() { lock_a(); lock_b(); }")
    assert fn.cfg.effects[0] == frozenset({"lock-acquire:a"})


def test_cfg_straight_line():
    cfg = fn_of("fun f() { a(); b(); }").cfg
    assert len(cfg.blocks) == 1 and cfg.edges == []


def test_cfg_if_else_diamond():
    cfg = fn_of("fun f() { if (c) { a(); } else { b(); } d(); }").cfg
    kinds = sorted(k for _, _, k in cfg.edges)
    assert kinds == ["branch-false", "branch-true", "fallthrough", "fallthrough"]
    assert reachable_set(cfg) == {b.id for b in cfg.blocks}


def test_cfg_while_has_one_back_edge():
    cfg = fn_of("fun f() { while (c) { a(); } b(); }").cfg
    assert [k for *_, k in cfg.edges].count("loop-back") == 1
    guard = cfg.stmt_block[0]
    assert {(s, k) for s, d, k in cfg.edges if d == guard} >= {(guard + 1, "loop-back")}


def test_cfg_return_makes_dead_block():
    cfg = fn_of("fun f() { return; let x = 1; g(); }").cfg
    reach = reachable_set(cfg)
    dead = {cfg.stmt_block[1], cfg.stmt_block[2]}
    assert dead.isdisjoint(reach)


def test_cfg_if_both_branches_return():
    cfg = fn_of("fun f() { if (c) { return; } else { return; } x(); }").cfg
    last = cfg.stmt_block[-1]
    assert last not in reachable_set(cfg)


def test_resolve_records_address_collisions():
    model = analyze_source("module 0x1::R { fun a() {} }\nmodule 0x1::R { fun b() {} }\nmodule 0x2::Q {}")
    assert [e[1] for e in model.module_addresses["0x1"]] == ["R", "R"]
    assert len(model.module_addresses["0x2"]) == 1


def test_resolve_rejects_duplicate_function():
    with pytest.raises(SemanticError) as info:
        resolve([parse_source("module M { fun a() {} fun a() {} }", "d.move")])
    assert "duplicate function 'a'" in str(info.value)


def test_call_graph_targets():
    model = analyze_source("module M { fun a() { b(); Other::c(); } fun b() {} }\nmodule Other { fun c() {} }")
    edges = {(e.caller, e.callee, e.target) for e in model.call_graph}
    assert ("M::a", "b", "M::b") in edges
    assert ("M::a", "Other::c", "Other::c") in edges


def test_scope_globals():
    fn = parse_source("fun f(p: u64) { let l = 1; g = p + l + C + h; }").modules[0].functions[0]
    scope = Scope.for_function(fn, {"C"})
    assert scope.is_global("g") and not scope.is_global("p") and not scope.is_global("l")
    assert not scope.is_global("C")
    eff = statement_effects(fn.body.stmts[1], scope, Config())
    assert "writes-global" in eff and "reads-global" in eff
    eff2 = statement_effects(parse_source("fun f(p: u64) { g = p + C; }").modules[0].functions[0].body.stmts[0], Scope.for_function(fn, {"C"}), Config())
    assert "reads-global" not in eff2


def test_reachable_matches_oracle_on_random_cfgs():
    rng = random.Random(1234)
    for _ in range(300):
        cfg = random_cfg(rng, rng.randint(1, 12))
        assert reachable_set(cfg) == oracle_reachable(cfg)
