"""Detector procedures, one per non-advisory MWC category.

Each procedure takes a :class:`RuleContext` and yields ``(node, message)``
pairs; the engine turns those into findings with registry metadata.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

from ..config import Config
from ..frontend import ast as A
from ..semantics.cfg import reachable_set
from ..semantics.classify import classify_call
from ..semantics.effects import has_flag, is_global_target
from ..semantics.model import FunctionInfo, ModuleInfo, SemanticModel
from . import flow

Hit = tuple[object, str]  # (AST node carrying a span, message)


@dataclass(frozen=True)
class RuleContext:
    model: SemanticModel
    config: Config

    def functions(self) -> list[FunctionInfo]:
        return self.model.functions()

    def bodies(self) -> list[FunctionInfo]:
        return [fn for fn in self.model.functions() if fn.decl.body is not None]

    def cls(self, call: A.Call):
        return classify_call(call.path, self.config)


@dataclass(frozen=True)
class DetectorEntry:
    rule_id: str
    strategy: str
    confidence: str  # "precise" or "heuristic"
    procedure: Callable[[RuleContext], Iterable[Hit]]
    enabled_by_default: bool = True


CATALOG: dict[str, DetectorEntry] = {}


def detector(rule_id: str, strategy: str, confidence: str):
    def register(fn):
        CATALOG[rule_id] = DetectorEntry(rule_id, strategy, confidence, fn)
        return fn

    return register


# helpers


def _asserts(fn: FunctionInfo) -> list[A.Assert]:
    return [s for s in A.walk_stmts(fn.decl.body) if isinstance(s, A.Assert)]


def _is_public(fn: FunctionInfo) -> bool:
    return fn.decl.visibility in ("public", "entry") or fn.decl.entry


def _target_name(target: A.Expr) -> str | None:
    if isinstance(target, A.FieldAccess):
        return target.field
    if isinstance(target, A.Name):
        return target.name
    return None


def _mentions(expr: A.Expr, name: str) -> bool:
    """Does *expr* mention *name* as a variable or field?"""
    for e in A.iter_exprs(expr):
        if isinstance(e, A.Name) and e.name == name:
            return True
        if isinstance(e, A.FieldAccess) and e.field == name:
            return True
    return False


def _idents(expr) -> set[str]:
    """Variable, field and callee names appearing in *expr*."""
    out: set[str] = set()
    for e in A.iter_exprs(expr):
        if isinstance(e, A.Name):
            out.add(e.name)
        elif isinstance(e, A.FieldAccess):
            out.add(e.field)
        elif isinstance(e, A.Call):
            out.update(e.path)
    return out


def _type_names(t: A.TypeNode | None) -> Iterator[str]:
    if isinstance(t, A.TypeRef):
        yield t.name
        for arg in t.args:
            yield from _type_names(arg)
    elif isinstance(t, A.TupleType):
        for item in t.items:
            yield from _type_names(item)


def _resource_like(ctx: RuleContext, mod: ModuleInfo, type_name: str | None) -> bool:
    abilities = ctx.model.abilities_of(mod, type_name)
    return bool(abilities and ({"key", "store"} & abilities))


def _is_verify(call: A.Call, ctx: RuleContext) -> bool:
    return ctx.cls(call).cls == "crypto" and "verify" in call.name.lower()


# BMI


@detector("MWC-100", "flow", "precise")
def frozen_state(ctx: RuleContext) -> Iterator[Hit]:
    for mod in ctx.model.module_infos:
        bool_fields = {
            f.name for s in mod.structs.values() for f in s.fields if A.type_name(f.type) == "bool"
        }
        declared = {f.name for s in mod.structs.values() for f in s.fields}
        freezes: list[tuple[str, A.Assign]] = []
        resets: set[str] = set()
        guarded: set[str] = set()
        for fn in mod.functions.values():
            for stmt in A.walk_stmts(fn.decl.body):
                if isinstance(stmt, A.Assign):
                    name = _target_name(stmt.target)
                    if name and ctx.config.matches("freeze", name):
                        if isinstance(stmt.value, A.BoolLit) and stmt.value.value:
                            freezes.append((name, stmt))
                        else:
                            resets.add(name)
                elif isinstance(stmt, A.Assert):
                    guarded.update(n for n in _idents(stmt.cond) if ctx.config.matches("freeze", n))
        for name, stmt in freezes:
            if name in resets or name not in guarded:
                continue
            if name in declared and name not in bool_fields:
                continue
            yield stmt, f"'{name}' is set to true but nothing in the module ever resets it, while asserts depend on it"


@detector("MWC-101", "flow", "precise")
def unchecked_borrow(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        cfg = fn.cfg
        for idx, stmt in enumerate(cfg.stmts):
            for call in A.calls_in(stmt):
                if len(call.path) != 1 or call.name not in ("borrow_global", "borrow_global_mut"):
                    continue
                if not call.type_args or not call.args:
                    continue
                tname, addr = A.type_name(call.type_args[0]), call.args[0]

                def is_exists(expr, tname=tname, addr=addr) -> bool:
                    return any(
                        isinstance(e, A.Call) and e.path == ["exists"] and e.args and e.args[0] == addr
                        and e.type_args and A.type_name(e.type_args[0]) == tname
                        for e in A.iter_exprs(expr)
                    )

                if not flow.check_dominating_guard(cfg, idx, is_exists):
                    yield call, f"{call.name}<{tname}> is not guarded by exists<{tname}> on the same address"


@detector("MWC-102", "flow", "heuristic")
def no_rollback(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        cfg = fn.cfg
        succ = cfg.succ_map()
        reach = reachable_set(cfg)

        def effectful(i: int) -> bool:
            return has_flag(cfg.effects[i], "writes-global") or has_flag(cfg.effects[i], "external-call")

        for block in cfg.blocks:
            if block.id not in reach:
                continue
            pairs = list(zip(block.stmts, block.stmts[1:]))
            if block.stmts and not isinstance(cfg.stmts[block.stmts[-1]], (A.If, A.While, A.Return)):
                for nxt in succ[block.id]:
                    if cfg.blocks[nxt].stmts:
                        pairs.append((block.stmts[-1], cfg.blocks[nxt].stmts[0]))
            for i, j in pairs:
                if not (effectful(i) and effectful(j) and A.calls_in(cfg.stmts[j])):
                    continue
                if flow.check_dominating_guard(cfg, i, lambda e: True, branches=False):
                    continue
                second = A.calls_in(cfg.stmts[j])[0].callee
                yield cfg.stmts[i], (
                    f"state change is followed by '{second}', which can abort and leave the first step applied"
                )


@detector("MWC-103", "flow", "precise")
def infinite_loop(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        for loop in flow.loop_nontermination(fn.cfg, fn.scope):
            yield loop, "loop condition on an unsigned counter that never decreases is always true"


# IMI


@detector("MWC-104", "flow", "precise")
def unvalidated_external_target(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        addrs = {p.name for p in fn.decl.params if isinstance(p.type, A.TypeRef) and p.type.name == "address" and not p.type.ref}
        if not addrs:
            continue
        cfg = fn.cfg
        for idx, stmt in enumerate(cfg.stmts):
            for call in A.calls_in(stmt):
                if not ctx.cls(call).is_external:
                    continue
                for name in sorted(addrs & A.names_in(call.args)):
                    if not flow.check_dominating_guard(cfg, idx, lambda e, n=name: n in A.names_in(e)):
                        yield call, f"address parameter '{name}' reaches external call {call.callee} without validation"


@detector("MWC-105", "flow", "precise")
def dead_code(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        cfg = fn.cfg
        reach = reachable_set(cfg)
        preds: dict[int, list[int]] = {b.id: [] for b in cfg.blocks}
        for s, d, _ in cfg.edges:
            preds[d].append(s)

        def dead_origin(bid: int, seen: frozenset = frozenset()) -> bool:
            # true when some unreachable predecessor already holds reported code
            for p in preds[bid]:
                if p in seen:
                    continue
                if cfg.blocks[p].stmts or dead_origin(p, seen | {bid}):
                    return True
            return False

        for block in cfg.blocks:
            if block.id in reach or not block.stmts or dead_origin(block.id):
                continue
            yield cfg.stmts[block.stmts[0]], "statement can never execute"


# SRS


@detector("MWC-106", "flow", "precise")
def hybrid_reentrancy(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        cfg = fn.cfg
        seen: set[int] = set()
        for i, j in flow.order_of_effects(cfg, "external-call", "writes-global"):
            if i in seen:
                continue
            seen.add(i)
            yield cfg.stmts[i], f"external call precedes a state write at line {cfg.stmts[j].span.line}; re-entry sees stale state"


_MUTATION_NOTE = re.compile(r"state|mutat|modif|chang", re.IGNORECASE)


@detector("MWC-107", "flow", "heuristic")
def callback_mutation(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        cfg = fn.cfg
        reaches = flow.stmt_reaches(cfg)
        writes = [j for j, eff in enumerate(cfg.effects) if has_flag(eff, "writes-global")]
        source = ctx.model.source(fn.file)
        for idx, stmt in enumerate(cfg.stmts):
            for call in A.calls_in(stmt):
                if not ctx.cls(call).is_external:
                    continue
                if not any(ctx.config.matches("callback", seg) for seg in call.path):
                    continue
                mutated = any(reaches(idx, j) for j in writes)
                if not mutated and source is not None:
                    mutated = any(
                        c.span.line == call.span.line and _MUTATION_NOTE.search(c.text) for c in source.comments
                    )
                if mutated:
                    yield call, f"callback {call.callee} can mutate state the caller relies on"


@detector("MWC-108", "flow", "precise")
def interleaved_writes(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        cfg = fn.cfg
        for block in cfg.blocks:
            for k, j in enumerate(block.stmts):
                if not has_flag(cfg.effects[j], "writes-global"):
                    continue
                if any(has_flag(cfg.effects[i], "external-call") for i in block.stmts[:k]):
                    yield cfg.stmts[j], "storage write interleaves with an earlier external call in the same block"


@detector("MWC-109", "flow", "precise")
def lock_order(ctx: RuleContext) -> Iterator[Hit]:
    seqs = flow.lock_sequences(ctx.model)
    for f, g, (x, y) in flow.lock_order_conflicts(ctx.model):
        for fn, other in ((f, g), (g, f)):
            order = [name for name, _ in seqs[fn]]
            later = x if order.index(x) > order.index(y) else y
            stmt = next(s for name, s in seqs[fn] if name == later)
            yield stmt, f"locks '{x}' and '{y}' are acquired in the opposite order in {other}"


# MTS


@detector("MWC-110", "syntactic", "precise")
def unchecked_burn(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        if _asserts(fn):
            continue
        for stmt in A.walk_stmts(fn.decl.body):
            if isinstance(stmt, A.Assign) and isinstance(stmt.value, A.Binary) and stmt.value.op == "-":
                name = _target_name(stmt.target)
                if ctx.config.matches("supply", name):
                    yield stmt, f"'{name}' is reduced without any check on balance or permission"


@detector("MWC-111", "syntactic", "precise")
def unauthorized_mint(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        if not _is_public(fn):
            continue
        guarded = False
        for p in fn.decl.params:
            tname = A.type_name(p.type)
            if tname == "signer" or ctx.config.matches("capability", tname):
                guarded = True
        if guarded:
            continue
        for stmt in A.walk_stmts(fn.decl.body):
            if not isinstance(stmt, A.Assign):
                continue
            if not has_flag(fn.effects_of(stmt), "writes-global"):
                continue
            name = _target_name(stmt.target)
            if ctx.config.matches("supply", name):
                yield stmt, f"public function '{fn.name}' changes '{name}' without a signer or capability"


@detector("MWC-113", "syntactic", "heuristic")
def underpriced_evm(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        cfg = fn.cfg
        if not any(has_flag(e, "writes-global") for e in cfg.effects):
            continue
        for stmt, eff in zip(cfg.stmts, cfg.effects):
            if has_flag(eff, "evm-call"):
                yield stmt, "EVM-side call in a function that also performs Move state writes"


# GSM


@detector("MWC-116", "syntactic", "precise")
def unconstrained_generic(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.functions():
        if not ctx.config.matches("store", fn.name):
            continue
        used = {n for p in fn.decl.params for n in _type_names(p.type)}
        for tp in fn.decl.type_params:
            if not tp.constraints and tp.name in used:
                yield fn.decl, f"type parameter {tp.name} of '{fn.name}' has no ability constraints"


@detector("MWC-117", "syntactic", "precise")
def wildcard_use(ctx: RuleContext) -> Iterator[Hit]:
    for mod in ctx.model.module_infos:
        for use in mod.decl.uses:
            if use.wildcard:
                yield use, f"wildcard import of {'::'.join(use.path)} hides which state it touches"


@detector("MWC-118", "syntactic", "heuristic")
def unchecked_resource_api(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        if not _is_public(fn) or _asserts(fn):
            continue
        for p in fn.decl.params:
            if isinstance(p.type, A.TypeRef) and p.type.ref in ("", "&mut") and _resource_like(ctx, fn.module, p.type.name):
                yield fn.decl, f"public function '{fn.name}' accepts resource '{p.type.name}' without validating it"
                break


@detector("MWC-119", "syntactic", "heuristic")
def unchecked_wrapper(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.functions():
        if fn.decl.body is not None and _asserts(fn):
            continue
        if ctx.config.matches("wrap", fn.name) and any(
            ctx.config.matches("capability", p.name) or ctx.config.matches("capability", A.type_name(p.type))
            for p in fn.decl.params
        ):
            yield fn.decl, f"wrapper '{fn.name}' takes a capability without runtime checks"
        for stmt in A.walk_stmts(fn.decl.body):
            for call in A.calls_in(stmt):
                if ctx.config.matches("wrap", call.name) and any(
                    isinstance(a, A.Name) and ctx.config.matches("capability", a.name) for a in call.args
                ):
                    yield stmt, f"capability passed to '{call.callee}' without validating permission"


# SUPP frames


@detector("MWC-120a", "syntactic", "precise")
def weak_signature(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        for stmt in A.walk_stmts(fn.decl.body):
            for call in A.calls_in(stmt):
                if not _is_verify(call, ctx):
                    continue
                names = _idents(call.args)
                if not any(ctx.config.matches("nonce", n) or ctx.config.matches("domain", n) for n in names):
                    yield call, f"{call.callee} checks a message with no nonce or domain separation"


@detector("MWC-121", "flow", "precise")
def fallback_postcondition(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        if fn.decl.visibility != "fallback":
            continue
        cfg = fn.cfg
        reaches = flow.stmt_reaches(cfg)
        checks = [j for j, eff in enumerate(cfg.effects) if has_flag(eff, "assert-guard")]
        for idx, stmt in enumerate(cfg.stmts):
            eff = cfg.effects[idx]
            if not A.calls_in(stmt) or isinstance(stmt, A.Assert):
                continue
            if not (has_flag(eff, "writes-global") or has_flag(eff, "external-call")):
                continue
            if not any(reaches(idx, j) for j in checks):
                yield stmt, "fallback performs a state-changing call with no post-condition check"


@detector("MWC-123", "syntactic", "heuristic")
def discarded_result(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        for stmt in A.walk_stmts(fn.decl.body):
            if not (isinstance(stmt, A.ExprStmt) and isinstance(stmt.expr, A.Call)):
                continue
            call = stmt.expr
            if len(call.path) != 1 or ctx.cls(call).cls != "internal":
                continue
            target = fn.module.functions.get(call.name)
            if target is not None and target.decl.return_type is not None:
                yield stmt, f"result of '{call.name}' is discarded, so its error signal is lost"


@detector("MWC-125", "flow", "heuristic")
def predictable_order(ctx: RuleContext) -> Iterator[Hit]:
    for mod in ctx.model.module_infos:
        names: set[str] = set(mod.functions)
        for fn in mod.functions.values():
            for stmt in A.walk_stmts(fn.decl.body):
                names.update(c.name for c in A.calls_in(stmt))
        if any(ctx.config.matches("commit", n) for n in names):
            continue
        for fn in mod.functions.values():
            scope = fn.scope
            params = {p.name for p in fn.decl.params}
            for stmt in A.walk_stmts(fn.decl.body):
                if not (isinstance(stmt, A.If) and isinstance(stmt.cond, A.Binary)):
                    continue
                if stmt.cond.op not in ("<", ">", "<=", ">=", "==", "!="):
                    continue
                sides = (stmt.cond.left, stmt.cond.right)
                has_param = any(isinstance(s, A.Name) and s.name in params for s in sides)
                has_global = any(
                    (A.root_name(s) is not None and is_global_target(s, scope)) for s in sides
                )
                if not (has_param and has_global):
                    continue
                sender = any(
                    isinstance(s, A.Assign)
                    and any(isinstance(e, A.Call) and ctx.config.matches("sender", e.name) for e in A.iter_exprs(s.value))
                    for s in A.walk_stmts(stmt.then)
                )
                if sender:
                    yield stmt, "outcome depends on transaction order; no commit-reveal step protects it"


@detector("MWC-126", "syntactic", "precise")
def resource_decode(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        for stmt in A.walk_stmts(fn.decl.body):
            for call in A.calls_in(stmt):
                if not (len(call.path) > 1 and call.path[0].lower() == "abi" and ctx.config.matches("abi_decode", call.name)):
                    continue
                targets = [A.type_name(t) for t in call.type_args]
                if isinstance(stmt, A.Let) and stmt.value is call:
                    targets.append(A.type_name(stmt.type))
                if any(_resource_like(ctx, fn.module, t) for t in targets) or ctx.config.matches("resource_hint", call.name):
                    yield call, f"{call.callee} rebuilds a resource from raw ABI bytes"


@detector("MWC-127", "flow", "precise")
def duplicate_module_address(ctx: RuleContext) -> Iterator[Hit]:
    for address, entries in sorted(ctx.model.module_addresses.items()):
        by_name: dict[str, list[tuple[str, str, A.Span]]] = {}
        for entry in entries:
            by_name.setdefault(entry[1], []).append(entry)
        for name, group in sorted(by_name.items()):
            if len(group) < 2:
                continue
            first = group[0]
            for _, _, span in group[1:]:
                yield span, f"module {address}::{name} is also declared at {first[0]}:{first[2].line}"


@detector("MWC-128", "syntactic", "precise")
def hash_domain(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        for stmt in A.walk_stmts(fn.decl.body):
            for call in A.calls_in(stmt):
                cc = ctx.cls(call)
                hashing = (cc.cls == "crypto" and call.path[0].lower().startswith("hash")) or any(
                    k in call.name.lower() for k in ("sha", "keccak", "hash")
                )
                if not hashing or not call.args:
                    continue
                first = call.args[0]
                if isinstance(first, (A.Call, A.Binary)) and any(
                    ctx.config.matches("domain", n) for n in _idents(first)
                ):
                    continue
                yield call, f"{call.callee} hashes input without a domain prefix"


@detector("MWC-129", "syntactic", "heuristic")
def dual_signer(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        authorized = any(
            any(ctx.config.matches("role", n) for n in _idents(a.cond)) for a in _asserts(fn)
        )
        if authorized:
            continue
        for stmt in A.walk_stmts(fn.decl.body):
            for expr in A.stmt_exprs(stmt):
                for e in A.iter_exprs(expr):
                    if not (isinstance(e, A.Binary) and e.op == "&&"):
                        continue
                    left, right = e.left, e.right
                    if (
                        isinstance(left, A.Call) and isinstance(right, A.Call)
                        and _is_verify(left, ctx) and _is_verify(right, ctx)
                        and left.args and right.args and left.args[0] != right.args[0]
                    ):
                        yield stmt, "two signers are verified but neither key's role is checked"


@detector("MWC-130", "syntactic", "heuristic")
def event_schema(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        for stmt in A.walk_stmts(fn.decl.body):
            if not isinstance(stmt, A.Emit):
                continue
            short = stmt.event.split("::")[-1]
            expected = ctx.config.event_schemas.get(stmt.event, ctx.config.event_schemas.get(short))
            if expected is None and short in fn.module.structs:
                expected = len(fn.module.structs[short].fields)
            if expected is not None and len(stmt.args) != expected:
                yield stmt, f"event {stmt.event} emitted with {len(stmt.args)} fields; schema has {expected}"


@detector("MWC-131", "syntactic", "precise")
def state_leak(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.functions():
        rt = fn.decl.return_type
        if not _is_public(fn) or fn.decl.params or not isinstance(rt, A.TypeRef) or rt.ref:
            continue
        abilities = ctx.model.abilities_of(fn.module, rt.name)
        if abilities and "key" in abilities:
            yield fn.decl, f"'{fn.name}' returns the raw stored struct {rt.name}"


@detector("MWC-132", "syntactic", "heuristic")
def revealing_abort(ctx: RuleContext) -> Iterator[Hit]:
    generic = set(ctx.config.generic_error_codes)
    for fn in ctx.bodies():
        if not _is_public(fn):
            continue
        for a in _asserts(fn):
            if isinstance(a.code, A.IntLit) and a.code.value not in generic:
                yield a, f"abort code {a.code.value} exposes internal logic to observers"


@detector("MWC-133", "syntactic", "heuristic")
def bridge_payload(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        cfg = fn.cfg
        for idx, stmt in enumerate(cfg.stmts):
            for call in A.calls_in(stmt):
                if ctx.cls(call).cls != "bridge":
                    continue
                for arg in call.args:
                    if not (isinstance(arg, A.Name) and ctx.config.matches("payload", arg.name)):
                        continue
                    if not flow.check_dominating_guard(cfg, idx, lambda e, n=arg.name: n in A.names_in(e), branches=False):
                        yield call, f"bridge call forwards '{arg.name}' without validation"


@detector("MWC-136", "flow", "precise")
def unverified_oracle(ctx: RuleContext) -> Iterator[Hit]:
    for fn in ctx.bodies():
        order = list(A.walk_stmts(fn.decl.body))
        for k, stmt in enumerate(order):
            if isinstance(stmt, A.Let):
                var, value = stmt.name, stmt.value
            elif isinstance(stmt, A.Assign):
                var, value = A.root_name(stmt.target), stmt.value
            else:
                continue
            if var is None or value is None:
                continue
            oracle = next((e for e in A.iter_exprs(value) if isinstance(e, A.Call) and ctx.cls(e).cls == "oracle"), None)
            if oracle is None:
                continue
            first_use = next((s for s in order[k + 1:] if any(_mentions(x, var) for x in A.stmt_exprs(s))), None)
            if not isinstance(first_use, A.Assert):
                yield stmt, f"'{var}' from {oracle.callee} is used without a source or signature check"
