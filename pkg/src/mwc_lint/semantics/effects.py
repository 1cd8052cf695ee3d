"""Per-statement effect summaries."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..config import Config
from ..frontend import ast as A
from .classify import STORAGE_WRITES, classify_call

EFFECT_FLAGS = (
    "reads-global",
    "writes-global",
    "external-call",
    "crypto-call",
    "oracle-call",
    "bridge-call",
    "evm-call",
    "lock-acquire",
    "assert-guard",
    "emits-event",
    "returns",
)

UNSIGNED = frozenset({"u8", "u16", "u32", "u64", "u128", "u256"})

EffectSet = frozenset  # of flag strings; lock acquisitions appear as "lock-acquire:<name>"


def has_flag(effects: EffectSet, flag: str) -> bool:
    if flag == "lock-acquire":
        return any(f.startswith("lock-acquire:") for f in effects)
    return flag in effects


@dataclass
class Scope:
    """Name bindings visible inside one function."""

    params: dict[str, A.TypeNode] = field(default_factory=dict)
    locals: dict[str, str | None] = field(default_factory=dict)  # name -> type name if known
    global_refs: set[str] = field(default_factory=set)  # locals bound to borrow_global results
    consts: set[str] = field(default_factory=set)

    @classmethod
    def for_function(cls, fn: A.FunctionDecl, consts: set[str] | frozenset[str] = frozenset()) -> "Scope":
        scope = cls(params={p.name: p.type for p in fn.params}, consts=set(consts))
        for stmt in A.walk_stmts(fn.body):
            if isinstance(stmt, A.Let):
                scope.locals[stmt.name] = _let_type(stmt)
                if isinstance(stmt.value, A.Call) and stmt.value.name in ("borrow_global", "borrow_global_mut"):
                    scope.global_refs.add(stmt.name)
        return scope

    def is_global(self, name: str) -> bool:
        """Unbound bare names are treated as module-level state."""
        return (
            "::" not in name
            and name not in self.params
            and name not in self.locals
            and name not in self.consts
        )

    def var_type(self, name: str) -> str | None:
        if name in self.locals:
            return self.locals[name]
        t = self.params.get(name)
        return t.name if isinstance(t, A.TypeRef) and not t.ref else None

    def is_mut_ref_param(self, name: str) -> bool:
        t = self.params.get(name)
        return isinstance(t, A.TypeRef) and t.ref == "&mut"


def _let_type(stmt: A.Let) -> str | None:
    if isinstance(stmt.type, A.TypeRef):
        return stmt.type.name
    if isinstance(stmt.value, A.IntLit):
        return stmt.value.suffix or "u64"
    if isinstance(stmt.value, A.BoolLit):
        return "bool"
    return None


def is_global_target(target: A.Expr, scope: Scope) -> bool:
    root = A.root_name(target)
    if root is None:
        return False
    if isinstance(target, A.FieldAccess):
        return root in scope.global_refs or scope.is_mut_ref_param(root) or scope.is_global(root)
    return scope.is_global(root)


def _read_names(stmt: A.Stmt) -> list[A.Expr]:
    if isinstance(stmt, A.Assign):
        return [stmt.value]
    return A.stmt_exprs(stmt)


def statement_effects(stmt: A.Stmt, scope: Scope, config: Config) -> EffectSet:
    flags: set[str] = set()
    if isinstance(stmt, A.Assert):
        flags.add("assert-guard")
    elif isinstance(stmt, A.Emit):
        flags.add("emits-event")
    elif isinstance(stmt, A.Return):
        flags.add("returns")
    if isinstance(stmt, A.Assign) and is_global_target(stmt.target, scope):
        flags.add("writes-global")

    for expr in _read_names(stmt):
        for e in A.iter_exprs(expr):
            if isinstance(e, A.Name) and scope.is_global(e.name):
                flags.add("reads-global")

    for call in A.calls_in(stmt):
        cc = classify_call(call.path, config)
        if cc.cls == "storage-primitive":
            flags.add("writes-global" if call.name in STORAGE_WRITES else "reads-global")
        elif cc.is_external:
            flags.add("external-call")
        elif cc.cls == "crypto":
            flags.add("crypto-call")
        elif cc.cls == "oracle":
            flags.add("oracle-call")
        elif cc.cls == "bridge":
            flags.add("bridge-call")
        elif cc.cls == "lock":
            name = call.name[5:] if call.name.startswith("lock_") else call.name
            flags.add(f"lock-acquire:{name}")
        elif cc.cls in ("internal", "unknown") and config.matches("mutator", call.name):
            flags.add("writes-global")
        if cc.evm:
            flags.add("evm-call")
    return frozenset(flags)
