"""Flow queries shared by detectors: guards, effect ordering, locks, loops."""

from __future__ import annotations

from collections import deque
from typing import Callable

from ..frontend import ast as A
from ..semantics.cfg import Cfg
from ..semantics.effects import UNSIGNED, Scope, has_flag
from ..semantics.model import SemanticModel

GuardPredicate = Callable[[A.Expr], bool]


def _guard_test(cfg: Cfg, predicate: GuardPredicate, branches: bool) -> Callable[[int], bool]:
    def is_guard(i: int) -> bool:
        stmt = cfg.stmts[i]
        if isinstance(stmt, A.Assert):
            return bool(predicate(stmt.cond))
        if branches and isinstance(stmt, (A.If, A.While)):
            return bool(predicate(stmt.cond))
        return False

    return is_guard


def check_dominating_guard(cfg: Cfg, use_site: int, predicate: GuardPredicate, branches: bool = True) -> bool:
    """True iff every path from entry to statement *use_site* passes a guard.

    A guard is an ``assert`` (or, with *branches*, an ``if``/``while``
    condition) whose expression satisfies *predicate*.  Guards later in the
    use site's own block do not count.  Unreachable use sites are vacuously
    guarded.
    """
    is_guard = _guard_test(cfg, predicate, branches)
    block, offset = cfg.position(use_site)
    if any(is_guard(i) for i in cfg.blocks[block].stmts[:offset]):
        return True
    if block == cfg.entry:
        return False
    guarded = {b.id for b in cfg.blocks if any(is_guard(i) for i in b.stmts)}
    if cfg.entry in guarded:
        return True
    succ = cfg.succ_map()
    seen = {cfg.entry}
    queue = deque([cfg.entry])
    while queue:
        node = queue.popleft()
        for nxt in succ[node]:
            if nxt == block:
                return False
            if nxt not in seen and nxt not in guarded:
                seen.add(nxt)
                queue.append(nxt)
    return True


def _block_closure(cfg: Cfg) -> dict[int, set[int]]:
    """Blocks reachable from each block through one or more edges."""
    succ = cfg.succ_map()
    out: dict[int, set[int]] = {}
    for b in cfg.blocks:
        seen: set[int] = set()
        queue = deque(succ[b.id])
        while queue:
            n = queue.popleft()
            if n not in seen:
                seen.add(n)
                queue.extend(succ[n])
        out[b.id] = seen
    return out


def stmt_reaches(cfg: Cfg, closure: dict[int, set[int]] | None = None) -> Callable[[int, int], bool]:
    """Predicate: can statement j execute after statement i on some path?"""
    closure = closure if closure is not None else _block_closure(cfg)

    def reaches(i: int, j: int) -> bool:
        bi, oi = cfg.position(i)
        bj, oj = cfg.position(j)
        if bi == bj and oj > oi:
            return True
        return bj in closure[bi]

    return reaches


def order_of_effects(cfg: Cfg, first: str, second: str) -> list[tuple[int, int]]:
    """Statement pairs (i, j) where an effect *first* at i precedes *second* at j."""
    reaches = stmt_reaches(cfg)
    firsts = [i for i, eff in enumerate(cfg.effects) if has_flag(eff, first)]
    seconds = [j for j, eff in enumerate(cfg.effects) if has_flag(eff, second)]
    return [(i, j) for i in firsts for j in seconds if reaches(i, j)]


def lock_sequences(model: SemanticModel) -> dict[str, list[tuple[str, A.Stmt]]]:
    """First acquisition of each lock per function, in source order."""
    out: dict[str, list[tuple[str, A.Stmt]]] = {}
    for fn in model.functions():
        seq: list[tuple[str, A.Stmt]] = []
        seen: set[str] = set()
        cfg = fn.cfg
        for stmt in A.walk_stmts(fn.decl.body):
            effects = cfg.effects[cfg.index_of(stmt)]
            for call in A.calls_in(stmt):
                flag = next(
                    (f for f in sorted(effects) if f.startswith("lock-acquire:") and _lock_call(call, f)),
                    None,
                )
                if flag:
                    name = flag.split(":", 1)[1]
                    if name not in seen:
                        seen.add(name)
                        seq.append((name, stmt))
        if seq:
            out[fn.qualname] = seq
    return out


def _lock_call(call: A.Call, flag: str) -> bool:
    name = flag.split(":", 1)[1]
    return call.name == name or call.name == f"lock_{name}"


def ordered_pairs(seq: list[str]) -> set[tuple[str, str]]:
    return {(seq[i], seq[j]) for i in range(len(seq)) for j in range(i + 1, len(seq))}


def lock_order_conflicts(model: SemanticModel) -> list[tuple[str, str, tuple[str, str]]]:
    """Function pairs acquiring some pair of locks in opposite orders.

    Each result is ``(f, g, (x, y))`` with ``f < g`` and ``x < y``.
    """
    orders = {fn: ordered_pairs([n for n, _ in seq]) for fn, seq in lock_sequences(model).items()}
    by_pair: dict[tuple[str, str], tuple[set[str], set[str]]] = {}
    for fn, pairs in orders.items():
        for x, y in pairs:
            key = (min(x, y), max(x, y))
            forward, backward = by_pair.setdefault(key, (set(), set()))
            (forward if (x, y) == key else backward).add(fn)
    out = set()
    for key, (forward, backward) in by_pair.items():
        for f in forward:
            for g in backward:
                out.add((min(f, g), max(f, g), key))
    return sorted(out)


def _loop_var(cond: A.Expr) -> str | None:
    """``v >= k`` or ``k <= v`` with a literal k; returns v."""
    if not isinstance(cond, A.Binary):
        return None
    if cond.op == ">=" and isinstance(cond.left, A.Name) and isinstance(cond.right, A.IntLit):
        return cond.left.name
    if cond.op == "<=" and isinstance(cond.right, A.Name) and isinstance(cond.left, A.IntLit):
        return cond.right.name
    return None


def _non_decreasing(var: str, value: A.Expr) -> bool:
    if isinstance(value, A.Name) and value.name == var:
        return True
    if isinstance(value, A.Binary) and value.op == "+":
        return any(isinstance(side, A.Name) and side.name == var for side in (value.left, value.right))
    return False


def loop_nontermination(cfg: Cfg, scope: Scope | None = None) -> list[A.While]:
    """Loops whose ``v >= k`` guard can never fail.

    Only the narrow class is flagged: v is unsigned, k a literal, and every
    assignment to v inside the loop keeps it from decreasing.
    """
    declared: dict[str, str | None] = {}
    for stmt in cfg.stmts:
        if isinstance(stmt, A.Let):
            if isinstance(stmt.type, A.TypeRef):
                declared[stmt.name] = stmt.type.name
            elif isinstance(stmt.value, A.IntLit):
                declared[stmt.name] = stmt.value.suffix or "u64"
    out = []
    for stmt in cfg.stmts:
        if not isinstance(stmt, A.While):
            continue
        var = _loop_var(stmt.cond)
        if var is None:
            continue
        vtype = declared.get(var)
        if vtype is None and scope is not None:
            vtype = scope.var_type(var)
        if vtype not in UNSIGNED:
            continue
        updates = [
            s for s in A.walk_stmts(stmt.body)
            if isinstance(s, A.Assign) and isinstance(s.target, A.Name) and s.target.name == var
        ]
        if all(_non_decreasing(var, s.value) for s in updates):
            out.append(stmt)
    return out
