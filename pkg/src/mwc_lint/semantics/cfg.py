"""Per-function control-flow graphs over AST statements."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from ..frontend import ast as A

EDGE_KINDS = ("fallthrough", "branch-true", "branch-false", "loop-back")


@dataclass
class BasicBlock:
    id: int
    stmts: list[int] = field(default_factory=list)  # indices into Cfg.stmts


@dataclass
class Cfg:
    blocks: list[BasicBlock]
    edges: list[tuple[int, int, str]]
    entry: int = 0
    stmts: list[A.Stmt] = field(default_factory=list)
    effects: list[frozenset] = field(default_factory=list)
    stmt_block: list[int] = field(default_factory=list)

    def successors(self, block: int) -> list[int]:
        return [d for s, d, _ in self.edges if s == block]

    def predecessors(self, block: int) -> list[int]:
        return [s for s, d, _ in self.edges if d == block]

    def succ_map(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {b.id: [] for b in self.blocks}
        for s, d, _ in self.edges:
            out[s].append(d)
        return out

    def position(self, stmt_index: int) -> tuple[int, int]:
        """(block id, offset within block) of a statement."""
        block = self.stmt_block[stmt_index]
        return block, self.blocks[block].stmts.index(stmt_index)

    def index_of(self, stmt: A.Stmt) -> int:
        for i, s in enumerate(self.stmts):
            if s is stmt:
                return i
        raise KeyError("statement not in this cfg")


class _Builder:
    def __init__(self, effects: Callable[[A.Stmt], frozenset] | None):
        self.cfg = Cfg(blocks=[], edges=[])
        self.effects = effects

    def new_block(self) -> int:
        bid = len(self.cfg.blocks)
        self.cfg.blocks.append(BasicBlock(bid))
        return bid

    def edge(self, src: int, dst: int, kind: str) -> None:
        self.cfg.edges.append((src, dst, kind))

    def add(self, block: int, stmt: A.Stmt) -> None:
        idx = len(self.cfg.stmts)
        self.cfg.stmts.append(stmt)
        self.cfg.effects.append(self.effects(stmt) if self.effects else frozenset())
        self.cfg.stmt_block.append(block)
        self.cfg.blocks[block].stmts.append(idx)

    def lower(self, stmts: list[A.Stmt], cur: int | None) -> int | None:
        """Append *stmts* after block *cur*; returns the open block afterwards.

        ``None`` means control cannot fall out (the last path returned).  A
        statement following such a point starts a block with no predecessors.
        """
        for stmt in stmts:
            if cur is None:
                cur = self.new_block()
            if isinstance(stmt, A.Return):
                self.add(cur, stmt)
                cur = None
            elif isinstance(stmt, A.If):
                cur = self.lower_if(stmt, cur)
            elif isinstance(stmt, A.While):
                guard = self.new_block()
                self.edge(cur, guard, "fallthrough")
                self.add(guard, stmt)
                body = self.new_block()
                self.edge(guard, body, "branch-true")
                body_end = self.lower(stmt.body.stmts, body)
                if body_end is None:
                    # keep exactly one back edge per loop; the source is unreachable
                    body_end = self.new_block()
                self.edge(body_end, guard, "loop-back")
                cur = self.new_block()
                self.edge(guard, cur, "branch-false")
            else:
                self.add(cur, stmt)
        return cur

    def lower_if(self, stmt: A.If, cur: int) -> int | None:
        self.add(cur, stmt)
        then_b = self.new_block()
        self.edge(cur, then_b, "branch-true")
        ends = [self.lower(stmt.then.stmts, then_b)]
        if stmt.else_ is None:
            ends.append(cur)
            kinds = ["fallthrough", "branch-false"]
        else:
            else_b = self.new_block()
            self.edge(cur, else_b, "branch-false")
            if isinstance(stmt.else_, A.If):
                ends.append(self.lower_if(stmt.else_, else_b))
            else:
                ends.append(self.lower(stmt.else_.stmts, else_b))
            kinds = ["fallthrough", "fallthrough"]
        live = [(e, k) for e, k in zip(ends, kinds) if e is not None]
        if not live:
            return None
        join = self.new_block()
        for end, kind in live:
            self.edge(end, join, kind)
        return join


def build_cfg(function: A.FunctionDecl, effects: Callable[[A.Stmt], frozenset] | None = None) -> Cfg:
    """Build the CFG of *function*.

    *effects* maps a statement to its effect set; the semantic model passes
    one bound to the function's scope and the active configuration.
    """
    b = _Builder(effects)
    entry = b.new_block()
    b.lower(function.body.stmts if function.body else [], entry)
    b.cfg.entry = entry
    return b.cfg


def reachable_set(cfg: Cfg) -> set[int]:
    """Blocks reachable from the entry block (forward closure over all edges)."""
    succ = cfg.succ_map()
    seen = {cfg.entry}
    queue = deque([cfg.entry])
    while queue:
        for nxt in succ[queue.popleft()]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen
