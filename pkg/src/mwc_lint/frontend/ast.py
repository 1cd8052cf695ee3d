"""AST for the MoveEVM-lite grammar.

Every node carries a :class:`Span`.  Spans are excluded from equality so two
trees compare equal when they are structurally identical, which is what the
print/re-parse round trip relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    column: int
    length: int = 0
    offset: int = 0

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1:
            raise ValueError(f"invalid span position {self.line}:{self.column}")


NO_SPAN = Span("<none>", 1, 1)


def _span():
    return field(default=NO_SPAN, compare=False, repr=False, kw_only=True)


# types


@dataclass
class TypeRef:
    name: str
    args: list["TypeRef"] = field(default_factory=list)
    ref: str = ""  # "", "&" or "&mut"
    span: Span = _span()


@dataclass
class TupleType:
    items: list["TypeNode"] = field(default_factory=list)
    span: Span = _span()


TypeNode = Union[TypeRef, TupleType]


# expressions


@dataclass
class IntLit:
    value: int
    suffix: str | None = None
    text: str = field(default="", compare=False)
    span: Span = _span()


@dataclass
class BoolLit:
    value: bool
    span: Span = _span()


@dataclass
class StrLit:
    text: str  # raw token text including quotes and any b/x prefix
    span: Span = _span()


@dataclass
class AddressLit:
    text: str  # e.g. "0x1"
    span: Span = _span()


@dataclass
class Name:
    name: str
    span: Span = _span()


@dataclass
class FieldAccess:
    obj: "Expr"
    field: str
    span: Span = _span()


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span = _span()


@dataclass
class Unary:
    op: str  # "!", "-", "&", "&mut", "*"
    operand: "Expr"
    span: Span = _span()


@dataclass
class Call:
    path: list[str]
    args: list["Expr"] = field(default_factory=list)
    type_args: list[TypeNode] = field(default_factory=list)
    span: Span = _span()

    @property
    def callee(self) -> str:
        return "::".join(self.path)

    @property
    def name(self) -> str:
        return self.path[-1]


@dataclass
class VectorLit:
    items: list["Expr"] = field(default_factory=list)
    type_args: list[TypeNode] = field(default_factory=list)
    span: Span = _span()


@dataclass
class StructLit:
    name: str
    fields: list[tuple[str, "Expr"]] = field(default_factory=list)
    span: Span = _span()


Expr = Union[IntLit, BoolLit, StrLit, AddressLit, Name, FieldAccess, Binary, Unary, Call, VectorLit, StructLit]


# statements


@dataclass
class Block:
    stmts: list["Stmt"] = field(default_factory=list)
    span: Span = _span()


@dataclass
class Let:
    name: str
    value: Expr | None = None
    mutable: bool = False
    type: TypeNode | None = None
    span: Span = _span()


@dataclass
class Assign:
    target: Expr  # Name or FieldAccess
    value: Expr
    span: Span = _span()


@dataclass
class If:
    cond: Expr
    then: Block
    else_: Union[Block, "If", None] = None
    span: Span = _span()


@dataclass
class While:
    cond: Expr
    body: Block
    span: Span = _span()


@dataclass
class Return:
    value: Expr | None = None
    span: Span = _span()


@dataclass
class ExprStmt:
    expr: Expr
    span: Span = _span()


@dataclass
class Assert:
    cond: Expr
    code: Expr | None = None
    span: Span = _span()


@dataclass
class Emit:
    event: str
    args: list[Expr] = field(default_factory=list)
    span: Span = _span()


Stmt = Union[Let, Assign, If, While, Return, ExprStmt, Assert, Emit]


# declarations


@dataclass
class UseDecl:
    path: list[str]
    wildcard: bool = False
    alias: str | None = None
    span: Span = _span()


@dataclass
class TypeParam:
    name: str
    constraints: list[str] = field(default_factory=list)
    span: Span = _span()


@dataclass
class FieldDecl:
    name: str
    type: TypeNode
    span: Span = _span()


@dataclass
class StructDecl:
    name: str
    abilities: list[str] = field(default_factory=list)
    fields: list[FieldDecl] = field(default_factory=list)
    type_params: list[TypeParam] = field(default_factory=list)
    span: Span = _span()


@dataclass
class ConstDecl:
    name: str
    type: TypeNode
    value: Expr
    span: Span = _span()


@dataclass
class Param:
    name: str
    type: TypeNode
    span: Span = _span()


TOPLEVEL_FN = "__toplevel__"


@dataclass
class FunctionDecl:
    name: str
    visibility: str = "private"  # public, private, entry, fallback
    params: list[Param] = field(default_factory=list)
    return_type: TypeNode | None = None
    body: Block | None = None
    type_params: list[TypeParam] = field(default_factory=list)
    entry: bool = False
    acquires: list[str] = field(default_factory=list)
    span: Span = _span()

    @property
    def implicit(self) -> bool:
        """True for the wrapper holding bare top-level statements."""
        return self.name == TOPLEVEL_FN


@dataclass
class ModuleDecl:
    name: str | None  # None for items written outside any module
    address: str | None = None
    uses: list[UseDecl] = field(default_factory=list)
    consts: list[ConstDecl] = field(default_factory=list)
    structs: list[StructDecl] = field(default_factory=list)
    functions: list[FunctionDecl] = field(default_factory=list)
    span: Span = _span()

    @property
    def implicit(self) -> bool:
        return self.name is None


@dataclass
class Ast:
    modules: list[ModuleDecl] = field(default_factory=list)
    file: str = field(default="<input>", compare=False)


# traversal helpers


def iter_exprs(node) -> Iterator[Expr]:
    """Yield *node* and every expression nested inside it (pre-order)."""
    if node is None:
        return
    if isinstance(node, list):
        for item in node:
            yield from iter_exprs(item)
        return
    yield node
    if isinstance(node, FieldAccess):
        yield from iter_exprs(node.obj)
    elif isinstance(node, Binary):
        yield from iter_exprs(node.left)
        yield from iter_exprs(node.right)
    elif isinstance(node, Unary):
        yield from iter_exprs(node.operand)
    elif isinstance(node, (Call, VectorLit)):
        yield from iter_exprs(node.args if isinstance(node, Call) else node.items)
    elif isinstance(node, StructLit):
        for _, value in node.fields:
            yield from iter_exprs(value)


def stmt_exprs(stmt: Stmt) -> list[Expr]:
    """Top-level expressions owned directly by *stmt* (not by nested blocks)."""
    if isinstance(stmt, Let):
        return [stmt.value] if stmt.value is not None else []
    if isinstance(stmt, Assign):
        return [stmt.target, stmt.value]
    if isinstance(stmt, (If, While)):
        return [stmt.cond]
    if isinstance(stmt, Return):
        return [stmt.value] if stmt.value is not None else []
    if isinstance(stmt, ExprStmt):
        return [stmt.expr]
    if isinstance(stmt, Assert):
        return [stmt.cond] + ([stmt.code] if stmt.code is not None else [])
    if isinstance(stmt, Emit):
        return list(stmt.args)
    return []


def calls_in(stmt: Stmt) -> list[Call]:
    return [e for x in stmt_exprs(stmt) for e in iter_exprs(x) if isinstance(e, Call)]


def walk_stmts(block: Block | None) -> Iterator[Stmt]:
    """All statements in *block*, nested ones included, in source order."""
    if block is None:
        return
    for stmt in block.stmts:
        yield stmt
        if isinstance(stmt, If):
            yield from walk_stmts(stmt.then)
            other = stmt.else_
            if isinstance(other, If):
                yield from walk_stmts(Block([other]))
            else:
                yield from walk_stmts(other)
        elif isinstance(stmt, While):
            yield from walk_stmts(stmt.body)


def names_in(expr) -> set[str]:
    return {e.name for e in iter_exprs(expr) if isinstance(e, Name)}


def root_name(expr: Expr) -> str | None:
    """``a.b.c`` -> ``a``; ``x`` -> ``x``."""
    while isinstance(expr, FieldAccess):
        expr = expr.obj
    return expr.name if isinstance(expr, Name) else None


def type_name(t: TypeNode | None) -> str | None:
    if isinstance(t, TypeRef):
        return t.name
    return None
