from __future__ import annotations

from . import ast as A
from .parser import BINARY_PRECEDENCE

_INDENT = "    "


def pretty_print(tree: A.Ast) -> str:
    """Render *tree* as source text that re-parses to an equal AST.

    Comments are not preserved.  Items of an implicit module are written at
    file level and the implicit ``__toplevel__`` function is written back as
    bare statements.
    """
    out: list[str] = []
    for mod in tree.modules:
        if mod.implicit:
            out.extend(_module_items(mod, 0))
        else:
            head = f"{mod.address}::{mod.name}" if mod.address else mod.name
            out.append(f"module {head} {{")
            out.extend(_module_items(mod, 1))
            out.append("}")
        out.append("")
    text = "\n".join(out).rstrip("\n")
    return text + "\n" if text else ""


def _module_items(mod: A.ModuleDecl, depth: int) -> list[str]:
    pad = _INDENT * depth
    lines: list[str] = []
    for use in mod.uses:
        path = "::".join(use.path) + ("::*" if use.wildcard else "")
        alias = f" as {use.alias}" if use.alias else ""
        lines.append(f"{pad}use {path}{alias};")
    for const in mod.consts:
        lines.append(f"{pad}const {const.name}: {type_str(const.type)} = {expr_str(const.value)};")
    for struct in mod.structs:
        lines.append(pad + _struct(struct))
    for fn in mod.functions:
        if fn.implicit:
            lines.extend(_stmts(fn.body.stmts if fn.body else [], depth))
        else:
            lines.extend(_function(fn, depth))
    return lines


def _type_params(params: list[A.TypeParam]) -> str:
    if not params:
        return ""
    parts = []
    for p in params:
        parts.append(p.name + (": " + " + ".join(p.constraints) if p.constraints else ""))
    return "<" + ", ".join(parts) + ">"


def _struct(s: A.StructDecl) -> str:
    head = f"struct {s.name}{_type_params(s.type_params)}"
    if s.abilities:
        head += " has " + ", ".join(s.abilities)
    fields = ", ".join(f"{f.name}: {type_str(f.type)}" for f in s.fields)
    return f"{head} {{ {fields} }}" if fields else f"{head} {{ }}"


def _function(fn: A.FunctionDecl, depth: int) -> list[str]:
    pad = _INDENT * depth
    mods = []
    if fn.visibility == "public":
        mods.append("public")
    if fn.entry or fn.visibility == "entry":
        mods.append("entry")
    if fn.visibility == "fallback":
        mods.append("fallback")
    params = ", ".join(f"{p.name}: {type_str(p.type)}" for p in fn.params)
    sig = " ".join(mods + ["fun"]) + f" {fn.name}{_type_params(fn.type_params)}({params})"
    if fn.return_type is not None:
        sig += f": {type_str(fn.return_type)}"
    if fn.acquires:
        sig += " acquires " + ", ".join(fn.acquires)
    if fn.body is None:
        return [f"{pad}{sig};"]
    return [f"{pad}{sig} {{", *_stmts(fn.body.stmts, depth + 1), f"{pad}}}"]


def _stmts(stmts: list[A.Stmt], depth: int) -> list[str]:
    lines: list[str] = []
    for s in stmts:
        lines.extend(_stmt(s, depth))
    return lines


def _stmt(s: A.Stmt, depth: int) -> list[str]:
    pad = _INDENT * depth
    if isinstance(s, A.Let):
        text = "let " + ("mut " if s.mutable else "") + s.name
        if s.type is not None:
            text += f": {type_str(s.type)}"
        if s.value is not None:
            text += f" = {expr_str(s.value)}"
        return [pad + text + ";"]
    if isinstance(s, A.Assign):
        return [f"{pad}{expr_str(s.target)} = {expr_str(s.value)};"]
    if isinstance(s, A.If):
        return _if(s, depth, pad)
    if isinstance(s, A.While):
        return [f"{pad}while ({expr_str(s.cond)}) {{", *_stmts(s.body.stmts, depth + 1), f"{pad}}}"]
    if isinstance(s, A.Return):
        return [pad + ("return;" if s.value is None else f"return {expr_str(s.value)};")]
    if isinstance(s, A.Assert):
        code = f", {expr_str(s.code)}" if s.code is not None else ""
        return [f"{pad}assert({expr_str(s.cond)}{code});"]
    if isinstance(s, A.Emit):
        return [f"{pad}emit {s.event}({', '.join(expr_str(a) for a in s.args)});"]
    if isinstance(s, A.ExprStmt):
        return [f"{pad}{expr_str(s.expr)};"]
    raise TypeError(f"not a statement: {s!r}")


def _if(s: A.If, depth: int, first_pad: str) -> list[str]:
    pad = _INDENT * depth
    lines = [f"{first_pad}if ({expr_str(s.cond)}) {{", *_stmts(s.then.stmts, depth + 1)]
    other = s.else_
    if other is None:
        lines.append(f"{pad}}}")
    elif isinstance(other, A.If):
        nested = _if(other, depth, "")
        lines.append(f"{pad}}} else {nested[0]}")
        lines.extend(nested[1:])
    else:
        lines.append(f"{pad}}} else {{")
        lines.extend(_stmts(other.stmts, depth + 1))
        lines.append(f"{pad}}}")
    return lines


def type_str(t: A.TypeNode) -> str:
    if isinstance(t, A.TupleType):
        inner = ", ".join(type_str(i) for i in t.items)
        return f"({inner},)" if len(t.items) == 1 else f"({inner})"
    ref = {"": "", "&": "&", "&mut": "&mut "}[t.ref]
    args = "<" + ", ".join(type_str(a) for a in t.args) + ">" if t.args else ""
    return f"{ref}{t.name}{args}"


def expr_str(e: A.Expr, parent_prec: int = 0, right: bool = False) -> str:
    if isinstance(e, A.IntLit):
        return e.text or (str(e.value) + (e.suffix or ""))
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.StrLit):
        return e.text
    if isinstance(e, A.AddressLit):
        return "@" + e.text
    if isinstance(e, A.Name):
        return e.name
    if isinstance(e, A.FieldAccess):
        return f"{_atom(e.obj)}.{e.field}"
    if isinstance(e, A.Binary):
        prec = BINARY_PRECEDENCE[e.op]
        # comparisons never chain without parentheses
        lp = prec + 1 if prec == 3 else prec
        text = f"{expr_str(e.left, lp)} {e.op} {expr_str(e.right, prec + 1, True)}"
        if prec < parent_prec:
            return f"({text})"
        return text
    if isinstance(e, A.Unary):
        op = "&mut " if e.op == "&mut" else e.op
        return op + _atom(e.operand)
    if isinstance(e, A.Call):
        targs = "<" + ", ".join(type_str(t) for t in e.type_args) + ">" if e.type_args else ""
        return f"{e.callee}{targs}({', '.join(expr_str(a) for a in e.args)})"
    if isinstance(e, A.VectorLit):
        items = ", ".join(expr_str(a) for a in e.items)
        if e.type_args:
            return f"vector<{', '.join(type_str(t) for t in e.type_args)}>[{items}]"
        return f"[{items}]"
    if isinstance(e, A.StructLit):
        fields = ", ".join(f"{n}: {expr_str(v)}" for n, v in e.fields)
        return f"{e.name} {{ {fields} }}"
    raise TypeError(f"not an expression: {e!r}")


def _atom(e: A.Expr) -> str:
    text = expr_str(e)
    if isinstance(e, (A.Binary, A.Unary)):
        return f"({text})"
    return text
