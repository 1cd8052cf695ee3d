"""Recursive-descent parser for MoveEVM-lite.

The grammar is deliberately permissive: it accepts real Move constructs
(``borrow_global<T>``, ``has key``) alongside pseudo-Move forms such as
``returns (T)``, ``fallback fun`` and statements written outside of any
function.  Those bare statements are collected into an implicit
``__toplevel__`` function of the enclosing (possibly implicit) module.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ast as A
from .lexer import LexError, Token, tokenize

BINARY_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3, "<": 3, ">": 3, "<=": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5, "%": 5,
}

_ITEM_START = {"module", "use", "struct", "fun", "public", "entry", "fallback", "native", "const", "friend"}


@dataclass(frozen=True)
class ParseError:
    message: str
    span: A.Span
    expected: str = ""

    def __str__(self) -> str:
        hint = f" (expected {self.expected})" if self.expected else ""
        return f"{self.span.file}:{self.span.line}:{self.span.column}: {self.message}{hint}"


class ParseErrorList(Exception):
    def __init__(self, errors: list[ParseError]):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors))


class _Bail(Exception):
    pass


class Parser:
    def __init__(self, tokens: list[Token]):
        if not tokens or tokens[-1].kind != "eof":
            raise ValueError("token list must end with eof")
        self.toks = [t for t in tokens if t.kind != "comment"]
        self.pos = 0
        self.errors: list[ParseError] = []
        self.file = tokens[-1].span.file

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, text: str, kind: str | None = None) -> bool:
        t = self.tok
        return t.text == text and t.kind in ((kind,) if kind else ("keyword", "punctuation"))

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.advance()
        return None

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        if self.at(text):
            return self.advance()
        self.fail(f"unexpected {self._describe(self.tok)}", expected=f"'{text}'")

    def expect_ident(self, what: str = "identifier") -> Token:
        if self.tok.kind == "identifier":
            return self.advance()
        self.fail(f"unexpected {self._describe(self.tok)}", expected=what)

    def fail(self, message: str, expected: str = ""):
        self.errors.append(ParseError(message, self.tok.span, expected))
        raise _Bail()

    @staticmethod
    def _describe(t: Token) -> str:
        return "end of input" if t.kind == "eof" else f"{t.kind} '{t.text}'"

    def span_from(self, start: Token) -> A.Span:
        prev = self.toks[self.pos - 1] if self.pos > 0 else start
        end = max(prev.span.offset + prev.span.length, start.span.offset + start.span.length)
        s = start.span
        return A.Span(s.file, s.line, s.column, end - s.offset, s.offset)

    def recover(self) -> None:
        """Skip to just past the next ``;`` or up to the next ``}``."""
        depth = 0
        while self.tok.kind != "eof":
            if self.at("{"):
                depth += 1
            elif self.at("}"):
                if depth == 0:
                    return
                depth -= 1
                if depth == 0:
                    self.advance()
                    return
            elif self.at(";") and depth == 0:
                self.advance()
                return
            self.advance()

    # file / module level

    def parse_file(self) -> A.Ast:
        modules: list[A.ModuleDecl] = []
        implicit = _ModuleBuilder(None, None, self.tok)
        while self.tok.kind != "eof":
            start = self.pos
            try:
                if self.at("module"):
                    modules.append(self.parse_module())
                elif self.at("}"):
                    self.fail("unmatched '}'")
                else:
                    self.parse_module_item(implicit)
            except _Bail:
                self.recover()
                if self.at("}"):
                    self.advance()
            if self.pos == start:
                self.advance()
        if not implicit.empty():
            modules.insert(0, implicit.build())
        return A.Ast(modules, self.file)

    def parse_module(self) -> A.ModuleDecl:
        start = self.expect("module")
        address = None
        if self.peek().text == "::" and self.tok.kind in ("integer-literal", "identifier"):
            address = self.advance().text
            self.advance()
        name = self.expect_ident("module name").text
        builder = _ModuleBuilder(name, address, start)
        self.expect("{")
        while not self.at("}") and self.tok.kind != "eof":
            before = self.pos
            try:
                self.parse_module_item(builder)
            except _Bail:
                self.recover()
            if self.pos == before:
                self.advance()
        self.expect("}")
        return builder.build(self.span_from(start))

    def parse_module_item(self, mod: "_ModuleBuilder") -> None:
        t = self.tok
        if self.at("use"):
            mod.uses.append(self.parse_use())
        elif self.at("friend"):
            self.advance()
            while not self.at(";") and self.tok.kind != "eof":
                self.advance()
            self.expect(";")
        elif self.at("const"):
            mod.consts.append(self.parse_const())
        elif self.at("struct"):
            mod.structs.append(self.parse_struct())
        elif t.text in ("public", "entry", "fallback", "native", "fun") and t.kind == "keyword":
            mod.functions.append(self.parse_function())
        elif self._looks_like_signature():
            mod.functions.append(self.parse_signature())
        else:
            mod.add_bare(self.parse_stmt())

    def parse_use(self) -> A.UseDecl:
        start = self.expect("use")
        path = [self._path_segment()]
        wildcard = False
        while self.accept("::"):
            if self.accept("*"):
                wildcard = True
                break
            path.append(self._path_segment())
        alias = None
        if self.accept("as"):
            alias = self.expect_ident().text
        self.expect(";")
        return A.UseDecl(path, wildcard, alias, span=self.span_from(start))

    def _path_segment(self) -> str:
        if self.tok.kind in ("identifier", "integer-literal", "keyword"):
            return self.advance().text
        self.fail(f"unexpected {self._describe(self.tok)}", expected="path segment")

    def parse_const(self) -> A.ConstDecl:
        start = self.expect("const")
        name = self.expect_ident("constant name").text
        self.expect(":")
        ty = self.parse_type()
        self.expect("=")
        value = self.parse_expr()
        self.expect(";")
        return A.ConstDecl(name, ty, value, span=self.span_from(start))

    def parse_struct(self) -> A.StructDecl:
        start = self.expect("struct")
        name = self.expect_ident("struct name").text
        tparams = self.parse_type_params() if self.at("<", "punctuation") else []
        abilities: list[str] = []
        if self.accept("has"):
            abilities.append(self.expect_ident("ability").text)
            while self.accept(","):
                abilities.append(self.expect_ident("ability").text)
        fields: list[A.FieldDecl] = []
        if self.accept(";"):
            return A.StructDecl(name, abilities, fields, tparams, span=self.span_from(start))
        self.expect("{")
        while not self.at("}"):
            fstart = self.expect_ident("field name")
            self.expect(":")
            fty = self.parse_type()
            fields.append(A.FieldDecl(fstart.text, fty, span=self.span_from(fstart)))
            if not self.accept(","):
                break
        self.expect("}")
        return A.StructDecl(name, abilities, fields, tparams, span=self.span_from(start))

    def parse_type_params(self) -> list[A.TypeParam]:
        self.expect("<")
        params: list[A.TypeParam] = []
        while True:
            pstart = self.expect_ident("type parameter")
            constraints: list[str] = []
            if self.accept(":"):
                constraints.append(self.expect_ident("ability").text)
                while self.accept("+"):
                    constraints.append(self.expect_ident("ability").text)
            params.append(A.TypeParam(pstart.text, constraints, span=self.span_from(pstart)))
            if not self.accept(","):
                break
        self.expect(">")
        return params

    def parse_function(self) -> A.FunctionDecl:
        start = self.tok
        public = entry = fallback = False
        while True:
            if self.accept("public"):
                public = True
                if self.at("("):
                    self.advance()
                    self._path_segment()
                    self.expect(")")
            elif self.accept("entry"):
                entry = True
            elif self.accept("fallback"):
                fallback = True
            elif self.accept("native"):
                pass
            else:
                break
        self.expect("fun")
        if fallback:
            visibility = "fallback"
        elif public:
            visibility = "public"
        elif entry:
            visibility = "entry"
        else:
            visibility = "private"
        return self._function_rest(start, visibility, entry)

    def parse_signature(self) -> A.FunctionDecl:
        return self._function_rest(self.tok, "private", False)

    def _function_rest(self, start: Token, visibility: str, entry: bool) -> A.FunctionDecl:
        name = self.expect_ident("function name").text
        tparams = self.parse_type_params() if self.at("<", "punctuation") else []
        self.expect("(")
        params: list[A.Param] = []
        while not self.at(")"):
            pstart = self.expect_ident("parameter name")
            self.expect(":")
            ptype = self.parse_type()
            params.append(A.Param(pstart.text, ptype, span=self.span_from(pstart)))
            if not self.accept(","):
                break
        self.expect(")")
        ret = None
        if self.accept(":"):
            ret = self.parse_type()
        elif self.accept("returns"):
            ret = self.parse_type()
        acquires: list[str] = []
        if self.accept("acquires"):
            acquires.append(self.expect_ident("resource name").text)
            while self.accept(","):
                acquires.append(self.expect_ident("resource name").text)
        body = None
        if not self.accept(";"):
            body = self.parse_block()
        return A.FunctionDecl(
            name,
            visibility,
            params,
            ret,
            body,
            tparams,
            entry,
            acquires,
            span=self.span_from(start),
        )

    def _looks_like_signature(self) -> bool:
        """``name<T>(x: T);`` written without ``fun`` declares a bodiless function."""
        if self.tok.kind != "identifier":
            return False
        i = self.pos + 1
        if self.toks[i].text == "<":
            depth = 0
            while i < len(self.toks):
                text = self.toks[i].text
                if text == "<":
                    depth += 1
                elif text == ">":
                    depth -= 1
                    if depth == 0:
                        break
                elif text in (";", "{", "}", "(", ")") or self.toks[i].kind == "eof":
                    return False
                i += 1
            i += 1
        if i + 2 >= len(self.toks) or self.toks[i].text != "(":
            return False
        return self.toks[i + 1].kind == "identifier" and self.toks[i + 2].text == ":"

    # types

    def parse_type(self) -> A.TypeNode:
        start = self.tok
        if self.accept("&"):
            ref = "&mut" if self.accept("mut") else "&"
            inner = self.parse_type()
            if isinstance(inner, A.TypeRef) and not inner.ref:
                return A.TypeRef(inner.name, inner.args, ref, span=self.span_from(start))
            self.fail("reference to non-simple type")
        if self.accept("("):
            items: list[A.TypeNode] = []
            trailing_comma = False
            while not self.at(")"):
                items.append(self.parse_type())
                trailing_comma = False
                if not self.accept(","):
                    break
                trailing_comma = True
            self.expect(")")
            if len(items) == 1 and not trailing_comma:
                return items[0]
            return A.TupleType(items, span=self.span_from(start))
        name = self._type_path()
        args: list[A.TypeNode] = []
        if self.at("<", "punctuation"):
            self.advance()
            while True:
                args.append(self.parse_type())
                if not self.accept(","):
                    break
            self.expect(">")
        return A.TypeRef(name, args, span=self.span_from(start))

    def _type_path(self) -> str:
        if self.tok.kind not in ("identifier", "integer-literal"):
            self.fail(f"unexpected {self._describe(self.tok)}", expected="type")
        parts = [self.advance().text]
        while self.at("::"):
            self.advance()
            parts.append(self._path_segment())
        return "::".join(parts)

    # statements

    def parse_block(self) -> A.Block:
        start = self.expect("{")
        stmts: list[A.Stmt] = []
        while not self.at("}") and self.tok.kind != "eof":
            before = self.pos
            try:
                stmts.append(self.parse_stmt())
            except _Bail:
                self.recover()
            if self.pos == before:
                self.advance()
        self.expect("}")
        return A.Block(stmts, span=self.span_from(start))

    def _end_stmt(self) -> None:
        if not self.accept(";") and not self.at("}"):
            self.fail(f"unexpected {self._describe(self.tok)}", expected="';'")

    def parse_stmt(self) -> A.Stmt:
        start = self.tok
        if self.accept("let"):
            mutable = bool(self.accept("mut"))
            name = self.expect_ident("variable name").text
            ty = None
            if self.accept(":"):
                ty = self.parse_type()
            value = None
            if self.accept("="):
                value = self.parse_expr()
            self._end_stmt()
            return A.Let(name, value, mutable, ty, span=self.span_from(start))
        if self.at("if"):
            stmt = self.parse_if()
            self.accept(";")
            return stmt
        if self.accept("while"):
            cond = self.parse_expr()
            body = self.parse_block()
            stmt = A.While(cond, body, span=self.span_from(start))
            self.accept(";")
            return stmt
        if self.accept("return"):
            value = None
            if not self.at(";") and not self.at("}"):
                value = self.parse_expr()
            self._end_stmt()
            return A.Return(value, span=self.span_from(start))
        if self.accept("assert"):
            self.accept("!")
            self.expect("(")
            cond = self.parse_expr()
            code = None
            if self.accept(","):
                code = self.parse_expr()
            self.expect(")")
            self._end_stmt()
            return A.Assert(cond, code, span=self.span_from(start))
        if self.accept("emit"):
            event = self._type_path()
            self.expect("(")
            args = self.parse_args(")")
            self._end_stmt()
            return A.Emit(event, args, span=self.span_from(start))
        expr = self.parse_expr()
        if self.accept("="):
            if not isinstance(expr, (A.Name, A.FieldAccess)):
                self.fail("invalid assignment target")
            value = self.parse_expr()
            self._end_stmt()
            return A.Assign(expr, value, span=self.span_from(start))
        self._end_stmt()
        return A.ExprStmt(expr, span=self.span_from(start))

    def parse_if(self) -> A.If:
        start = self.expect("if")
        cond = self.parse_expr()
        then = self.parse_block()
        other: A.Block | A.If | None = None
        if self.accept("else"):
            other = self.parse_if() if self.at("if") else self.parse_block()
        return A.If(cond, then, other, span=self.span_from(start))

    # expressions

    def parse_expr(self, min_prec: int = 1) -> A.Expr:
        start = self.tok
        left = self.parse_unary()
        while True:
            t = self.tok
            prec = BINARY_PRECEDENCE.get(t.text) if t.kind == "punctuation" else None
            if prec is None or prec < min_prec:
                return left
            self.advance()
            right = self.parse_expr(prec + 1)
            left = A.Binary(t.text, left, right, span=self.span_from(start))

    def parse_unary(self) -> A.Expr:
        start = self.tok
        if self.at("!") or self.at("-") or self.at("*"):
            op = self.advance().text
            return A.Unary(op, self.parse_unary(), span=self.span_from(start))
        if self.accept("&"):
            op = "&mut" if self.accept("mut") else "&"
            return A.Unary(op, self.parse_unary(), span=self.span_from(start))
        return self.parse_postfix()

    def parse_postfix(self) -> A.Expr:
        start = self.tok
        expr = self.parse_primary()
        while self.at("."):
            self.advance()
            name = self.expect_ident("field name").text
            expr = A.FieldAccess(expr, name, span=self.span_from(start))
        return expr

    def parse_args(self, close: str) -> list[A.Expr]:
        args: list[A.Expr] = []
        while not self.at(close):
            args.append(self.parse_expr())
            if not self.accept(","):
                break
        self.expect(close)
        return args

    def _try_type_args(self) -> list[A.TypeNode] | None:
        saved_pos, saved_errs = self.pos, len(self.errors)
        try:
            self.expect("<")
            args = [self.parse_type()]
            while self.accept(","):
                args.append(self.parse_type())
            self.expect(">")
            if self.at("(") or self.at("["):
                return args
        except _Bail:
            pass
        self.pos = saved_pos
        del self.errors[saved_errs:]
        return None

    def parse_primary(self) -> A.Expr:
        start = self.tok
        t = self.tok
        if t.kind == "integer-literal":
            self.advance()
            return _int_literal(t)
        if t.kind == "string-literal":
            self.advance()
            return A.StrLit(t.text, span=t.span)
        if self.at("true") or self.at("false"):
            self.advance()
            return A.BoolLit(t.text == "true", span=t.span)
        if self.accept("@"):
            if self.tok.kind not in ("integer-literal", "identifier"):
                self.fail(f"unexpected {self._describe(self.tok)}", expected="address")
            return A.AddressLit(self.advance().text, span=self.span_from(start))
        if self.accept("("):
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if self.accept("["):
            return A.VectorLit(self.parse_args("]"), span=self.span_from(start))
        if t.kind == "identifier":
            path = [self.advance().text]
            while self.at("::"):
                self.advance()
                if self.tok.kind not in ("identifier", "keyword"):
                    self.fail(f"unexpected {self._describe(self.tok)}", expected="path segment")
                path.append(self.advance().text)
            type_args: list[A.TypeNode] = []
            if self.at("<", "punctuation"):
                type_args = self._try_type_args() or []
            if path == ["vector"] and self.accept("["):
                return A.VectorLit(self.parse_args("]"), type_args, span=self.span_from(start))
            if self.accept("("):
                args = self.parse_args(")")
                return A.Call(path, args, type_args, span=self.span_from(start))
            if type_args:
                self.fail("type arguments without call")
            if (
                len(path) == 1
                and path[0][:1].isupper()
                and self.at("{")
                and self.peek().kind == "identifier"
                and self.peek(2).text == ":"
            ):
                return self.parse_struct_lit(path[0], start)
            return A.Name("::".join(path), span=self.span_from(start))
        self.fail(f"unexpected {self._describe(t)}", expected="expression")

    def parse_struct_lit(self, name: str, start: Token) -> A.StructLit:
        self.expect("{")
        fields: list[tuple[str, A.Expr]] = []
        while not self.at("}"):
            fname = self.expect_ident("field name").text
            self.expect(":")
            fields.append((fname, self.parse_expr()))
            if not self.accept(","):
                break
        self.expect("}")
        return A.StructLit(name, fields, span=self.span_from(start))


def _int_literal(t: Token) -> A.IntLit:
    text = t.text
    suffix = None
    for s in ("u128", "u256", "u16", "u32", "u64", "u8"):
        if text.endswith(s) and not text.lower().startswith("0x"):
            text, suffix = text[: -len(s)], s
            break
    digits = text.replace("_", "")
    value = int(digits, 16) if digits.lower().startswith("0x") else int(digits)
    return A.IntLit(value, suffix, t.text, span=t.span)


class _ModuleBuilder:
    def __init__(self, name: str | None, address: str | None, start: Token):
        self.name = name
        self.address = address
        self.start = start
        self.uses: list[A.UseDecl] = []
        self.consts: list[A.ConstDecl] = []
        self.structs: list[A.StructDecl] = []
        self.functions: list[A.FunctionDecl] = []
        self.bare: list[A.Stmt] = []
        self.bare_index: int | None = None

    def add_bare(self, stmt: A.Stmt) -> None:
        if self.bare_index is None:
            self.bare_index = len(self.functions)
        self.bare.append(stmt)

    def empty(self) -> bool:
        return not (self.uses or self.consts or self.structs or self.functions or self.bare)

    def build(self, span: A.Span | None = None) -> A.ModuleDecl:
        functions = list(self.functions)
        if self.bare:
            first = self.bare[0].span
            block = A.Block(self.bare, span=first)
            top = A.FunctionDecl(A.TOPLEVEL_FN, "public", body=block, span=first)
            functions.insert(self.bare_index, top)
        if span is None:
            spans = [
                n.span
                for n in (self.uses + self.consts + self.structs + functions)
                if n.span is not A.NO_SPAN
            ]
            span = min(spans, key=lambda s: s.offset) if spans else self.start.span
        return A.ModuleDecl(
            self.name,
            self.address,
            self.uses,
            self.consts,
            self.structs,
            functions,
            span=span,
        )


def parse(tokens: list[Token]) -> A.Ast:
    """Parse a token list; raises :class:`ParseErrorList` on any error."""
    p = Parser(tokens)
    result = p.parse_file()
    if p.errors:
        raise ParseErrorList(p.errors)
    return result


def parse_source(source: str, file: str = "<input>") -> A.Ast:
    try:
        tokens = tokenize(source, file)
    except LexError as exc:
        raise ParseErrorList([ParseError(str(exc).split(": ", 1)[-1], exc.span)]) from None
    return parse(tokens)
