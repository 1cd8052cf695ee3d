import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwc_lint.frontend import ParseErrorList, parse_source, pretty_print, tokenize
from mwc_lint.frontend import ast as A
from mwc_lint.frontend.lexer import KEYWORDS, LexError


def kinds(src):
    return [(t.kind, t.text) for t in tokenize(src)]


def test_tokenize_let():
    assert kinds("let mut i = 0;") == [
        ("keyword", "let"), ("keyword", "mut"), ("identifier", "i"),
        ("punctuation", "="), ("integer-literal", "0"), ("punctuation", ";"), ("eof", ""),
    ]


def test_tokenize_spans():
    toks = tokenize("a\n  bb // c\n")
    assert [(t.span.line, t.span.column) for t in toks[:3]] == [(1, 1), (2, 3), (2, 6)]
    assert toks[2].kind == "comment"


def test_tokenize_suffixes_and_strings():
    assert kinds('42u8 0xFFu64 b"hi" x"00"')[:4] == [
        ("integer-literal", "42u8"), ("integer-literal", "0xFFu64"),
        ("string-literal", 'b"hi"'), ("string-literal", 'x"00"'),
    ]


def test_lex_errors():
    with pytest.raises(LexError):
        tokenize("let s = \"open")
    with pytest.raises(LexError):
        tokenize("/* never closed")
    with pytest.raises(LexError) as info:
        tokenize("a $ b")
    assert info.value.span.column == 3


@given(st.text(alphabet="ab_19 \n\t{}();:=<>!&|+-*/.,@\"x", max_size=60))
def test_tokens_cover_source(src):
    # every non-whitespace character belongs to exactly one token
    try:
        toks = tokenize(src)
    except LexError:
        return
    covered = bytearray(len(src))
    for t in toks:
        assert src[t.span.offset : t.span.offset + t.span.length] == t.text
        for i in range(t.span.offset, t.span.offset + t.span.length):
            covered[i] += 1
    for i, ch in enumerate(src):
        assert covered[i] <= 1
        if not ch.isspace():
            assert covered[i] == 1


def test_module_and_items():
    tree = parse_source("""
module 0x1::Counter {
    use Std::Vector;
    const MAX: u64 = 10;
    struct State has key, store { count: u64 }
    public fun inc(addr: address) acquires State {
        let s = borrow_global_mut<State>(addr);
        s.count = s.count + 1;
    }
}
""")
    (mod,) = tree.modules
    assert (mod.address, mod.name) == ("0x1", "Counter")
    assert mod.uses[0].path == ["Std", "Vector"]
    assert mod.structs[0].abilities == ["key", "store"]
    fn = mod.functions[0]
    assert fn.visibility == "public" and fn.acquires == ["State"]
    let = fn.body.stmts[0]
    assert isinstance(let.value, A.Call) and let.value.type_args == [A.TypeRef("State")]


def test_bare_statements_form_toplevel_function():
    tree = parse_source("let mut i = 0;\nwhile (i >= 0) {\n    i = i + 1;\n}\n")
    (mod,) = tree.modules
    assert mod.implicit
    (fn,) = mod.functions
    assert fn.implicit and fn.visibility == "public"
    assert isinstance(fn.body.stmts[1], A.While)


def test_signature_without_fun():
    tree = parse_source("store<T>(item: T);")
    fn = tree.modules[0].functions[0]
    assert fn.name == "store" and fn.body is None
    assert fn.type_params == [A.TypeParam("T")]


def test_generic_call_vs_comparison():
    tree = parse_source("fun f() { let a = x < y; let b = g<u64>(z); }")
    a, b = tree.modules[0].functions[0].body.stmts
    assert isinstance(a.value, A.Binary) and a.value.op == "<"
    assert isinstance(b.value, A.Call) and b.value.type_args == [A.TypeRef("u64")]


def test_precedence():
    e = parse_source("fun f() { x = a + b * c == d && e; }").modules[0].functions[0].body.stmts[0].value
    assert e.op == "&&"
    assert e.left.op == "==" and e.left.left.op == "+" and e.left.left.right.op == "*"


def test_returns_clause_and_tail_expression():
    fn = parse_source("public fun view() returns (Config) {\n    config\n}").modules[0].functions[0]
    assert fn.return_type == A.TypeRef("Config")
    assert fn.body.stmts == [A.ExprStmt(A.Name("config"))]


def test_parse_errors_are_collected():
    with pytest.raises(ParseErrorList) as info:
        parse_source("module M {\n fun f() { let = 1; }\n fun g() { x = ; }\n}")
    errs = info.value.errors
    assert len(errs) >= 2
    assert [e.span.line for e in errs][:2] == [2, 3]


def test_span_fidelity():
    src = "module M {\n    fun f(a: u64) {\n        assert(a > 0, 1);\n    }\n}\n"
    stmt = parse_source(src, "m.move").modules[0].functions[0].body.stmts[0]
    assert (stmt.span.file, stmt.span.line, stmt.span.column) == ("m.move", 3, 9)
    assert src[stmt.span.offset:].startswith("assert")


def test_round_trip_mixed():
    src = """
use Lib::*;
module 0x2::M {
    struct P<T: store> has key { v: vector<T> }
    fallback fun handle() { transfer(); }
    entry fun e(s: &signer, m: &mut P<u8>) {
        if (!exists<P<u8>>(@0x1)) { return; } else if (x) { y = [1, 2]; } else { emit Ev(1u8, true); }
        let t: u128 = (1 + 2) * 3;
        verify(k1, msg) && verify(k2, msg);
    }
}
"""
    tree = parse_source(src)
    again = parse_source(pretty_print(tree))
    assert again == tree
    assert pretty_print(again) == pretty_print(tree)


# generated programs

_NAME_POOL = ["a", "b", "x", "y", "total", "price", "lock_a", "owner", "k1", "msg", "value", "mut_x", "if_", "u8x"]
_names = st.sampled_from([n for n in _NAME_POOL if n not in KEYWORDS])


def _exprs():
    leaves = st.one_of(
        st.builds(lambda v: A.IntLit(v), st.integers(0, 10**6)),
        st.builds(lambda v, s: A.IntLit(v, s), st.integers(0, 255), st.sampled_from(["u8", "u64"])),
        st.builds(A.BoolLit, st.booleans()),
        st.builds(A.Name, _names),
    )

    def extend(inner):
        return st.one_of(
            st.builds(A.Binary, st.sampled_from(["+", "-", "*", "/", "%", "<", ">=", "==", "&&", "||"]), inner, inner),
            st.builds(A.Unary, st.just("!"), inner),
            st.builds(A.FieldAccess, st.builds(A.Name, _names), _names),
            st.builds(lambda p, a: A.Call(p, a), st.lists(_names, min_size=1, max_size=2), st.lists(inner, max_size=3)),
        )

    return st.recursive(leaves, extend, max_leaves=8)


def _stmts():
    expr = EXPRS
    simple = st.one_of(
        st.builds(lambda n, v, m: A.Let(n, v, m), _names, expr, st.booleans()),
        st.builds(A.Assign, st.builds(A.Name, _names), expr),
        st.builds(A.Assert, expr, st.builds(lambda v: A.IntLit(v), st.integers(0, 99))),
        st.builds(A.Return, st.none() | expr),
        st.builds(lambda c: A.ExprStmt(c), st.builds(lambda p, a: A.Call(p, a), st.lists(_names, min_size=1, max_size=2), st.lists(expr, max_size=2))),
    )

    def extend(inner):
        block = st.builds(A.Block, st.lists(inner, max_size=3))
        return st.one_of(
            st.builds(A.If, expr, block, st.none() | block),
            st.builds(A.While, expr, block),
        )

    return st.recursive(simple, extend, max_leaves=6)


EXPRS = _exprs()
STMTS = _stmts()


@st.composite
def _programs(draw):
    fns = []
    for i in range(draw(st.integers(1, 3))):
        body = A.Block(draw(st.lists(STMTS, max_size=5)))
        params = [A.Param(n, A.TypeRef("u64")) for n in draw(st.lists(_names, max_size=2, unique=True))]
        fns.append(A.FunctionDecl(f"f{i}", draw(st.sampled_from(["public", "private"])), params, body=body))
    return A.Ast([A.ModuleDecl("M", functions=fns)])


@settings(max_examples=150, deadline=None)
@given(_programs())
def test_generated_round_trip(tree):
    text = pretty_print(tree)
    parsed = parse_source(text)
    assert parsed == tree
    assert parse_source(pretty_print(parsed)) == parsed
