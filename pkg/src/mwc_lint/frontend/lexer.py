from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import Span

KEYWORDS = frozenset(
    {
        "module", "struct", "has", "fun", "public", "entry", "fallback", "native",
        "let", "mut", "if", "else", "while", "return", "use", "assert", "emit",
        "returns", "true", "false", "const", "acquires", "as", "friend",
    }
)

# longest match first
PUNCTUATION = (
    "::", "==", "!=", "<=", ">=", "&&", "||", "->",
    "{", "}", "(", ")", "[", "]", "<", ">", "=", ";", ":", ",", ".",
    "&", "|", "+", "-", "*", "/", "%", "!", "@", "^",
)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"(0x[0-9A-Fa-f_]+|[0-9][0-9_]*)(u8|u16|u32|u64|u128|u256)?")
_SPACE = re.compile(r"\s+")


@dataclass(frozen=True)
class Token:
    kind: str  # identifier, keyword, integer-literal, string-literal, punctuation, comment, eof
    text: str
    span: Span

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}, {self.span.line}:{self.span.column})"


class LexError(Exception):
    def __init__(self, message: str, span: Span):
        self.span = span
        super().__init__(f"{span.file}:{span.line}:{span.column}: {message}")


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    """Split *source* into tokens.

    Comments are kept as ``comment`` tokens.  Whitespace is the only text not
    covered by some token, so the input can be rebuilt from token offsets.
    """
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source)

    def span_at(start: int, end: int) -> Span:
        return Span(file, line, start - line_start + 1, end - start, start)

    while pos < n:
        m = _SPACE.match(source, pos)
        if m:
            chunk = m.group()
            newlines = chunk.count("\n")
            if newlines:
                line += newlines
                line_start = pos + chunk.rindex("\n") + 1
            pos = m.end()
            continue

        ch = source[pos]
        if source.startswith("//", pos):
            end = source.find("\n", pos)
            end = n if end == -1 else end
            tokens.append(Token("comment", source[pos:end], span_at(pos, end)))
            pos = end
            continue
        if source.startswith("/*", pos):
            end = source.find("*/", pos + 2)
            if end == -1:
                raise LexError("unterminated block comment", span_at(pos, n))
            end += 2
            tokens.append(Token("comment", source[pos:end], span_at(pos, end)))
            text = source[pos:end]
            if "\n" in text:
                line += text.count("\n")
                line_start = pos + text.rindex("\n") + 1
            pos = end
            continue

        if ch == '"' or (ch in "bx" and source.startswith('"', pos + 1)):
            start = pos
            i = pos + (1 if ch == '"' else 2)
            while i < n and source[i] != '"':
                if source[i] == "\\":
                    i += 1
                elif source[i] == "\n":
                    break
                i += 1
            if i >= n or source[i] != '"':
                raise LexError("unterminated string literal", span_at(start, min(i, n)))
            tokens.append(Token("string-literal", source[start : i + 1], span_at(start, i + 1)))
            pos = i + 1
            continue

        m = _IDENT.match(source, pos)
        if m:
            word = m.group()
            kind = "keyword" if word in KEYWORDS else "identifier"
            tokens.append(Token(kind, word, span_at(pos, m.end())))
            pos = m.end()
            continue

        m = _NUMBER.match(source, pos)
        if m:
            tokens.append(Token("integer-literal", m.group(), span_at(pos, m.end())))
            pos = m.end()
            continue

        for p in PUNCTUATION:
            if source.startswith(p, pos):
                tokens.append(Token("punctuation", p, span_at(pos, pos + len(p))))
                pos += len(p)
                break
        else:
            raise LexError(f"unexpected character {ch!r}", span_at(pos, pos + 1))

    tokens.append(Token("eof", "", Span(file, line, pos - line_start + 1, 0, pos)))
    return tokens
