"""Lexer, parser and printer for the MoveEVM-lite source language."""

from .ast import Ast, Span
from .lexer import LexError, Token, tokenize
from .parser import ParseError, ParseErrorList, parse, parse_source
from .printer import pretty_print

__all__ = [
    "Ast",
    "LexError",
    "ParseError",
    "ParseErrorList",
    "Span",
    "Token",
    "parse",
    "parse_source",
    "pretty_print",
    "tokenize",
]
