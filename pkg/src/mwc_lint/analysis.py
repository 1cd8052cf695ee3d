"""Glue from source files to a resolved semantic model."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import Config
from .frontend import ast as A
from .frontend.lexer import LexError, tokenize
from .frontend.parser import ParseError, ParseErrorList, parse
from .semantics.model import SemanticModel, SourceFile, resolve


@dataclass
class ParsedFile:
    source: SourceFile
    ast: A.Ast | None = None
    errors: list[ParseError] = field(default_factory=list)


def parse_file(path: str, text: str) -> ParsedFile:
    src = SourceFile(path, text)
    try:
        tokens = tokenize(text, path)
    except LexError as exc:
        return ParsedFile(src, None, [ParseError(str(exc).split(": ", 1)[-1], exc.span)])
    src.comments = [t for t in tokens if t.kind == "comment"]
    try:
        return ParsedFile(src, parse(tokens))
    except ParseErrorList as exc:
        return ParsedFile(src, None, exc.errors)


def parse_files(files: list[tuple[str, str]], workers: int = 1) -> list[ParsedFile]:
    """Parse ``(path, text)`` pairs; results keep the input order."""
    if workers <= 1 or len(files) <= 1:
        return [parse_file(p, t) for p, t in files]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda pt: parse_file(*pt), files))


def build_model(parsed: list[ParsedFile], config: Config | None = None) -> SemanticModel:
    good = [p for p in parsed if p.ast is not None]
    return resolve(
        [p.ast for p in good],
        config,
        sources={p.source.path: p.source for p in parsed},
        parse_error_count=sum(len(p.errors) for p in parsed),
    )


def analyze_source(text: str, path: str = "<input>", config: Config | None = None) -> SemanticModel:
    """Parse and resolve a single source text; raises on parse errors."""
    parsed = parse_file(path, text)
    if parsed.errors:
        raise ParseErrorList(parsed.errors)
    return build_model([parsed], config)


def collect_move_files(paths: list[str]) -> list[str]:
    """Expand directories into ``.move`` files, skipping hidden directories."""
    out: list[str] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            for f in sorted(p.rglob("*.move")):
                rel = f.relative_to(p)
                if any(part.startswith(".") for part in rel.parts[:-1]):
                    continue
                out.append(str(f))
        else:
            out.append(str(p))
    return out
