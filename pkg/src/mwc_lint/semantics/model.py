"""Name resolution across parsed files."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import PurePath

from ..config import Config
from ..frontend import ast as A
from ..frontend.lexer import Token
from .cfg import Cfg, build_cfg
from .classify import CallClass, classify_call
from .effects import Scope, statement_effects


class SemanticError(Exception):
    def __init__(self, diagnostics: list[str]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(self.diagnostics))


@dataclass
class SourceFile:
    path: str
    text: str
    comments: list[Token] = field(default_factory=list)

    @cached_property
    def lines(self) -> list[str]:
        return self.text.splitlines()

    def line(self, n: int) -> str:
        return self.lines[n - 1] if 0 < n <= len(self.lines) else ""


@dataclass(eq=False)
class FunctionInfo:
    decl: A.FunctionDecl
    module: "ModuleInfo"
    config: Config

    @property
    def name(self) -> str:
        return self.decl.name

    @property
    def qualname(self) -> str:
        return f"{self.module.label}::{self.decl.name}"

    @property
    def file(self) -> str:
        return self.module.file

    @cached_property
    def scope(self) -> Scope:
        return Scope.for_function(self.decl, self.module.const_names)

    @cached_property
    def cfg(self) -> Cfg:
        scope, config = self.scope, self.config
        return build_cfg(self.decl, lambda s: statement_effects(s, scope, config))

    def effects_of(self, stmt: A.Stmt) -> frozenset:
        return self.cfg.effects[self.cfg.index_of(stmt)]


@dataclass(eq=False)
class ModuleInfo:
    decl: A.ModuleDecl
    file: str
    functions: dict[str, FunctionInfo] = field(default_factory=dict)
    structs: dict[str, A.StructDecl] = field(default_factory=dict)

    @property
    def key(self) -> tuple[str | None, str]:
        return (self.decl.address, self.label)

    @property
    def label(self) -> str:
        if self.decl.name is not None:
            return self.decl.name
        return f"<{PurePath(self.file).name}>"

    @cached_property
    def const_names(self) -> frozenset[str]:
        return frozenset(c.name for c in self.decl.consts)


@dataclass(frozen=True)
class CallEdge:
    caller: str
    callee: str
    target: str | None  # qualified name of the resolved declaration
    call_class: CallClass
    span: A.Span

    @property
    def external_unresolved(self) -> bool:
        return self.target is None


@dataclass
class SemanticModel:
    asts: list[A.Ast]
    config: Config
    sources: dict[str, SourceFile]
    module_infos: list[ModuleInfo]
    modules: dict[tuple[str | None, str], list[ModuleInfo]]
    struct_abilities: dict[str, frozenset[str]]
    module_addresses: dict[str, list[tuple[str, str, A.Span]]]
    call_graph: list[CallEdge]
    parse_error_count: int = 0

    @property
    def symbols(self) -> dict[str, Scope]:
        return {fn.qualname: fn.scope for fn in self.functions()}

    def functions(self) -> list[FunctionInfo]:
        return [fn for mod in self.module_infos for fn in mod.functions.values()]

    def abilities_of(self, module: ModuleInfo, type_name: str | None) -> frozenset[str] | None:
        """Abilities of a struct type as seen from *module*; None if undeclared."""
        if not type_name:
            return None
        if "::" not in type_name and type_name in module.structs:
            return frozenset(module.structs[type_name].abilities)
        short = type_name.split("::")[-1]
        for other in self.module_infos:
            if short in other.structs and ("::" not in type_name or type_name.split("::")[-2] == other.label):
                return frozenset(other.structs[short].abilities)
        return None

    def source(self, file: str) -> SourceFile | None:
        return self.sources.get(file)


def _resolve_target(call: A.Call, mod: ModuleInfo, by_name: dict[str, list[ModuleInfo]]) -> str | None:
    if len(call.path) == 1:
        fn = mod.functions.get(call.name)
        return fn.qualname if fn else None
    owner = call.path[-2]
    for candidate in by_name.get(owner, []):
        fn = candidate.functions.get(call.name)
        if fn:
            return fn.qualname
    return None


def resolve(
    asts: list[A.Ast],
    config: Config | None = None,
    sources: dict[str, SourceFile] | None = None,
    parse_error_count: int = 0,
) -> SemanticModel:
    """Bind names across *asts* and build the call graph.

    Module address collisions are recorded, not rejected; a function
    declared twice in one module is a :class:`SemanticError`.
    """
    config = config or Config()
    errors: list[str] = []
    infos: list[ModuleInfo] = []
    modules: dict[tuple[str | None, str], list[ModuleInfo]] = {}
    by_name: dict[str, list[ModuleInfo]] = {}
    abilities: dict[str, frozenset[str]] = {}
    addresses: dict[str, list[tuple[str, str, A.Span]]] = {}

    for tree in asts:
        for decl in tree.modules:
            info = ModuleInfo(decl, tree.file)
            for struct in decl.structs:
                info.structs.setdefault(struct.name, struct)
                abilities.setdefault(f"{info.label}::{struct.name}", frozenset(struct.abilities))
            for fn in decl.functions:
                if fn.name in info.functions:
                    first = info.functions[fn.name].decl.span
                    errors.append(
                        f"{fn.span.file}:{fn.span.line}:{fn.span.column}: duplicate function "
                        f"'{fn.name}' in module {info.label} (first declared at line {first.line})"
                    )
                    continue
                info.functions[fn.name] = FunctionInfo(fn, info, config)
            infos.append(info)
            modules.setdefault(info.key, []).append(info)
            by_name.setdefault(info.label, []).append(info)
            if decl.address is not None:
                addresses.setdefault(decl.address, []).append((tree.file, info.label, decl.span))

    if errors:
        raise SemanticError(errors)

    edges: list[CallEdge] = []
    for info in infos:
        for fn in info.functions.values():
            for stmt in A.walk_stmts(fn.decl.body):
                for call in A.calls_in(stmt):
                    edges.append(
                        CallEdge(
                            fn.qualname,
                            call.callee,
                            _resolve_target(call, info, by_name),
                            classify_call(call.path, config),
                            call.span,
                        )
                    )

    return SemanticModel(
        asts=list(asts),
        config=config,
        sources=dict(sources or {}),
        module_infos=infos,
        modules=modules,
        struct_abilities=abilities,
        module_addresses=addresses,
        call_graph=edges,
        parse_error_count=parse_error_count,
    )
