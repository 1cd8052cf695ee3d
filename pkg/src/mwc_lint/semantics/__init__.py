"""Name resolution, call classification, effects and control-flow graphs."""

from .cfg import BasicBlock, Cfg, build_cfg, reachable_set
from .classify import CallClass, classify_call
from .effects import EFFECT_FLAGS, Scope, has_flag, statement_effects
from .model import FunctionInfo, ModuleInfo, SemanticError, SemanticModel, SourceFile, resolve

__all__ = [
    "BasicBlock",
    "CallClass",
    "Cfg",
    "EFFECT_FLAGS",
    "FunctionInfo",
    "ModuleInfo",
    "Scope",
    "SemanticError",
    "SemanticModel",
    "SourceFile",
    "build_cfg",
    "classify_call",
    "has_flag",
    "reachable_set",
    "resolve",
    "statement_effects",
]
