from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

from ..config import Config

STORAGE_PRIMITIVES = frozenset({"borrow_global", "borrow_global_mut", "move_to", "move_from", "exists"})
STORAGE_WRITES = frozenset({"move_to", "move_from"})
CALL_CLASSES = ("internal", "external", "crypto", "oracle", "bridge", "evm", "lock", "storage-primitive", "unknown")

# evm is checked before external so EVM::x is classed evm; both carry the external-call effect
_ORDER = ("crypto", "oracle", "bridge", "lock", "evm", "external")


@dataclass(frozen=True)
class CallClass:
    cls: str
    matched_rule: str
    evm: bool = False

    @property
    def is_external(self) -> bool:
        return self.cls in ("external", "evm")


@lru_cache(maxsize=64)
def _compiled(items: tuple[tuple[str, tuple[str, ...]], ...]) -> dict[str, list[re.Pattern]]:
    return {cls: [re.compile(p) for p in pats] for cls, pats in items}


def _patterns(config: Config) -> dict[str, list[re.Pattern]]:
    return _compiled(tuple(sorted((k, tuple(v)) for k, v in config.call_classes.items())))


def classify_call(callee_path: str | list[str], config: Config) -> CallClass:
    """Classify a callee by naming convention.

    Storage primitives are fixed.  Otherwise the first matching class in a
    fixed order wins; qualified paths are matched on their module segment,
    bare names (and lock calls) on the function name.
    """
    path = callee_path.split("::") if isinstance(callee_path, str) else list(callee_path)
    name = path[-1]
    qualified = len(path) > 1
    evm = any("evm" in seg.lower() for seg in path)
    if not qualified and name in STORAGE_PRIMITIVES:
        return CallClass("storage-primitive", f"builtin:{name}")
    pats = _patterns(config)
    for cls in _ORDER:
        for rx in pats.get(cls, ()):
            subject = name if (cls == "lock" or not qualified) else path[0]
            if rx.fullmatch(subject):
                return CallClass(cls, f"{cls}:{rx.pattern}", evm or cls == "evm")
    if not qualified:
        return CallClass("internal", "unqualified", evm)
    return CallClass("unknown", "unmatched", evm)


def lock_name(callee_path: str | list[str], config: Config) -> str | None:
    """``lock_a`` -> ``a`` when the callee is lock-class."""
    path = callee_path.split("::") if isinstance(callee_path, str) else list(callee_path)
    if classify_call(path, config).cls != "lock":
        return None
    name = path[-1]
    return name[5:] if name.startswith("lock_") else name
