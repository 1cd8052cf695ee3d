"""Machine-readable MWC taxonomy: categories, frames and the SWC crosswalk.

The catalog is loaded from ``data/registry.json`` and validated on load.  A
loaded :class:`Registry` is immutable and may be shared between threads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Any, Iterable

PRIMARY_FRAMES = ("BMI", "IMI", "SRS", "MTS", "GSM", "FLA")
SUPPLEMENTARY_FRAMES = (
    "SUPP-FORMAL",
    "SUPP-TOOLING",
    "SUPP-HYBRID",
    "SUPP-CRYPTO",
    "SUPP-SIDEFX",
    "SUPP-BRIDGE",
)
FRAME_CODES = PRIMARY_FRAMES + SUPPLEMENTARY_FRAMES
STRATEGIES = ("syntactic", "flow", "advisory")
SEVERITIES = ("low", "medium", "high", "critical")

ID_PATTERN = re.compile(r"^MWC-(\d{3})([ab]?)$")
_MENTION = re.compile(r"MWC-(\d{3})(?:\s*(?:to|–|-)\s*(?:MWC-)?(\d{3}))?")


class RegistryError(Exception):
    """The checked-in registry document is inconsistent."""


class UnknownRuleError(LookupError):
    """An MWC identifier that does not name any category."""

    def __init__(self, ident: str, suggestions: Iterable[str] = ()):
        self.ident = ident
        self.suggestions = list(suggestions)
        hint = f"; nearest valid ids: {', '.join(self.suggestions)}" if self.suggestions else ""
        super().__init__(f"unknown MWC id {ident!r}{hint}")


def severity_rank(severity: str) -> int:
    return SEVERITIES.index(severity)


@dataclass(frozen=True)
class CategoryRecord:
    id: str
    title_taxonomy: str
    title_frame: str | None
    box_title: str
    description: str
    frame: str
    analysis_hint: str
    strategy: str
    severity_default: str
    fix_hint: str
    aliases: tuple[str, ...] = ()

    @property
    def number(self) -> int:
        return int(self.id[4:7])


@dataclass(frozen=True)
class Frame:
    code: str
    name: str
    member_ids: tuple[str, ...]

    @property
    def primary(self) -> bool:
        return self.code in PRIMARY_FRAMES


@dataclass(frozen=True)
class SwcCrosswalkEntry:
    aspect: str
    swc_side: str
    mwc_side: str
    direct_id_pairs: tuple[tuple[str, str], ...] = ()

    def mentioned_numbers(self) -> frozenset[int]:
        """MWC numbers named in ``mwc_side`` (ranges such as ``MWC-103–105`` expanded)."""
        found: set[int] = set()
        for m in _MENTION.finditer(self.mwc_side):
            lo = int(m.group(1))
            hi = int(m.group(2)) if m.group(2) else lo
            found.update(range(lo, hi + 1))
        return frozenset(found)


@dataclass(frozen=True)
class Registry:
    categories: tuple[CategoryRecord, ...]
    frames: tuple[Frame, ...]
    crosswalk: tuple[SwcCrosswalkEntry, ...]
    _by_id: dict[str, CategoryRecord] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        self._by_id.update({c.id: c for c in self.categories})

    # queries

    def ids(self) -> list[str]:
        return [c.id for c in self.categories]

    def numeric_ids(self) -> list[int]:
        return sorted({c.number for c in self.categories})

    def frame(self, code: str) -> Frame:
        for fr in self.frames:
            if fr.code == code:
                return fr
        raise KeyError(code)

    def by_strategy(self, strategy: str) -> list[CategoryRecord]:
        return [c for c in self.categories if c.strategy == strategy]

    def advisory_ids(self) -> frozenset[str]:
        return frozenset(c.id for c in self.categories if c.strategy == "advisory")

    def detectable_ids(self) -> list[str]:
        return [c.id for c in self.categories if c.strategy != "advisory"]

    def __contains__(self, ident: object) -> bool:
        return ident in self._by_id

    def resolve(self, ident: str) -> tuple[CategoryRecord, str | None]:
        """Return the record for *ident* and a disambiguation note, if any.

        ``MWC-120`` is shared by two example snippets; the unsuffixed id maps to
        ``MWC-120a`` and the note names the alternative.
        """
        m = ID_PATTERN.match(ident.strip())
        if not m:
            raise UnknownRuleError(ident, self._nearest_text(ident))
        ident = ident.strip()
        if ident in self._by_id:
            return self._by_id[ident], None
        if not m.group(2):
            variants = [c for c in self.categories if c.number == int(m.group(1))]
            if variants:
                first = variants[0]
                others = ", ".join(v.id for v in variants[1:])
                note = f"{ident} is ambiguous; using {first.id} ({first.box_title})"
                if others:
                    note += f"; see also {others}"
                return first, note
        raise UnknownRuleError(ident, self._nearest_number(int(m.group(1))))

    def lookup(self, ident: str) -> CategoryRecord:
        return self.resolve(ident)[0]

    def swc_crosswalk(self, mwc_id: str | None = None) -> list[SwcCrosswalkEntry]:
        if mwc_id is None:
            return list(self.crosswalk)
        record = self.lookup(mwc_id)
        out = []
        for entry in self.crosswalk:
            paired = any(
                m == record.id or (ID_PATTERN.match(m) and int(m[4:7]) == record.number)
                for _, m in entry.direct_id_pairs
            )
            if paired or record.number in entry.mentioned_numbers():
                out.append(entry)
        return out

    def _nearest_number(self, number: int, k: int = 3) -> list[str]:
        ranked = sorted(self.categories, key=lambda c: (abs(c.number - number), c.id))
        return [c.id for c in ranked[:k]]

    def _nearest_text(self, ident: str, k: int = 3) -> list[str]:
        import difflib

        return difflib.get_close_matches(ident.strip().upper(), self.ids(), n=k, cutoff=0.4)


def _build(doc: dict[str, Any]) -> Registry:
    categories: list[CategoryRecord] = []
    seen: set[str] = set()
    for raw in doc["categories"]:
        ident = raw.get("id", "<missing id>")
        if not ID_PATTERN.match(ident):
            raise RegistryError(f"malformed category id {ident!r}")
        if ident in seen:
            raise RegistryError(f"duplicate category id {ident}")
        seen.add(ident)
        if raw["frame"] not in FRAME_CODES:
            raise RegistryError(f"{ident}: unknown frame {raw['frame']!r}")
        if raw["strategy"] not in STRATEGIES:
            raise RegistryError(f"{ident}: unknown strategy {raw['strategy']!r}")
        if raw["severity_default"] not in SEVERITIES:
            raise RegistryError(f"{ident}: unknown severity {raw['severity_default']!r}")
        if not raw.get("box_title") and raw["strategy"] != "advisory":
            raise RegistryError(f"{ident}: detectable category without an example title")
        categories.append(
            CategoryRecord(
                id=ident,
                title_taxonomy=raw["title_taxonomy"],
                title_frame=raw.get("title_frame"),
                box_title=raw.get("box_title", ""),
                description=raw.get("description", ""),
                frame=raw["frame"],
                analysis_hint=raw["analysis_hint"],
                strategy=raw["strategy"],
                severity_default=raw["severity_default"],
                fix_hint=raw.get("fix_hint", ""),
                aliases=tuple(raw.get("aliases", ())),
            )
        )
    categories.sort(key=lambda c: c.id)

    frames: list[Frame] = []
    owner: dict[str, str] = {}
    for raw in doc["frames"]:
        code = raw["code"]
        if code not in FRAME_CODES:
            raise RegistryError(f"unknown frame code {code!r}")
        for member in raw["member_ids"]:
            if member not in seen:
                raise RegistryError(f"frame {code} lists unknown id {member}")
            if member in owner:
                raise RegistryError(f"{member} belongs to both {owner[member]} and {code}")
            owner[member] = code
        frames.append(Frame(code, raw["name"], tuple(raw["member_ids"])))
    for c in categories:
        if owner.get(c.id) != c.frame:
            raise RegistryError(f"{c.id}: frame field {c.frame} disagrees with frame listing")

    numbers = sorted({c.number for c in categories})
    if numbers != list(range(numbers[0], numbers[0] + len(numbers))):
        raise RegistryError("MWC numbering has gaps")

    crosswalk = tuple(
        SwcCrosswalkEntry(
            aspect=raw["aspect"],
            swc_side=raw["swc_side"],
            mwc_side=raw["mwc_side"],
            direct_id_pairs=tuple(tuple(p) for p in raw.get("direct_id_pairs") or ()),
        )
        for raw in doc["crosswalk"]
    )
    return Registry(tuple(categories), tuple(frames), crosswalk)


def load_registry_from(doc: dict[str, Any]) -> Registry:
    """Build a registry from an already-decoded document (used by integrity tests)."""
    return _build(doc)


@lru_cache(maxsize=1)
def load_registry() -> Registry:
    text = resources.files("mwc_lint").joinpath("data/registry.json").read_text(encoding="utf-8")
    return _build(json.loads(text))
