"""Analysis configuration: enabled rules, severities and naming conventions.

Config files are JSON documents whose keys mirror the :class:`Config`
fields.  Missing keys fall back to the defaults below; convention lists are
merged with (not replaced by) the defaults unless ``replace_conventions`` is
set.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

from .registry import SEVERITIES, UnknownRuleError, load_registry

ENV_VAR = "MWC_CONFIG"
FORMATS = ("json", "sarif", "md")

# Identifier conventions.  Each entry is a list of case-insensitive regular
# expressions searched against an identifier.
DEFAULT_CONVENTIONS: dict[str, list[str]] = {
    "freeze": ["frozen", "paused", "halted", "^locked$", "^is_locked$"],
    "supply": ["supply", "^total"],
    "nonce": ["nonce"],
    "domain": ["domain", "context", "ctx", "chain_id", "prefix", "separator"],
    "payload": ["payload", "^msg$", "message", "calldata", "^data$"],
    "wrap": ["^wrap"],
    "commit": ["commit", "reveal"],
    "callback": ["callback", "hook"],
    "capability": ["cap$", "capability", "^cap_"],
    "store": ["^store", "^save", "^put", "^insert"],
    "mutator": [
        "^(update|set|write|modify|withdraw|deposit|transfer|mint|burn|freeze|unfreeze"
        "|increment|decrement|credit|debit|remove|reset)(_|$)"
    ],
    "sender": ["sender", "address_of"],
    "role": ["role", "auth", "owner", "admin", "permission", "allowed"],
    "abi_decode": ["decode"],
    "resource_hint": ["resource"],
}

# Call classification: module-path prefixes (first path segment) per class.
DEFAULT_CALL_CLASSES: dict[str, list[str]] = {
    "evm": ["EVM"],
    "external": ["External", "EVM", "callback"],
    "crypto": ["crypto", "hash", "verify"],
    "oracle": ["Oracle"],
    "bridge": ["Bridge"],
    "lock": ["lock_.*"],
}


class ConfigError(Exception):
    pass


def _default_enabled() -> frozenset[str]:
    return frozenset(load_registry().detectable_ids())


@dataclass(frozen=True)
class Config:
    enabled_rules: frozenset[str] = field(default_factory=_default_enabled)
    severity_overrides: dict[str, str] = field(default_factory=dict)
    conventions: dict[str, list[str]] = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_CONVENTIONS.items()})
    call_classes: dict[str, list[str]] = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_CALL_CLASSES.items()})
    event_schemas: dict[str, int] = field(default_factory=dict)
    generic_error_codes: tuple[int, ...] = (0, 1)
    fail_on: str = "high"
    format: str = "json"
    review_pragmas: bool = True

    def __post_init__(self) -> None:
        registry = load_registry()
        for rid in sorted(self.enabled_rules):
            if rid not in registry:
                raise ConfigError(f"unknown rule id in enabled_rules: {rid}")
            if registry.lookup(rid).strategy == "advisory":
                raise ConfigError(f"{rid} is advisory and has no detector; use a review pragma instead")
        for rid, sev in self.severity_overrides.items():
            if rid not in registry:
                raise ConfigError(f"unknown rule id in severity_overrides: {rid}")
            if sev not in SEVERITIES:
                raise ConfigError(f"invalid severity {sev!r} for {rid}")
        if self.fail_on not in SEVERITIES:
            raise ConfigError(f"invalid fail_on severity {self.fail_on!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"invalid format {self.format!r}")
        for name, patterns in list(self.conventions.items()) + list(self.call_classes.items()):
            if not patterns:
                raise ConfigError(f"convention list {name!r} is empty")
            for p in patterns:
                try:
                    re.compile(p)
                except re.error as exc:
                    raise ConfigError(f"bad pattern {p!r} in {name!r}: {exc}") from None
        object.__setattr__(self, "_compiled", {
            name: [re.compile(p, re.IGNORECASE) for p in pats]
            for name, pats in self.conventions.items()
        })

    def matches(self, convention: str, ident: str | None) -> bool:
        """Does *ident* match the named convention?"""
        if not ident:
            return False
        return any(rx.search(ident) for rx in self._compiled.get(convention, ()))

    def severity_for(self, rule_id: str) -> str:
        if rule_id in self.severity_overrides:
            return self.severity_overrides[rule_id]
        return load_registry().lookup(rule_id).severity_default

    def with_rules(self, rules: frozenset[str]) -> "Config":
        return replace(self, enabled_rules=frozenset(rules))

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["enabled_rules"] = sorted(self.enabled_rules)
        d["generic_error_codes"] = list(self.generic_error_codes)
        return d


def config_from_dict(raw: dict[str, Any]) -> Config:
    known = {f for f in Config.__dataclass_fields__} | {"replace_conventions"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    kwargs: dict[str, Any] = {}
    registry = load_registry()
    if "enabled_rules" in raw:
        ids = []
        for rid in raw["enabled_rules"]:
            try:
                ids.append(registry.lookup(rid).id)
            except UnknownRuleError as exc:
                raise ConfigError(str(exc)) from None
        kwargs["enabled_rules"] = frozenset(ids)
    if "severity_overrides" in raw:
        kwargs["severity_overrides"] = dict(raw["severity_overrides"])
    for key, defaults in (("conventions", DEFAULT_CONVENTIONS), ("call_classes", DEFAULT_CALL_CLASSES)):
        merged = {k: list(v) for k, v in defaults.items()}
        for name, patterns in (raw.get(key) or {}).items():
            if raw.get("replace_conventions"):
                merged[name] = list(patterns)
            else:
                merged[name] = merged.get(name, []) + [p for p in patterns if p not in merged.get(name, [])]
        kwargs[key] = merged
    if "event_schemas" in raw:
        schemas = {}
        for name, fields in raw["event_schemas"].items():
            schemas[name] = len(fields) if isinstance(fields, list) else int(fields)
        kwargs["event_schemas"] = schemas
    if "generic_error_codes" in raw:
        kwargs["generic_error_codes"] = tuple(int(c) for c in raw["generic_error_codes"])
    for key in ("fail_on", "format", "review_pragmas"):
        if key in raw:
            kwargs[key] = raw[key]
    return Config(**kwargs)


def load_config(path: str | os.PathLike | None = None) -> Config:
    """Load a config file; falls back to ``$MWC_CONFIG`` and then to defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    if path is None:
        return Config()
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return config_from_dict(raw)


def default_config_document() -> str:
    return json.dumps(Config().to_dict(), indent=2, sort_keys=True) + "\n"
