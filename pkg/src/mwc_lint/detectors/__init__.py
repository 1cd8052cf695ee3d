"""Detector catalog, flow primitives and the rule engine."""

from .engine import DEFAULT_CATALOG, DetectorCatalog, Finding, UnsupportedRuleError, run_all, run_rule
from .flow import check_dominating_guard, lock_order_conflicts, loop_nontermination, order_of_effects
from .rules import CATALOG, DetectorEntry, RuleContext

__all__ = [
    "CATALOG",
    "DEFAULT_CATALOG",
    "DetectorCatalog",
    "DetectorEntry",
    "Finding",
    "RuleContext",
    "UnsupportedRuleError",
    "check_dominating_guard",
    "lock_order_conflicts",
    "loop_nontermination",
    "order_of_effects",
    "run_all",
    "run_rule",
]
