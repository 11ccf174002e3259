"""Exact fair-division workbench: fairness checks, exhaustive counting and constructive algorithms."""
from .core import Additive, Allocation, BudgetAdditive, Instance, MonotoneTable, parse_allocation, parse_instance
from .enumeration import count_satisfying, min_count_search
from .fairness import EF, EF1, EFX, EFX_PLUS, PO, WEF, WEFX, WWEFX, Property, alpha_wefx, check

__all__ = [
    "Additive", "Allocation", "BudgetAdditive", "Instance", "MonotoneTable",
    "parse_allocation", "parse_instance", "count_satisfying", "min_count_search",
    "EF", "EF1", "EFX", "EFX_PLUS", "PO", "WEF", "WEFX", "WWEFX", "Property", "alpha_wefx", "check",
]
