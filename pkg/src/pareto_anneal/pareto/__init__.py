"""Dominance, non-dominated archives and hypervolume."""

from .archive import (
    FrontArchive,
    FrontPoint,
    InsertResult,
    dumps_front,
    front_records,
    load_front,
    parse_front,
    save_front,
)
from .dominance import dominates, mutual_nondomination_violations, nondominated_filter
from .hypervolume import figure_of_merit, hv_monte_carlo, hypervolume, reference_point

__all__ = [
    "FrontArchive",
    "FrontPoint",
    "InsertResult",
    "dominates",
    "dumps_front",
    "figure_of_merit",
    "front_records",
    "hv_monte_carlo",
    "hypervolume",
    "load_front",
    "mutual_nondomination_violations",
    "nondominated_filter",
    "parse_front",
    "reference_point",
    "save_front",
]
