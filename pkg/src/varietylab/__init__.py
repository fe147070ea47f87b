"""Variety, requisite-variety regulation and core/periphery analysis of set-based systems."""

__version__ = "0.1.0"

from .errors import VarietyLabError
from .variety import Distribution, VarietyMode, empirical_distribution, uniform_variety, variety

__all__ = [
    "Distribution",
    "VarietyLabError",
    "VarietyMode",
    "__version__",
    "empirical_distribution",
    "uniform_variety",
    "variety",
]
