"""Variety (Shannon entropy, in bits) of finite element collections."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import VarietyLabError

Weight = Union[float, Fraction]

SUM_TOLERANCE = 1e-9


class VarietyMode(str, Enum):
    UNIFORM = "uniform"
    EMPIRICAL = "empirical"


@dataclass(frozen=True)
class Distribution:
    elements: tuple[str, ...]
    probabilities: tuple[Weight, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "probabilities", tuple(self.probabilities))
        if not self.elements:
            raise VarietyLabError("empty-support", "distribution has no elements")
        if len(self.elements) != len(self.probabilities):
            raise VarietyLabError("invalid-distribution", "one probability per element required")
        if len(set(self.elements)) != len(self.elements):
            raise VarietyLabError("invalid-distribution", "element labels must be unique")
        if any(p < 0 for p in self.probabilities):
            raise VarietyLabError("invalid-distribution", "negative probability")
        total = sum(self.probabilities)
        if abs(float(total) - 1.0) > SUM_TOLERANCE:
            raise VarietyLabError("invalid-distribution", f"probabilities sum to {float(total)!r}")

    @classmethod
    def uniform(cls, labels: Iterable[str]) -> Distribution:
        labels = sorted(set(labels))
        if not labels:
            raise VarietyLabError("empty-support", "no labels")
        return cls(tuple(labels), tuple(Fraction(1, len(labels)) for _ in labels))

    def as_dict(self) -> dict[str, Weight]:
        return dict(zip(self.elements, self.probabilities))


def _entropy_bits(weights: Iterable[Weight]) -> float:
    total = 0.0
    for p in weights:
        p = float(p)
        if p > 0.0:
            total -= p * math.log2(p)
    # clamp the -0.0 / tiny negative rounding of a point mass
    return max(total, 0.0)


def variety(dist: Distribution) -> float:
    """Entropy of ``dist`` in bits, with 0 log 0 taken as 0."""
    return _entropy_bits(dist.probabilities)


def uniform_variety(labels: Iterable[str]) -> float:
    n = len(set(labels))
    if n == 0:
        raise VarietyLabError("empty-support", "variety of the empty set is undefined")
    return math.log2(n)


def empirical_distribution(counts: Mapping[str, int]) -> Distribution:
    """Normalize occurrence counts into an exact (rational) distribution.

    Zero-count labels are dropped; label order follows the mapping.
    """
    for label, c in counts.items():
        if isinstance(c, bool) or not isinstance(c, int) or c < 0:
            raise VarietyLabError("invalid-counts", f"count for {label!r} must be a non-negative integer")
    kept = [(label, c) for label, c in counts.items() if c > 0]
    if not kept:
        raise VarietyLabError("empty-support", "all counts are zero")
    total = sum(c for _, c in kept)
    return Distribution(tuple(k for k, _ in kept), tuple(Fraction(c, total) for _, c in kept))


def parts_variety(
    parts: Mapping[str, Iterable[str]],
    mode: VarietyMode = VarietyMode.UNIFORM,
    counts: Mapping[str, Mapping[str, int]] | None = None,
) -> float:
    """Variety of several component sets taken together.

    Elements are tagged by their component role before pooling, so an input
    and an output sharing a label stay distinct. An empty pool has variety 0.
    Empirical mode reads ``counts[role][label]``; a missing entry raises
    ``missing-counts``.
    """
    mode = VarietyMode(mode)
    tagged: list[tuple[str, str]] = [(role, e) for role in sorted(parts) for e in sorted(set(parts[role]))]
    if not tagged:
        return 0.0
    if mode is VarietyMode.UNIFORM:
        return math.log2(len(tagged))
    if counts is None:
        raise VarietyLabError("missing-counts", "empirical mode requires element counts")
    pooled: dict[str, int] = {}
    for role, e in tagged:
        try:
            pooled[f"{role}:{e}"] = counts[role][e]
        except KeyError:
            raise VarietyLabError("missing-counts", f"no count for {role} element {e!r}") from None
    if not any(pooled.values()):
        return 0.0
    return variety(empirical_distribution(pooled))


def distribution_from_weights(elements: Sequence[str], weights: Sequence[Weight] | None) -> Distribution:
    if weights is None:
        n = len(elements)
        if n == 0:
            raise VarietyLabError("empty-support", "no elements")
        return Distribution(tuple(elements), tuple(Fraction(1, n) for _ in elements))
    return Distribution(tuple(elements), tuple(weights))
