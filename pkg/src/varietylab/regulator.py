"""Outcome tables, the requisite-variety lower bound and regulator policy synthesis.

An outcome table maps (disturbance, response) pairs to outcome labels. A
regulator policy is a deterministic total map from disturbances to
responses; it induces a distribution over outcomes whose variety the
regulator tries to minimize.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import VarietyLabError
from .variety import Distribution, distribution_from_weights, variety

DEFAULT_BUDGET = 10**7
TIE_DECIMALS = 12
BOUND_TOLERANCE = 1e-9
_CHUNK = 1 << 15


class TableClass(str, Enum):
    LATIN_SQUARE = "latin_square"
    INJECTIVE_PER_RESPONSE = "injective_per_response"
    GENERAL = "general"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class OutcomeTable:
    disturbances: tuple[str, ...]
    responses: tuple[str, ...]
    outcomes: tuple[tuple[str, ...], ...]
    disturbance_dist: Distribution

    def __post_init__(self) -> None:
        object.__setattr__(self, "disturbances", tuple(self.disturbances))
        object.__setattr__(self, "responses", tuple(self.responses))
        object.__setattr__(self, "outcomes", tuple(tuple(row) for row in self.outcomes))
        if not self.disturbances or not self.responses:
            raise VarietyLabError("invalid-table", "need at least one disturbance and one response")
        if len(set(self.disturbances)) != len(self.disturbances):
            raise VarietyLabError("invalid-table", "disturbance labels must be unique")
        if len(set(self.responses)) != len(self.responses):
            raise VarietyLabError("invalid-table", "response labels must be unique")
        if len(self.outcomes) != len(self.disturbances) or any(
            len(row) != len(self.responses) for row in self.outcomes
        ):
            raise VarietyLabError("invalid-table", "outcome matrix must be |disturbances| x |responses|")
        if any(not isinstance(z, str) for row in self.outcomes for z in row):
            raise VarietyLabError("invalid-table", "outcome labels must be text")
        if self.disturbance_dist.elements != self.disturbances:
            raise VarietyLabError("invalid-table", "disturbance distribution must cover exactly the disturbances, in order")

    @classmethod
    def build(
        cls,
        disturbances: Sequence[str],
        responses: Sequence[str],
        outcomes: Sequence[Sequence[str]],
        p_disturbance: Sequence[float] | None = None,
    ) -> OutcomeTable:
        dist = distribution_from_weights(tuple(disturbances), p_disturbance)
        return cls(tuple(disturbances), tuple(responses), tuple(tuple(r) for r in outcomes), dist)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.disturbances), len(self.responses)

    def outcome(self, d: str, r: str) -> str:
        return self.outcomes[self.disturbances.index(d)][self.responses.index(r)]

    def outcome_labels(self) -> list[str]:
        """Distinct outcome labels in row-major order of first appearance."""
        return list(dict.fromkeys(z for row in self.outcomes for z in row))

    def to_json(self) -> dict:
        return {
            "disturbances": list(self.disturbances),
            "responses": list(self.responses),
            "outcomes": [list(row) for row in self.outcomes],
            "p_disturbance": [float(p) for p in self.disturbance_dist.probabilities],
        }


def table_from_json(doc: Mapping) -> OutcomeTable:
    try:
        return OutcomeTable.build(
            [str(d) for d in doc["disturbances"]],
            [str(r) for r in doc["responses"]],
            [[str(z) for z in row] for row in doc["outcomes"]],
            doc.get("p_disturbance"),
        )
    except (KeyError, TypeError) as exc:
        raise VarietyLabError("invalid-table", f"bad outcome-table document ({exc})") from None


def load_table(path: str) -> OutcomeTable:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise VarietyLabError("malformed", f"{path}: {exc.msg}") from None
    return table_from_json(doc)


def modular_table(n_disturbances: int, n_responses: int, modulus: int | None = None) -> OutcomeTable:
    """T(d, r) = (d - r) mod m over integer labels, uniform disturbances."""
    m = n_disturbances if modulus is None else modulus
    ds = [str(d) for d in range(n_disturbances)]
    rs = [str(r) for r in range(n_responses)]
    rows = [[str((d - r) % m) for r in range(n_responses)] for d in range(n_disturbances)]
    return OutcomeTable.build(ds, rs, rows)


@dataclass(frozen=True)
class RegulatorPolicy:
    mapping: Mapping[str, str]

    @classmethod
    def from_indices(cls, table: OutcomeTable, indices: Sequence[int]) -> RegulatorPolicy:
        return cls({d: table.responses[i] for d, i in zip(table.disturbances, indices)})

    def validate(self, table: OutcomeTable) -> None:
        if set(self.mapping) != set(table.disturbances):
            raise VarietyLabError("invalid-policy", "policy must map every disturbance and nothing else")
        bad = [r for r in self.mapping.values() if r not in table.responses]
        if bad:
            raise VarietyLabError("invalid-policy", f"unknown responses {sorted(set(bad))}")

    def indices(self, table: OutcomeTable) -> tuple[int, ...]:
        return tuple(table.responses.index(self.mapping[d]) for d in table.disturbances)

    def as_dict(self, table: OutcomeTable | None = None) -> dict[str, str]:
        order = table.disturbances if table is not None else sorted(self.mapping)
        return {d: self.mapping[d] for d in order}


@dataclass(frozen=True)
class BoundReport:
    lower_bound_bits: float
    achieved_min_bits: float
    optimal_policy: RegulatorPolicy
    table_class: TableClass
    bound_applicable: bool
    input_variety_bits: float
    response_variety_bits: float
    # None when the bound is not asserted for this table class
    holds: bool | None


def outcome_distribution(table: OutcomeTable, policy: RegulatorPolicy) -> Distribution:
    policy.validate(table)
    mass: dict[str, float] = defaultdict(float)
    for d, p in zip(table.disturbances, table.disturbance_dist.probabilities):
        mass[table.outcome(d, policy.mapping[d])] += p
    labels = [z for z in table.outcome_labels() if z in mass]
    return Distribution(tuple(labels), tuple(mass[z] for z in labels))


def policy_variety(table: OutcomeTable, policy: RegulatorPolicy) -> float:
    return variety(outcome_distribution(table, policy))


def lrv_lower_bound(table: OutcomeTable) -> float:
    """max{V(disturbances) - log2 |responses|, 0}."""
    return max(variety(table.disturbance_dist) - math.log2(len(table.responses)), 0.0)


def _encoded(table: OutcomeTable) -> tuple[np.ndarray, np.ndarray, int]:
    labels = {z: i for i, z in enumerate(table.outcome_labels())}
    codes = np.array([[labels[z] for z in row] for row in table.outcomes], dtype=np.int64)
    probs = np.array([float(p) for p in table.disturbance_dist.probabilities], dtype=np.float64)
    return codes, probs, len(labels)


def _entropy_rows(mass: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(mass > 0.0, mass * np.log2(np.where(mass > 0.0, mass, 1.0)), 0.0)
    return -terms.sum(axis=1)


def min_outcome_variety_bruteforce(
    table: OutcomeTable, budget: int = DEFAULT_BUDGET
) -> tuple[RegulatorPolicy, float]:
    """Exact minimum outcome variety over every deterministic policy.

    Policies are enumerated in lexicographic order of response indices (first
    disturbance most significant). Among policies whose variety agrees to 12
    decimals, the lexicographically smallest wins.
    """
    n_d, n_r = table.shape
    total = n_r**n_d
    if total > budget:
        raise VarietyLabError("search-budget", f"{n_r}^{n_d} = {total} policies exceeds budget {budget}")
    codes, probs, n_z = _encoded(table)
    # place value of each disturbance's response digit
    weights = n_r ** np.arange(n_d - 1, -1, -1, dtype=np.int64)
    best_key: tuple[float, int] | None = None
    for start in range(0, total, _CHUNK):
        ranks = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (ranks[:, None] // weights[None, :]) % n_r
        zs = codes[np.arange(n_d)[None, :], digits]
        mass = np.zeros((len(ranks), n_z))
        rows = np.arange(len(ranks))
        for d in range(n_d):
            np.add.at(mass, (rows, zs[:, d]), probs[d])
        bits = np.round(_entropy_rows(mass), TIE_DECIMALS)
        i = int(np.argmin(bits))
        key = (float(bits[i]), int(ranks[i]))
        if best_key is None or key < best_key:
            best_key = key
    assert best_key is not None
    rank = best_key[1]
    indices = [(rank // int(w)) % n_r for w in weights]
    policy = RegulatorPolicy.from_indices(table, indices)
    return policy, policy_variety(table, policy)


def greedy_policy(table: OutcomeTable) -> tuple[RegulatorPolicy, float]:
    """Hill-climbing policy search for tables too large to enumerate.

    Starts by steering every disturbance toward the outcome with the largest
    reachable probability mass, then applies the single-disturbance
    reassignment with the biggest variety decrease until none helps.
    """
    dist = table.disturbance_dist.as_dict()
    reach: dict[str, float] = defaultdict(float)
    for d, row in zip(table.disturbances, table.outcomes):
        for z in dict.fromkeys(row):
            reach[z] += float(dist[d])
    target = max(table.outcome_labels(), key=lambda z: reach[z])  # first label wins ties
    current = []
    for row in table.outcomes:
        current.append(row.index(target) if target in row else 0)

    def score(idx: Sequence[int]) -> float:
        return policy_variety(table, RegulatorPolicy.from_indices(table, idx))

    bits = score(current)
    n_d, n_r = table.shape
    while True:
        best_move, best_bits = None, bits
        for d in range(n_d):
            for r in range(n_r):
                if r == current[d]:
                    continue
                trial = current.copy()
                trial[d] = r
                b = score(trial)
                if b < best_bits - 1e-12:
                    best_move, best_bits = (d, r), b
        if best_move is None:
            break
        current[best_move[0]] = best_move[1]
        bits = best_bits
    return RegulatorPolicy.from_indices(table, current), bits


def table_class(table: OutcomeTable) -> TableClass:
    n_d, n_r = table.shape
    rows = table.outcomes
    cols = [tuple(row[j] for row in rows) for j in range(n_r)]
    if n_d == n_r:
        symbols = set(rows[0])
        if (
            len(symbols) == n_d
            and all(set(row) == symbols and len(set(row)) == n_r for row in rows)
            and all(set(col) == symbols and len(set(col)) == n_d for col in cols)
        ):
            return TableClass.LATIN_SQUARE
    if all(len(set(col)) == n_d for col in cols):
        return TableClass.INJECTIVE_PER_RESPONSE
    if n_d > 1 and any(len(set(col)) == 1 for col in cols):
        return TableClass.DEGENERATE
    return TableClass.GENERAL


def verify_bound(table: OutcomeTable, budget: int = DEFAULT_BUDGET) -> BoundReport:
    """Compare the brute-force optimum with the requisite-variety bound.

    The bound is only asserted where it is a theorem (columns injective in the
    disturbance); otherwise both numbers are reported as-is.
    """
    policy, achieved = min_outcome_variety_bruteforce(table, budget)
    cls = table_class(table)
    bound = lrv_lower_bound(table)
    applicable = cls in (TableClass.LATIN_SQUARE, TableClass.INJECTIVE_PER_RESPONSE)
    holds = achieved >= bound - BOUND_TOLERANCE if applicable else None
    if holds is False:
        raise VarietyLabError("bound-violated", f"achieved {achieved!r} below bound {bound!r} for class {cls.value}")
    return BoundReport(
        lower_bound_bits=bound,
        achieved_min_bits=achieved,
        optimal_policy=policy,
        table_class=cls,
        bound_applicable=applicable,
        input_variety_bits=variety(table.disturbance_dist),
        response_variety_bits=math.log2(len(table.responses)),
        holds=holds,
    )
