"""Symmetry classification, blocking deduction and stability assessment."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Mapping, Sequence

from .coreperiphery import CorePeripheryPartition
from .errors import VarietyLabError
from .model import INPUT, OUTPUT, ClosedSystemPair
from .regulator import OutcomeTable
from .variety import VarietyMode, empirical_distribution, parts_variety, variety

DEFAULT_BALANCE_EPSILON = 1e-9
DEDUCTION_MARGIN = 1e-9

Counts = Mapping[str, Mapping[str, int]]


class Dominance(IntEnum):
    CORE_DOMINANT = -1
    BALANCED = 0
    PERIPHERY_DOMINANT = 1


class Region(str, Enum):
    SYSTEM_MORE_PERIPHERAL = "system_more_peripheral"
    SYMMETRIC = "symmetric"
    SYSTEM_MORE_CORE_DOMINANT = "system_more_core_dominant"


class Conclusion(str, Enum):
    PERIPHERY_PARTICIPATES = "periphery_participates"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class DominanceScore:
    score: Dominance
    v_core: float
    v_periphery: float
    mode: VarietyMode


@dataclass(frozen=True)
class SymmetryCell:
    system_score: DominanceScore
    environment_score: DominanceScore
    region: Region


@dataclass(frozen=True)
class DeductionReport:
    stable: bool
    v_env_core_inputs: float
    v_sys_core_outputs: float
    conclusion: Conclusion
    rule_trace: str


def score_from_varieties(v_core: float, v_periphery: float, epsilon: float = DEFAULT_BALANCE_EPSILON) -> Dominance:
    if v_periphery > v_core + epsilon:
        return Dominance.PERIPHERY_DOMINANT
    if v_core > v_periphery + epsilon:
        return Dominance.CORE_DOMINANT
    return Dominance.BALANCED


def dominance(
    partition: CorePeripheryPartition,
    mode: VarietyMode = VarietyMode.UNIFORM,
    counts: Counts | None = None,
    epsilon: float = DEFAULT_BALANCE_EPSILON,
) -> DominanceScore:
    """Compare core and periphery variety for one partition.

    In empirical mode ``counts`` are the per-component observation counts at
    the end of the interval.
    """
    mode = VarietyMode(mode)
    v_core = parts_variety(partition.core, mode, counts)
    v_periphery = parts_variety(partition.periphery, mode, counts)
    return DominanceScore(score_from_varieties(v_core, v_periphery, epsilon), v_core, v_periphery, mode)


def classify_pair(sys: DominanceScore, env: DominanceScore) -> SymmetryCell:
    if sys.mode != env.mode:
        raise VarietyLabError("mode-mismatch", f"system scored in {sys.mode.value}, environment in {env.mode.value}")
    if sys.score > env.score:
        region = Region.SYSTEM_MORE_PERIPHERAL
    elif sys.score == env.score:
        region = Region.SYMMETRIC
    else:
        region = Region.SYSTEM_MORE_CORE_DOMINANT
    return SymmetryCell(sys, env, region)


def exogenous_core_inputs(env_partition: CorePeripheryPartition, sys_partition: CorePeripheryPartition) -> frozenset[str]:
    """Environment core inputs that the system produced at neither end of the interval."""
    produced = sys_partition.at_start(OUTPUT) | sys_partition.at_end(OUTPUT)
    return env_partition.core[INPUT] - produced


def blocking_deduction(
    sys_partition: CorePeripheryPartition,
    env_partition: CorePeripheryPartition,
    pair: ClosedSystemPair,
    stability: bool,
    mode: VarietyMode = VarietyMode.UNIFORM,
    sys_counts: Counts | None = None,
    env_counts: Counts | None = None,
) -> DeductionReport:
    """If the system regulates stably yet the environment's exogenous core
    inputs carry more variety than the system's core outputs, part of that
    variety must be met by the system's periphery.
    """
    if sys_partition.system_id != pair.system_id or env_partition.system_id != pair.environment_id:
        raise VarietyLabError(
            "system-mismatch",
            f"partitions are for {sys_partition.system_id!r}/{env_partition.system_id!r}, "
            f"pair is {pair.system_id!r}/{pair.environment_id!r}",
        )
    if sys_partition.interval != env_partition.interval:
        raise VarietyLabError("interval-mismatch", f"{sys_partition.interval} vs {env_partition.interval}")

    v_sys = parts_variety({OUTPUT: sys_partition.core[OUTPUT]}, mode, sys_counts)
    v_env = parts_variety({INPUT: exogenous_core_inputs(env_partition, sys_partition)}, mode, env_counts)
    fires = stability and v_env > v_sys + DEDUCTION_MARGIN
    conclusion = Conclusion.PERIPHERY_PARTICIPATES if fires else Conclusion.INCONCLUSIVE

    t0, t1 = sys_partition.interval
    steps = [
        f"interval ({t0}, {t1}), mode {VarietyMode(mode).value}",
        f"stable regulator: {'yes' if stability else 'no'}",
        f"V(environment exogenous core inputs) = {v_env:.12g} bits",
        f"V(system core outputs) = {v_sys:.12g} bits",
    ]
    if not stability:
        steps.append("premise failed: regulation not stable")
    elif not fires:
        steps.append("premise failed: environment core input variety does not exceed system core output variety")
    else:
        steps.append("both premises hold: system periphery participates in blocking environment core variety")
    return DeductionReport(stability, v_env, v_sys, conclusion, "; ".join(steps))


def assess_stability(table: OutcomeTable | None, observed_outcomes: Sequence[str], threshold_bits: float = 0.0) -> bool:
    """True when the observed outcomes' empirical variety is at most ``threshold_bits``."""
    if not observed_outcomes:
        raise VarietyLabError("no-observations", "no outcomes observed in the interval")
    if table is not None:
        known = set(table.outcome_labels())
        unknown = sorted(set(observed_outcomes) - known)
        if unknown:
            raise VarietyLabError("unknown-outcome", f"outcomes {unknown} not in the table")
    return variety(empirical_distribution(Counter(observed_outcomes))) <= threshold_bits
