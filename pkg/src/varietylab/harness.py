"""Deterministic simulators that produce traces for the analyses.

Randomness comes from SplitMix64 (Steele, Lea & Flood 2014), implemented
here so that a given seed yields the same trace on any platform or in any
language. Derived draws:

* ``below(n)``: ``(next() * n) >> 64``
* ``uniform()``: ``(next() >> 11) * 2**-53``
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field

from .errors import VarietyLabError
from .model import ClosedSystemPair, SystemSnapshot, Trace
from .regulator import OutcomeTable
from .variety import empirical_distribution, variety

_MASK = (1 << 64) - 1

SYSTEM_ID = "S"
ENVIRONMENT_ID = "E"


class SplitMix64:
    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return (self.next() * n) >> 64

    def uniform(self) -> float:
        return (self.next() >> 11) * 2.0**-53


@dataclass(frozen=True)
class SimulationConfig:
    seed: int = 0
    steps: int = 100
    snapshot_cadence: int = 10
    game: OutcomeTable | None = None
    drift_rate: float = 0.0
    alphabet_size: int = 8

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise VarietyLabError("invalid-config", "steps must be >= 1")
        if self.snapshot_cadence < 1:
            raise VarietyLabError("invalid-config", "snapshot cadence must be >= 1")
        if not 0.0 <= self.drift_rate <= 1.0:
            raise VarietyLabError("invalid-config", "drift rate must lie in [0, 1]")
        if not 0 <= self.seed <= _MASK:
            raise VarietyLabError("invalid-config", "seed must be an unsigned 64-bit integer")

    def snapshot_times(self) -> list[int]:
        times = list(range(0, self.steps + 1, self.snapshot_cadence))
        if times[-1] != self.steps:
            times.append(self.steps)
        return times


@dataclass(frozen=True)
class OutcomeRecord:
    step: int
    d: str
    r: str
    z: str

    def to_json(self) -> str:
        return json.dumps({"step": self.step, "d": self.d, "r": self.r, "z": self.z}, ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True)
class RegulatorRun:
    trace: Trace
    log: tuple[OutcomeRecord, ...]
    # last step at which any learned policy entry was set or changed (0 if never)
    last_policy_change: int
    final_policy: dict[str, str] = field(default_factory=dict)


def policy_label(d: str, r: str) -> str:
    return f"policy:{d}->{r}"


def response_label(r: str) -> str:
    return f"resp:{r}"


def disturbance_label(d: str) -> str:
    return f"dist:{d}"


def outcome_label(z: str) -> str:
    return f"out:{z}"


def _draw(rng: SplitMix64, cumulative: list[float]) -> int:
    u = rng.uniform() * cumulative[-1]
    for i, c in enumerate(cumulative):
        if u < c:
            return i
    return len(cumulative) - 1


def _best_response(table: OutcomeTable, seen: Counter, d_index: int) -> int:
    """Response whose outcome, added once to the observed history, gives the lowest variety."""
    best, best_bits = 0, math.inf
    for r, z in enumerate(table.outcomes[d_index]):
        trial = seen.copy()
        trial[z] += 1
        bits = variety(empirical_distribution(trial))
        if bits < best_bits - 1e-12:
            best, best_bits = r, bits
    return best


def simulate_adaptive_regulator(config: SimulationConfig) -> RegulatorRun:
    """A frequency-greedy regulator learning a policy against a fixed game.

    Each step draws a disturbance, plays the learned response (a random one
    while unlearned), records the outcome and re-learns that disturbance's
    entry as the best response to the outcome history so far. The system's
    output set holds one ``policy:d->r`` label per learned entry plus the
    fixed ``resp:r`` alphabet; its input set holds the disturbances and
    outcomes it has observed. The environment takes every disturbance plus
    the system's outputs as inputs and emits the outcomes seen.
    """
    table = config.game
    if table is None:
        raise VarietyLabError("invalid-config", "regulator simulation needs a game table")
    rng = SplitMix64(config.seed)
    acc, cumulative = 0.0, []
    for p in table.disturbance_dist.probabilities:
        acc += float(p)
        cumulative.append(acc)

    policy: dict[int, int] = {}
    seen: Counter = Counter()
    seen_d: set[str] = set()
    log: list[OutcomeRecord] = []
    snaps: list[SystemSnapshot] = []
    last_change = 0
    resp_labels = frozenset(response_label(r) for r in table.responses)
    dist_labels = frozenset(disturbance_label(d) for d in table.disturbances)

    def emit(t: int) -> None:
        outputs = resp_labels | {policy_label(table.disturbances[d], table.responses[r]) for d, r in policy.items()}
        observed = {outcome_label(z) for z in seen}
        inputs = {disturbance_label(d) for d in seen_d} | observed
        snaps.append(SystemSnapshot(SYSTEM_ID, t, inputs, outputs))
        snaps.append(SystemSnapshot(ENVIRONMENT_ID, t, dist_labels | outputs, observed))

    times = set(config.snapshot_times())
    emit(0)
    for step in range(1, config.steps + 1):
        d = _draw(rng, cumulative)
        r = policy[d] if d in policy else rng.below(len(table.responses))
        z = table.outcomes[d][r]
        seen[z] += 1
        seen_d.add(table.disturbances[d])
        log.append(OutcomeRecord(step, table.disturbances[d], table.responses[r], z))
        learned = _best_response(table, seen, d)
        if policy.get(d) != learned:
            policy[d] = learned
            last_change = step
        if step in times:
            emit(step)

    trace = Trace(tuple(snaps), pairs=(ClosedSystemPair(SYSTEM_ID, ENVIRONMENT_ID),))
    final = {table.disturbances[d]: table.responses[r] for d, r in sorted(policy.items())}
    return RegulatorRun(trace, tuple(log), last_change, final)


def serialize_log(log: tuple[OutcomeRecord, ...] | list[OutcomeRecord]) -> str:
    return "".join(rec.to_json() + "\n" for rec in log)


def parse_log(stream) -> list[OutcomeRecord]:
    lines = stream.splitlines() if isinstance(stream, str) else stream
    out = []
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
            out.append(OutcomeRecord(int(rec["step"]), str(rec["d"]), str(rec["r"]), str(rec["z"])))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            raise VarietyLabError("malformed", f"outcome log line {lineno}") from None
    return out


def simulate_drift_environment(config: SimulationConfig) -> Trace:
    """An environment whose input alphabet is partly replaced every window.

    Each window, floor(drift_rate * alphabet_size) current labels (chosen by
    a partial Fisher-Yates shuffle of the sorted alphabet) are dropped and
    the same number of never-seen labels added.
    """
    n = config.alphabet_size
    if n < 2:
        raise VarietyLabError("invalid-config", "alphabet size must be >= 2")
    rng = SplitMix64(config.seed)
    k = math.floor(config.drift_rate * n)
    fresh = n
    alphabet = {f"x{i}" for i in range(n)}
    times = config.snapshot_times()
    snaps = [SystemSnapshot(ENVIRONMENT_ID, times[0], alphabet)]
    for t in times[1:]:
        pool = sorted(alphabet)
        for i in range(k):
            j = i + rng.below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        drop = pool[:k]
        alphabet = (alphabet - set(drop)) | {f"x{fresh + i}" for i in range(k)}
        fresh += k
        snaps.append(SystemSnapshot(ENVIRONMENT_ID, t, alphabet))
    return Trace(tuple(snaps))
