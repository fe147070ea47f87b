"""Residual change, core/periphery partitions and their dynamics over a trace.

Over an interval (t, t') and per component set, the periphery is what is
present at t' but not at t, the core is what is present at both, and the
shed set is what was present at t and is gone at t'.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from .errors import VarietyLabError
from .model import COMPONENTS, SystemSnapshot, Trace

Interval = tuple[int, int]
Parts = Mapping[str, frozenset[str]]


class MembershipState(str, Enum):
    CORE = "core"
    PERIPHERY = "periphery"
    SHED = "shed"
    ABSENT = "absent"


@dataclass(frozen=True)
class Residual:
    system_id: str
    interval: Interval
    input_part: frozenset[str]
    output_part: frozenset[str]

    def parts(self) -> dict[str, frozenset[str]]:
        return {"input": self.input_part, "output": self.output_part}


@dataclass(frozen=True)
class CorePeripheryPartition:
    system_id: str
    interval: Interval
    core: Parts
    periphery: Parts
    shed: Parts

    def at_end(self, role: str) -> frozenset[str]:
        """The component set at t' (core plus periphery)."""
        return self.core[role] | self.periphery[role]

    def at_start(self, role: str) -> frozenset[str]:
        return self.core[role] | self.shed[role]


@dataclass(frozen=True)
class AbsorptionEvent:
    earlier: Interval
    later: Interval
    elements: Parts


def _check_interval(a: SystemSnapshot, b: SystemSnapshot) -> None:
    if a.system_id != b.system_id:
        raise VarietyLabError("system-mismatch", f"{a.system_id!r} vs {b.system_id!r}")
    # equal times are only meaningful for the same snapshot (reflexive case)
    if a.t > b.t or (a.t == b.t and a != b):
        raise VarietyLabError("time-order", f"interval ({a.t}, {b.t}) is not increasing")


def residual(snap_t: SystemSnapshot, snap_t2: SystemSnapshot) -> Residual:
    _check_interval(snap_t, snap_t2)
    return Residual(
        snap_t.system_id,
        (snap_t.t, snap_t2.t),
        snap_t2.inputs - snap_t.inputs,
        snap_t2.outputs - snap_t.outputs,
    )


def partition(snap_t: SystemSnapshot, snap_t2: SystemSnapshot) -> CorePeripheryPartition:
    res = residual(snap_t, snap_t2)
    before, after = snap_t.sets(), snap_t2.sets()
    return CorePeripheryPartition(
        snap_t.system_id,
        res.interval,
        core={r: before[r] & after[r] for r in COMPONENTS},
        periphery=res.parts(),
        shed={r: before[r] - after[r] for r in COMPONENTS},
    )


def _sequence(trace: Trace, system_id: str, times: Sequence[int] | None) -> list[SystemSnapshot]:
    if times is None:
        return trace.history(system_id)
    times = list(times)
    if any(a >= b for a, b in zip(times, times[1:])):
        raise VarietyLabError("time-order", f"selected times {times} are not increasing")
    return [trace.snapshot(system_id, t) for t in times]


def partitions(trace: Trace, system_id: str, times: Sequence[int] | None = None) -> list[CorePeripheryPartition]:
    """Partitions over consecutive intervals of the system's snapshots.

    ``times`` selects a subsequence of snapshot times; intervals then run
    between consecutive selected times.
    """
    snaps = _sequence(trace, system_id, times)
    return [partition(a, b) for a, b in zip(snaps, snaps[1:])]


def membership_timeline(
    trace: Trace,
    system_id: str,
    element: str,
    component: str,
    times: Sequence[int] | None = None,
) -> list[MembershipState]:
    if component not in COMPONENTS:
        raise VarietyLabError("unknown-component", repr(component))
    snaps = _sequence(trace, system_id, times)
    if len(snaps) < 2:
        raise VarietyLabError("insufficient-snapshots", f"{system_id!r} has {len(snaps)} snapshot(s), need 2")
    states = []
    for a, b in zip(snaps, snaps[1:]):
        before, after = element in a.component(component), element in b.component(component)
        if before and after:
            states.append(MembershipState.CORE)
        elif after:
            states.append(MembershipState.PERIPHERY)
        elif before:
            states.append(MembershipState.SHED)
        else:
            states.append(MembershipState.ABSENT)
    return states


def absorption_events(trace: Trace, system_id: str, times: Sequence[int] | None = None) -> list[AbsorptionEvent]:
    """Elements that were periphery on one interval and core on the next."""
    snaps = _sequence(trace, system_id, times)
    if len(snaps) < 3:
        raise VarietyLabError("insufficient-snapshots", f"{system_id!r} has {len(snaps)} snapshot(s), need 3")
    parts = [partition(a, b) for a, b in zip(snaps, snaps[1:])]
    events = []
    for earlier, later in zip(parts, parts[1:]):
        hits = {r: later.core[r] & earlier.periphery[r] for r in COMPONENTS}
        hits = {r: s for r, s in hits.items() if s}
        if hits:
            events.append(AbsorptionEvent(earlier.interval, later.interval, hits))
    return events


def locate_subsystem(
    parent_partition: CorePeripheryPartition, sub_snapshot_t2: SystemSnapshot
) -> dict[str, dict[str, float] | None]:
    """Fractions of a subsystem's elements at t' lying in the parent's core and periphery.

    Components where the subsystem has no elements map to ``None``.
    """
    if sub_snapshot_t2.t != parent_partition.interval[1]:
        raise VarietyLabError(
            "interval-mismatch", f"subsystem snapshot at t={sub_snapshot_t2.t}, partition ends at {parent_partition.interval[1]}"
        )
    out: dict[str, dict[str, float] | None] = {}
    for role in COMPONENTS:
        elems = sub_snapshot_t2.component(role)
        outside = elems - parent_partition.at_end(role)
        if outside:
            raise VarietyLabError("not-a-subsystem", f"{role} elements {sorted(outside)} not in parent at t'")
        if not elems:
            out[role] = None
            continue
        n = len(elems)
        out[role] = {
            "in_core": len(elems & parent_partition.core[role]) / n,
            "in_periphery": len(elems & parent_partition.periphery[role]) / n,
        }
    return out
