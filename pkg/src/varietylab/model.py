"""Time-indexed system snapshots, traces and the JSONL trace format.

A system is stored as its two component sets (inputs and outputs) at each
time index. Elements are opaque text labels compared by exact equality, so
set differences across time are meaningful only for labels with a stable
identity. Which input maps to which output is not modeled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping

from .errors import VarietyLabError

INPUT = "input"
OUTPUT = "output"
COMPONENTS = (INPUT, OUTPUT)


@dataclass(frozen=True)
class SystemSnapshot:
    system_id: str
    t: int
    inputs: frozenset[str] = frozenset()
    outputs: frozenset[str] = frozenset()
    # role -> label -> occurrence count; only roles that carried counts
    counts: Mapping[str, Mapping[str, int]] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", frozenset(self.inputs))
        object.__setattr__(self, "outputs", frozenset(self.outputs))
        if isinstance(self.t, bool) or not isinstance(self.t, int) or self.t < 0:
            raise VarietyLabError("malformed", f"time index must be a non-negative integer, got {self.t!r}")
        for label in self.inputs | self.outputs:
            if not isinstance(label, str) or not label:
                raise VarietyLabError("invalid-element", f"element labels must be non-empty text, got {label!r}")
        for role, table in self.counts.items():
            extra = set(table) - self.component(role)
            if extra:
                raise VarietyLabError("counts-mismatch", f"counts for labels not in {role} set: {sorted(extra)}")

    def component(self, role: str) -> frozenset[str]:
        if role == INPUT:
            return self.inputs
        if role == OUTPUT:
            return self.outputs
        raise VarietyLabError("unknown-component", repr(role))

    def sets(self) -> dict[str, frozenset[str]]:
        return {INPUT: self.inputs, OUTPUT: self.outputs}


@dataclass(frozen=True)
class ClosedSystemPair:
    """System S regulating environment S_E; outputs of each feed the other."""

    system_id: str
    environment_id: str


@dataclass(frozen=True)
class Trace:
    snapshots: tuple[SystemSnapshot, ...] = ()
    subsystem_map: Mapping[str, str] = field(default_factory=dict)
    pairs: tuple[ClosedSystemPair, ...] = ()

    def __post_init__(self) -> None:
        snaps = tuple(sorted(self.snapshots, key=lambda s: (s.system_id, s.t)))
        seen = set()
        for s in snaps:
            if (s.system_id, s.t) in seen:
                raise VarietyLabError("duplicate-snapshot", f"{s.system_id!r} at t={s.t}")
            seen.add((s.system_id, s.t))
        object.__setattr__(self, "snapshots", snaps)
        object.__setattr__(self, "subsystem_map", dict(self.subsystem_map))
        object.__setattr__(self, "pairs", tuple(sorted(set(self.pairs), key=lambda p: (p.system_id, p.environment_id))))
        self._check_subsystems()
        self._check_pairs()

    def _check_subsystems(self) -> None:
        for child, parent in self.subsystem_map.items():
            parent_at = {s.t: s for s in self.history(parent)}
            for s in self.history(child):
                p = parent_at.get(s.t)
                if p is None:
                    continue
                for role in COMPONENTS:
                    outside = s.component(role) - p.component(role)
                    if outside:
                        raise VarietyLabError(
                            "not-a-subsystem",
                            f"{child!r} {role} elements {sorted(outside)} not in parent {parent!r} at t={s.t}",
                        )

    def _check_pairs(self) -> None:
        for pair in self.pairs:
            env_at = {s.t: s for s in self.history(pair.environment_id)}
            for s in self.history(pair.system_id):
                e = env_at.get(s.t)
                if e is not None and not s.outputs <= e.inputs:
                    raise VarietyLabError(
                        "pair-coupling",
                        f"outputs of {pair.system_id!r} not among inputs of {pair.environment_id!r} at t={s.t}",
                    )

    def __len__(self) -> int:
        return len(self.snapshots)

    def systems(self) -> list[str]:
        return sorted({s.system_id for s in self.snapshots})

    def history(self, system_id: str) -> list[SystemSnapshot]:
        return [s for s in self.snapshots if s.system_id == system_id]

    def times(self, system_id: str) -> list[int]:
        return [s.t for s in self.history(system_id)]

    def snapshot(self, system_id: str, t: int) -> SystemSnapshot:
        for s in self.snapshots:
            if s.system_id == system_id and s.t == t:
                return s
        raise VarietyLabError("missing-snapshot", f"no snapshot of {system_id!r} at t={t}")

    def pair(self, system_id: str | None = None) -> ClosedSystemPair:
        candidates = [p for p in self.pairs if system_id is None or p.system_id == system_id]
        if len(candidates) != 1:
            raise VarietyLabError("unknown-pair", f"expected one pair declaration, found {len(candidates)}")
        return candidates[0]


def _record_error(lineno: int, code: str, message: str) -> VarietyLabError:
    return VarietyLabError(code, f"line {lineno}: {message}")


def parse_trace(stream: str | Iterable[str]) -> Trace:
    """Parse JSONL trace text (or an iterable of lines) into a validated Trace."""
    lines = stream.splitlines() if isinstance(stream, str) else stream
    parts: dict[tuple[str, int], dict] = {}
    last_t: dict[str, int] = {}
    subsystems: dict[str, str] = {}
    pairs: list[ClosedSystemPair] = []

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise _record_error(lineno, "malformed", f"invalid JSON ({exc.msg})") from None
        if not isinstance(rec, dict):
            raise _record_error(lineno, "malformed", "record must be a JSON object")

        if "pair" in rec:
            body = rec["pair"]
            if set(rec) != {"pair"} or not isinstance(body, dict) or set(body) != {"system", "environment"}:
                raise _record_error(lineno, "malformed", "pair header needs exactly system and environment")
            pairs.append(ClosedSystemPair(str(body["system"]), str(body["environment"])))
            continue
        if "subsystem" in rec:
            body = rec["subsystem"]
            if set(rec) != {"subsystem"} or not isinstance(body, dict) or set(body) != {"child", "parent"}:
                raise _record_error(lineno, "malformed", "subsystem header needs exactly child and parent")
            child, parent = str(body["child"]), str(body["parent"])
            if subsystems.get(child, parent) != parent:
                raise _record_error(lineno, "malformed", f"{child!r} declared with two parents")
            subsystems[child] = parent
            continue

        missing = {"t", "system", "component", "elements"} - set(rec)
        if missing:
            raise _record_error(lineno, "malformed", f"missing keys {sorted(missing)}")
        extra = set(rec) - {"t", "system", "component", "elements", "counts"}
        if extra:
            raise _record_error(lineno, "malformed", f"unknown keys {sorted(extra)}")
        t, system, role, elements = rec["t"], rec["system"], rec["component"], rec["elements"]
        if isinstance(t, bool) or not isinstance(t, int) or t < 0:
            raise _record_error(lineno, "malformed", "t must be a non-negative integer")
        if not isinstance(system, str) or not system:
            raise _record_error(lineno, "malformed", "system must be non-empty text")
        if role not in COMPONENTS:
            raise _record_error(lineno, "malformed", f"component must be 'input' or 'output', got {role!r}")
        if not isinstance(elements, list) or not all(isinstance(e, str) and e for e in elements):
            raise _record_error(lineno, "invalid-element", "elements must be a list of non-empty strings")
        if len(set(elements)) != len(elements):
            raise _record_error(lineno, "duplicate-element", f"repeated label in {system!r} {role} at t={t}")
        if system in last_t and t < last_t[system]:
            raise _record_error(lineno, "time-order", f"{system!r} t={t} after t={last_t[system]}")
        last_t[system] = t

        slot = parts.setdefault((system, t), {})
        if role in slot:
            raise _record_error(lineno, "duplicate-snapshot", f"{system!r} {role} at t={t} given twice")
        counts = rec.get("counts")
        if counts is not None:
            if not isinstance(counts, dict) or not all(
                isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in counts.values()
            ):
                raise _record_error(lineno, "malformed", "counts must map labels to non-negative integers")
            if not set(counts) <= set(elements):
                raise _record_error(lineno, "counts-mismatch", "counts name labels absent from elements")
        slot[role] = (frozenset(elements), counts)

    snapshots = []
    for (system, t), slot in parts.items():
        ins, in_counts = slot.get(INPUT, (frozenset(), None))
        outs, out_counts = slot.get(OUTPUT, (frozenset(), None))
        counts = {}
        if in_counts is not None:
            counts[INPUT] = in_counts
        if out_counts is not None:
            counts[OUTPUT] = out_counts
        snapshots.append(SystemSnapshot(system, t, ins, outs, counts))
    return Trace(tuple(snapshots), subsystems, tuple(pairs))


def _dumps(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def serialize_trace(trace: Trace) -> str:
    """Canonical JSONL text: headers, then (system, t, input/output) records."""
    out = []
    for p in trace.pairs:
        out.append(_dumps({"pair": {"system": p.system_id, "environment": p.environment_id}}))
    for child in sorted(trace.subsystem_map):
        out.append(_dumps({"subsystem": {"child": child, "parent": trace.subsystem_map[child]}}))
    for s in trace.snapshots:
        for role in COMPONENTS:
            rec = {"t": s.t, "system": s.system_id, "component": role, "elements": sorted(s.component(role))}
            if role in s.counts:
                rec["counts"] = {k: s.counts[role][k] for k in sorted(s.counts[role])}
            out.append(_dumps(rec))
    return "".join(line + "\n" for line in out)


def read_trace(path: str) -> Trace:
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh)


def write_trace(trace: Trace, fh: IO[str]) -> None:
    fh.write(serialize_trace(trace))


def environment_exogenous_inputs(trace: Trace, pair: ClosedSystemPair, t: int) -> frozenset[str]:
    """Environment inputs at ``t`` that the system did not produce."""
    env = trace.snapshot(pair.environment_id, t)
    sys = trace.snapshot(pair.system_id, t)
    return env.inputs - sys.outputs


def project_subsystem(trace: Trace, subsystem_id: str) -> Trace:
    snaps = trace.history(subsystem_id)
    if not snaps and subsystem_id not in trace.subsystem_map:
        raise VarietyLabError("unknown-system", repr(subsystem_id))
    mapping = {subsystem_id: trace.subsystem_map[subsystem_id]} if subsystem_id in trace.subsystem_map else {}
    return Trace(tuple(snaps), mapping)
