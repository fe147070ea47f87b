"""Command-line entry point: ``varietylab <command> ...``.

Every command prints one JSON report on stdout that embeds a run manifest.
Exit status is 0 on success, 1 on a validation error and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from typing import Callable, Sequence

from . import __version__
from .analysis import assess_stability, blocking_deduction, classify_pair, dominance
from .coreperiphery import absorption_events, membership_timeline, partition, partitions
from .errors import VarietyLabError
from .harness import (
    SimulationConfig,
    parse_log,
    serialize_log,
    simulate_adaptive_regulator,
    simulate_drift_environment,
)
from .model import COMPONENTS, ClosedSystemPair, Trace, read_trace, serialize_trace
from .regulator import DEFAULT_BUDGET, greedy_policy, load_table, min_outcome_variety_bruteforce, verify_bound
from .report import canonical_json
from .variety import Distribution, VarietyMode, empirical_distribution, variety

BUDGET_ENV = "VARIETYLAB_BUDGET"

NO_DATA = {"status": "no data", "result": None}


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _manifest(args: argparse.Namespace, inputs: Sequence[str]) -> dict:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("handler", "command_name")}
    return {
        "command": args.command_name,
        "flags": flags,
        "input_digests": {p: _sha256(p) for p in inputs if p},
        "version": __version__,
        "seed": getattr(args, "seed", None),
    }


def _budget(args: argparse.Namespace) -> int:
    if args.budget is None:
        raw = os.environ.get(BUDGET_ENV)
        try:
            args.budget = int(raw) if raw else DEFAULT_BUDGET
        except ValueError:
            raise VarietyLabError("invalid-budget", f"{BUDGET_ENV}={raw!r} is not an integer") from None
    return args.budget


def _pair(trace: Trace, args: argparse.Namespace) -> ClosedSystemPair:
    if args.system and args.environment:
        return ClosedSystemPair(args.system, args.environment)
    return trace.pair(args.system)


def _times(raw: str | None) -> list[int] | None:
    if raw is None:
        return None
    try:
        return [int(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise VarietyLabError("malformed", f"--times expects comma-separated integers, got {raw!r}") from None


def cmd_variety(args: argparse.Namespace) -> tuple[object, list[str]]:
    inputs = []
    if args.file:
        inputs.append(args.file)
        with open(args.file, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise VarietyLabError("malformed", f"{args.file}: {exc.msg}") from None
        if isinstance(doc, list):
            labels, counts = [str(x) for x in doc], None
        elif isinstance(doc, dict):
            labels, counts = None, doc
        else:
            raise VarietyLabError("malformed", "variety file must hold a label list or a label->count object")
    elif args.counts is not None:
        labels, counts = None, {}
        for item in filter(None, args.counts.split(",")):
            key, sep, value = item.partition("=")
            if not sep:
                raise VarietyLabError("malformed", f"count {item!r} is not label=integer")
            try:
                counts[key] = int(value)
            except ValueError:
                raise VarietyLabError("malformed", f"count {item!r} is not label=integer") from None
    else:
        labels, counts = [x for x in args.labels.split(",") if x], None

    if counts is not None:
        dist = empirical_distribution(counts)
        mode = VarietyMode.EMPIRICAL
    else:
        if len(set(labels)) != len(labels):
            raise VarietyLabError("duplicate-element", "labels must be unique")
        dist = Distribution.uniform(labels)
        mode = VarietyMode.UNIFORM
    return {"bits": variety(dist), "mode": mode, "support": len(dist.elements)}, inputs


def cmd_partition(args: argparse.Namespace) -> tuple[object, list[str]]:
    trace = read_trace(args.trace)
    if not len(trace):
        return NO_DATA, [args.trace]
    p = partition(trace.snapshot(args.system, args.t_from), trace.snapshot(args.system, args.t_to))
    return p, [args.trace]


def cmd_dynamics(args: argparse.Namespace) -> tuple[object, list[str]]:
    trace = read_trace(args.trace)
    if not len(trace):
        return NO_DATA, [args.trace]
    times = _times(args.times)
    snaps = trace.history(args.system) if times is None else [trace.snapshot(args.system, t) for t in times]
    if not snaps:
        raise VarietyLabError("unknown-system", repr(args.system))
    timelines = {}
    for role in COMPONENTS:
        universe = sorted(set().union(*(s.component(role) for s in snaps)))
        timelines[role] = {e: membership_timeline(trace, args.system, e, role, times) for e in universe}
    events = absorption_events(trace, args.system, times) if len(snaps) >= 3 else []
    return {
        "system": args.system,
        "times": [s.t for s in snaps],
        "partitions": partitions(trace, args.system, times),
        "timelines": timelines,
        "absorption_events": events,
    }, [args.trace]


def _counts_at(trace: Trace, system: str, t: int, mode: VarietyMode):
    return trace.snapshot(system, t).counts if mode is VarietyMode.EMPIRICAL else None


def cmd_classify(args: argparse.Namespace) -> tuple[object, list[str]]:
    trace = read_trace(args.trace)
    if not len(trace):
        return NO_DATA, [args.trace]
    pair = _pair(trace, args)
    mode = VarietyMode(args.mode)
    scores = []
    for sid in (pair.system_id, pair.environment_id):
        p = partition(trace.snapshot(sid, args.t_from), trace.snapshot(sid, args.t_to))
        scores.append(dominance(p, mode, _counts_at(trace, sid, args.t_to, mode), args.epsilon))
    return {"pair": pair, "interval": [args.t_from, args.t_to], "cell": classify_pair(*scores)}, [args.trace]


def cmd_lrv_verify(args: argparse.Namespace) -> tuple[object, list[str]]:
    table = load_table(args.table)
    return verify_bound(table, _budget(args)), [args.table]


def cmd_regulator_synth(args: argparse.Namespace) -> tuple[object, list[str]]:
    table = load_table(args.table)
    if args.method == "brute":
        policy, bits = min_outcome_variety_bruteforce(table, _budget(args))
    else:
        policy, bits = greedy_policy(table)
    return {"method": args.method, "policy": policy.as_dict(table), "bits": bits}, [args.table]


def cmd_deduce(args: argparse.Namespace) -> tuple[object, list[str]]:
    trace = read_trace(args.trace)
    table = load_table(args.table)
    with open(args.log, encoding="utf-8") as fh:
        log = parse_log(fh)
    inputs = [args.trace, args.table, args.log]
    if not len(trace):
        return NO_DATA, inputs
    pair = _pair(trace, args)
    mode = VarietyMode(args.mode)
    sys_p = partition(trace.snapshot(pair.system_id, args.t_from), trace.snapshot(pair.system_id, args.t_to))
    env_p = partition(trace.snapshot(pair.environment_id, args.t_from), trace.snapshot(pair.environment_id, args.t_to))
    observed = [rec.z for rec in log if args.t_from < rec.step <= args.t_to]
    stable = assess_stability(table, observed, args.threshold)
    report = blocking_deduction(
        sys_p,
        env_p,
        pair,
        stable,
        mode,
        _counts_at(trace, pair.system_id, args.t_to, mode),
        _counts_at(trace, pair.environment_id, args.t_to, mode),
    )
    return report, inputs


def _write(path: str, text: str) -> str:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def cmd_simulate_regulator(args: argparse.Namespace) -> tuple[object, list[str]]:
    table = load_table(args.table)
    run = simulate_adaptive_regulator(
        SimulationConfig(seed=args.seed, steps=args.steps, snapshot_cadence=args.cadence, game=table)
    )
    result = {
        "trace": args.out,
        "trace_sha256": _write(args.out, serialize_trace(run.trace)),
        "snapshots": len(run.trace),
        "last_policy_change": run.last_policy_change,
        "final_policy": run.final_policy,
        "log": args.log_out,
        "log_sha256": _write(args.log_out, serialize_log(run.log)) if args.log_out else None,
    }
    return result, [args.table]


def cmd_simulate_drift(args: argparse.Namespace) -> tuple[object, list[str]]:
    trace = simulate_drift_environment(
        SimulationConfig(
            seed=args.seed,
            steps=args.steps,
            snapshot_cadence=args.cadence,
            drift_rate=args.drift_rate,
            alphabet_size=args.alphabet_size,
        )
    )
    return {"trace": args.out, "trace_sha256": _write(args.out, serialize_trace(trace)), "snapshots": len(trace)}, []


def _command(sub: argparse._SubParsersAction, name: str, full: str, handler: Callable, **kw) -> argparse.ArgumentParser:
    p = sub.add_parser(name, **kw)
    p.add_argument("--pretty", action="store_true", default=argparse.SUPPRESS, help="indent the JSON report")
    p.set_defaults(handler=handler, command_name=full)
    return p


def _interval_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--from", dest="t_from", type=int, required=True)
    p.add_argument("--to", dest="t_to", type=int, required=True)


def _pair_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--system", help="system id (default: the trace's pair header)")
    p.add_argument("--environment", help="environment id (default: the trace's pair header)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varietylab", description=__doc__.splitlines()[0])
    parser.add_argument("--pretty", action="store_true", help="indent the JSON report")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = _command(sub, "variety", "variety", cmd_variety, help="variety of a label set or count table")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--labels", help="comma-separated labels (uniform mode)")
    src.add_argument("--counts", help="comma-separated label=count pairs (empirical mode)")
    src.add_argument("--file", help="JSON list of labels or object of label counts")

    p = _command(sub, "partition", "partition", cmd_partition, help="core/periphery partition over an interval")
    p.add_argument("--trace", required=True)
    p.add_argument("--system", required=True)
    _interval_flags(p)

    p = _command(sub, "dynamics", "dynamics", cmd_dynamics, help="membership timelines and absorption events")
    p.add_argument("--trace", required=True)
    p.add_argument("--system", required=True)
    p.add_argument("--times", help="comma-separated snapshot times to use instead of all")

    p = _command(sub, "classify", "classify", cmd_classify, help="system/environment symmetry cell")
    p.add_argument("--trace", required=True)
    _pair_flags(p)
    _interval_flags(p)
    p.add_argument("--mode", choices=[m.value for m in VarietyMode], default=VarietyMode.UNIFORM.value)
    p.add_argument("--epsilon", type=float, default=1e-9, help="balanced band width in bits")

    lrv = sub.add_parser("lrv", help="requisite-variety bound").add_subparsers(dest="lrv_command", required=True)
    p = _command(lrv, "verify", "lrv verify", cmd_lrv_verify, help="check the bound against the brute-force optimum")
    p.add_argument("--table", required=True)
    p.add_argument("--budget", type=int, help=f"policy budget (default ${BUDGET_ENV} or {DEFAULT_BUDGET})")

    reg = sub.add_parser("regulator", help="regulator policy synthesis").add_subparsers(
        dest="regulator_command", required=True
    )
    p = _command(reg, "synth", "regulator synth", cmd_regulator_synth, help="minimal-variety policy")
    p.add_argument("--table", required=True)
    p.add_argument("--method", choices=["brute", "greedy"], default="brute")
    p.add_argument("--budget", type=int, help=f"policy budget (default ${BUDGET_ENV} or {DEFAULT_BUDGET})")

    p = _command(sub, "deduce", "deduce", cmd_deduce, help="blocking deduction over an interval")
    p.add_argument("--trace", required=True)
    p.add_argument("--table", required=True)
    p.add_argument("--log", required=True, help="outcome log (JSONL)")
    _pair_flags(p)
    _interval_flags(p)
    p.add_argument("--threshold", type=float, default=0.0, help="stability threshold in bits")
    p.add_argument("--mode", choices=[m.value for m in VarietyMode], default=VarietyMode.UNIFORM.value)

    sim = sub.add_parser("simulate", help="generate traces").add_subparsers(dest="simulate_command", required=True)
    p = _command(sim, "regulator", "simulate regulator", cmd_simulate_regulator, help="adaptive regulator game")
    p.add_argument("--table", required=True)
    p.add_argument("--log-out", help="write the outcome log here")
    for q in (p, _command(sim, "drift", "simulate drift", cmd_simulate_drift, help="drifting environment")):
        q.add_argument("--out", required=True, help="trace output path")
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--steps", type=int, default=100)
        q.add_argument("--cadence", type=int, default=10)
    q.add_argument("--drift-rate", type=float, default=0.25)
    q.add_argument("--alphabet-size", type=int, default=8)
    return parser


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result, inputs = args.handler(args)
        report = {"manifest": _manifest(args, inputs), "report": result}
        stdout.write(canonical_json(report, pretty=args.pretty))
    except VarietyLabError as exc:
        stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        stderr.write(f"error: io-error: {exc}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())
