from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from varietylab.errors import VarietyLabError
from varietylab.model import (
    ClosedSystemPair,
    SystemSnapshot,
    Trace,
    environment_exogenous_inputs,
    parse_trace,
    project_subsystem,
    serialize_trace,
)


def line(**rec) -> str:
    return json.dumps(rec)


def test_two_lines_two_snapshots():
    text = "\n".join(
        [
            line(t=0, system="S", component="input", elements=["a", "b"]),
            line(t=1, system="S", component="input", elements=["b", "c"]),
        ]
    )
    trace = parse_trace(text)
    assert len(trace) == 2
    assert trace.snapshot("S", 1).inputs == {"b", "c"}
    assert trace.snapshot("S", 1).outputs == frozenset()


def test_empty_stream_is_empty_trace():
    assert len(parse_trace("")) == 0
    assert serialize_trace(parse_trace("")) == ""


@pytest.mark.parametrize(
    "lines, code",
    [
        ([line(t=0, system="S", component="input", elements=["a", "a"])], "duplicate-element"),
        (
            [
                line(t=0, system="S", component="input", elements=["a"]),
                line(t=0, system="S", component="input", elements=["b"]),
            ],
            "duplicate-snapshot",
        ),
        (
            [
                line(t=1, system="S", component="input", elements=["a"]),
                line(t=0, system="S", component="input", elements=["b"]),
            ],
            "time-order",
        ),
        (["{not json"], "malformed"),
        ([line(t=-1, system="S", component="input", elements=[])], "malformed"),
        ([line(t=0, system="S", component="state", elements=[])], "malformed"),
        ([line(t=0, system="S", component="input", elements=[""])], "invalid-element"),
        ([line(t=0, system="S", component="input", elements=["a"], counts={"b": 1})], "counts-mismatch"),
    ],
)
def test_parse_errors(lines, code):
    with pytest.raises(VarietyLabError) as exc:
        parse_trace("\n".join(lines))
    assert exc.value.code == code


def test_error_carries_line_number():
    text = line(t=0, system="S", component="input", elements=["a"]) + "\n\n{oops"
    with pytest.raises(VarietyLabError, match="line 3"):
        parse_trace(text)


def test_interleaved_systems_are_normalized():
    text = "\n".join(
        [
            line(t=0, system="B", component="input", elements=["x"]),
            line(t=0, system="A", component="input", elements=["y"]),
            line(t=1, system="B", component="output", elements=["z"]),
        ]
    )
    trace = parse_trace(text)
    assert [(s.system_id, s.t) for s in trace.snapshots] == [("A", 0), ("B", 0), ("B", 1)]


def test_subsystem_outside_parent_rejected():
    text = "\n".join(
        [
            json.dumps({"subsystem": {"child": "sub", "parent": "S"}}),
            line(t=0, system="S", component="input", elements=["a"]),
            line(t=0, system="sub", component="input", elements=["b"]),
        ]
    )
    with pytest.raises(VarietyLabError, match="not-a-subsystem"):
        parse_trace(text)


def test_pair_coupling_checked():
    text = "\n".join(
        [
            json.dumps({"pair": {"system": "S", "environment": "E"}}),
            line(t=0, system="S", component="output", elements=["y1"]),
            line(t=0, system="E", component="input", elements=["a"]),
        ]
    )
    with pytest.raises(VarietyLabError, match="pair-coupling"):
        parse_trace(text)


CANONICAL = (
    '{"pair":{"system":"S","environment":"E"}}\n'
    '{"subsystem":{"child":"S.core","parent":"S"}}\n'
    '{"t":0,"system":"E","component":"input","elements":["a","b","y1"]}\n'
    '{"t":0,"system":"E","component":"output","elements":[]}\n'
    '{"t":0,"system":"S","component":"input","elements":["a"],"counts":{"a":4}}\n'
    '{"t":0,"system":"S","component":"output","elements":["y1"]}\n'
    '{"t":0,"system":"S.core","component":"input","elements":[]}\n'
    '{"t":0,"system":"S.core","component":"output","elements":["y1"]}\n'
)


def test_canonical_round_trip_is_byte_identical():
    assert serialize_trace(parse_trace(CANONICAL)) == CANONICAL


def test_serializer_canonicalizes():
    messy = "\n".join(
        [
            line(t=0, system="S", component="input", elements=["b", "a"]),
            json.dumps({"pair": {"system": "S", "environment": "E"}}),
        ]
    )
    out = serialize_trace(parse_trace(messy))
    assert out.splitlines()[0] == '{"pair":{"system":"S","environment":"E"}}'
    assert '"elements":["a","b"]' in out
    assert serialize_trace(parse_trace(out)) == out


labels = st.text(alphabet="abcxyz:->", min_size=1, max_size=4)


@st.composite
def traces(draw):
    snaps = []
    for system in draw(st.lists(st.sampled_from(["S", "E", "Q"]), unique=True, max_size=3)):
        for t in sorted(draw(st.sets(st.integers(0, 20), max_size=4))):
            ins = draw(st.frozensets(labels, max_size=4))
            outs = draw(st.frozensets(labels, max_size=4))
            counts = {}
            if ins and draw(st.booleans()):
                counts["input"] = {e: draw(st.integers(0, 9)) for e in ins}
            snaps.append(SystemSnapshot(system, t, ins, outs, counts))
    return Trace(tuple(snaps))


@given(traces())
def test_parse_is_left_inverse_of_serialize(trace):
    text = serialize_trace(trace)
    again = parse_trace(text)
    assert again == trace
    assert serialize_trace(again) == text


def exo_trace(env_inputs, sys_outputs):
    return Trace(
        (
            SystemSnapshot("S", 0, (), sys_outputs),
            SystemSnapshot("E", 0, env_inputs, ()),
        )
    )


@pytest.mark.parametrize(
    "env_inputs, sys_outputs, expected",
    [
        ({"a", "b", "y1"}, {"y1"}, {"a", "b"}),
        ({"a", "b"}, set(), {"a", "b"}),
        ({"y1", "y2"}, {"y1", "y2"}, set()),
    ],
)
def test_environment_exogenous_inputs(env_inputs, sys_outputs, expected):
    pair = ClosedSystemPair("S", "E")
    assert environment_exogenous_inputs(exo_trace(env_inputs, sys_outputs), pair, 0) == expected


def test_exogenous_inputs_missing_snapshot():
    with pytest.raises(VarietyLabError, match="missing-snapshot"):
        environment_exogenous_inputs(exo_trace({"a"}, set()), ClosedSystemPair("S", "E"), 5)


@given(st.frozensets(labels, max_size=6), st.frozensets(labels, max_size=6))
def test_exogenous_split_is_a_partition(env_inputs, sys_outputs):
    trace = Trace((SystemSnapshot("S", 0, (), sys_outputs), SystemSnapshot("E", 0, env_inputs, ())))
    exo = environment_exogenous_inputs(trace, ClosedSystemPair("S", "E"), 0)
    produced = sys_outputs & env_inputs
    assert exo | produced == env_inputs
    assert not exo & produced


def _parent_child_trace():
    return Trace(
        (
            SystemSnapshot("S", 0, {"a", "b"}, {"y"}),
            SystemSnapshot("S", 1, {"a", "c"}, {"y"}),
            SystemSnapshot("sub", 0, {"a"}, ()),
            SystemSnapshot("sub", 1, {"c"}, {"y"}),
        ),
        {"sub": "S"},
    )


def test_project_subsystem_filters():
    proj = project_subsystem(_parent_child_trace(), "sub")
    assert proj.systems() == ["sub"]
    assert len(proj) == 2


def test_project_subsystem_idempotent():
    once = project_subsystem(_parent_child_trace(), "sub")
    assert project_subsystem(once, "sub") == once


def test_project_subsystem_never_invents_elements():
    trace = _parent_child_trace()
    source = {e for s in trace.snapshots for e in s.inputs | s.outputs}
    proj = project_subsystem(trace, "sub")
    assert {e for s in proj.snapshots for e in s.inputs | s.outputs} <= source


def test_project_unknown_system():
    with pytest.raises(VarietyLabError, match="unknown-system"):
        project_subsystem(_parent_child_trace(), "nope")
