from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import circuits
from lsqcb.errors import ScheduleError
from lsqcb.ir import parse_circuit
from lsqcb.qcb import place_all
from lsqcb.sched import (
    Delta,
    HeuristicConfig,
    config_from_qcb,
    estimate_cycles,
    lower_bound,
    prepare,
    score_candidate,
)
from lsqcb.stdlib import generate_dag

T1 = (1, 1)
CCZ = (3, 2)


def cfg(channels=1, t=1, ccz=1):
    return HeuristicConfig(channels, {"T_factory": (T1,) * t, "CCZ_factory": (CCZ,) * ccz})


def two_cnots():
    return parse_circuit(
        {
            "registers": [{"name": "q", "size": 4}],
            "gates": [{"op": "CNOT", "args": ["q[0]", "q[1]"]}, {"op": "CNOT", "args": ["q[2]", "q[3]"]}],
        }
    )


def test_one_channel_serialises_nonlocal_gates():
    assert estimate_cycles(two_cnots(), HeuristicConfig(1)).makespan == 4
    assert estimate_cycles(two_cnots(), HeuristicConfig(2)).makespan == 2


def test_makespan_never_beats_critical_path():
    dag = generate_dag("adder", n=3)
    assert estimate_cycles(dag, cfg(4, 4)).makespan >= lower_bound(dag)


def test_missing_slot_is_unschedulable():
    dag = parse_circuit({"registers": [{"name": "q"}], "gates": [{"op": "T", "args": ["q"]}]})
    with pytest.raises(ScheduleError):
        estimate_cycles(dag, HeuristicConfig(1))


def test_undersized_slot_is_unschedulable():
    dag = parse_circuit({"registers": [{"name": "q", "size": 3}], "gates": [{"op": "CCZ", "args": ["q[0]", "q[1]", "q[2]"]}]})
    with pytest.raises(ScheduleError):
        estimate_cycles(dag, HeuristicConfig(1, {"CCZ_factory": ((2, 2),)}))


def test_one_slot_toffoli_terminates():
    dag = generate_dag("toffoli", strategy="t-dag")
    trace = estimate_cycles(dag, cfg(1, 1))
    assert trace.makespan > 0
    assert {o.slot for o in trace.occupancy} == {0}


def test_occupancy_intervals_do_not_overlap_per_slot():
    trace = estimate_cycles(generate_dag("mcx", n=4), cfg(2, 2))
    by_slot: dict = {}
    for o in trace.occupancy:
        by_slot.setdefault((o.template, o.slot), []).append((o.start, o.end))
    for ivs in by_slot.values():
        ivs.sort()
        assert all(a[1] <= b[0] for a, b in zip(ivs, ivs[1:]))


def test_score_candidate_prefers_useful_slots():
    dag = generate_dag("t-factory-15-1")
    base = HeuristicConfig(1, {"T_factory": (T1,)})
    assert score_candidate(dag, base, Delta.slot("T_factory", T1)) > 0
    assert score_candidate(dag, base, Delta.slot("CCZ_factory", CCZ)) == 0


def test_board_bridge_counts_slots_and_channels():
    dag = prepare(generate_dag("t-factory-15-1"))
    config = config_from_qcb(place_all(dag, 8, 8))
    assert config.slot_count("T_factory") >= 1 and config.routing_channels >= 1


def test_trace_document_shape():
    doc = estimate_cycles(two_cnots(), HeuristicConfig(1)).to_document()
    assert doc["format_version"] == 1 and doc["makespan"] == 4 and len(doc["nodes"]) == 2


def test_bad_channel_count():
    with pytest.raises(ValueError):
        HeuristicConfig(0)


@given(circuits(), st.integers(1, 3), st.integers(1, 3), st.integers(1, 2))
def test_estimate_is_monotone_in_resources(source, channels, t, ccz):
    dag = prepare(parse_circuit(source))
    base = estimate_cycles(dag, cfg(channels, t, ccz), prepared=True).makespan
    for more in (cfg(channels + 1, t, ccz), cfg(channels, t + 1, ccz), cfg(channels, t, ccz + 1)):
        assert estimate_cycles(dag, more, prepared=True).makespan <= base


@given(circuits())
def test_start_times_respect_dependencies(source):
    dag = prepare(parse_circuit(source))
    trace = estimate_cycles(dag, cfg(2, 2), prepared=True)
    for a, b in dag.edges:
        assert trace.start[b] >= trace.end[a]
