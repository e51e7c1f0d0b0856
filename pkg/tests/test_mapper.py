from __future__ import annotations

from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import circuits
from lsqcb.errors import AllocationError
from lsqcb.ir import parse_circuit
from lsqcb.mapper import (
    ROTATE_PREFERRED,
    ROUTE_PREFERRED,
    QubitMap,
    build_tree,
    contention,
    map_qubits,
)
from lsqcb.qcb import FREE, IO, REGISTER, place_all, validate_qcb
from lsqcb.sched import prepare
from lsqcb.stdlib import generate_dag


def mapped(source, side=7, optimize=True):
    dag = prepare(parse_circuit(source) if isinstance(source, dict) else source)
    qcb = place_all(dag, side, side, optimize=optimize)
    return dag, qcb, *map_qubits(qcb, dag)


def test_tree_covers_every_register_run():
    dag = prepare(generate_dag("adder", n=3))
    qcb = place_all(dag, 8, 8)
    tree = build_tree(qcb)
    assert tree.capacity == qcb.register_count
    regs = {leaf.segment for leaf in tree.leaves if leaf.segment.kind == REGISTER}
    assert regs == set(qcb.segments_of(REGISTER))


def test_contention_counts_shared_gates():
    dag = parse_circuit(
        {
            "registers": [{"name": "q", "size": 3}],
            "gates": [{"op": "CNOT", "args": ["q[0]", "q[1]"]}, {"op": "CNOT", "args": ["q[1]", "q[0]"]}],
        }
    )
    pairs = contention(dag)
    assert max(pairs.values()) == 2


def test_io_symbols_land_on_io_patches():
    dag, _, clean, qmap, _ = mapped(generate_dag("qram-bb", addr=1), side=8)
    for io in dag.io:
        assert clean.kind(qmap.cell(io.symbol)) == IO


@given(circuits(max_qubits=8), st.integers(5, 9), st.booleans())
def test_mapping_is_injective_and_clean(source, side, optimize):
    try:
        dag, _, clean, qmap, _ = mapped(source, side, optimize)
    except AllocationError:
        assume(False)
    cells = list(qmap.positions.values())
    assert len(cells) == len(set(cells))
    assert set(qmap.positions) == set(dag.symbols)
    assert all(clean.kind(qmap.cell(s)) == REGISTER for s in dag.register_symbols)
    assert not clean.cells_of(FREE)
    assert validate_qcb(clean, dag) == []
    assert set(qmap.orientation.values()) <= {ROUTE_PREFERRED, ROTATE_PREFERRED}


@given(circuits(max_qubits=8))
def test_qubit_map_round_trip(source):
    try:
        _, _, _, qmap, _ = mapped(source)
    except AllocationError:
        assume(False)
    assert QubitMap.from_document(qmap.to_document()) == qmap


@given(circuits(max_qubits=8))
def test_mapping_is_deterministic(source):
    try:
        a = mapped(source)
    except AllocationError:
        assume(False)
    b = mapped(source)
    assert a[2] == b[2] and a[3] == b[3]
