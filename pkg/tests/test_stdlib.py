from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lsqcb.errors import LsqcbError
from lsqcb.ir import EXTERN_OP, expand_macros, parse_circuit
from lsqcb.stdlib import (
    FAMILIES,
    CircuitBuilder,
    ClassicalError,
    classical_simulate,
    gen_adder,
    gen_ccz_distillery,
    gen_cnot_network,
    gen_divider,
    gen_mcx,
    gen_multiplier,
    gen_qft,
    gen_qram_bb,
    gen_qram_fanout_swap,
    gen_rz,
    gen_t_factory,
    gen_toffoli,
    generate,
)
from lsqcb.stdlib.networks import mcx_ancillae


def count(dag, *opcodes):
    return sum(n.opcode in opcodes for n in expand_macros(dag).nodes)


def address_index(addr, bits):
    # a[0] is the most significant address bit
    return sum(((addr >> level) & 1) << (bits - 1 - level) for level in range(bits))


def extern_depth(dag):
    """Longest chain of extern-op nodes through the dependency graph."""
    depth = [0] * len(dag.nodes)
    preds = dag.predecessors()
    for n in dag.nodes:
        here = 1 if n.kind == EXTERN_OP else 0
        depth[n.id] = here + max((depth[p] for p in preds[n.id]), default=0)
    return max(depth, default=0)


# -- arithmetic oracles ---------------------------------------------------------------


@given(st.integers(1, 5), st.data())
def test_adder_matches_integer_addition(n, data):
    a = data.draw(st.integers(0, 2**n - 1))
    b = data.draw(st.integers(0, 2**n - 1))
    state = classical_simulate(gen_adder(n), {"a": a, "b": b}, clean=["c"])
    assert state.value("b") == a + b and state.value("a") == a


@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_multiplier_matches_integer_product(a_bits, b_bits, data):
    x = data.draw(st.integers(0, 2**a_bits - 1))
    y = data.draw(st.integers(0, 2**b_bits - 1))
    dag = gen_multiplier(a_bits, b_bits)
    clean = ["s"] if b_bits > 1 else []
    state = classical_simulate(dag, {"x": x, "y": y}, clean=clean)
    assert state.value("out") == x * y
    assert (state.value("x"), state.value("y")) == (x, y)
    assert dict(dag.registers)["out"] == a_bits + b_bits + 1


@given(st.integers(1, 5), st.data())
def test_divider_matches_when_quotient_fits(a_bits, data):
    b_bits = data.draw(st.integers(1, a_bits))
    d = data.draw(st.integers(1, 2**b_bits - 1))
    limit = min(2**a_bits - 1, d * 2 ** (a_bits - b_bits + 1) - 1)
    n = data.draw(st.integers(0, limit))
    dag = gen_divider(a_bits, b_bits)
    state = classical_simulate(dag, {"n": n, "d": d}, clean=["s"])
    assert (state.value("q"), state.value("r")) == (n // d, n % d)
    regs = dict(dag.registers)
    assert regs["q"] == a_bits - b_bits + 1 and regs["r"] == a_bits + 1


@pytest.mark.parametrize("strategy", ["t-dag", "ccz", "extern"])
def test_toffoli_strategies_agree_classically(strategy):
    dag = gen_toffoli(strategy)
    for v in range(8):
        out = classical_simulate(dag, {"q": v}).value("q")
        assert out == v ^ (4 if v & 3 == 3 else 0)


@given(st.integers(1, 6), st.data())
def test_mcx_is_a_multi_controlled_not(n, data):
    c = data.draw(st.integers(0, 2**n - 1))
    state = classical_simulate(gen_mcx(n), {"c": c}, clean=["anc"] if mcx_ancillae(n) else [])
    assert state.value("t") == (1 if c == 2**n - 1 else 0)


@pytest.mark.parametrize("gen", [gen_qram_bb, gen_qram_fanout_swap])
@given(st.integers(1, 3), st.integers(1, 2), st.data())
def test_qram_reads_the_addressed_word(gen, addr_bits, word_bits, data):
    addr = data.draw(st.integers(0, 2**addr_bits - 1))
    memory = data.draw(st.integers(0, 2 ** (2**addr_bits * word_bits) - 1))
    dag = gen(addr_bits, word_bits)
    clean = [r for r in ("r", "k", "f") if r in dict(dag.registers)]
    state = classical_simulate(dag, {"a": addr, "m": memory}, clean=clean)
    k = address_index(addr, addr_bits)
    assert state.value("out") == (memory >> (k * word_bits)) & (2**word_bits - 1)
    assert state.value("m") == memory and state.value("a") == addr


# -- census --------------------------------------------------------------------------


def test_toffoli_t_dag_has_seven_t_gates():
    assert count(gen_toffoli("t-dag"), "T", "TDG") == 7


def test_toffoli_extern_is_a_single_extern_node():
    nodes = expand_macros(gen_toffoli("extern")).nodes
    assert len(nodes) == 1 and nodes[0].kind == EXTERN_OP


def test_toffoli_ccz_uses_ccz_and_local_hadamards():
    dag = gen_toffoli("ccz")
    assert count(dag, "CCZ") == 1 and count(dag, "H") == 2


def test_factories_consume_the_quoted_states():
    for style in ("parallel", "slice"):
        dag = gen_t_factory(1, style)
        assert sum(n.extern_dep is not None for n in expand_macros(dag).nodes) == 15
        assert len(dag.io) == 1
    assert sum(n.extern_dep is not None for n in expand_macros(gen_ccz_distillery()).nodes) == 8
    assert len(gen_ccz_distillery().io) == 3


def test_level_two_factory_needs_lower_template():
    with pytest.raises(ValueError):
        gen_t_factory(2)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_fanout_swap_depth_is_two_layers_per_address_bit(n):
    assert extern_depth(expand_macros(gen_qram_fanout_swap(n, 1))) == 2 * n


def test_cnot_network_shape_and_seeding():
    dag = gen_cnot_network(8, 100, seed=3)
    assert count(dag, "CNOT") == 400
    assert gen_cnot_network(8, 5, 1).nodes == gen_cnot_network(8, 5, 1).nodes
    assert gen_cnot_network(8, 5, 1).nodes != gen_cnot_network(8, 5, 2).nodes


def test_qft_extern_mode():
    dag = gen_qft(4, "extern")
    ext = [n for n in dag.nodes if n.kind == EXTERN_OP]
    assert len(ext) == 6
    assert {dag.template(n.extern_dep.template).footprint for n in ext} == {(2, 2)}
    assert count(gen_qft(4), "H") >= 4


def test_rz_near_identity_is_empty_and_exact_angles_are_exact():
    assert gen_rz(1e-12, 1e-10).nodes == ()
    assert [n.opcode for n in gen_rz(math.pi / 4).nodes] == ["T"]


def test_every_family_parses():
    for family in FAMILIES:
        doc = generate(family)
        assert parse_circuit(doc).nodes


def test_unknown_family_and_bad_parameters():
    with pytest.raises(ValueError):
        generate("nope")
    with pytest.raises(TypeError):
        generate("adder", width=3)
    with pytest.raises(ValueError):
        generate("cnot-network", n=3)


# -- builder and simulator -------------------------------------------------------------


def test_builder_document_round_trips_through_parser():
    b = CircuitBuilder("demo")
    q = b.register("q", 2)
    b.gate("CNOT", q[0], q[1])
    b.output(q[1])
    dag = parse_circuit(b.document())
    assert dag.name == "demo" and len(dag.io) == 1 and len(dag.nodes) == 1


def test_simulator_rejects_non_classical_gates():
    dag = parse_circuit({"registers": [{"name": "q"}], "gates": [{"op": "H", "args": ["q"]}]})
    with pytest.raises(ClassicalError) as info:
        classical_simulate(dag)
    assert info.value.code == "non-classical-gate"


def test_simulator_checks_clean_registers():
    dag = parse_circuit({"registers": [{"name": "q"}, {"name": "anc"}], "gates": [{"op": "CNOT", "args": ["q", "anc"]}]})
    with pytest.raises(LsqcbError):
        classical_simulate(dag, {"q": 1}, clean=["anc"])
