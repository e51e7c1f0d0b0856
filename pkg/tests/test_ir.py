from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import circuits
from lsqcb.errors import MacroError, ParseError, ScheduleError, SynthesisError
from lsqcb.ir import (
    EXTERN_OP,
    ExternOp,
    ExternTemplate,
    RegisterSymbol,
    attach_extern_barriers,
    compute_slack,
    critical_path,
    expand_macros,
    parse_circuit,
    synthesize_rz,
)
from lsqcb.ir.barriers import barrier_node_edges, has_cycle
from lsqcb.ir.synth import STUB
from lsqcb.stdlib import generate_dag


def doc(gates, size=4, **extra):
    return {"registers": [{"name": "q", "size": size}], "gates": gates, **extra}


def g(op, *args, **params):
    out = {"op": op, "args": [f"q[{a}]" for a in args]}
    if params:
        out["params"] = params
    return out


def reachable(n, edges):
    succ = [[] for _ in range(n)]
    for a, b in edges:
        succ[a].append(b)
    reach = [set() for _ in range(n)]
    for v in reversed(range(n)):
        for w in succ[v]:
            reach[v] |= {w} | reach[w]
    return reach


# -- parse ---------------------------------------------------------------------


def test_empty_gate_list():
    dag = parse_circuit(doc([]))
    assert dag.nodes == () and dag.edges == ()


def test_serial_dependency_on_shared_operand():
    dag = parse_circuit(doc([g("H", 0), g("CNOT", 0, 1)]))
    assert len(dag.nodes) == 2 and dag.edges == ((0, 1),)


def test_disjoint_operands_have_no_edges():
    dag = parse_circuit(doc([g("CNOT", 0, 1), g("CNOT", 2, 3)]))
    assert len(dag.nodes) == 2 and dag.edges == ()


def test_costs_come_from_the_table():
    dag = parse_circuit(doc([g("H", 0), g("CNOT", 0, 1)]), costs={"H": 5, "CNOT": 7})
    assert [n.cycles for n in dag.nodes] == [5, 7]


@pytest.mark.parametrize(
    "source, code",
    [
        (doc([g("FOO", 0)]), "unknown-opcode"),
        (doc([g("CNOT", 0)]), "arity-mismatch"),
        (doc([g("H", 0, 1)]), "arity-mismatch"),
        ({"registers": [{"name": "q", "size": 1}, {"name": "q", "size": 2}], "gates": []}, "duplicate-register-declaration"),
        (doc([], colour="red"), "unknown-field"),
    ],
)
def test_parse_errors(source, code):
    with pytest.raises(ParseError) as info:
        parse_circuit(source)
    assert info.value.code == code


def test_t_gate_carries_one_extern_dependency():
    dag = parse_circuit(doc([g("T", 0), g("T", 1)]))
    refs = [n.extern_dep for n in dag.nodes]
    assert all(r is not None and r.template == "T_factory" for r in refs)
    assert refs[0] != refs[1]


def test_extern_op_node():
    tpl = ExternTemplate("ADD", 3, 2, (ExternOp("add", 2, 2, 10),))
    dag = parse_circuit(doc([g("ADD.add", 0, 1)], externs=[tpl.to_document()]))
    (node,) = dag.nodes
    assert node.kind == EXTERN_OP and node.extern_dep.template == "ADD"


def test_extern_io_arity_must_fit_width():
    with pytest.raises(ValueError):
        ExternTemplate("WIDE", 2, 2, (ExternOp("op", 3, 0, 1),))


def test_register_symbol_round_trip():
    s = RegisterSymbol("anc", 7)
    assert RegisterSymbol.parse(str(s)) == s


def test_extern_template_round_trip():
    tpl = ExternTemplate("F", 4, 3, (ExternOp("T", 0, 1, 9), ExternOp("reset", 1, 0, 2)), resettable=False)
    assert ExternTemplate.from_document(tpl.to_document()) == tpl


# -- macros ----------------------------------------------------------------------


SH = {"name": "SH", "formals": ["x"], "body": [{"op": "H", "args": ["x"]}, {"op": "S", "args": ["x"]}]}


def test_sh_macro_expansion():
    dag = expand_macros(parse_circuit(doc([g("SH", 3)], macros=[SH])))
    assert [(n.opcode, [str(s) for s in n.operands]) for n in dag.nodes] == [("H", ["q[3]"]), ("S", ["q[3]"])]


def test_empty_macro_adds_nothing():
    empty = {"name": "NOP", "formals": ["x"], "body": []}
    dag = expand_macros(parse_circuit(doc([g("NOP", 0)], macros=[empty])))
    assert dag.nodes == ()


def test_macro_locals_are_fresh_per_expansion():
    scratch = {
        "name": "TOF",
        "formals": ["a", "b", "c"],
        "body": [
            {"local": ["t"]},
            {"op": "CNOT", "args": ["a", "t"]},
            {"op": "CCZ", "args": ["t", "b", "c"]},
            {"op": "CNOT", "args": ["a", "t"]},
        ],
    }
    dag = expand_macros(parse_circuit(doc([g("TOF", 0, 1, 2), g("TOF", 0, 1, 2)], macros=[scratch])))
    assert len(dag.nodes) == 6
    locals_ = {s for n in dag.nodes for s in n.operands if s.name.startswith("TOF.")}
    assert len(locals_) == 2
    assert len(dag.symbols) == 4 + 2


def test_recursive_macro_rejected():
    loop = [
        {"name": "A", "formals": ["x"], "body": [{"op": "B", "args": ["x"]}]},
        {"name": "B", "formals": ["x"], "body": [{"op": "A", "args": ["x"]}]},
    ]
    with pytest.raises(MacroError) as info:
        expand_macros(parse_circuit(doc([g("A", 0)], macros=loop)))
    assert info.value.code == "recursive-macro"


def test_macro_arity_mismatch():
    with pytest.raises(ParseError) as info:
        parse_circuit(doc([g("SH", 0, 1)], macros=[SH]))
    assert info.value.code == "arity-mismatch"


@given(circuits())
def test_macro_expansion_is_idempotent(source):
    source = dict(source, macros=[SH])
    source["gates"] = source["gates"] + [g("SH", 0)]
    once = expand_macros(parse_circuit(source))
    twice = expand_macros(once)
    assert twice.nodes == once.nodes and twice.edges == once.edges


@given(circuits())
def test_topological_order_preserved_per_register(source):
    dag = parse_circuit(source)
    reach = reachable(len(dag.nodes), dag.edges)
    last: dict = {}
    for node in dag.nodes:
        for s in node.operands:
            if s in last:
                assert node.id in reach[last[s]]
            last[s] = node.id


# -- barriers ----------------------------------------------------------------------


def test_demand_within_supply_adds_no_barriers():
    dag = parse_circuit(doc([g("T", 0), g("T", 1)]))
    assert attach_extern_barriers(dag, {"T_factory": 2}).barriers == ()


def test_toffoli_with_two_slots_gets_five_barriers():
    dag = expand_macros(generate_dag("toffoli", strategy="t-dag"))
    assert sum(n.opcode in ("T", "TDG") for n in dag.nodes) == 7
    out = attach_extern_barriers(dag, {"T_factory": 2})
    assert len(out.barriers) == 5
    assert not has_cycle(len(out.nodes), list(out.edges) + barrier_node_edges(out))


def test_zero_slots_rejected():
    dag = parse_circuit(doc([g("T", 0)]))
    with pytest.raises(ScheduleError) as info:
        attach_extern_barriers(dag, {"T_factory": 0})
    assert info.value.code == "zero-slots"


def test_three_sequential_t_with_one_slot_terminate():
    from lsqcb.sched import HeuristicConfig, estimate_cycles

    dag = parse_circuit(doc([g("T", 0), g("T", 0), g("T", 0)]))
    trace = estimate_cycles(dag, HeuristicConfig(1, {"T_factory": ((1, 1),)}))
    assert trace.makespan >= 6


@given(circuits(), st.integers(1, 4), st.integers(1, 3))
def test_barriers_never_create_cycles(source, t_slots, ccz_slots):
    dag = parse_circuit(source)
    out = attach_extern_barriers(dag, {"T_factory": t_slots, "CCZ_factory": ccz_slots})
    assert not has_cycle(len(out.nodes), list(out.edges) + barrier_node_edges(out))


# -- slack ---------------------------------------------------------------------------


def test_chain_has_zero_slack():
    dag = compute_slack(parse_circuit(doc([g("H", 0), g("S", 0), g("H", 0)])))
    assert [n.slack for n in dag.nodes] == [0, 0, 0]


def test_diamond_short_branch_slack():
    # a CNOT fans out to a 3-cycle H and a 1-cycle PREP, which join in a second CNOT
    dag = compute_slack(parse_circuit(doc([g("CNOT", 0, 1), g("H", 0), g("PREP_Z", 1), g("CNOT", 0, 1)])))
    assert [n.slack for n in dag.nodes] == [0, 0, 2, 0]


def test_empty_dag_slack():
    assert compute_slack(parse_circuit(doc([]))).nodes == ()


@given(circuits())
def test_slack_soundness(source):
    dag = compute_slack(parse_circuit(source))
    span = critical_path(dag)
    preds = dag.predecessors()
    earliest = [0] * len(dag.nodes)
    for n in dag.nodes:
        earliest[n.id] = max((earliest[p] + dag.nodes[p].cycles for p in preds[n.id]), default=0)
    for v in dag.nodes:
        start = list(earliest)
        start[v.id] += v.slack
        # recompute successors as soon as possible given the delayed node
        for n in dag.nodes:
            if n.id != v.id:
                start[n.id] = max([earliest[n.id]] + [start[p] + dag.nodes[p].cycles for p in preds[n.id]])
        assert max((start[n.id] + n.cycles for n in dag.nodes), default=0) <= span
    if dag.nodes:
        assert min(n.slack for n in dag.nodes) == 0


# -- synthesis -----------------------------------------------------------------------


def test_exact_angles_bypass_synthesis():
    assert synthesize_rz(math.pi / 2, 1e-3) == ["S"]
    assert synthesize_rz(math.pi / 4, 1e-3) == ["T"]


def test_identity_within_epsilon_is_empty():
    assert synthesize_rz(1e-12, 1e-10) == []


def test_stub_is_deterministic_and_sized():
    seq = synthesize_rz(0.3, 1e-3)
    assert seq == synthesize_rz(0.3, 1e-3)
    assert len(seq) == math.ceil(3 * math.log2(1e3))
    assert not STUB.semantic


def test_provider_failure_is_reported():
    def broken(theta, eps):
        raise RuntimeError("offline")

    with pytest.raises(SynthesisError) as info:
        synthesize_rz(0.3, 1e-3, broken)
    assert info.value.code == "synthesis-provider-failure"


def test_rz_gate_expands_through_provider():
    dag = parse_circuit(doc([g("RZ", 0, theta=0.3)]), synth=lambda t, e: ["H", "T", "H"])
    assert [n.opcode for n in dag.nodes] == ["H", "T", "H"]
