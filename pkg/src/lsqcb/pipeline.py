"""End-to-end compilation: parse, place, map, route."""

from __future__ import annotations

import logging
from typing import Any, Mapping

from .device import DeviceSpec
from .errors import AllocationError
from .ir.parse import parse_circuit
from .ir.types import CircuitDag
from .mapper import map_qubits
from .qcb.placement import place_all
from .qcb.validate import validate_qcb
from .router import CompilationResult, CompileOptions, compile_program
from .sched import prepare

log = logging.getLogger(__name__)


def load_dag(circuit: CircuitDag | Mapping[str, Any], device: DeviceSpec, synth=None) -> CircuitDag:
    if isinstance(circuit, CircuitDag):
        return prepare(circuit)
    return prepare(parse_circuit(circuit, costs=device.gate_costs, synth=synth))


def compile_circuit(
    circuit: CircuitDag | Mapping[str, Any],
    device: DeviceSpec,
    policy: str = "heuristic",
    disjoint: bool = False,
    optimize: bool = True,
    synth=None,
) -> CompilationResult:
    """Compile a circuit document (or an already-built DAG) onto ``device``.

    The result is deterministic for identical inputs.
    """
    dag = load_dag(circuit, device, synth)
    log.info("%s: %d nodes, %d symbols", dag.name, len(dag.nodes), len(dag.symbols))
    qcb = place_all(dag, device.width, device.height, optimize=optimize)
    log.info("placement:\n%s", qcb.to_text())
    clean, qmap, _ = map_qubits(qcb, dag, device.z_sides)
    problems = validate_qcb(clean, dag)
    if problems:
        first = problems[0]
        raise AllocationError(f"board fails validation: {first.code} at {first.cell}: {first.detail}")
    return compile_program(dag, clean, qmap, device, CompileOptions(policy=policy, disjoint=disjoint))


def smallest_board(
    circuit: CircuitDag | Mapping[str, Any], start: int | None = None, limit: int = 64, **device_args: Any
) -> DeviceSpec:
    """Smallest square device on which the circuit places and maps cleanly."""
    probe = DeviceSpec(2, 2, **device_args)
    dag = load_dag(circuit, probe)
    area = len(dag.symbols) * 2 + sum(t.width * t.height for t in (dag.template(x) for x in dag.extern_types()))
    widest = max([t.width + 1 for t in (dag.template(x) for x in dag.extern_types())] + [len(dag.io), 2])
    side = max(start or 0, widest, int(area**0.5))
    while side <= limit:
        try:
            qcb = place_all(dag, side, side, optimize=False)
            clean, _, _ = map_qubits(qcb, dag, probe.z_sides)
            if not validate_qcb(clean, dag):
                return DeviceSpec(side, side, **device_args)
        except AllocationError:
            pass
        side += 1
    raise AllocationError(f"{dag.name} does not fit a {limit}x{limit} board", element="board")


def factory_tower(level: int, style: str = "parallel", **device_args: Any) -> tuple[dict, list]:
    """Circuit document of a level-``level`` T factory and the templates beneath it.

    Each lower level is compiled on its smallest square board and packaged
    as the extern consumed by the level above.
    """
    from .router import package_as_extern
    from .stdlib.factories import t_factory_document

    lower = None
    templates = []
    for k in range(1, level):
        doc = t_factory_document(k, style, lower)
        device = smallest_board(doc, **device_args)
        result = compile_circuit(doc, device, optimize=False)
        lower = package_as_extern(result, f"T15_L{k}", "T")
        templates.append(lower)
        log.info("level %d factory: %dx%d, %d cycles", k, device.width, device.height, result.total_cycles)
    return t_factory_document(level, style, lower), templates
