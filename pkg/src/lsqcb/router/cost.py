"""Resource summary of a compiled circuit."""

from __future__ import annotations

from collections import Counter

from ..qcb.board import PATCH_TYPES


def cost_report(result) -> dict:
    """Cycle count, space-time volume and physical estimates at the device's code distance.

    Volumes are in patch-cycles. Physical figures scale a patch by d*d data
    qubits (2*d*d including measurement qubits) and a cycle by d rounds.
    """
    d = result.device.code_distance
    cycles = result.total_cycles
    breakdown = result.volume_breakdown
    volume = sum(breakdown.values())
    kinds = Counter(ins.kind for ins in result.instructions)
    tags = Counter(ins.tag for ins in result.instructions if ins.tag)
    qcb = result.qcb
    patches = {k: sum(row.count(k) for row in qcb.grid) for k in PATCH_TYPES}
    consumed = Counter(n.extern_dep.template for n in result.dag.nodes if n.extern_dep is not None)
    return {
        "format_version": 1,
        "name": result.dag.name,
        "total_cycles": cycles,
        "spacetime_volume": volume,
        "volume_breakdown": breakdown,
        "board": {"width": qcb.width, "height": qcb.height, "patches": patches},
        "nodes": len(result.dag.nodes),
        "rotations_injected": result.rotations_injected,
        "instructions": dict(sorted(kinds.items())),
        "bell_segments": tags.get("bell", 0),
        "extern_consumers": dict(sorted(consumed.items())),
        "policy": result.options.policy,
        "disjoint": result.options.disjoint,
        "code_distance": d,
        "physical": {
            "rounds": cycles * d,
            "data_qubits": qcb.width * qcb.height * d * d,
            "physical_qubits": qcb.width * qcb.height * 2 * d * d,
            "qubit_rounds": volume * 2 * d * d * d,
        },
    }
