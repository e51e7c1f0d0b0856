from __future__ import annotations

from dataclasses import replace
from typing import Mapping

from ..errors import ScheduleError
from .types import CircuitDag, ExternRef


def allocations_by_type(dag: CircuitDag) -> dict[str, list[ExternRef]]:
    out: dict[str, list[ExternRef]] = {}
    for ref in dag.allocations():
        out.setdefault(ref.template, []).append(ref)
    return out


def barrier_node_edges(dag: CircuitDag) -> list[tuple[int, int]]:
    """Barriers lowered to node edges: consumer of k-s -> each consumer of k."""
    allocs = dag.allocations()
    edges = []
    for consumer, ref in dag.barriers:
        for target in allocs[ref]:
            edges.append((consumer, target))
    return edges


def has_cycle(n: int, edges: list[tuple[int, int]]) -> bool:
    indeg = [0] * n
    succ: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        if a == b:
            return True
        succ[a].append(b)
        indeg[b] += 1
    stack = [i for i in range(n) if indeg[i] == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    return seen != n


def attach_extern_barriers(dag: CircuitDag, slots: Mapping[str, int]) -> CircuitDag:
    """Block the k-th allocation of each extern type on every consumer of allocation k - slots.

    Allocations are numbered by first consumer in DAG order, so allocation k
    always lands on slot k mod slots. Raises ``ScheduleError`` when an extern
    type has no slot, or when shared allocations make the wrap-around
    impossible without a cycle.
    """
    by_type = allocations_by_type(dag)
    allocs = dag.allocations()
    barriers: list[tuple[int, ExternRef]] = []
    for tname, refs in by_type.items():
        s = int(slots.get(tname, 0))
        if s < 1:
            raise ScheduleError(f"extern type {tname} has no slots", "zero-slots")
        for k in range(s, len(refs)):
            for consumer in allocs[refs[k - s]]:
                barriers.append((consumer, refs[k]))
    out = replace(dag, barriers=tuple(barriers), barrier_slots={t: int(slots[t]) for t in by_type})
    if barriers and has_cycle(len(dag.nodes), list(dag.edges) + barrier_node_edges(out)):
        raise ScheduleError("extern allocations overlap beyond the available slots", "unschedulable")
    return out
