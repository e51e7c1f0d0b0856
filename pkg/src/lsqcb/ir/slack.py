from __future__ import annotations

from dataclasses import replace
from typing import Sequence

from .types import CircuitDag


def topo_order(n: int, edges: Sequence[tuple[int, int]]) -> list[int]:
    indeg = [0] * n
    succ: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        succ[a].append(b)
        indeg[b] += 1
    ready = [i for i in range(n) if indeg[i] == 0]
    ready.reverse()
    order = []
    while ready:
        v = ready.pop()
        order.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    if len(order) != n:
        raise ValueError("dependency graph has a cycle")
    return order


def earliest_latest(cycles: Sequence[int], edges: Sequence[tuple[int, int]]) -> tuple[list[int], list[int], int]:
    n = len(cycles)
    order = topo_order(n, edges)
    preds: list[list[int]] = [[] for _ in range(n)]
    succs: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        preds[b].append(a)
        succs[a].append(b)
    es = [0] * n
    for v in order:
        es[v] = max((es[p] + cycles[p] for p in preds[v]), default=0)
    makespan = max((es[v] + cycles[v] for v in range(n)), default=0)
    ls = [0] * n
    for v in reversed(order):
        ls[v] = min((ls[s] for s in succs[v]), default=makespan) - cycles[v]
    return es, ls, makespan


def critical_path(dag: CircuitDag) -> int:
    return earliest_latest([n.cycles for n in dag.nodes], dag.edges)[2]


def compute_slack(dag: CircuitDag) -> CircuitDag:
    es, ls, _ = earliest_latest([n.cycles for n in dag.nodes], dag.edges)
    nodes = tuple(node.with_(slack=ls[i] - es[i]) for i, node in enumerate(dag.nodes))
    return replace(dag, nodes=nodes)
