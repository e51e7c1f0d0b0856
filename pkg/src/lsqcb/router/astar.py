"""Shortest routes over free Route patches."""

from __future__ import annotations

import heapq
from typing import Iterable

from ..qcb.board import ROUTE, Cell, neighbours
from .state import BoardState


def find_path(
    state: BoardState,
    sources: Iterable[Cell],
    targets: Iterable[Cell],
    t0: int,
    t1: int,
    blocked: set[Cell] = frozenset(),
) -> list[Cell] | None:
    """A* from any source to any target through Route cells free over [t0, t1).

    Sources and targets must themselves be free Route cells; the returned path
    includes both ends. Ties on f break toward the lower row, then column.
    """
    qcb = state.qcb

    def ok(cell: Cell) -> bool:
        return (
            qcb.inside(cell)
            and qcb.kind(cell) == ROUTE
            and cell not in blocked
            and state.is_free(cell, t0, t1)
        )

    goal = {c for c in targets if ok(c)}
    if not goal:
        return None
    goal_list = sorted(goal)

    def h(cell: Cell) -> int:
        return min(abs(cell[0] - g[0]) + abs(cell[1] - g[1]) for g in goal_list)

    heap: list[tuple[int, int, int, Cell]] = []
    parent: dict[Cell, Cell | None] = {}
    best: dict[Cell, int] = {}
    for s in sorted(set(sources)):
        if ok(s):
            best[s] = 1
            parent[s] = None
            heapq.heappush(heap, (1 + h(s), s[0], s[1], s))
    while heap:
        _, _, _, cur = heapq.heappop(heap)
        if cur in goal:
            path = [cur]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path[::-1]
        g = best[cur]
        for nb in neighbours(cur):
            if nb in best and best[nb] <= g + 1:
                continue
            if not ok(nb):
                continue
            best[nb] = g + 1
            parent[nb] = cur
            heapq.heappush(heap, (g + 1 + h(nb), nb[0], nb[1], nb))
    return None
