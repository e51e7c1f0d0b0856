"""Rule-based placement of registers, externs and IO on a board."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from ..errors import AllocationError
from ..ir.types import CircuitDag, ExternTemplate
from .board import EXTERN, FREE, IO, LOCAL, REGISTER, ROUTE, Cell, Qcb, Segment, neighbours

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Candidate:
    segment: Segment
    routes: tuple[Cell, ...]
    rule: int


# -- legality -------------------------------------------------------------


def _touches(qcb: Qcb, cell: Cell) -> bool:
    """Cell is, or is next to, an existing route cell (bus or pending)."""
    if qcb.is_routeish(cell):
        return True
    return any(qcb.is_routeish(nb) for nb in neighbours(cell))


def is_legal(qcb: Qcb, cand: Candidate) -> bool:
    seg_cells = cand.segment.cells()
    seg_set = set(seg_cells)
    for cell in seg_cells:
        if not qcb.inside(cell) or qcb.kind(cell) != FREE:
            return False
    routes = set(cand.routes)
    for cell in routes:
        if not qcb.inside(cell) or cell in seg_set or qcb.kind(cell) not in (FREE, ROUTE):
            return False
    has_routes = any(ROUTE in row for row in qcb.grid)
    if has_routes:
        for comp in qcb.components(routes):
            if not any(_touches(qcb, c) for c in comp):
                return False
    elif not routes:
        return False

    def supported(cell: Cell) -> bool:
        return cell in routes or qcb.is_routeish(cell)

    if cand.segment.kind == REGISTER:
        for r, c in seg_cells:
            if not (supported((r - 1, c)) or supported((r + 1, c))):
                return False
    elif cand.segment.kind == EXTERN:
        for r, c in cand.segment.bottom_edge:
            if not supported((r + 1, c)):
                return False
    return True


def commit(qcb: Qcb, cand: Candidate, label: str) -> Segment:
    qcb.add_routes(cand.routes)
    qcb.add_segment(cand.segment)
    qcb.refresh_pending()
    qcb.history.append((label, cand.rule))
    return cand.segment


def _walk(qcb: Qcb, start: Cell, dr: int, blocked: set[Cell]) -> list[Cell] | None:
    """Route column from ``start`` stepping ``dr`` rows until it meets a route."""
    out: list[Cell] = []
    cur = start
    while True:
        if not qcb.inside(cur) or cur in blocked or qcb.kind(cur) not in (FREE, ROUTE):
            return None
        out.append(cur)
        if _touches(qcb, cur):
            return out
        cur = (cur[0] + dr, cur[1])


def _run(qcb: Qcb, row: int, col: int, ok: Callable[[Cell], bool], limit: int) -> int:
    n = 0
    while n < limit and col + n < qcb.width and ok((row, col + n)):
        n += 1
    return n


def _free(qcb: Qcb) -> Callable[[Cell], bool]:
    return lambda cell: qcb.inside(cell) and qcb.kind(cell) == FREE


def _free_or_route(qcb: Qcb) -> Callable[[Cell], bool]:
    return lambda cell: qcb.inside(cell) and qcb.kind(cell) in (FREE, ROUTE)


# -- registers ---------------------------------------------------------------


def _register_candidate(qcb: Qcb, rule: int, r: int, c: int, request: int) -> Candidate | None:
    free, free_or_route = _free(qcb), _free_or_route(qcb)
    h, w = qcb.height, qcb.width
    if rule == 1:
        if (r, c) != (0, 0) or r + 1 >= h:
            return None
        length = min(_run(qcb, 0, 0, free, request), _run(qcb, 1, 0, free_or_route, w))
        if length < 1:
            return None
        routes = [(1, j) for j in range(w) if free_or_route((1, j))]
        return Candidate(Segment(0, 0, length, 1, REGISTER), tuple(routes), 1)
    if rule == 2:
        if r != 0 or c < 1 or r + 1 >= h:
            return None
        length = min(_run(qcb, 0, c, free, request), _run(qcb, 1, c, free_or_route, request))
        if length < 1:
            return None
        row = [(1, c + j) for j in range(length)]
        column = _walk(qcb, (0, c - 1), +1, set())
        if column is None:
            return None
        return Candidate(Segment(0, c, length, 1, REGISTER), tuple(column + row), 2)
    # rules 3-6 keep a route on the left of the register
    if c + 1 >= w:
        return None
    if rule == 3:
        if r < 1 or not free_or_route((r, c)):
            return None
        length = min(
            _run(qcb, r, c + 1, free, request),
            _run(qcb, r - 1, c + 1, qcb.is_bus, request),
        )
        if length < 1 or not qcb.is_bus((r - 1, c)):
            return None
        return Candidate(Segment(r, c + 1, length, 1, REGISTER), ((r, c),), 3)
    if r + 1 >= h or not free_or_route((r, c)):
        return None
    length = min(_run(qcb, r, c + 1, free, request), _run(qcb, r + 1, c + 1, free_or_route, request))
    if length < 1 or not free_or_route((r + 1, c)):
        return None
    row = [(r + 1, c + j) for j in range(length + 1)]
    seg = Segment(r, c + 1, length, 1, REGISTER)
    if rule == 4:
        if not any(qcb.is_bus(nb) for nb in neighbours((r, c))):
            return None
        return Candidate(seg, tuple([(r, c)] + row), 4)
    if rule == 5:
        column = _walk(qcb, (r, c), -1, set(seg.cells()))
    else:
        column = _walk(qcb, (r + 2, c), +1, set(seg.cells()))
        if column is not None:
            column = [(r, c)] + column
    if column is None:
        return None
    return Candidate(seg, tuple(column + row), rule)


REGISTER_RULES = (1, 2, 3, 4, 5, 6)


def find_register(qcb: Qcb, length: int) -> Candidate | None:
    if length < 1:
        raise ValueError("register length must be positive")
    for rule in REGISTER_RULES:
        for r in range(qcb.height):
            for c in range(qcb.width):
                cand = _register_candidate(qcb, rule, r, c, length)
                if cand is not None and is_legal(qcb, cand):
                    return cand
    return None


def place_register(qcb: Qcb, length: int) -> Segment:
    """Place a register of at most ``length`` patches using the first legal rule."""
    cand = find_register(qcb, length)
    if cand is None:
        raise AllocationError(f"no legal placement for a register on {qcb.width}x{qcb.height}", "no-legal-placement", "register")
    return commit(qcb, cand, "register")


# -- externs -------------------------------------------------------------------


def _extern_candidate(qcb: Qcb, rule: int, r: int, c: int, tpl: ExternTemplate) -> Candidate | None:
    tw, th = tpl.width, tpl.height
    seg = Segment(r, c, tw, th, EXTERN, tpl.name)
    below = r + th
    if below >= qcb.height or c + tw > qcb.width:
        return None
    row = [(below, c + j) for j in range(tw)]
    blocked = set(seg.cells())
    if rule == 1:
        if (r, c) != (0, 0):
            return None
        full = [(below, j) for j in range(qcb.width) if _free_or_route(qcb)((below, j))]
        return Candidate(seg, tuple(full), 1)
    if rule == 2:
        if not all(qcb.is_bus(cell) for cell in row):
            return None
        return Candidate(seg, (), 2)
    if rule == 3:
        if not any(_touches(qcb, cell) for cell in row):
            return None
        return Candidate(seg, tuple(row), 3)
    if rule in (4, 5) and r != 0:
        return None
    if rule in (4, 8):
        column = _walk(qcb, (below, c - 1), +1, blocked)
    elif rule in (5, 7):
        column = _walk(qcb, (below, c - 1), -1, blocked)
    else:  # 6: up the right hand side
        column = _walk(qcb, (below, c + tw), -1, blocked)
    if column is None:
        return None
    return Candidate(seg, tuple(row + column), rule)


EXTERN_RULES = (1, 2, 3, 4, 5, 6, 7, 8)


def find_extern(qcb: Qcb, tpl: ExternTemplate) -> Candidate | None:
    if tpl.width > qcb.width or tpl.height >= qcb.height:
        return None
    for rule in EXTERN_RULES:
        for r in range(qcb.height):
            for c in range(qcb.width):
                if qcb.kind((r, c)) != FREE:
                    continue
                cand = _extern_candidate(qcb, rule, r, c, tpl)
                if cand is not None and is_legal(qcb, cand):
                    return cand
    return None


def place_extern(qcb: Qcb, tpl: ExternTemplate) -> Segment:
    cand = find_extern(qcb, tpl)
    if cand is None:
        raise AllocationError(
            f"no legal placement for extern {tpl.name} ({tpl.width}x{tpl.height})", "no-legal-placement", tpl.name
        )
    return commit(qcb, cand, f"extern:{tpl.name}")


# -- IO ------------------------------------------------------------------------


def place_io(qcb: Qcb, count: int) -> Segment | None:
    """IO patches along the bottom-left, with a not-yet-joined route row above."""
    if count <= 0:
        return None
    if count > qcb.width:
        raise AllocationError(f"{count} IO patches exceed board width {qcb.width}", "bottom-row-occupied", "io")
    bottom = qcb.height - 1
    cells = [(bottom, j) for j in range(count)]
    above = [(bottom - 1, j) for j in range(count)]
    if any(qcb.kind(cell) != FREE for cell in cells):
        raise AllocationError("bottom row is occupied", "bottom-row-occupied", "io")
    if any(qcb.kind(cell) not in (FREE, ROUTE) for cell in above):
        raise AllocationError("patches above the IO are neither free nor route", "bottom-row-occupied", "io")
    seg = Segment(bottom, 0, count, 1, IO)
    qcb.add_segment(seg)
    qcb.add_routes(above, pending=True)
    # a route to the right of the IO, joined to the row above
    right = (bottom, count)
    if qcb.inside(right) and qcb.kind(right) == FREE and qcb.kind((bottom - 1, count)) in (FREE, ROUTE):
        qcb.add_routes([right, (bottom - 1, count)], pending=True)
    qcb.refresh_pending()
    qcb.io_count = count
    qcb.history.append(("io", 1))
    return seg


def join_io(qcb: Qcb) -> Qcb:
    """Connect the pending IO routes to the bus, climbing the left edge if possible."""
    qcb.refresh_pending()
    if not qcb.pending:
        return qcb
    bus = qcb.bus
    if not bus:
        # nothing else on the board: the IO island is the bus
        qcb.pending.clear()
        return qcb
    top = min(qcb.pending)
    climb: list[Cell] = []
    r, c = top[0] - 1, 0
    ok = qcb.kind((top[0], 0)) == ROUTE
    while ok:
        if r < 0 or qcb.kind((r, c)) not in (FREE, ROUTE):
            ok = False
            break
        if qcb.is_bus((r, c)):
            break
        climb.append((r, c))
        if any(qcb.is_bus(nb) for nb in neighbours((r, c))):
            break
        r -= 1
    if ok:
        qcb.add_routes(climb)
        qcb.history.append(("io-join", 1))
        if not qcb.pending:
            return qcb
    path = _bfs_join(qcb)
    if path is None:
        raise AllocationError("IO routes cannot be joined to the bus", "join-impossible", "io")
    qcb.add_routes(path)
    qcb.history.append(("io-join", 2))
    return qcb


def _bfs_join(qcb: Qcb) -> list[Cell] | None:
    sources = sorted(qcb.pending)
    prev: dict[Cell, Cell | None] = {s: None for s in sources}
    queue = deque(sources)
    while queue:
        cur = queue.popleft()
        if cur not in qcb.pending and any(qcb.is_bus(nb) for nb in neighbours(cur)):
            path = []
            while cur is not None and cur not in qcb.pending:
                path.append(cur)
                cur = prev[cur]
            return path
        if cur in qcb.pending and any(qcb.is_bus(nb) for nb in neighbours(cur)):
            return []
        for nb in neighbours(cur):
            if qcb.inside(nb) and nb not in prev and qcb.kind(nb) == FREE:
                prev[nb] = cur
                queue.append(nb)
    return None


# -- algorithms ------------------------------------------------------------------


def required_templates(dag: CircuitDag) -> list[ExternTemplate]:
    tpls = [dag.template(t) for t in dag.extern_types()]
    return sorted(tpls, key=lambda t: (-t.width, -t.height, t.name))


def initial_placement(dag: CircuitDag, width: int, height: int) -> Qcb:
    """Minimal board: one slot per extern type, IO, enough registers, IO joined."""
    qcb = Qcb(width, height)
    templates = required_templates(dag)
    io_count = len(dag.io)
    needed = len(dag.register_symbols)
    try:
        if templates:
            place_extern(qcb, templates[0])
        if io_count:
            place_io(qcb, io_count)
        for tpl in templates[1:]:
            place_extern(qcb, tpl)
        while qcb.register_count < needed:
            place_register(qcb, needed - qcb.register_count)
        if io_count:
            join_io(qcb)
    except AllocationError as exc:
        what = exc.element or "element"
        if what == "register":
            what = f"register {qcb.register_count + 1} of {needed}"
        raise AllocationError(
            f"allocation failure on {width}x{height}: cannot place {what} ({exc})", "allocation-failure", exc.element
        ) from exc
    return qcb


def split_largest_register(qcb: Qcb) -> bool:
    regs = [s for s in qcb.segments_of(REGISTER) if s.width >= 2]
    if not regs:
        return False
    seg = max(regs, key=lambda s: (s.width, -s.row, -s.col))
    mid = seg.width // 2
    cut = (seg.row, seg.col + mid)
    qcb.remove_segment(seg)
    for cell in seg.cells():
        qcb.set(cell, FREE)
    left = Segment(seg.row, seg.col, mid, 1, REGISTER)
    right = Segment(seg.row, seg.col + mid + 1, seg.width - mid - 1, 1, REGISTER)
    for part in (left, right):
        if part.width > 0:
            qcb.add_segment(part)
    qcb.add_routes([cut])
    qcb.history.append(("bus", 1))
    return True


def try_add_bus(qcb: Qcb, needed: int) -> Qcb | None:
    trial = qcb.copy()
    if not split_largest_register(trial):
        return None
    try:
        while trial.register_count < needed:
            place_register(trial, needed - trial.register_count)
    except AllocationError:
        return None
    return trial


def try_add_extern(qcb: Qcb, tpl: ExternTemplate) -> Qcb | None:
    trial = qcb.copy()
    cand = find_extern(trial, tpl)
    if cand is None:
        return None
    commit(trial, cand, f"extern:{tpl.name}")
    return trial


def fill_registers(qcb: Qcb) -> None:
    while True:
        cand = find_register(qcb, qcb.width)
        if cand is None:
            return
        commit(qcb, cand, "register")


def mark_local_routes(qcb: Qcb) -> None:
    for cell in qcb.cells_of(FREE):
        qcb.set(cell, LOCAL)


def optimize_placement(
    qcb: Qcb,
    dag: CircuitDag,
    estimator: Callable[[Qcb], int] | None = None,
    max_rounds: int | None = None,
) -> Qcb:
    """Greedily add extern slots or bus lanes while the estimate improves."""
    if estimator is None:
        from ..sched import qcb_estimator

        estimator = qcb_estimator(dag)
    qcb = qcb.copy()
    needed = len(dag.register_symbols)
    templates = required_templates(dag)
    current = estimator(qcb)
    rounds = 0
    while max_rounds is None or rounds < max_rounds:
        rounds += 1
        attempts: list[tuple[int, int, int, str, Qcb]] = []
        for rank, tpl in enumerate(templates):
            trial = try_add_extern(qcb, tpl)
            if trial is not None:
                attempts.append((estimator(trial), 0, rank, tpl.name, trial))
        trial = try_add_bus(qcb, needed)
        if trial is not None:
            attempts.append((estimator(trial), 1, 0, "bus", trial))
        if not attempts:
            break
        attempts.sort(key=lambda a: a[:3])
        best = attempts[0]
        if best[0] >= current:
            break
        log.debug("placement round %d: %s -> %d cycles", rounds, best[3], best[0])
        current, qcb = best[0], best[4]
    fill_registers(qcb)
    mark_local_routes(qcb)
    return qcb


def place_all(
    dag: CircuitDag, width: int, height: int, optimize: bool = True, estimator: Callable[[Qcb], int] | None = None
) -> Qcb:
    qcb = initial_placement(dag, width, height)
    if optimize:
        return optimize_placement(qcb, dag, estimator)
    fill_registers(qcb)
    mark_local_routes(qcb)
    return qcb


def register_runs(qcb: Qcb) -> list[Segment]:
    return sorted(qcb.segments_of(REGISTER), key=lambda s: (s.row, s.col))


def segment_cells(segments: Iterable[Segment]) -> list[Cell]:
    out: list[Cell] = []
    for s in segments:
        out.extend(s.cells())
    return out


__all__: Sequence[str] = (
    "Candidate",
    "find_extern",
    "find_register",
    "initial_placement",
    "is_legal",
    "join_io",
    "optimize_placement",
    "place_all",
    "place_extern",
    "place_io",
    "place_register",
)
