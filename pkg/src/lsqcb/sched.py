"""DAG evaluation heuristic: slack-ordered list scheduling under a routing
channel semaphore and a finite pool of extern slots."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .errors import ScheduleError
from .ir.barriers import attach_extern_barriers
from .ir.parse import expand_macros
from .ir.slack import compute_slack
from .ir.types import MACRO, CircuitDag, ExternRef

Footprint = tuple[int, int]


@dataclass(frozen=True)
class HeuristicConfig:
    routing_channels: int = 1
    # extern type -> footprints (width, height) of the slots bound to it
    extern_slots: Mapping[str, tuple[Footprint, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.routing_channels < 1:
            raise ValueError("routing_channels must be >= 1")
        object.__setattr__(
            self, "extern_slots", {k: tuple(tuple(fp) for fp in v) for k, v in dict(self.extern_slots).items()}
        )

    def slot_count(self, template: str) -> int:
        return len(self.extern_slots.get(template, ()))

    def plus(self, delta: "Delta") -> "HeuristicConfig":
        if delta.kind == "channel":
            return HeuristicConfig(self.routing_channels + delta.count, self.extern_slots)
        slots = dict(self.extern_slots)
        slots[delta.template] = tuple(slots.get(delta.template, ())) + (delta.footprint,) * delta.count
        return HeuristicConfig(self.routing_channels, slots)


@dataclass(frozen=True)
class Delta:
    kind: str  # "channel" or "slot"
    template: str = ""
    footprint: Footprint = (1, 1)
    count: int = 1

    @classmethod
    def channel(cls, count: int = 1) -> "Delta":
        return cls("channel", count=count)

    @classmethod
    def slot(cls, template: str, footprint: Footprint, count: int = 1) -> "Delta":
        return cls("slot", template, tuple(footprint), count)


@dataclass(frozen=True)
class SlotInterval:
    template: str
    slot: int
    allocation: int
    start: int
    end: int


@dataclass
class ScheduleTrace:
    start: list[int]
    end: list[int]
    occupancy: list[SlotInterval]
    makespan: int
    routing_channels: int
    # slot index per allocation, reused by the router's locked binding policy
    slot_of: dict[ExternRef, int] = field(default_factory=dict)

    def active_nonlocal(self, dag: CircuitDag, cycle: int) -> int:
        return sum(
            1
            for n in dag.nodes
            if n.nonlocal_ and self.start[n.id] <= cycle < self.end[n.id]
        )

    def to_document(self) -> dict:
        return {
            "format_version": 1,
            "makespan": self.makespan,
            "routing_channels": self.routing_channels,
            "nodes": [{"id": i, "start": s, "end": e} for i, (s, e) in enumerate(zip(self.start, self.end))],
            "occupancy": [
                {"extern": o.template, "slot": o.slot, "allocation": o.allocation, "start": o.start, "end": o.end}
                for o in self.occupancy
            ],
        }


def prepare(dag: CircuitDag) -> CircuitDag:
    if any(n.kind == MACRO for n in dag.nodes):
        dag = expand_macros(dag)
    return compute_slack(dag)


def fitting_slots(dag: CircuitDag, config: HeuristicConfig) -> dict[str, list[int]]:
    """Per extern type, indices of configured slots whose footprint covers the template."""
    out: dict[str, list[int]] = {}
    for t in dag.extern_types():
        tpl = dag.template(t)
        fits = [i for i, (w, h) in enumerate(config.extern_slots.get(t, ())) if w >= tpl.width and h >= tpl.height]
        if not fits:
            raise ScheduleError(f"extern {t} ({tpl.width}x{tpl.height}) fits no configured slot", "unschedulable")
        out[t] = fits
    return out


def production_cycles(dag: CircuitDag, ref: ExternRef, first_consumer: int) -> int:
    node = dag.nodes[first_consumer]
    tpl = dag.template(ref.template)
    try:
        op = tpl.op(node.extern_op) if node.extern_op else None
    except KeyError:
        op = None
    return op.cycles if op is not None and op.is_factory else 0


def issue_order(dag: CircuitDag) -> list[int]:
    """Topological order that always takes the ready node of least slack, then DAG order."""
    n = len(dag.nodes)
    indeg = [0] * n
    succs: list[list[int]] = [[] for _ in range(n)]
    for a, b in dag.edges:
        succs[a].append(b)
        indeg[b] += 1
    heap = [(dag.nodes[i].slack, i) for i in range(n) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, v = heapq.heappop(heap)
        order.append(v)
        for w in succs[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, (dag.nodes[w].slack, w))
    if len(order) != n:
        raise ScheduleError("dependency graph has a cycle", "unschedulable")
    return order


def estimate_cycles(dag: CircuitDag, config: HeuristicConfig, prepared: bool = False) -> ScheduleTrace:
    """Schedule nodes one at a time in slack order (ties by DAG order).

    Each node starts at the earliest cycle that is no earlier than the
    previous node's start, after its predecessors end, while a routing
    channel is free (non-local nodes hold one for their whole duration) and
    once its extern allocation is ready. Allocations of a type are numbered
    by first consumer; allocation k runs on slot k mod s and may begin only
    after allocations 0..k-s have been released, which honours the extern
    barriers. Factory allocations produce eagerly from that moment.

    Because the issue order does not depend on the configuration, every
    start time is non-increasing in the channel count and in every slot
    count.
    """
    if not prepared:
        dag = prepare(dag)
    fits = fitting_slots(dag, config)
    counts = {t: len(v) for t, v in fits.items()}
    if counts and dict(dag.barrier_slots) != counts:
        dag = attach_extern_barriers(dag, counts)

    n = len(dag.nodes)
    preds = dag.predecessors()
    order = issue_order(dag)
    position = {v: k for k, v in enumerate(order)}

    # allocations numbered by first consumer in issue order
    consumers: dict[ExternRef, list[int]] = {}
    for v in order:
        ref = dag.nodes[v].extern_dep
        if ref is not None:
            consumers.setdefault(ref, []).append(v)
    by_type: dict[str, list[ExternRef]] = {}
    for ref in consumers:
        by_type.setdefault(ref.template, []).append(ref)
    index: dict[ExternRef, int] = {}
    slot_of: dict[ExternRef, int] = {}
    for t, refs in by_type.items():
        s = counts[t]
        if not dag.template(t).resettable and len(refs) > s:
            raise ScheduleError(f"non-resettable extern {t}: {len(refs)} allocations for {s} slots", "unschedulable")
        for k, ref in enumerate(refs):
            index[ref] = k
            slot_of[ref] = fits[t][k % s]
    prod = {ref: production_cycles(dag, ref, cs[0]) for ref, cs in consumers.items()}
    last_consumer = {ref: max(position[v] for v in cs) for ref, cs in consumers.items()}
    release_prefix: dict[str, list[int]] = {t: [] for t in by_type}
    release_at: dict[str, dict[int, int]] = {t: {} for t in by_type}
    avail: dict[ExternRef, int] = {}
    released: dict[ExternRef, int] = {}

    start = [0] * n
    end = [0] * n
    running: list[int] = []  # end cycles of issued non-local nodes
    prev = 0
    for pos, v in enumerate(order):
        node = dag.nodes[v]
        t = max([prev] + [end[p] for p in preds[v]])
        ref = node.extern_dep
        if ref is not None:
            if ref not in avail:
                k = index[ref]
                s = counts[ref.template]
                if k >= s:
                    prefix = release_prefix[ref.template]
                    if len(prefix) <= k - s:
                        raise ScheduleError(
                            f"allocation {ref.template}#{ref.instance} waits on an allocation still in use",
                            "unschedulable",
                        )
                    avail[ref] = prefix[k - s]
                else:
                    avail[ref] = 0
            t = max(t, avail[ref] + prod[ref])
        if node.nonlocal_:
            while running and running[0] <= t:
                heapq.heappop(running)
            while len(running) >= config.routing_channels:
                t = max(t, heapq.heappop(running))
                while running and running[0] <= t:
                    heapq.heappop(running)
        start[v] = t
        end[v] = t + node.cycles
        if node.nonlocal_ and node.cycles > 0:
            heapq.heappush(running, end[v])
        prev = t
        if ref is not None and last_consumer[ref] == pos:
            rel = max(end[c] for c in consumers[ref])
            released[ref] = rel
            prefix = release_prefix[ref.template]
            pending = release_at[ref.template]
            pending[index[ref]] = rel
            while len(prefix) in pending:
                r = pending.pop(len(prefix))
                prefix.append(max(r, prefix[-1]) if prefix else r)

    occupancy = sorted(
        (
            SlotInterval(ref.template, slot_of[ref], ref.instance, avail[ref], released[ref])
            for ref in consumers
        ),
        key=lambda o: (o.template, o.slot, o.start),
    )
    return ScheduleTrace(start, end, occupancy, max(end, default=0), config.routing_channels, slot_of)


def score_candidate(dag: CircuitDag, base: HeuristicConfig, delta: Delta) -> int:
    """Cycles saved by adding ``delta`` to ``base``; harmful additions score <= 0."""
    dag = prepare(dag)
    before = estimate_cycles(dag, base, prepared=True).makespan
    after = estimate_cycles(dag, base.plus(delta), prepared=True).makespan
    return before - after


# -- board bridge ---------------------------------------------------------------


def route_runs(route_cells: set[tuple[int, int]]) -> int:
    """Maximal horizontal and vertical route runs of length >= 2."""
    runs = 0
    for cell in route_cells:
        r, c = cell
        if (r, c - 1) not in route_cells and (r, c + 1) in route_cells:
            runs += 1
        if (r - 1, c) not in route_cells and (r + 1, c) in route_cells:
            runs += 1
    return runs


def config_from_qcb(qcb) -> HeuristicConfig:
    from .qcb.board import EXTERN, ROUTE

    routes = set(qcb.cells_of(ROUTE))
    slots: dict[str, list[Footprint]] = {}
    for seg in qcb.segments:
        if seg.kind == EXTERN and seg.extern_binding:
            slots.setdefault(seg.extern_binding, []).append((seg.width, seg.height))
    return HeuristicConfig(max(1, route_runs(routes)), {k: tuple(v) for k, v in slots.items()})


def qcb_estimator(dag: CircuitDag) -> Callable[[object], int]:
    prepared = prepare(dag)

    def estimate(qcb) -> int:
        return estimate_cycles(prepared, config_from_qcb(qcb), prepared=True).makespan

    return estimate


def lower_bound(dag: CircuitDag) -> int:
    from .ir.slack import critical_path

    return critical_path(prepare(dag))


__all__: Sequence[str] = (
    "Delta",
    "HeuristicConfig",
    "ScheduleTrace",
    "config_from_qcb",
    "estimate_cycles",
    "qcb_estimator",
    "score_candidate",
)
