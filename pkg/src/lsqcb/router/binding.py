"""Binding extern allocations to extern segments on the board."""

from __future__ import annotations

from typing import Mapping, Sequence

from ..errors import BindingError
from ..ir.types import CircuitDag, ExternRef
from .state import BoardState, Slot

HEURISTIC = "heuristic"
FIFO = "fifo"
SHARED = "shared"
POLICIES = (HEURISTIC, FIFO, SHARED)

NEVER = float("inf")


def _fits(slot: Slot, dag: CircuitDag, template: str) -> bool:
    tpl = dag.template(template)
    w, h = slot.footprint
    return w >= tpl.width and h >= tpl.height


def check_footprints(
    state: BoardState, dag: CircuitDag, requests: Sequence[ExternRef], policy: str
) -> dict[str, list[Slot]]:
    """Slots each requested type may use; raises when some type has none."""
    if policy not in POLICIES:
        raise ValueError(f"unknown binding policy {policy!r}; choose from {POLICIES}")
    out: dict[str, list[Slot]] = {}
    for t in dict.fromkeys(r.template for r in requests):
        if policy == SHARED:
            slots = [s for s in state.slots if _fits(s, dag, t)]
        else:
            slots = [s for s in state.slots if s.template == t and _fits(s, dag, t)]
        if not slots:
            tpl = dag.template(t)
            raise BindingError(
                f"no extern segment on the board fits {t} ({tpl.width}x{tpl.height}) under policy {policy}",
                "footprint-unsatisfiable",
            )
        out[t] = slots
    return out


class Binder:
    """Grants slots to allocation requests.

    ``heuristic`` replays the slot chosen for each allocation by the
    scheduling heuristic. ``fifo`` keeps one queue per extern type and hands
    the oldest request the lowest-numbered free slot placed for that type.
    ``shared`` keeps one queue for everything and lets any free slot whose
    footprint covers the template serve it.
    """

    def __init__(
        self,
        state: BoardState,
        dag: CircuitDag,
        requests: Sequence[ExternRef],
        policy: str = HEURISTIC,
        slot_of: Mapping[ExternRef, int] | None = None,
    ) -> None:
        self.state = state
        self.dag = dag
        self.policy = policy
        self.bound: dict[ExternRef, Slot] = {}
        self.candidates = check_footprints(state, dag, requests, policy)
        if policy == HEURISTIC:
            if slot_of is None and requests:
                raise ValueError("heuristic binding needs the heuristic's slot assignment")
            self.queues: dict[object, list[ExternRef]] = {}
            for ref in requests:
                placed = [s for s in state.slots if s.template == ref.template]
                slot = placed[slot_of[ref]]  # type: ignore[index]
                self.queues.setdefault(slot.index, []).append(ref)
        elif policy == FIFO:
            self.queues = {}
            for ref in requests:
                self.queues.setdefault(ref.template, []).append(ref)
        else:
            self.queues = {"*": list(requests)}

    @property
    def waiting(self) -> int:
        return sum(len(q) for q in self.queues.values())

    def _free(self, slot: Slot, t: int) -> bool:
        return slot.holder is None and slot.free_at <= t

    def bind(self, t: int) -> list[tuple[ExternRef, Slot]]:
        granted: list[tuple[ExternRef, Slot]] = []

        def grant(ref: ExternRef, slot: Slot) -> None:
            slot.holder = ref
            self.bound[ref] = slot
            granted.append((ref, slot))

        if self.policy == HEURISTIC:
            for idx, queue in self.queues.items():
                slot = self.state.slots[idx]
                if queue and self._free(slot, t):
                    grant(queue.pop(0), slot)
        else:
            for queue in self.queues.values():
                while queue:
                    free = [s for s in self.candidates[queue[0].template] if self._free(s, t)]
                    if not free:
                        break
                    grant(queue.pop(0), min(free, key=lambda s: s.index))
        return granted

    def release(self, ref: ExternRef, at: int) -> Slot:
        slot = self.bound[ref]
        slot.holder = None
        slot.free_at = at if self.dag.template(ref.template).resettable else NEVER
        return slot
