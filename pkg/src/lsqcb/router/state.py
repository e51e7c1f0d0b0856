"""Board state during routing: per-patch lock timelines and orientations."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from ..qcb.board import Cell, Qcb, Segment


@dataclass
class Slot:
    """An extern segment on the board that allocations are bound to."""

    index: int
    segment: Segment
    template: str  # type the segment was placed for
    free_at: int = 0
    holder: object | None = None  # ExternRef currently bound

    @property
    def footprint(self) -> tuple[int, int]:
        return (self.segment.width, self.segment.height)

    def io_cell(self, position: int) -> Cell:
        r, c = self.segment.bottom_edge[position]
        return (r, c)


@dataclass
class BoardState:
    qcb: Qcb
    locks: dict[Cell, list[tuple[int, int]]] = field(default_factory=dict)
    rotated: set[Cell] = field(default_factory=set)
    slots: list[Slot] = field(default_factory=list)

    @classmethod
    def for_board(cls, qcb: Qcb) -> "BoardState":
        from ..qcb.board import EXTERN

        slots = [
            Slot(i, seg, seg.extern_binding or "")
            for i, seg in enumerate(s for s in qcb.segments if s.kind == EXTERN)
        ]
        return cls(qcb, slots=slots)

    def is_free(self, cell: Cell, t0: int, t1: int) -> bool:
        if t1 <= t0:
            return True
        ivs = self.locks.get(cell)
        if not ivs:
            return True
        # intervals never overlap, so ends are sorted along with starts
        i = bisect.bisect_left(ivs, (t1, -1))
        return i == 0 or ivs[i - 1][1] <= t0

    def lock(self, cell: Cell, t0: int, t1: int) -> None:
        if t1 <= t0:
            return
        if not self.is_free(cell, t0, t1):
            raise AssertionError(f"double lock on {cell} [{t0},{t1})")
        bisect.insort(self.locks.setdefault(cell, []), (t0, t1))

    def last_used(self, cell: Cell, before: int) -> int | None:
        """End of the latest lock on ``cell`` that starts before ``before``."""
        ivs = self.locks.get(cell)
        if not ivs:
            return None
        ends = [e for s, e in ivs if s < before]
        return max(ends) if ends else None

    def is_rotated(self, cell: Cell) -> bool:
        return cell in self.rotated

    def toggle(self, cell: Cell) -> None:
        self.rotated ^= {cell}
