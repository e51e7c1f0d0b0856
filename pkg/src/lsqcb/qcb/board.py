"""Quantum circuit board: a typed grid of surface-code patches."""

from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

REGISTER = "Register"
ROUTE = "Route"
LOCAL = "LocalRoute"
EXTERN = "Extern"
IO = "IO"
FREE = "Unallocated"

PATCH_TYPES = (REGISTER, ROUTE, LOCAL, EXTERN, IO, FREE)
GLYPHS = {REGISTER: "R", ROUTE: "B", LOCAL: "L", EXTERN: "E", IO: "I", FREE: "."}
FROM_GLYPH = {v: k for k, v in GLYPHS.items()}

Cell = tuple[int, int]  # (row, col)


def neighbours(cell: Cell) -> Iterator[Cell]:
    r, c = cell
    yield (r - 1, c)
    yield (r + 1, c)
    yield (r, c - 1)
    yield (r, c + 1)


@dataclass(frozen=True)
class Segment:
    row: int
    col: int
    width: int
    height: int
    kind: str
    extern_binding: str | None = None

    def cells(self) -> list[Cell]:
        return [(self.row + i, self.col + j) for i in range(self.height) for j in range(self.width)]

    @property
    def bottom_edge(self) -> list[Cell]:
        r = self.row + self.height - 1
        return [(r, self.col + j) for j in range(self.width)]

    def to_document(self) -> dict:
        doc = {"row": self.row, "col": self.col, "width": self.width, "height": self.height, "kind": self.kind}
        if self.extern_binding is not None:
            doc["extern"] = self.extern_binding
        return doc

    @classmethod
    def from_document(cls, doc: dict) -> "Segment":
        return cls(doc["row"], doc["col"], doc["width"], doc["height"], doc["kind"], doc.get("extern"))


class Qcb:
    """Mutable board. ``grid[r][c]`` holds the patch type of each cell.

    Register, Extern and IO cells are additionally grouped into segments.
    Route cells in ``pending`` belong to the IO island and are not yet part
    of the bus.
    """

    def __init__(self, width: int, height: int) -> None:
        if width < 2 or height < 2:
            raise ValueError("board must be at least 2x2")
        self.width = width
        self.height = height
        self.grid: list[list[str]] = [[FREE] * width for _ in range(height)]
        self.segments: list[Segment] = []
        self.pending: set[Cell] = set()
        self.io_count = 0
        # rule index used by each committed placement, for tracing
        self.history: list[tuple[str, int]] = []

    # -- basic queries ---------------------------------------------------
    def inside(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.height and 0 <= cell[1] < self.width

    def kind(self, cell: Cell) -> str:
        return self.grid[cell[0]][cell[1]]

    def cells(self) -> Iterator[Cell]:
        for r in range(self.height):
            for c in range(self.width):
                yield (r, c)

    def cells_of(self, kind: str) -> list[Cell]:
        return [cell for cell in self.cells() if self.kind(cell) == kind]

    def is_bus(self, cell: Cell) -> bool:
        return self.inside(cell) and self.kind(cell) == ROUTE and cell not in self.pending

    def is_routeish(self, cell: Cell) -> bool:
        return self.inside(cell) and self.kind(cell) == ROUTE

    @property
    def bus(self) -> set[Cell]:
        return {c for c in self.cells_of(ROUTE) if c not in self.pending}

    @property
    def free_count(self) -> int:
        return sum(row.count(FREE) for row in self.grid)

    @property
    def register_cells(self) -> list[Cell]:
        return self.cells_of(REGISTER)

    @property
    def register_count(self) -> int:
        return sum(row.count(REGISTER) for row in self.grid)

    def segments_of(self, kind: str) -> list[Segment]:
        return [s for s in self.segments if s.kind == kind]

    def extern_segments(self, name: str | None = None) -> list[Segment]:
        return [s for s in self.segments if s.kind == EXTERN and (name is None or s.extern_binding == name)]

    def segment_at(self, cell: Cell) -> Segment | None:
        for s in self.segments:
            if s.row <= cell[0] < s.row + s.height and s.col <= cell[1] < s.col + s.width:
                return s
        return None

    def copy(self) -> "Qcb":
        return copy.deepcopy(self)

    # -- mutation ----------------------------------------------------------
    def set(self, cell: Cell, kind: str) -> None:
        self.grid[cell[0]][cell[1]] = kind
        if kind != ROUTE:
            self.pending.discard(cell)

    def add_segment(self, seg: Segment) -> None:
        for cell in seg.cells():
            self.set(cell, seg.kind)
        self.segments.append(seg)

    def add_routes(self, cells: Iterable[Cell], pending: bool = False) -> None:
        for cell in cells:
            if self.kind(cell) != ROUTE:
                self.set(cell, ROUTE)
                if pending:
                    self.pending.add(cell)
        if not pending:
            self.refresh_pending()

    def refresh_pending(self) -> None:
        """Absorb pending route cells that have become connected to the bus."""
        if not self.pending:
            return
        bus = self.bus
        if not bus:
            return
        frontier = deque(bus)
        seen = set(bus)
        while frontier:
            cell = frontier.popleft()
            for nb in neighbours(cell):
                if nb in self.pending and nb not in seen:
                    seen.add(nb)
                    frontier.append(nb)
        self.pending -= seen

    def remove_segment(self, seg: Segment) -> None:
        self.segments.remove(seg)

    # -- connectivity --------------------------------------------------------
    def components(self, cells: Iterable[Cell]) -> list[set[Cell]]:
        pool = set(cells)
        comps = []
        while pool:
            start = pool.pop()
            comp = {start}
            stack = [start]
            while stack:
                cur = stack.pop()
                for nb in neighbours(cur):
                    if nb in pool:
                        pool.discard(nb)
                        comp.add(nb)
                        stack.append(nb)
            comps.append(comp)
        return comps

    # -- text form -----------------------------------------------------------
    def to_text(self) -> str:
        rows = []
        for r in range(self.height):
            line = []
            for c in range(self.width):
                g = GLYPHS[self.grid[r][c]]
                if (r, c) in self.pending:
                    g = "b"
                line.append(g)
            rows.append("".join(line))
        return "\n".join(rows)

    def __str__(self) -> str:
        return self.to_text()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Qcb):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.grid == other.grid
            and sorted(self.segments, key=_seg_key) == sorted(other.segments, key=_seg_key)
            and self.pending == other.pending
            and self.io_count == other.io_count
        )

    def to_document(self) -> dict:
        return {
            "format_version": 1,
            "width": self.width,
            "height": self.height,
            "grid": self.to_text().split("\n"),
            "segments": [s.to_document() for s in sorted(self.segments, key=_seg_key)],
            "io_count": self.io_count,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "Qcb":
        allowed = {"format_version", "width", "height", "grid", "segments", "io_count"}
        unknown = set(doc) - allowed
        if unknown:
            raise ValueError(f"unknown layout fields {sorted(unknown)}")
        q = cls(int(doc["width"]), int(doc["height"]))
        rows = doc["grid"]
        if len(rows) != q.height or any(len(r) != q.width for r in rows):
            raise ValueError("grid does not match board dimensions")
        for r, row in enumerate(rows):
            for c, g in enumerate(row):
                if g == "b":
                    q.grid[r][c] = ROUTE
                    q.pending.add((r, c))
                elif g in FROM_GLYPH:
                    q.grid[r][c] = FROM_GLYPH[g]
                else:
                    raise ValueError(f"unknown glyph {g!r}")
        q.segments = [Segment.from_document(s) for s in doc.get("segments", [])]
        q.io_count = int(doc.get("io_count", 0))
        return q


def _seg_key(s: Segment) -> tuple:
    return (s.row, s.col, s.kind, s.width, s.height, s.extern_binding or "")
