from __future__ import annotations

from dataclasses import dataclass

from ..ir.types import CircuitDag
from .board import EXTERN, FREE, IO, REGISTER, ROUTE, Cell, Qcb


@dataclass(frozen=True)
class Violation:
    code: str
    cell: Cell | None = None
    detail: str = ""

    def __str__(self) -> str:
        where = f" at {self.cell}" if self.cell is not None else ""
        return f"{self.code}{where}{': ' + self.detail if self.detail else ''}"


def validate_qcb(qcb: Qcb, dag: CircuitDag | None = None, allow_unallocated: bool = False) -> list[Violation]:
    """Check board invariants; returns an empty list iff the board is legal."""
    out: list[Violation] = []
    owner: dict[Cell, int] = {}
    for i, seg in enumerate(qcb.segments):
        for cell in seg.cells():
            if not qcb.inside(cell):
                out.append(Violation("segment-out-of-bounds", cell, seg.kind))
                continue
            if cell in owner:
                out.append(Violation("segment-overlap", cell))
            owner[cell] = i
            if qcb.kind(cell) != seg.kind:
                out.append(Violation("segment-grid-mismatch", cell, f"{seg.kind} vs {qcb.kind(cell)}"))
    for cell in qcb.cells():
        k = qcb.kind(cell)
        if k in (REGISTER, EXTERN, IO) and cell not in owner:
            out.append(Violation("segment-grid-mismatch", cell, f"{k} patch outside any segment"))
        if k == FREE and not allow_unallocated:
            out.append(Violation("unallocated-patch", cell))

    routes = qcb.cells_of(ROUTE)
    if len(qcb.components(routes)) > 1:
        out.append(Violation("bus-disconnected", None, f"{len(qcb.components(routes))} route components"))
    if qcb.pending:
        out.append(Violation("io-not-joined", min(qcb.pending)))

    def route(cell: Cell) -> bool:
        return qcb.inside(cell) and qcb.kind(cell) == ROUTE

    for r, c in qcb.cells_of(REGISTER):
        if not (route((r - 1, c)) or route((r + 1, c))):
            out.append(Violation("register-not-bus-adjacent", (r, c)))
    for seg in qcb.segments_of(EXTERN):
        for r, c in seg.bottom_edge:
            if not route((r + 1, c)):
                out.append(Violation("extern-bus-gap", (r, c), seg.extern_binding or ""))
    io_cells = qcb.cells_of(IO)
    for r, c in io_cells:
        if r != qcb.height - 1:
            out.append(Violation("io-not-bottom", (r, c)))
        elif not route((r - 1, c)):
            out.append(Violation("io-not-bus-adjacent", (r, c)))
    if len(io_cells) != qcb.io_count:
        out.append(Violation("io-count-mismatch", None, f"{len(io_cells)} IO patches, io_count {qcb.io_count}"))

    if dag is not None:
        need = len(dag.register_symbols)
        have = qcb.register_count
        if have < need:
            out.append(Violation("insufficient-registers", None, f"{have} < {need}"))
        if len(io_cells) != len(dag.io):
            out.append(Violation("io-count-mismatch", None, f"{len(io_cells)} IO patches for {len(dag.io)} IO symbols"))
        for t in dag.extern_types():
            tpl = dag.template(t)
            slots = [s for s in qcb.segments_of(EXTERN) if s.extern_binding == t]
            if not any(s.width >= tpl.width and s.height >= tpl.height for s in slots):
                out.append(Violation("missing-extern", None, t))
    return out
