"""Independent checks on an instruction stream against its board."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ..qcb.board import EXTERN, IO, REGISTER, ROUTE, Cell, Qcb, neighbours
from .stream import DETACHED_TAGS, Instruction


@dataclass(frozen=True)
class StreamViolation:
    code: str
    detail: str
    cycle: int | None = None


def _lock_overlaps(instructions: Sequence[Instruction]) -> list[StreamViolation]:
    by_patch: dict[Cell, list[tuple[int, int, int]]] = {}
    for k, ins in enumerate(instructions):
        if ins.duration > 0:
            for p in ins.patches:
                by_patch.setdefault(p, []).append((ins.cycle, ins.end, k))
    out = []
    for patch, ivs in sorted(by_patch.items()):
        ivs.sort()
        for (s0, e0, k0), (s1, e1, k1) in zip(ivs, ivs[1:]):
            if s1 < e0:
                out.append(
                    StreamViolation(
                        "lock-overlap",
                        f"patch {patch}: instruction {k0} [{s0},{e0}) overlaps {k1} [{s1},{e1})",
                        s1,
                    )
                )
    return out


def node_windows(instructions: Iterable[Instruction]) -> dict[int, tuple[int, int]]:
    """First cycle and last end of each node's own (non-detached) instructions."""
    win: dict[int, tuple[int, int]] = {}
    for ins in instructions:
        if ins.node is None or ins.tag in DETACHED_TAGS:
            continue
        s, e = win.get(ins.node, (ins.cycle, ins.end))
        win[ins.node] = (min(s, ins.cycle), max(e, ins.end))
    return win


def _dependencies(instructions: Sequence[Instruction], edges: Iterable[tuple[int, int]]) -> list[StreamViolation]:
    win = node_windows(instructions)
    out = []
    for a, b in edges:
        if a in win and b in win and win[a][1] > win[b][0]:
            out.append(
                StreamViolation(
                    "dependency-violation",
                    f"node {b} starts at {win[b][0]} before predecessor {a} ends at {win[a][1]}",
                    win[b][0],
                )
            )
    return out


def _route_legality(qcb: Qcb, instructions: Sequence[Instruction]) -> list[StreamViolation]:
    out = []
    for ins in instructions:
        if ins.kind not in ("merge", "split"):
            continue
        cells = set(ins.patches)
        bad = [c for c in cells if not qcb.inside(c)]
        if bad:
            out.append(StreamViolation("off-board", f"patches {bad} lie outside the board", ins.cycle))
            continue
        routes = {c for c in cells if qcb.kind(c) == ROUTE}
        others = cells - routes
        if ins.tag == "bell" and others:
            out.append(StreamViolation("off-route-merge", f"Bell segment uses non-route patches {sorted(others)}", ins.cycle))
            continue
        for c in sorted(others):
            if qcb.kind(c) not in (REGISTER, IO, EXTERN):
                out.append(StreamViolation("off-route-merge", f"merge uses {qcb.kind(c)} patch {c}", ins.cycle))
            elif routes and not any(nb in routes for nb in neighbours(c)):
                out.append(StreamViolation("off-route-merge", f"patch {c} does not touch the merge route", ins.cycle))
        if routes and len(qcb.components(routes)) > 1:
            out.append(StreamViolation("route-disconnected", f"merge route at cycle {ins.cycle} is not connected", ins.cycle))
        if not routes and len(cells) > 1:
            out.append(StreamViolation("off-route-merge", f"merge of {sorted(cells)} uses no route", ins.cycle))
    return out


def validate_stream(
    qcb: Qcb, instructions: Sequence[Instruction], edges: Iterable[tuple[int, int]] = ()
) -> list[StreamViolation]:
    """Lock disjointness, dependency order and route legality. Empty means valid."""
    instructions = list(instructions)
    return _lock_overlaps(instructions) + _dependencies(instructions, edges) + _route_legality(qcb, instructions)
