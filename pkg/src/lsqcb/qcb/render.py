from __future__ import annotations

from typing import Iterable

from .board import EXTERN, FREE, IO, LOCAL, REGISTER, ROUTE, Cell, Qcb

COLOURS = {
    REGISTER: "#4878cf",
    ROUTE: "#e8e8e8",
    LOCAL: "#c8c8a0",
    EXTERN: "#d65f5f",
    IO: "#6acc65",
    FREE: "#ffffff",
}


def render_ascii(qcb: Qcb, locked: Iterable[Cell] = ()) -> str:
    rows = [list(line) for line in qcb.to_text().split("\n")]
    for r, c in locked:
        rows[r][c] = "#"
    return "\n".join("".join(row) for row in rows)


def render_svg(qcb: Qcb, locked: Iterable[Cell] = (), scale: int = 24, title: str | None = None) -> str:
    locked = set(locked)
    w, h = qcb.width * scale, qcb.height * scale
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">']
    if title:
        parts.append(f"<title>{title}</title>")
    for r in range(qcb.height):
        for c in range(qcb.width):
            kind = qcb.kind((r, c))
            fill = "#f0a030" if (r, c) in locked else COLOURS[kind]
            parts.append(
                f'<rect x="{c * scale}" y="{r * scale}" width="{scale}" height="{scale}" '
                f'fill="{fill}" stroke="#333" stroke-width="1"><title>{kind} ({r},{c})</title></rect>'
            )
    for seg in qcb.segments:
        label = seg.extern_binding or seg.kind[0]
        parts.append(
            f'<rect x="{seg.col * scale}" y="{seg.row * scale}" width="{seg.width * scale}" '
            f'height="{seg.height * scale}" fill="none" stroke="#000" stroke-width="2"/>'
        )
        if seg.kind == EXTERN:
            parts.append(
                f'<text x="{seg.col * scale + 3}" y="{seg.row * scale + scale // 2 + 4}" '
                f'font-size="{max(8, scale // 3)}" font-family="monospace">{label}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts)
