"""Instruction records and their line-delimited JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from ..errors import LsqcbError
from ..qcb.board import Cell

KINDS = (
    "merge",
    "split",
    "rotate",
    "prep",
    "measure",
    "pauli",
    "extern-invoke",
    "extern-reset",
    "idle-lock",
)
# instructions that belong to a node but may sit outside its dependency window
DETACHED_TAGS = ("production", "bell", "reset")
STREAM_VERSION = 1


@dataclass(frozen=True)
class Instruction:
    cycle: int
    kind: str
    patches: tuple[Cell, ...]
    node: int | None = None
    duration: int = 0
    tag: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown instruction kind {self.kind!r}")
        if self.cycle < 0 or self.duration < 0:
            raise ValueError("cycle and duration must be non-negative")

    @property
    def end(self) -> int:
        return self.cycle + self.duration

    def to_document(self) -> dict:
        doc = {
            "cycle": self.cycle,
            "kind": self.kind,
            "patches": [list(p) for p in self.patches],
            "node": self.node,
            "duration": self.duration,
        }
        if self.tag:
            doc["tag"] = self.tag
        return doc

    @classmethod
    def from_document(cls, doc: dict) -> "Instruction":
        return cls(
            int(doc["cycle"]),
            doc["kind"],
            tuple(tuple(p) for p in doc["patches"]),
            doc.get("node"),
            int(doc.get("duration", 0)),
            doc.get("tag"),
        )


@dataclass(frozen=True)
class RoutePath:
    """Route cells of one connection, ordered from source side to target side."""

    cells: tuple[Cell, ...]
    style: str = "direct"  # or "disjoint"
    bell_segments: tuple[tuple[Cell, ...], ...] = ()
    establishment: int = 1

    @property
    def distance(self) -> int:
        return len(self.cells)


@dataclass
class Stream:
    header: dict = field(default_factory=dict)
    instructions: list[Instruction] = field(default_factory=list)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [tuple(e) for e in self.header.get("edges", [])]


def sort_key(ins: Instruction) -> tuple:
    node = -1 if ins.node is None else ins.node
    return (ins.cycle, node, KINDS.index(ins.kind), ins.patches)


def dump_lines(header: dict, instructions: Iterable[Instruction]) -> Iterator[str]:
    yield json.dumps({"kind": "header", **header}, sort_keys=True)
    for ins in instructions:
        yield json.dumps(ins.to_document(), sort_keys=True)


def write_stream(fh: IO[str], header: dict, instructions: Iterable[Instruction]) -> None:
    for line in dump_lines(header, instructions):
        fh.write(line + "\n")


def read_stream(lines: Iterable[str]) -> Stream:
    out = Stream()
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LsqcbError(f"line {lineno}: {exc}", "bad-stream") from exc
        if doc.get("kind") == "header":
            doc.pop("kind")
            if doc.get("format_version", STREAM_VERSION) != STREAM_VERSION:
                raise LsqcbError(f"unsupported stream version {doc.get('format_version')}", "bad-stream")
            out.header = doc
            continue
        try:
            out.instructions.append(Instruction.from_document(doc))
        except (KeyError, ValueError, TypeError) as exc:
            raise LsqcbError(f"line {lineno}: {exc}", "bad-stream") from exc
    return out
