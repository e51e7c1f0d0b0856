"""JSON artifact reading and writing shared by the command line and tests."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .device import DeviceSpec
from .errors import LsqcbError, ParseError
from .mapper import QubitMap
from .qcb.board import Qcb
from .router.stream import Stream, read_stream, write_stream

LAYOUT_VERSION = 1


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_json(path: Path, doc: Any) -> None:
    Path(path).write_text(dumps(doc))


def load_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON ({exc})") from exc


def load_device(path: str | Path) -> DeviceSpec:
    doc = load_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: device document must be an object")
    try:
        return DeviceSpec.from_document(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: bad device document ({exc})") from exc


def load_circuit(path: str | Path) -> dict:
    doc = load_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: circuit document must be an object")
    return doc


@dataclass
class Layout:
    qcb: Qcb
    qubit_map: QubitMap | None = None
    device: DeviceSpec | None = None

    def to_document(self) -> dict:
        doc: dict = {"format_version": LAYOUT_VERSION, "qcb": self.qcb.to_document()}
        if self.qubit_map is not None:
            doc["qubit_map"] = self.qubit_map.to_document()
        if self.device is not None:
            doc["device"] = self.device.to_document()
        return doc

    @classmethod
    def from_document(cls, doc: dict) -> "Layout":
        # a bare board document is accepted too
        if "grid" in doc:
            return cls(Qcb.from_document(doc))
        qmap = QubitMap.from_document(doc["qubit_map"]) if "qubit_map" in doc else None
        device = DeviceSpec.from_document(doc["device"]) if "device" in doc else None
        return cls(Qcb.from_document(doc["qcb"]), qmap, device)


def load_layout(path: str | Path) -> Layout:
    doc = load_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: layout document must be an object")
    try:
        return Layout.from_document(doc)
    except (KeyError, TypeError, ValueError, LsqcbError) as exc:
        raise ParseError(f"{path}: bad layout document ({exc})") from exc


def load_stream(path: str | Path) -> Stream:
    try:
        with open(path) as fh:
            return read_stream(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    except LsqcbError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def save_stream(path: Path, header: dict, instructions) -> None:
    with open(path, "w") as fh:
        write_stream(fh, header, instructions)
