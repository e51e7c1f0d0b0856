"""Small helper for emitting circuit documents programmatically."""

from __future__ import annotations

import math
from typing import Any, Iterable, Sequence

from ..ir.parse import expand_macros, parse_circuit
from ..ir.types import CircuitDag, ExternOp, ExternTemplate

Entry = tuple  # (op, args) or (op, args, params)


class CircuitBuilder:
    def __init__(self, name: str) -> None:
        self.name = name
        self.registers: list[dict] = []
        self.gates: list[dict] = []
        self.macros: dict[str, dict] = {}
        self.externs: dict[str, dict] = {}
        self.io: list[dict] = []
        self.magic: dict[str, str] = {}
        self.epsilon: float | None = None

    def register(self, name: str, size: int) -> list[str]:
        if size < 1:
            raise ValueError(f"register {name} must have at least one qubit")
        self.registers.append({"name": name, "size": size})
        return [f"{name}[{i}]" for i in range(size)]

    def gate(self, op: str, *args: str, **params: Any) -> None:
        entry: dict[str, Any] = {"op": op, "args": list(args)}
        if params:
            entry["params"] = params
        self.gates.append(entry)

    def macro(self, name: str, formals: Sequence[str], body: Iterable[Entry], local: Sequence[str] = ()) -> None:
        entries: list[dict] = []
        if local:
            entries.append({"local": list(local)})
        for item in body:
            e: dict[str, Any] = {"op": item[0], "args": list(item[1])}
            if len(item) > 2 and item[2]:
                e["params"] = dict(item[2])
            entries.append(e)
        self.macros[name] = {"name": name, "formals": list(formals), "body": entries}

    def extern(self, tpl: ExternTemplate | dict) -> str:
        doc = tpl.to_document() if isinstance(tpl, ExternTemplate) else dict(tpl)
        self.externs[doc["name"]] = doc
        return doc["name"]

    def output(self, symbol: str, direction: str = "inout") -> None:
        self.io.append({"symbol": symbol, "dir": direction})

    def document(self) -> dict:
        doc: dict[str, Any] = {"format_version": 1, "name": self.name, "registers": list(self.registers)}
        if self.io:
            doc["io"] = list(self.io)
        if self.macros:
            doc["macros"] = list(self.macros.values())
        if self.externs:
            doc["externs"] = list(self.externs.values())
        if self.magic:
            doc["magic"] = dict(self.magic)
        if self.epsilon is not None:
            doc["epsilon"] = self.epsilon
        doc["gates"] = list(self.gates)
        return doc

    def dag(self) -> CircuitDag:
        return parse_circuit(self.document())


def nominal_template(
    name: str, op: str, macros: dict[str, dict], macro: str, arity: int, extra: Iterable[dict] = ()
) -> ExternTemplate:
    """Extern standing in for an inlined macro.

    Its cycle cost is the macro's resource-unconstrained critical path and its
    footprint is ``arity`` wide with room for roughly one ancilla per IO qubit.
    The macro doubles as the extern's classical semantics.
    """
    from ..sched import lower_bound

    b = CircuitBuilder(f"{name}-body")
    args = b.register("x", arity)
    b.macros = dict(macros)
    for e in extra:
        b.extern(e)
    b.gate(macro, *args)
    dag = expand_macros(b.dag())
    qubits = len(dag.symbols)
    width = max(arity, 1)
    height = max(2, math.ceil(2 * qubits / width))
    cycles = max(1, lower_bound(dag))
    return ExternTemplate(name, width, height, (ExternOp(op, arity, arity, cycles),), classical=macro)
