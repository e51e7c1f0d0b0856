from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Mapping

NATIVE = "native"
ROTATION = "rotation-injected"
EXTERN_OP = "extern-op"
MACRO = "macro"

# opcode -> (min arity, max arity or None, per-operand boundary rule, non-local)
# boundary rule: "Z", "X", "either" or "CX" (control Z, targets X)
NATIVE_OPS: dict[str, tuple[int, int | None, str, bool]] = {
    "PREP_Z": (1, 1, "either", False),
    "PREP_X": (1, 1, "either", False),
    "MEAS_X": (1, 1, "either", False),
    "MEAS_Z": (1, 1, "either", False),
    "X": (1, 1, "either", False),
    "Z": (1, 1, "either", False),
    "H": (1, 1, "either", False),
    "ROTATE": (1, 1, "either", False),
    "S": (1, 1, "Z", True),
    "SDG": (1, 1, "Z", True),
    "T": (1, 1, "Z", True),
    "TDG": (1, 1, "Z", True),
    "CNOT": (2, None, "CX", True),
    "CZ": (2, None, "Z", True),
    "CCZ": (3, 3, "Z", True),
}

ALIASES = {
    "PREP0": "PREP_Z",
    "PREPZ": "PREP_Z",
    "PREPPLUS": "PREP_X",
    "PREPX": "PREP_X",
    "MEASX": "MEAS_X",
    "MEASZ": "MEAS_Z",
    "CX": "CNOT",
    "SDAG": "SDG",
    "TDAG": "TDG",
    "P": "S",
    "PDG": "SDG",
}

# Native gates whose resource state comes from an extern by default.
DEFAULT_MAGIC = {"T": "T_factory", "TDG": "T_factory", "CCZ": "CCZ_factory"}


def canonical_opcode(name: str) -> str:
    up = name.upper()
    return ALIASES.get(up, up)


@dataclass(frozen=True, order=True)
class RegisterSymbol:
    name: str
    index: int = 0

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError("register index must be non-negative")

    def __str__(self) -> str:
        return f"{self.name}[{self.index}]"

    @classmethod
    def parse(cls, text: str) -> "RegisterSymbol":
        text = text.strip()
        if text.endswith("]") and "[" in text:
            name, idx = text[:-1].split("[", 1)
            return cls(name, int(idx))
        return cls(text, 0)


@dataclass(frozen=True)
class ExternOp:
    name: str
    inputs: int
    outputs: int
    cycles: int

    @property
    def arity(self) -> int:
        return max(self.inputs, self.outputs)

    @property
    def is_factory(self) -> bool:
        # produces a resource without consuming circuit data
        return self.inputs == 0


@dataclass(frozen=True)
class ExternTemplate:
    name: str
    width: int
    height: int
    operations: tuple[ExternOp, ...]
    resettable: bool = True
    # name of a macro giving the classical action, used only for verification
    classical: str | None = None

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"extern {self.name}: width and height must be >= 1")
        for op in self.operations:
            if op.arity > self.width:
                raise ValueError(
                    f"extern {self.name}: op {op.name} needs {op.arity} IO patches, width is {self.width}"
                )

    def op(self, name: str) -> ExternOp:
        for op in self.operations:
            if op.name == name:
                return op
        raise KeyError(name)

    @property
    def footprint(self) -> tuple[int, int]:
        return (self.width, self.height)

    def to_document(self) -> dict:
        doc: dict[str, Any] = {
            "name": self.name,
            "width": self.width,
            "height": self.height,
            "ops": [
                {"name": o.name, "inputs": o.inputs, "outputs": o.outputs, "cycles": o.cycles}
                for o in self.operations
            ],
            "resettable": self.resettable,
        }
        if self.classical:
            doc["classical"] = self.classical
        return doc

    @classmethod
    def from_document(cls, doc: Mapping[str, Any]) -> "ExternTemplate":
        allowed = {"name", "width", "height", "ops", "resettable", "classical", "format_version"}
        unknown = set(doc) - allowed
        if unknown:
            raise ValueError(f"unknown extern fields: {sorted(unknown)}")
        ops = tuple(
            ExternOp(o["name"], int(o.get("inputs", 0)), int(o.get("outputs", 0)), int(o["cycles"]))
            for o in doc["ops"]
        )
        return cls(
            name=doc["name"],
            width=int(doc["width"]),
            height=int(doc["height"]),
            operations=ops,
            resettable=bool(doc.get("resettable", True)),
            classical=doc.get("classical"),
        )


# Raw magic-state sources used when a circuit does not declare its own.
BUILTIN_EXTERNS = {
    "T_factory": ExternTemplate("T_factory", 1, 1, (ExternOp("T", 0, 1, 1),)),
    "CCZ_factory": ExternTemplate("CCZ_factory", 3, 2, (ExternOp("CCZ", 0, 3, 6),)),
}


@dataclass(frozen=True, order=True)
class ExternRef:
    """One allocation (instance) of an extern template."""

    template: str
    instance: int


@dataclass(frozen=True)
class GateNode:
    id: int
    kind: str
    opcode: str
    operands: tuple[RegisterSymbol, ...]
    cycles: int = 0
    boundary: tuple[str, ...] = ()
    extern_dep: ExternRef | None = None
    # name of the extern operation this node invokes or consumes
    extern_op: str | None = None
    nonlocal_: bool = False
    params: Mapping[str, Any] = field(default_factory=dict)
    slack: int = 0

    def with_(self, **changes: Any) -> "GateNode":
        return replace(self, **changes)


@dataclass(frozen=True)
class MacroDef:
    name: str
    formals: tuple[str, ...]
    # entries: {"op": str, "args": [...], "params": {...}} or {"local": [names]}
    body: tuple[Mapping[str, Any], ...]

    @property
    def locals(self) -> tuple[str, ...]:
        out: list[str] = []
        for entry in self.body:
            if "local" in entry:
                loc = entry["local"]
                out.extend([loc] if isinstance(loc, str) else loc)
        return tuple(out)

    def to_document(self) -> dict:
        return {"name": self.name, "formals": list(self.formals), "body": [dict(b) for b in self.body]}


@dataclass(frozen=True)
class IoSymbol:
    symbol: RegisterSymbol
    direction: str = "inout"  # in | out | inout


@dataclass(frozen=True)
class CircuitDag:
    nodes: tuple[GateNode, ...]
    edges: tuple[tuple[int, int], ...]
    symbols: tuple[RegisterSymbol, ...]
    io: tuple[IoSymbol, ...] = ()
    macros: Mapping[str, MacroDef] = field(default_factory=dict)
    externs: Mapping[str, ExternTemplate] = field(default_factory=dict)
    magic: Mapping[str, str] = field(default_factory=dict)
    # (consumer node id, allocation it must precede)
    barriers: tuple[tuple[int, ExternRef], ...] = ()
    barrier_slots: Mapping[str, int] = field(default_factory=dict)
    name: str = "circuit"
    registers: tuple[tuple[str, int], ...] = ()

    @property
    def io_symbols(self) -> tuple[RegisterSymbol, ...]:
        return tuple(s.symbol for s in self.io)

    @property
    def register_symbols(self) -> tuple[RegisterSymbol, ...]:
        """Symbols that need a register patch (IO symbols live on IO patches)."""
        io = set(self.io_symbols)
        return tuple(s for s in self.symbols if s not in io)

    def predecessors(self) -> list[list[int]]:
        preds: list[list[int]] = [[] for _ in self.nodes]
        for a, b in self.edges:
            preds[b].append(a)
        return preds

    def successors(self) -> list[list[int]]:
        succ: list[list[int]] = [[] for _ in self.nodes]
        for a, b in self.edges:
            succ[a].append(b)
        return succ

    def extern_types(self) -> list[str]:
        seen: dict[str, None] = {}
        for n in self.nodes:
            if n.extern_dep is not None:
                seen.setdefault(n.extern_dep.template, None)
        return list(seen)

    def allocations(self) -> dict[ExternRef, list[int]]:
        """Allocation -> consumer node ids, in order of first consumer."""
        out: dict[ExternRef, list[int]] = {}
        for n in self.nodes:
            if n.extern_dep is not None:
                out.setdefault(n.extern_dep, []).append(n.id)
        return out

    def template(self, name: str) -> ExternTemplate:
        if name in self.externs:
            return self.externs[name]
        return BUILTIN_EXTERNS[name]
