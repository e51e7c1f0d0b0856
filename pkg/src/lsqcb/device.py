"""Device description: board size, code distance and the native gate cost table."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

# Cycle costs in tocs. Rotation is fixed at 3; the rest are overridable defaults.
DEFAULT_GATE_COSTS: Mapping[str, int] = MappingProxyType(
    {
        "PREP_Z": 1,
        "PREP_X": 1,
        "MEAS_X": 1,
        "MEAS_Z": 1,
        "X": 0,
        "Z": 0,
        "H": 3,
        "S": 2,
        "SDG": 2,
        "CNOT": 2,
        "CZ": 2,
        "CCZ": 2,
        "T": 2,
        "TDG": 2,
        "ROTATE": 3,
        # moving a qubit to or from an extern IO patch (merge + split)
        "EXTERN_IO": 2,
    }
)

# Establishing an ancilla route directly costs one toc; a pre-established
# Bell-pair segment costs twice that.
DIRECT_ESTABLISHMENT = 1


@dataclass(frozen=True)
class DeviceSpec:
    width: int
    height: int
    code_distance: int = 7
    gate_costs: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_GATE_COSTS))
    # sides carrying the Z boundary of an unrotated patch ("NS" or "EW")
    z_sides: str = "NS"

    def __post_init__(self) -> None:
        if self.width < 2 or self.height < 2:
            raise ValueError("board must be at least 2x2 patches")
        if self.code_distance < 1:
            raise ValueError("code_distance must be positive")
        if self.z_sides not in ("NS", "EW"):
            raise ValueError("z_sides must be 'NS' or 'EW'")
        merged = dict(DEFAULT_GATE_COSTS)
        for op, cost in dict(self.gate_costs).items():
            if int(cost) < 0:
                raise ValueError(f"negative cost for {op}")
            merged[op.upper()] = int(cost)
        object.__setattr__(self, "gate_costs", MappingProxyType(merged))

    def cost(self, opcode: str) -> int:
        return self.gate_costs[opcode]

    def to_document(self) -> dict:
        overrides = {k: v for k, v in self.gate_costs.items() if DEFAULT_GATE_COSTS.get(k) != v}
        return {
            "format_version": 1,
            "width": self.width,
            "height": self.height,
            "code_distance": self.code_distance,
            "gate_costs": overrides,
            "z_sides": self.z_sides,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "DeviceSpec":
        allowed = {"format_version", "width", "height", "code_distance", "gate_costs", "z_sides"}
        unknown = set(doc) - allowed
        if unknown:
            raise ValueError(f"unknown device fields: {sorted(unknown)}")
        return cls(
            width=int(doc["width"]),
            height=int(doc["height"]),
            code_distance=int(doc.get("code_distance", 7)),
            gate_costs=dict(doc.get("gate_costs", {})),
            z_sides=doc.get("z_sides", "NS"),
        )
