"""Circuit intermediate representation."""

from .barriers import attach_extern_barriers
from .parse import build_edges, expand_macros, parse_circuit
from .slack import compute_slack, critical_path
from .synth import STUB, StubSynth, synthesize_rz
from .types import (
    BUILTIN_EXTERNS,
    EXTERN_OP,
    MACRO,
    NATIVE,
    ROTATION,
    CircuitDag,
    ExternOp,
    ExternRef,
    ExternTemplate,
    GateNode,
    IoSymbol,
    MacroDef,
    RegisterSymbol,
)

__all__ = [
    "BUILTIN_EXTERNS",
    "EXTERN_OP",
    "MACRO",
    "NATIVE",
    "ROTATION",
    "STUB",
    "CircuitDag",
    "ExternOp",
    "ExternRef",
    "ExternTemplate",
    "GateNode",
    "IoSymbol",
    "MacroDef",
    "RegisterSymbol",
    "StubSynth",
    "attach_extern_barriers",
    "build_edges",
    "compute_slack",
    "critical_path",
    "expand_macros",
    "parse_circuit",
    "synthesize_rz",
]
