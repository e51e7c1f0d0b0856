"""Magic-state factory circuits: 15-to-1 T distillation and 8-to-CCZ."""

from __future__ import annotations

from ..ir.parse import parse_circuit
from ..ir.types import CircuitDag, ExternTemplate
from .builder import CircuitBuilder

STYLES = ("parallel", "slice")
# positions (0-based) of the four generator qubits of the punctured Reed-Muller code
RM_GENERATORS = (0, 1, 3, 7)


def _with_lower(b: CircuitBuilder, level: int, lower: ExternTemplate | None) -> None:
    if level >= 2:
        if lower is None:
            raise ValueError(f"a level-{level} factory needs the packaged level-{level - 1} template")
        b.extern(lower)
        b.magic["T"] = lower.name
        b.magic["TDG"] = lower.name


def _parallel(b: CircuitBuilder) -> None:
    """Encode |+> in the 15-qubit code, apply T to every qubit, decode and measure."""
    c = b.register("c", 15)
    for i in range(15):
        b.gate("PREP_X" if i in RM_GENERATORS else "PREP_Z", c[i])
    fan = {g: [c[j] for j in range(15) if j not in RM_GENERATORS and (j + 1) & (g + 1)] for g in RM_GENERATORS}
    for g, targets in fan.items():
        b.gate("CNOT", c[g], *targets)
    for i in range(15):
        b.gate("T", c[i])
    for g, targets in reversed(list(fan.items())):
        b.gate("CNOT", c[g], *targets)
    for i in range(1, 15):
        b.gate("MEAS_X", c[i])
    b.output(c[0], "out")


def _slice(b: CircuitBuilder) -> None:
    """Fifteen pi/8 Z-parity rotations on five qubits, applied one after another.

    Rotation k acts on the output qubit together with the qubits selected by
    the bits of k; each is a CNOT ladder onto the last qubit, a T, and the
    ladder undone. The exact parity schedule is schematic.
    """
    s = b.register("s", 5)
    for q in s:
        b.gate("PREP_X", q)
    for k in range(1, 16):
        support = [s[0]] + [s[1 + j] for j in range(4) if k >> j & 1]
        last = support[-1]
        for q in support[:-1]:
            b.gate("CNOT", q, last)
        b.gate("T", last)
        for q in reversed(support[:-1]):
            b.gate("CNOT", q, last)
    for q in s[1:]:
        b.gate("MEAS_X", q)
    b.output(s[0], "out")


def t_factory_document(level: int = 1, style: str = "parallel", lower: ExternTemplate | None = None) -> dict:
    """A T-state factory whose single IO qubit is its output.

    Level 0 injects one raw T state. Level 1 consumes raw T externs; level k
    consumes the packaged level-(k-1) factory given as ``lower``.
    """
    if level < 0:
        raise ValueError("factory level must be >= 0")
    if style not in STYLES:
        raise ValueError(f"factory style is one of {STYLES}")
    b = CircuitBuilder(f"t-factory-l{level}-{style}")
    if level == 0:
        o = b.register("o", 1)[0]
        b.gate("PREP_X", o)
        b.gate("T", o)
        b.output(o, "out")
        return b.document()
    _with_lower(b, level, lower)
    (_parallel if style == "parallel" else _slice)(b)
    return b.document()


def gen_t_factory(level: int = 1, style: str = "parallel", lower: ExternTemplate | None = None) -> CircuitDag:
    return parse_circuit(t_factory_document(level, style, lower))


def ccz_distillery_document(lower: ExternTemplate | None = None) -> dict:
    """Eight T states on the [[8,3,2]] code distil one CCZ state on three output qubits."""
    b = CircuitBuilder("ccz-distillery")
    if lower is not None:
        _with_lower(b, 2, lower)
    c = b.register("c", 8)
    for i in range(3):
        b.gate("PREP_X", c[i])
    for i in range(3, 8):
        b.gate("PREP_Z", c[i])
    # c[3..6] take pairwise parities of the data qubits, c[7] the total parity
    enc = [(0, 3), (1, 3), (0, 4), (2, 4), (1, 5), (2, 5), (0, 6), (1, 6), (2, 6), (3, 7), (4, 7), (5, 7)]
    for a, t in enc:
        b.gate("CNOT", c[a], c[t])
    for i in range(8):
        b.gate("T" if bin(i).count("1") % 2 == 0 else "TDG", c[i])
    for a, t in reversed(enc):
        b.gate("CNOT", c[a], c[t])
    for i in range(3, 8):
        b.gate("MEAS_X", c[i])
    for i in range(3):
        b.output(c[i], "out")
    return b.document()


def gen_ccz_distillery(lower: ExternTemplate | None = None) -> CircuitDag:
    return parse_circuit(ccz_distillery_document(lower))
