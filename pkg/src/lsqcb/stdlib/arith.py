"""Ripple-carry adder, shift-and-add multiplier and restoring divider."""

from __future__ import annotations

from ..ir.types import CircuitDag, ExternTemplate
from .builder import CircuitBuilder, nominal_template
from .gates import TOFFOLI, adder_body, install_ripple, install_toffoli


def adder_document(n: int, toffoli: str = "t-dag", io: bool = False) -> dict:
    """b (n+1 bits) += a (n bits), with one carry ancilla returned to zero."""
    if n < 1:
        raise ValueError("adder needs n >= 1")
    b = CircuitBuilder(f"adder-{n}")
    install_toffoli(b, toffoli)
    install_ripple(b)
    a = b.register("a", n)
    s = b.register("b", n + 1)
    c = b.register("c", 1)[0]
    chain = [c] + a
    for i in range(n):
        b.gate("MAJ", chain[i], s[i], a[i])
    b.gate("CNOT", a[n - 1], s[n])
    for i in reversed(range(n)):
        b.gate("UMA", chain[i], s[i], a[i])
    if io:
        for q in a + s:
            b.output(q)
    return b.document()


def gen_adder(n: int, toffoli: str = "t-dag", io: bool = False) -> CircuitDag:
    from ..ir.parse import parse_circuit

    return parse_circuit(adder_document(n, toffoli, io))


def _arith_externs(b: CircuitBuilder, width: int, carry_out: bool, copy_width: int | None = None) -> tuple[str, str]:
    """Declare an adder extern on ``width`` bits and a controlled-copy extern; return their op names."""
    install_ripple(b)
    add = f"ADD{width}{'C' if carry_out else 'M'}"
    formals, body = adder_body(width, carry_out)
    b.macro(add, formals, body, local=["cin"])
    k = copy_width or width
    copy = f"CCOPY{k}"
    cformals = ["ctl"] + [f"x{i}" for i in range(k)] + [f"t{i}" for i in range(k)]
    b.macro(copy, cformals, [(TOFFOLI, ["ctl", f"x{i}", f"t{i}"]) for i in range(k)])
    extra = list(b.externs.values())
    add_t = nominal_template(f"{add}_EXT", "ADD", b.macros, add, len(formals), extra)
    copy_t = nominal_template(f"{copy}_EXT", "CCOPY", b.macros, copy, len(cformals), extra)
    b.extern(add_t)
    b.extern(copy_t)
    return f"{add_t.name}.ADD", f"{copy_t.name}.CCOPY"


def multiplier_document(a_bits: int, b_bits: int, toffoli: str = "t-dag") -> dict:
    """out (a+b+1 bits) = x * y by controlled copies of x and adder calls, one per bit of y."""
    if a_bits < 1 or b_bits < 1:
        raise ValueError("multiplier needs a_bits, b_bits >= 1")
    b = CircuitBuilder(f"multiplier-{a_bits}x{b_bits}")
    install_toffoli(b, toffoli)
    x = b.register("x", a_bits)
    y = b.register("y", b_bits)
    out = b.register("out", a_bits + b_bits + 1)
    add, copy = _arith_externs(b, a_bits, carry_out=True) if b_bits > 1 else (None, None)
    if b_bits == 1:
        # the accumulator is still empty: copy straight into it
        b.macro(f"CCOPY{a_bits}", ["ctl"] + [f"x{i}" for i in range(a_bits)] + [f"t{i}" for i in range(a_bits)],
                [(TOFFOLI, ["ctl", f"x{i}", f"t{i}"]) for i in range(a_bits)])
        b.gate(f"CCOPY{a_bits}", y[0], *x, *out[:a_bits])
        return b.document()
    s = b.register("s", a_bits)
    b.gate(copy, y[0], *x, *out[:a_bits])
    for j in range(1, b_bits):
        b.gate(copy, y[j], *x, *s)
        b.gate(add, *s, *out[j : j + a_bits + 1])
        b.gate(copy, y[j], *x, *s)
    return b.document()


def gen_multiplier(a_bits: int, b_bits: int, toffoli: str = "t-dag") -> CircuitDag:
    from ..ir.parse import parse_circuit

    return parse_circuit(multiplier_document(a_bits, b_bits, toffoli))


def divider_document(a_bits: int, b_bits: int, toffoli: str = "t-dag") -> dict:
    """Restoring division of n (a bits) by d (b bits).

    Quotient q has a-b+1 bits and remainder r has a+1 bits; r starts as a
    copy of n. Each round subtracts d shifted by i from r, reads the sign
    bit into q[i] and adds d back when the result went negative.
    """
    if not a_bits >= b_bits >= 1:
        raise ValueError("divider needs a_bits >= b_bits >= 1")
    b = CircuitBuilder(f"divider-{a_bits}by{b_bits}")
    install_toffoli(b, toffoli)
    w = a_bits + 1
    n = b.register("n", a_bits)
    d = b.register("d", b_bits)
    q = b.register("q", a_bits - b_bits + 1)
    r = b.register("r", w)
    s = b.register("s", w)
    add, copy = _arith_externs(b, w, carry_out=False, copy_width=b_bits)
    for i in range(a_bits):
        b.gate("CNOT", n[i], r[i])
    for i in reversed(range(a_bits - b_bits + 1)):
        window = s[i : i + b_bits]
        # r -= d << i, computed as ~(~r + (d << i))
        for j in range(b_bits):
            b.gate("CNOT", d[j], window[j])
        for bit in r:
            b.gate("X", bit)
        b.gate(add, *s, *r)
        for bit in r:
            b.gate("X", bit)
        for j in range(b_bits):
            b.gate("CNOT", d[j], window[j])
        # q[i] = 1 when the difference is non-negative
        b.gate("CNOT", r[w - 1], q[i])
        b.gate("X", q[i])
        # restore when q[i] == 0
        b.gate("X", q[i])
        b.gate(copy, q[i], *d, *window)
        b.gate(add, *s, *r)
        b.gate(copy, q[i], *d, *window)
        b.gate("X", q[i])
    return b.document()


def gen_divider(a_bits: int, b_bits: int, toffoli: str = "t-dag") -> CircuitDag:
    from ..ir.parse import parse_circuit

    return parse_circuit(divider_document(a_bits, b_bits, toffoli))


def adder_template(n: int, toffoli: str = "t-dag") -> ExternTemplate:
    """The n-bit adder as a nominal extern (used by composite benchmarks)."""
    b = CircuitBuilder("adder-ext")
    install_toffoli(b, toffoli)
    add, _ = _arith_externs(b, n, carry_out=True)
    return ExternTemplate.from_document(b.externs[add.split(".")[0]])
