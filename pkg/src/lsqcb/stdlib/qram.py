"""Bucket-brigade and fanout-swap QRAM query circuits."""

from __future__ import annotations

from ..ir.parse import parse_circuit
from ..ir.types import CircuitDag
from .builder import CircuitBuilder, nominal_template
from .gates import TOFFOLI, install_swaps, install_toffoli

BB_GADGET = "BB"


def _check(addr_bits: int, word_bits: int) -> None:
    if addr_bits < 1:
        raise ValueError("QRAM needs addr_bits >= 1")
    if word_bits < 1:
        raise ValueError("QRAM needs word_bits >= 1")


def _declare_bb(b: CircuitBuilder, as_extern: bool) -> tuple[str, str]:
    """The routing gadget and its inverse."""
    # move src into left, then send it right when ctl is set
    b.macro(BB_GADGET, ["ctl", "src", "left", "right"], (("SWAP", ["src", "left"]), ("CSWAP", ["ctl", "left", "right"])))
    b.macro(f"{BB_GADGET}_INV", ["ctl", "src", "left", "right"], (("CSWAP", ["ctl", "left", "right"]), ("SWAP", ["src", "left"])))
    if not as_extern:
        return BB_GADGET, f"{BB_GADGET}_INV"
    names = []
    for macro in (BB_GADGET, f"{BB_GADGET}_INV"):
        tpl = nominal_template(f"{macro}_EXT", "ROUTE", b.macros, macro, 4, list(b.externs.values()))
        b.extern(tpl)
        names.append(f"{tpl.name}.ROUTE")
    return names[0], names[1]


def qram_bb_document(addr_bits: int, word_bits: int, toffoli: str = "t-dag", extern: bool = True) -> dict:
    """Bucket-brigade query: route address bits into a tree of routers, route a
    query flag to the addressed leaf, copy the word out, then uncompute.

    Address bit a[0] selects at the root, so word index = sum a[l] << (n-1-l).
    The router and flag gadgets are the same extern with permuted arguments.
    """
    _check(addr_bits, word_bits)
    n = addr_bits
    b = CircuitBuilder(f"qram-bb-{n}x{word_bits}")
    install_toffoli(b, toffoli)
    install_swaps(b)
    gadget, inverse = _declare_bb(b, extern)
    a = b.register("a", n)
    mem = b.register("m", (2**n) * word_bits)
    out = b.register("out", word_bits)
    inner = 2**n - 1
    router = b.register("r", inner)
    carrier = b.register("k", inner)
    flag = b.register("f", 2 * inner + 1)  # heap-ordered flags: internal nodes then leaves

    def kids(v: int) -> tuple[int, int]:
        return 2 * v + 1, 2 * v + 2

    ops: list[tuple[str, tuple[str, ...]]] = []
    for level in range(n):
        ops.append(("SWAP", (a[level], carrier[0])))
        for depth in range(level):
            for v in range(2**depth - 1, 2 ** (depth + 1) - 1):
                lft, rgt = kids(v)
                ops.append((gadget, (router[v], carrier[v], carrier[lft], carrier[rgt])))
        for v in range(2**level - 1, 2 ** (level + 1) - 1):
            ops.append(("SWAP", (carrier[v], router[v])))
    ops.append(("X", (flag[0],)))
    for depth in range(n):
        for v in range(2**depth - 1, 2 ** (depth + 1) - 1):
            lft, rgt = kids(v)
            ops.append((gadget, (router[v], flag[v], flag[lft], flag[rgt])))
    for op, args in ops:
        b.gate(op, *args)
    for leaf in range(2**n):
        for j in range(word_bits):
            b.gate(TOFFOLI, flag[inner + leaf], mem[leaf * word_bits + j], out[j])
    for op, args in reversed(ops):
        b.gate(inverse if op == gadget else op, *args)
    return b.document()


def gen_qram_bb(addr_bits: int, word_bits: int = 1, toffoli: str = "t-dag", extern: bool = True) -> CircuitDag:
    return parse_circuit(qram_bb_document(addr_bits, word_bits, toffoli, extern))


def qram_fanout_swap_document(addr_bits: int, word_bits: int, toffoli: str = "t-dag", extern: bool = True) -> dict:
    """In-place query: layer l swaps the two halves of the live block under a[l],
    bringing the addressed word to slot 0; after copying it out the layers are
    undone. Each layer is one controlled bank swap, so a query is 2n gadgets deep.
    """
    _check(addr_bits, word_bits)
    n = addr_bits
    b = CircuitBuilder(f"qram-fs-{n}x{word_bits}")
    install_toffoli(b, toffoli)
    install_swaps(b)
    a = b.register("a", n)
    mem = b.register("m", (2**n) * word_bits)
    out = b.register("out", word_bits)
    layers = []
    for level in range(n):
        half = 2 ** (n - 1 - level) * word_bits
        name = f"BANKSWAP{half}"
        if name not in b.macros:
            formals = ["ctl"] + [f"x{i}" for i in range(half)] + [f"y{i}" for i in range(half)]
            b.macro(name, formals, [("CSWAP", ["ctl", f"x{i}", f"y{i}"]) for i in range(half)])
            if extern:
                tpl = nominal_template(f"{name}_EXT", "SWAP", b.macros, name, 1 + 2 * half, list(b.externs.values()))
                b.extern(tpl)
        op = f"{name}_EXT.SWAP" if extern else name
        layers.append((op, (a[level], *mem[:half], *mem[half : 2 * half])))
    for op, args in layers:
        b.gate(op, *args)
    for j in range(word_bits):
        b.gate("CNOT", mem[j], out[j])
    for op, args in reversed(layers):
        b.gate(op, *args)
    return b.document()


def gen_qram_fanout_swap(addr_bits: int, word_bits: int = 1, toffoli: str = "t-dag", extern: bool = True) -> CircuitDag:
    return parse_circuit(qram_fanout_swap_document(addr_bits, word_bits, toffoli, extern))
