"""Reusable macro definitions: Toffoli strategies, swaps and ripple-carry blocks."""

from __future__ import annotations

from functools import lru_cache

from ..ir.types import ExternOp, ExternTemplate
from .builder import CircuitBuilder

TOFFOLI = "TOFFOLI"
STRATEGIES = ("t-dag", "extern", "ccz")

# 7 T-count decomposition; the target is c
T_DAG_BODY = (
    ("H", ["c"]),
    ("CNOT", ["b", "c"]),
    ("TDG", ["c"]),
    ("CNOT", ["a", "c"]),
    ("T", ["c"]),
    ("CNOT", ["b", "c"]),
    ("TDG", ["c"]),
    ("CNOT", ["a", "c"]),
    ("T", ["b"]),
    ("T", ["c"]),
    ("H", ["c"]),
    ("CNOT", ["a", "b"]),
    ("T", ["a"]),
    ("TDG", ["b"]),
    ("CNOT", ["a", "b"]),
)
CCZ_BODY = (("H", ["c"]), ("CCZ", ["a", "b", "c"]), ("H", ["c"]))


@lru_cache(maxsize=None)
def toffoli_extern() -> ExternTemplate:
    """A Toffoli compiled elsewhere; costed like the T-gate expansion."""
    from ..ir.parse import expand_macros
    from ..sched import lower_bound

    b = CircuitBuilder("toffoli-cost")
    x = b.register("x", 3)
    b.macro(TOFFOLI, ["a", "b", "c"], T_DAG_BODY)
    b.gate(TOFFOLI, *x)
    cycles = lower_bound(expand_macros(b.dag()))
    return ExternTemplate("TOFFOLI_EXT", 3, 2, (ExternOp("CCX", 3, 3, cycles),), classical=TOFFOLI)


def install_toffoli(b: CircuitBuilder, strategy: str = "t-dag") -> None:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown Toffoli strategy {strategy!r}; choose from {STRATEGIES}")
    if strategy == "t-dag":
        b.macro(TOFFOLI, ["a", "b", "c"], T_DAG_BODY)
    elif strategy == "ccz":
        b.macro(TOFFOLI, ["a", "b", "c"], CCZ_BODY)
    else:
        tpl = toffoli_extern()
        b.extern(tpl)
        b.macro(TOFFOLI, ["a", "b", "c"], ((f"{tpl.name}.CCX", ["a", "b", "c"]),))


def install_swaps(b: CircuitBuilder) -> None:
    b.macro("SWAP", ["x", "y"], (("CNOT", ["x", "y"]), ("CNOT", ["y", "x"]), ("CNOT", ["x", "y"])))
    # controlled swap as three Toffolis
    b.macro("CSWAP", ["c", "x", "y"], ((TOFFOLI, ["c", "x", "y"]), (TOFFOLI, ["c", "y", "x"]), (TOFFOLI, ["c", "x", "y"])))


def install_ripple(b: CircuitBuilder) -> None:
    """MAJ and UMA blocks of the ripple-carry adder (carry c, addend b, accumulator a)."""
    b.macro("MAJ", ["c", "b", "a"], (("CNOT", ["a", "b"]), ("CNOT", ["a", "c"]), (TOFFOLI, ["c", "b", "a"])))
    b.macro("UMA", ["c", "b", "a"], ((TOFFOLI, ["c", "b", "a"]), ("CNOT", ["a", "c"]), ("CNOT", ["c", "b"])))


def adder_body(n: int, carry_out: bool) -> tuple[list[str], list[tuple]]:
    """Formals and body adding a[0..n) into b (n+1 bits with carry-out, else n bits mod 2^n).

    The carry-in ancilla is the macro-local ``cin``.
    """
    a = [f"a{i}" for i in range(n)]
    b = [f"b{i}" for i in range(n + (1 if carry_out else 0))]
    body: list[tuple] = []
    chain = ["cin"] + a
    for i in range(n):
        body.append(("MAJ", [chain[i], b[i], a[i]]))
    if carry_out:
        body.append(("CNOT", [a[n - 1], b[n]]))
    for i in reversed(range(n)):
        body.append(("UMA", [chain[i], b[i], a[i]]))
    return a + b, body
