"""Benchmark circuit generators and a classical simulator for reversible arithmetic."""

from __future__ import annotations

from typing import Any, Callable

from ..ir.parse import parse_circuit
from ..ir.types import CircuitDag
from .arith import adder_document, divider_document, gen_adder, gen_divider, gen_multiplier, multiplier_document
from .builder import CircuitBuilder
from .classical import BitVectorState, ClassicalError, classical_simulate
from .factories import ccz_distillery_document, gen_ccz_distillery, gen_t_factory, t_factory_document
from .networks import (
    cnot_network_document,
    gen_cnot_network,
    gen_mcx,
    gen_qft,
    gen_rz,
    gen_toffoli,
    mcx_document,
    qft_document,
    rz_document,
    toffoli_document,
)
from .qram import gen_qram_bb, gen_qram_fanout_swap, qram_bb_document, qram_fanout_swap_document

FAMILIES: dict[str, Callable[..., dict]] = {
    "cnot-network": lambda n=8, rounds=20, seed=0: cnot_network_document(n, rounds, seed),
    "t-factory-15-1": lambda level=1, lower=None: t_factory_document(level, "parallel", lower),
    "t-factory-slice": lambda level=1, lower=None: t_factory_document(level, "slice", lower),
    "ccz-distillery": lambda lower=None: ccz_distillery_document(lower),
    "toffoli": lambda strategy="t-dag", gates=1, registers=3, seed=0: toffoli_document(strategy, gates, registers, seed),
    "mcx": lambda n=3, strategy="t-dag": mcx_document(n, strategy),
    "qft": lambda n=3, mode="inline", epsilon=1e-3: qft_document(n, mode, epsilon),
    "rz": lambda theta=0.1, epsilon=1e-3: rz_document(theta, epsilon),
    "adder": lambda n=4, strategy="t-dag": adder_document(n, strategy),
    "multiplier": lambda a=3, b=3, strategy="t-dag": multiplier_document(a, b, strategy),
    "divider": lambda a=4, b=2, strategy="t-dag": divider_document(a, b, strategy),
    "qram-bb": lambda addr=2, word=1, strategy="t-dag": qram_bb_document(addr, word, strategy),
    "qram-fanout-swap": lambda addr=2, word=1, strategy="t-dag": qram_fanout_swap_document(addr, word, strategy),
}


def generate(family: str, **params: Any) -> dict:
    """Circuit document for ``family``; unknown parameters raise TypeError."""
    try:
        fn = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    return fn(**params)


def generate_dag(family: str, **params: Any) -> CircuitDag:
    return parse_circuit(generate(family, **params))


__all__ = [
    "FAMILIES",
    "BitVectorState",
    "CircuitBuilder",
    "ClassicalError",
    "classical_simulate",
    "gen_adder",
    "gen_ccz_distillery",
    "gen_cnot_network",
    "gen_divider",
    "gen_mcx",
    "gen_multiplier",
    "gen_qft",
    "gen_qram_bb",
    "gen_qram_fanout_swap",
    "gen_rz",
    "gen_t_factory",
    "gen_toffoli",
    "generate",
    "generate_dag",
]
