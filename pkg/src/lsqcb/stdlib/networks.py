"""CNOT networks, Toffoli networks, multi-controlled X, QFT and single Rz."""

from __future__ import annotations

import math
import random

from ..ir.parse import parse_circuit
from ..ir.synth import synthesize_rz
from ..ir.types import CircuitDag, ExternOp, ExternTemplate
from ..device import DEFAULT_GATE_COSTS
from .builder import CircuitBuilder
from .gates import TOFFOLI, install_toffoli


def cnot_network_document(n: int, rounds: int, seed: int = 0) -> dict:
    """Each round pairs up a fresh random permutation of all n qubits."""
    if n < 2 or n % 2:
        raise ValueError("cnot network needs an even n >= 2")
    if rounds < 1:
        raise ValueError("cnot network needs rounds >= 1")
    rng = random.Random(seed)
    b = CircuitBuilder(f"cnot-{n}x{rounds}-s{seed}")
    q = b.register("q", n)
    for _ in range(rounds):
        perm = list(range(n))
        rng.shuffle(perm)
        for i in range(0, n, 2):
            b.gate("CNOT", q[perm[i]], q[perm[i + 1]])
    return b.document()


def gen_cnot_network(n: int, rounds: int, seed: int = 0) -> CircuitDag:
    return parse_circuit(cnot_network_document(n, rounds, seed))


def toffoli_document(strategy: str = "t-dag", gates: int = 1, registers: int = 3, seed: int = 0) -> dict:
    """``gates`` Toffolis on random distinct triples drawn from ``registers`` qubits."""
    if registers < 3:
        raise ValueError("a Toffoli network needs at least 3 registers")
    if gates < 1:
        raise ValueError("a Toffoli network needs at least one gate")
    rng = random.Random(seed)
    b = CircuitBuilder(f"toffoli-{strategy}-{gates}g{registers}r")
    install_toffoli(b, strategy)
    q = b.register("q", registers)
    for k in range(gates):
        trio = list(range(3)) if k == 0 and gates == 1 else rng.sample(range(registers), 3)
        b.gate(TOFFOLI, *(q[i] for i in trio))
    return b.document()


def gen_toffoli(strategy: str = "t-dag", gates: int = 1, registers: int = 3, seed: int = 0) -> CircuitDag:
    return parse_circuit(toffoli_document(strategy, gates, registers, seed))


def _mcx(b: CircuitBuilder, controls: list[str], target: str, ancillae: list[str]) -> None:
    """Balanced recursion: split the controls, compute both halves into ancillae, Toffoli, uncompute."""
    n = len(controls)
    if n == 1:
        b.gate("CNOT", controls[0], target)
        return
    if n == 2:
        b.gate(TOFFOLI, controls[0], controls[1], target)
        return
    a = math.ceil(n / 2)
    halves = [controls[:a], controls[a:]]
    outs = []
    steps = []
    for half in halves:
        if len(half) == 1:
            outs.append(half[0])
            continue
        anc = ancillae.pop(0)
        outs.append(anc)
        steps.append((half, anc))
    for half, anc in steps:
        _mcx(b, half, anc, ancillae)
    b.gate(TOFFOLI, outs[0], outs[1], target)
    for half, anc in reversed(steps):
        _mcx(b, half, anc, ancillae)
    for _, anc in steps:
        ancillae.insert(0, anc)


def mcx_ancillae(n: int) -> int:
    if n <= 2:
        return 0
    a = math.ceil(n / 2)
    need = [h for h in (a, n - a) if h > 1]
    # both halves are computed before either is released
    return len(need) + sum(mcx_ancillae(h) for h in need)


def mcx_document(n_controls: int, strategy: str = "t-dag") -> dict:
    if n_controls < 1:
        raise ValueError("mcx needs at least one control")
    b = CircuitBuilder(f"mcx-{n_controls}")
    install_toffoli(b, strategy)
    c = b.register("c", n_controls)
    t = b.register("t", 1)[0]
    k = mcx_ancillae(n_controls)
    anc = b.register("anc", k) if k else []
    _mcx(b, c, t, list(anc))
    return b.document()


def gen_mcx(n_controls: int, strategy: str = "t-dag") -> CircuitDag:
    return parse_circuit(mcx_document(n_controls, strategy))


def _sequence_cycles(seq: list[str]) -> int:
    return sum(DEFAULT_GATE_COSTS[g] for g in seq)


def qft_document(n: int, mode: str = "inline", epsilon: float = 1e-3) -> dict:
    """H on each qubit followed by controlled Rz rotations to every later qubit.

    The rotation budget ``epsilon`` is shared evenly by all Rz gates. In
    ``extern`` mode each distinct controlled rotation becomes an extern, all
    with the same footprint.
    """
    if n < 1:
        raise ValueError("qft needs n >= 1")
    if mode not in ("inline", "extern"):
        raise ValueError("qft mode is 'inline' or 'extern'")
    b = CircuitBuilder(f"qft-{n}-{mode}")
    q = b.register("q", n)
    pairs = n * (n - 1) // 2
    eps = epsilon / max(1, 3 * pairs)
    for i in range(n):
        b.gate("H", q[i])
        for j in range(i + 1, n):
            k = j - i
            theta = math.pi / 2**k
            if mode == "inline":
                b.gate("RZ", q[i], theta=theta / 2, epsilon=eps)
                b.gate("CNOT", q[j], q[i])
                b.gate("RZ", q[i], theta=-theta / 2, epsilon=eps)
                b.gate("CNOT", q[j], q[i])
                b.gate("RZ", q[j], theta=theta / 2, epsilon=eps)
            else:
                name = f"CRZ_{k}"
                if name not in b.externs:
                    seqs = [synthesize_rz(t, eps) for t in (theta / 2, -theta / 2, theta / 2)]
                    cycles = sum(_sequence_cycles(s) for s in seqs) + 2 * DEFAULT_GATE_COSTS["CNOT"]
                    b.extern(ExternTemplate(name, 2, 2, (ExternOp("CRZ", 2, 2, cycles),)))
                b.gate(f"{name}.CRZ", q[j], q[i])
    return b.document()


def gen_qft(n: int, mode: str = "inline", epsilon: float = 1e-3) -> CircuitDag:
    return parse_circuit(qft_document(n, mode, epsilon))


def rz_document(theta: float = 0.1, epsilon: float = 1e-3) -> dict:
    b = CircuitBuilder("rz")
    q = b.register("q", 1)
    b.gate("RZ", q[0], theta=theta, epsilon=epsilon)
    return b.document()


def gen_rz(theta: float = 0.1, epsilon: float = 1e-3) -> CircuitDag:
    return parse_circuit(rz_document(theta, epsilon))
