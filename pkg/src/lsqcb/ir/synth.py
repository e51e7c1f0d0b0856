"""Rz synthesis into Clifford+T opcodes."""

from __future__ import annotations

import hashlib
import math
import random
from typing import Callable, Sequence

from ..errors import SynthesisError

# Rz(k*pi/4) up to global phase, k = 0..7
EXACT_SEQUENCES: tuple[tuple[str, ...], ...] = (
    (),
    ("T",),
    ("S",),
    ("S", "T"),
    ("Z",),
    ("Z", "T"),
    ("SDG",),
    ("TDG",),
)

SynthProvider = Callable[[float, float], Sequence[str]]


class StubSynth:
    """Deterministic stand-in for a number-theoretic synthesiser.

    The emitted sequence has the length a real synthesiser would roughly
    produce, ceil(3 log2(1/eps)), but it does not approximate Rz(theta).
    """

    semantic = False

    def __call__(self, theta: float, epsilon: float) -> list[str]:
        length = math.ceil(3 * math.log2(1 / epsilon))
        key = hashlib.sha256(f"{theta!r}:{epsilon!r}".encode()).digest()
        rng = random.Random(int.from_bytes(key[:8], "big"))
        out: list[str] = []
        for i in range(length):
            if i % 2 == 0:
                out.append(rng.choice(("T", "TDG")))
            else:
                out.append(rng.choice(("H", "S")))
        return out


STUB = StubSynth()


def exact_multiple(theta: float, tol: float = 1e-12) -> int | None:
    k = theta / (math.pi / 4)
    r = round(k)
    if abs(k - r) <= tol * max(1.0, abs(k)):
        return int(r) % 8
    return None


def synthesize_rz(theta: float, epsilon: float, synth: SynthProvider | None = None) -> list[str]:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    k = exact_multiple(theta)
    if k is not None:
        return list(EXACT_SEQUENCES[k])
    # operator-norm distance of Rz(theta) from the identity, up to phase
    if abs(math.sin(theta / 2)) <= epsilon:
        return []
    provider = synth if synth is not None else STUB
    try:
        seq = list(provider(theta, epsilon))
    except Exception as exc:  # provider is external code
        raise SynthesisError(f"synthesis provider failed: {exc}") from exc
    allowed = {"T", "TDG", "S", "SDG", "H", "X", "Z"}
    bad = [g for g in seq if g not in allowed]
    if bad:
        raise SynthesisError(f"provider returned non Clifford+T opcodes {bad[:3]}")
    return seq
