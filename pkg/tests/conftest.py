from __future__ import annotations

import random
import sys

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ONE_QUBIT = ("H", "S", "SDG", "X", "Z", "T", "TDG", "PREP_Z", "MEAS_X")


def random_doc(rng: random.Random, qubits: int = 5, gates: int = 20, ccz: bool = True) -> dict:
    """Random Clifford+T(+CCZ) circuit document over one register ``q``."""
    out = []
    for _ in range(rng.randint(1, gates)):
        k = rng.random()
        if k < 0.35 and qubits >= 2:
            a, b = rng.sample(range(qubits), 2)
            out.append({"op": "CNOT", "args": [f"q[{a}]", f"q[{b}]"]})
        elif k < 0.45 and ccz and qubits >= 3:
            out.append({"op": "CCZ", "args": [f"q[{i}]" for i in rng.sample(range(qubits), 3)]})
        else:
            out.append({"op": rng.choice(ONE_QUBIT), "args": [f"q[{rng.randrange(qubits)}]"]})
    return {"name": "random", "registers": [{"name": "q", "size": qubits}], "gates": out}


@st.composite
def circuits(draw, max_qubits: int = 6, max_gates: int = 25, ccz: bool = True):
    seed = draw(st.integers(0, 2**32 - 1))
    qubits = draw(st.integers(2, max_qubits))
    return random_doc(random.Random(seed), qubits, max_gates, ccz)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance.summary_lines():
        terminalreporter.write_line(line)
