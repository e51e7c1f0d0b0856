"""Classical bit-vector simulation of reversible circuits built from X, CNOT and Toffoli."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..errors import LsqcbError
from ..ir.types import CircuitDag, RegisterSymbol, canonical_opcode

# macros interpreted directly as a Toffoli whatever their quantum body
TOFFOLI_NAMES = ("TOFFOLI", "CCX")
NEUTRAL = ("MEAS_Z",)


class ClassicalError(LsqcbError):
    code = "non-classical-gate"


@dataclass
class BitVectorState:
    bits: dict[RegisterSymbol, int] = field(default_factory=dict)
    trace: list[tuple[str, tuple[RegisterSymbol, ...]]] = field(default_factory=list)

    def get(self, sym: RegisterSymbol) -> int:
        return self.bits.get(sym, 0)

    def value(self, register: str, size: int | None = None) -> int:
        """Little-endian integer held in ``register``."""
        idx = sorted(s.index for s in self.bits if s.name == register)
        n = size if size is not None else (idx[-1] + 1 if idx else 0)
        return sum(self.get(RegisterSymbol(register, i)) << i for i in range(n))


def _load(dag: CircuitDag, inputs: Mapping) -> dict[RegisterSymbol, int]:
    bits = {s: 0 for s in dag.symbols}
    sizes = dict(dag.registers)
    for key, val in inputs.items():
        if isinstance(key, RegisterSymbol):
            bits[key] = int(val) & 1
            continue
        if "[" in key:
            bits[RegisterSymbol.parse(key)] = int(val) & 1
            continue
        if key not in sizes:
            raise KeyError(f"no register {key!r}")
        if int(val) >> sizes[key]:
            raise ValueError(f"value {val} does not fit register {key} of {sizes[key]} bits")
        for i in range(sizes[key]):
            bits[RegisterSymbol(key, i)] = (int(val) >> i) & 1
    return bits


class _Sim:
    def __init__(self, dag: CircuitDag, bits: dict[RegisterSymbol, int]) -> None:
        self.dag = dag
        self.state = BitVectorState(bits)
        self.scratch = 0

    def flip(self, s: RegisterSymbol, cond: bool = True) -> None:
        if cond:
            self.state.bits[s] = self.state.get(s) ^ 1

    def apply(self, op: str, args: Sequence[RegisterSymbol]) -> None:
        canon = canonical_opcode(op)
        g = self.state.get
        if op.upper() in TOFFOLI_NAMES:
            if len(args) != 3:
                raise ClassicalError(f"Toffoli on {len(args)} qubits")
            self.state.trace.append(("TOFFOLI", tuple(args)))
            self.flip(args[2], g(args[0]) == 1 and g(args[1]) == 1)
            return
        if canon == "X":
            self.state.trace.append(("X", tuple(args)))
            self.flip(args[0])
            return
        if canon == "CNOT":
            self.state.trace.append(("CNOT", tuple(args)))
            c = g(args[0])
            for t in args[1:]:
                self.flip(t, c == 1)
            return
        if canon == "PREP_Z":
            self.state.bits[args[0]] = 0
            return
        if canon in NEUTRAL:
            return
        if op in self.dag.macros:
            self.run_macro(op, args)
            return
        tpl = self._extern_template(op)
        if tpl is not None:
            if not tpl.classical:
                raise ClassicalError(f"extern {tpl.name} has no classical description")
            self.apply(tpl.classical, args)
            return
        raise ClassicalError(f"{op} is not a classical reversible gate")

    def _extern_template(self, op: str):
        name = op.split(".", 1)[0] if "." in op else None
        if name and name in self.dag.externs:
            return self.dag.externs[name]
        for tpl in self.dag.externs.values():
            if any(o.name == op for o in tpl.operations):
                return tpl
        return None

    def run_macro(self, name: str, args: Sequence[RegisterSymbol]) -> None:
        mdef = self.dag.macros[name]
        if len(args) != len(mdef.formals):
            raise ClassicalError(f"macro {name} takes {len(mdef.formals)} args, got {len(args)}")
        env = dict(zip(mdef.formals, args))
        locals_ = []
        for loc in mdef.locals:
            self.scratch += 1
            sym = RegisterSymbol(f"{name}.{loc}#", self.scratch)
            env[loc] = sym
            locals_.append(sym)
            self.state.bits[sym] = 0
        for entry in mdef.body:
            if "local" in entry:
                continue
            self.apply(entry["op"], [env[a] for a in entry.get("args", [])])
        for sym in locals_:
            if self.state.bits.pop(sym):
                raise LsqcbError(f"macro {name} leaves local ancilla {sym.name} set", "ancilla-not-reset")


def classical_simulate(dag: CircuitDag, inputs: Mapping | None = None, clean: Sequence[str] = ()) -> BitVectorState:
    """Run ``dag`` on a classical bit assignment.

    ``inputs`` maps register names to little-endian integers or individual
    symbols to bits. Registers named in ``clean`` must end all-zero.
    """
    sim = _Sim(dag, _load(dag, inputs or {}))
    for node in dag.nodes:
        # macro and extern nodes keep their source name as the opcode
        sim.apply(node.opcode, node.operands)
    for reg in clean:
        if sim.state.value(reg):
            raise LsqcbError(f"register {reg} is not returned to zero", "ancilla-not-reset")
    return sim.state
