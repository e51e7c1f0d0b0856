"""Circuit document -> CircuitDag, and macro expansion."""

from __future__ import annotations

from dataclasses import replace
from typing import Any, Callable, Iterable, Mapping, Sequence

from ..device import DEFAULT_GATE_COSTS
from ..errors import MacroError, ParseError
from .synth import synthesize_rz
from .types import (
    BUILTIN_EXTERNS,
    DEFAULT_MAGIC,
    EXTERN_OP,
    MACRO,
    NATIVE,
    NATIVE_OPS,
    CircuitDag,
    ExternRef,
    ExternTemplate,
    GateNode,
    IoSymbol,
    MacroDef,
    RegisterSymbol,
    canonical_opcode,
)

DOC_FIELDS = {"format_version", "name", "registers", "io", "macros", "externs", "magic", "gates", "epsilon"}
GATE_FIELDS = {"op", "args", "params"}
DEFAULT_EPSILON = 1e-3


def boundaries_for(rule: str, arity: int) -> tuple[str, ...]:
    if rule == "CX":
        return ("Z",) + ("X",) * (arity - 1)
    return (rule,) * arity


class _Builder:
    """Accumulates gate invocations in program order and emits nodes."""

    def __init__(
        self,
        *,
        costs: Mapping[str, int],
        macros: Mapping[str, MacroDef],
        externs: Mapping[str, ExternTemplate],
        magic: Mapping[str, str],
        synth: Callable[[float, float], Sequence[str]] | None,
        epsilon: float,
        expand: bool,
    ) -> None:
        self.costs = costs
        self.macros = macros
        self.externs = externs
        self.magic = magic
        self.synth = synth
        self.epsilon = epsilon
        self.expand = expand
        self.nodes: list[GateNode] = []
        self.extra_symbols: list[RegisterSymbol] = []
        self.instances: dict[str, int] = {}
        self.shared: dict[tuple[str, str], ExternRef] = {}
        self.expansions = 0

    # -- extern helpers -------------------------------------------------
    def template(self, name: str) -> ExternTemplate:
        if name in self.externs:
            return self.externs[name]
        if name in BUILTIN_EXTERNS:
            return BUILTIN_EXTERNS[name]
        raise ParseError(f"unknown extern {name!r}", "unknown-extern")

    def new_ref(self, template: str, params: Mapping[str, Any]) -> ExternRef:
        key = params.get("instance")
        if key is not None:
            k = (template, str(key))
            if k not in self.shared:
                self.shared[k] = self._fresh(template)
            return self.shared[k]
        return self._fresh(template)

    def _fresh(self, template: str) -> ExternRef:
        n = self.instances.get(template, 0)
        self.instances[template] = n + 1
        return ExternRef(template, n)

    def resolve_extern_op(self, op: str) -> tuple[ExternTemplate, str] | None:
        if "." in op:
            tname, oname = op.split(".", 1)
            if tname in self.externs or tname in BUILTIN_EXTERNS:
                tpl = self.template(tname)
                try:
                    tpl.op(oname)
                except KeyError:
                    raise ParseError(f"extern {tname} has no op {oname}", "unknown-opcode") from None
                return tpl, oname
            return None
        hits = [(t, op) for t in self.externs.values() for o in t.operations if o.name == op]
        if len(hits) > 1:
            raise ParseError(f"ambiguous extern op {op!r}; qualify it as template.op", "unknown-opcode")
        return hits[0] if hits else None

    # -- emission ---------------------------------------------------------
    def add_existing(self, node: GateNode) -> None:
        self.nodes.append(replace(node, id=len(self.nodes)))
        if node.extern_dep is not None:
            t = node.extern_dep.template
            self.instances[t] = max(self.instances.get(t, 0), node.extern_dep.instance + 1)

    def emit(self, op: str, operands: tuple[RegisterSymbol, ...], params: Mapping[str, Any], stack: tuple[str, ...] = ()) -> None:
        params = dict(params or {})
        canon = canonical_opcode(op)
        if canon == "RZ":
            if len(operands) != 1:
                raise ParseError("Rz takes one operand", "arity-mismatch")
            if "theta" not in params:
                raise ParseError("Rz requires params.theta", "arity-mismatch")
            eps = float(params.get("epsilon", self.epsilon))
            seq = synthesize_rz(float(params["theta"]), eps, self.synth)
            for g in seq:
                self.emit(g, operands, {k: v for k, v in params.items() if k == "instance"}, stack)
            return
        if canon in NATIVE_OPS:
            lo, hi, rule, nonlocal_ = NATIVE_OPS[canon]
            if len(operands) < lo or (hi is not None and len(operands) > hi):
                raise ParseError(f"{canon} takes {lo}..{hi or 'n'} operands, got {len(operands)}", "arity-mismatch")
            dep = None
            extern_op = None
            if canon in self.magic:
                tpl = self.template(self.magic[canon])
                factory = [o for o in tpl.operations if o.is_factory]
                if not factory:
                    raise ParseError(f"extern {tpl.name} has no resource-producing op", "unknown-extern")
                dep = self.new_ref(tpl.name, params)
                extern_op = factory[0].name
            self._append(
                GateNode(
                    id=len(self.nodes),
                    kind=NATIVE,
                    opcode=canon,
                    operands=operands,
                    cycles=int(self.costs[canon]),
                    boundary=boundaries_for(rule, len(operands)),
                    extern_dep=dep,
                    extern_op=extern_op,
                    nonlocal_=nonlocal_,
                    params=params,
                )
            )
            return
        if op in self.macros:
            mdef = self.macros[op]
            if len(operands) != len(mdef.formals):
                raise ParseError(f"macro {op} takes {len(mdef.formals)} args, got {len(operands)}", "arity-mismatch")
            if not self.expand:
                self._append(GateNode(id=len(self.nodes), kind=MACRO, opcode=op, operands=operands, params=params))
                return
            self.expand_macro(mdef, operands, stack)
            return
        hit = self.resolve_extern_op(op)
        if hit is not None:
            tpl, oname = hit
            eop = tpl.op(oname)
            if len(operands) != eop.arity:
                raise ParseError(f"{tpl.name}.{oname} takes {eop.arity} operands, got {len(operands)}", "arity-mismatch")
            io = int(self.costs["EXTERN_IO"])
            if eop.is_factory:
                cycles = io
            else:
                cycles = io + eop.cycles + (io if eop.outputs else 0)
            self._append(
                GateNode(
                    id=len(self.nodes),
                    kind=EXTERN_OP,
                    opcode=f"{tpl.name}.{oname}",
                    operands=operands,
                    cycles=cycles,
                    boundary=("either",) * len(operands),
                    extern_dep=self.new_ref(tpl.name, params),
                    extern_op=oname,
                    nonlocal_=True,
                    params=params,
                )
            )
            return
        raise ParseError(f"unknown opcode {op!r}", "unknown-opcode")

    def _append(self, node: GateNode) -> None:
        if len(set(node.operands)) != len(node.operands):
            raise ParseError(f"{node.opcode}: repeated operand", "arity-mismatch")
        self.nodes.append(node)

    def expand_macro(self, mdef: MacroDef, operands: tuple[RegisterSymbol, ...], stack: tuple[str, ...]) -> None:
        if mdef.name in stack:
            raise MacroError(f"recursive macro: {' -> '.join(stack + (mdef.name,))}", "recursive-macro")
        self.expansions += 1
        env: dict[str, RegisterSymbol] = dict(zip(mdef.formals, operands))
        for loc in mdef.locals:
            sym = RegisterSymbol(f"{mdef.name}.{loc}", self.expansions)
            env[loc] = sym
            self.extra_symbols.append(sym)
        for entry in mdef.body:
            if "local" in entry:
                continue
            args = tuple(_lookup_formal(env, a, mdef.name) for a in entry.get("args", []))
            self.emit(entry["op"], args, entry.get("params", {}), stack + (mdef.name,))


def _lookup_formal(env: Mapping[str, RegisterSymbol], name: str, macro: str) -> RegisterSymbol:
    if name in env:
        return env[name]
    raise ParseError(f"macro {macro}: {name!r} is neither a formal nor a local", "unknown-register")


def build_edges(nodes: Sequence[GateNode]) -> tuple[tuple[int, int], ...]:
    last: dict[RegisterSymbol, int] = {}
    edges: dict[tuple[int, int], None] = {}
    for node in nodes:
        for sym in node.operands:
            if sym in last:
                edges[(last[sym], node.id)] = None
            last[sym] = node.id
    return tuple(edges)


def _parse_macros(docs: Iterable[Mapping[str, Any]]) -> dict[str, MacroDef]:
    out: dict[str, MacroDef] = {}
    for m in docs:
        unknown = set(m) - {"name", "formals", "body"}
        if unknown:
            raise ParseError(f"unknown macro fields {sorted(unknown)}", "unknown-field")
        formals = tuple(m.get("formals", []))
        body = tuple(dict(b) for b in m.get("body", []))
        mdef = MacroDef(m["name"], formals, body)
        names = set(formals)
        for entry in body:
            if "local" in entry:
                continue
            extra = set(entry) - GATE_FIELDS
            if extra:
                raise ParseError(f"unknown gate fields {sorted(extra)}", "unknown-field")
        for loc in mdef.locals:
            if loc in names:
                raise ParseError(f"macro {mdef.name}: local {loc!r} shadows a formal", "duplicate-register-declaration")
            names.add(loc)
        if mdef.name in out:
            raise ParseError(f"duplicate macro {mdef.name}", "duplicate-macro")
        out[mdef.name] = mdef
    return out


def parse_circuit(
    source: Mapping[str, Any],
    costs: Mapping[str, int] | None = None,
    synth: Callable[[float, float], Sequence[str]] | None = None,
) -> CircuitDag:
    """Build a DAG from a circuit document. Macro calls stay as macro nodes."""
    if not isinstance(source, Mapping):
        raise ParseError("circuit document must be a JSON object", "parse-error")
    unknown = set(source) - DOC_FIELDS
    if unknown:
        raise ParseError(f"unknown circuit fields {sorted(unknown)}", "unknown-field")
    costs = dict(DEFAULT_GATE_COSTS if costs is None else costs)

    registers: list[tuple[str, int]] = []
    symbols: list[RegisterSymbol] = []
    seen: set[str] = set()
    for reg in source.get("registers", []):
        extra = set(reg) - {"name", "size"}
        if extra:
            raise ParseError(f"unknown register fields {sorted(extra)}", "unknown-field")
        name, size = reg["name"], int(reg.get("size", 1))
        if name in seen:
            raise ParseError(f"register {name!r} declared twice", "duplicate-register-declaration")
        if size < 1:
            raise ParseError(f"register {name!r} has size {size}", "parse-error")
        seen.add(name)
        registers.append((name, size))
        symbols.extend(RegisterSymbol(name, i) for i in range(size))
    declared = set(symbols)

    def sym(text: str) -> RegisterSymbol:
        s = RegisterSymbol.parse(text)
        if s not in declared:
            raise ParseError(f"undeclared register {text!r}", "unknown-register")
        return s

    io: list[IoSymbol] = []
    for entry in source.get("io", []):
        if isinstance(entry, str):
            io.append(IoSymbol(sym(entry)))
        else:
            direction = entry.get("dir", "inout")
            if direction not in ("in", "out", "inout"):
                raise ParseError(f"bad io direction {direction!r}", "parse-error")
            io.append(IoSymbol(sym(entry["symbol"]), direction))
    if len({i.symbol for i in io}) != len(io):
        raise ParseError("io symbol listed twice", "duplicate-register-declaration")

    macros = _parse_macros(source.get("macros", []))
    externs: dict[str, ExternTemplate] = {}
    for e in source.get("externs", []):
        try:
            tpl = ExternTemplate.from_document(e)
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad extern declaration: {exc}", "parse-error") from exc
        if tpl.name in externs:
            raise ParseError(f"duplicate extern {tpl.name}", "duplicate-extern")
        externs[tpl.name] = tpl
    magic = dict(DEFAULT_MAGIC)
    for op, ext in dict(source.get("magic", {})).items():
        magic[canonical_opcode(op)] = ext

    builder = _Builder(
        costs=costs,
        macros=macros,
        externs=externs,
        magic=magic,
        synth=synth,
        epsilon=float(source.get("epsilon", DEFAULT_EPSILON)),
        expand=False,
    )
    for gate in source.get("gates", []):
        extra = set(gate) - GATE_FIELDS
        if extra:
            raise ParseError(f"unknown gate fields {sorted(extra)}", "unknown-field")
        if "op" not in gate:
            raise ParseError("gate without op", "parse-error")
        operands = tuple(sym(a) for a in gate.get("args", []))
        builder.emit(gate["op"], operands, gate.get("params", {}))

    nodes = tuple(builder.nodes)
    return CircuitDag(
        nodes=nodes,
        edges=build_edges(nodes),
        symbols=tuple(symbols),
        io=tuple(io),
        macros=macros,
        externs=externs,
        magic=magic,
        name=str(source.get("name", "circuit")),
        registers=tuple(registers),
    )


def expand_macros(
    dag: CircuitDag,
    defs: Iterable[MacroDef] | None = None,
    costs: Mapping[str, int] | None = None,
    synth: Callable[[float, float], Sequence[str]] | None = None,
) -> CircuitDag:
    """Inline every macro node. Macro-local ancillae get fresh symbols per expansion."""
    macros = dict(dag.macros)
    for d in defs or ():
        macros[d.name] = d
    if not any(n.kind == MACRO for n in dag.nodes):
        return dag
    builder = _Builder(
        costs=dict(DEFAULT_GATE_COSTS if costs is None else costs),
        macros=macros,
        externs=dag.externs,
        magic=dag.magic,
        synth=synth,
        epsilon=DEFAULT_EPSILON,
        expand=True,
    )
    for node in dag.nodes:
        if node.extern_dep is not None:
            t = node.extern_dep.template
            builder.instances[t] = max(builder.instances.get(t, 0), node.extern_dep.instance + 1)
    for node in dag.nodes:
        if node.kind == MACRO:
            if node.opcode not in macros:
                raise ParseError(f"no definition for macro {node.opcode}", "unknown-opcode")
            builder.expand_macro(macros[node.opcode], node.operands, ())
        else:
            builder.add_existing(node)
    nodes = tuple(builder.nodes)
    return replace(
        dag,
        nodes=nodes,
        edges=build_edges(nodes),
        symbols=dag.symbols + tuple(builder.extra_symbols),
        macros=macros,
        barriers=(),
        barrier_slots={},
    )

