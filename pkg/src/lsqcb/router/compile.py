"""Event-driven routing and scheduling of a mapped circuit into an instruction stream."""

from __future__ import annotations

import bisect
import heapq
import logging
from dataclasses import dataclass, field
from typing import Sequence

from ..device import DIRECT_ESTABLISHMENT, DeviceSpec
from ..errors import RoutingError
from ..ir.types import EXTERN_OP, ROTATION, CircuitDag, ExternRef, GateNode
from ..mapper import QubitMap, side_cells
from ..qcb.board import ROUTE, Cell, Qcb
from ..sched import config_from_qcb, estimate_cycles, issue_order, prepare, production_cycles
from .astar import find_path
from .binding import HEURISTIC, Binder, check_footprints
from .state import BoardState
from .stream import Instruction, RoutePath, sort_key

log = logging.getLogger(__name__)

ROTATION_CYCLES = 3
LOCAL_KINDS = {"PREP_Z": "prep", "PREP_X": "prep", "MEAS_X": "measure", "MEAS_Z": "measure", "X": "pauli", "Z": "pauli"}
ROTATING = ("H", "ROTATE")
# minimum number of idle cycles before an ancilla may hold a pre-established Bell pair
BELL_IDLE = 2
BELL_MIN_RUN = 3


@dataclass
class CompileOptions:
    policy: str = HEURISTIC
    disjoint: bool = False
    # safety stop for circuits that can never be routed
    max_cycles: int = 10_000_000


@dataclass
class CompilationResult:
    dag: CircuitDag
    qcb: Qcb
    qmap: QubitMap
    device: DeviceSpec
    options: CompileOptions
    instructions: list[Instruction]
    start: dict[int, int]
    end: dict[int, int]
    paths: list[RoutePath] = field(default_factory=list)
    rotations_injected: int = 0
    # (bind cycle, release cycle, patch count) for every allocation served
    bindings: list[tuple[int, int, int]] = field(default_factory=list)

    @property
    def total_cycles(self) -> int:
        return max((i.end for i in self.instructions), default=0)

    @property
    def volume_breakdown(self) -> dict[str, int]:
        cycles = self.total_cycles
        mapped = len(self.qmap.positions) * cycles
        routing = 0
        extern_busy = 0
        for cell, ivs in _locked_intervals(self.instructions).items():
            if self.qcb.kind(cell) == ROUTE:
                routing += sum(e - s for s, e in ivs)
        for bound, released, patches in self.bindings:
            extern_busy += patches * (released - bound)
        return {"registers": mapped, "routing": routing, "externs": extern_busy}

    @property
    def spacetime_volume(self) -> int:
        return sum(self.volume_breakdown.values())

    @property
    def extern_interface(self):
        from .package import package_as_extern

        if not self.dag.io:
            return None
        return package_as_extern(self, self.dag.name)

    def header(self) -> dict:
        return {
            "format_version": 1,
            "name": self.dag.name,
            "board": {"width": self.qcb.width, "height": self.qcb.height},
            "total_cycles": self.total_cycles,
            "spacetime_volume": self.spacetime_volume,
            "nodes": [
                {"id": n.id, "kind": n.kind, "opcode": n.opcode, "operands": [str(s) for s in n.operands]}
                for n in self.dag.nodes
            ],
            "edges": [list(e) for e in self.dag.edges],
        }


def _locked_intervals(instructions: Sequence[Instruction]) -> dict[Cell, list[tuple[int, int]]]:
    out: dict[Cell, list[tuple[int, int]]] = {}
    for ins in instructions:
        if ins.duration > 0:
            for p in ins.patches:
                out.setdefault(p, []).append((ins.cycle, ins.end))
    return out


class _Plan:
    """Tentative instructions for one node; nothing touches the board until commit."""

    def __init__(self, state: BoardState, node: int) -> None:
        self.state = state
        self.node = node
        self.instructions: list[Instruction] = []
        self.locks: dict[Cell, list[tuple[int, int]]] = {}
        self.paths: list[RoutePath] = []

    def free(self, cell: Cell, t0: int, t1: int) -> bool:
        if not self.state.is_free(cell, t0, t1):
            return False
        return all(e <= t0 or s >= t1 for s, e in self.locks.get(cell, ()))

    def add(self, kind: str, patches: Sequence[Cell], t0: int, dur: int, tag: str | None = None) -> bool:
        if any(not self.free(p, t0, t0 + dur) for p in patches):
            return False
        for p in patches:
            if dur > 0:
                self.locks.setdefault(p, []).append((t0, t0 + dur))
        self.instructions.append(Instruction(t0, kind, tuple(patches), self.node, dur, tag))
        return True

    def merge(self, patches: Sequence[Cell], t0: int, dur: int, tag: str | None = None) -> bool:
        """Merge followed by a one-cycle split when the gate lasts two cycles or more."""
        if dur >= 2:
            return self.add("merge", patches, t0, dur - 1, tag) and self.add("split", patches, t0 + dur - 1, 1, tag)
        return self.add("merge", patches, t0, dur, tag)

    def checkpoint(self) -> tuple:
        return len(self.instructions), len(self.paths), {c: list(v) for c, v in self.locks.items()}

    def rollback(self, mark: tuple) -> None:
        n, m, locks = mark
        del self.instructions[n:]
        del self.paths[m:]
        self.locks = locks

    def end(self, t: int) -> int:
        return max([t] + [i.end for i in self.instructions if i.tag not in ("bell",)])

    def commit(self) -> None:
        for cell, ivs in self.locks.items():
            for s, e in ivs:
                self.state.lock(cell, s, e)


class _Router:
    def __init__(self, dag: CircuitDag, qcb: Qcb, qmap: QubitMap, device: DeviceSpec, options: CompileOptions):
        self.dag = dag
        self.qcb = qcb
        self.qmap = qmap
        self.device = device
        self.options = options
        self.state = BoardState.for_board(qcb)
        self.nodes: list[GateNode] = list(dag.nodes)
        self.edges: list[tuple[int, int]] = list(dag.edges)
        self.preds: list[set[int]] = [set() for _ in self.nodes]
        self.succs: list[set[int]] = [set() for _ in self.nodes]
        for a, b in self.edges:
            self.preds[b].add(a)
            self.succs[a].add(b)
        self.start: dict[int, int] = {}
        self.end: dict[int, int] = {}
        self.instructions: list[Instruction] = []
        self.paths: list[RoutePath] = []
        self.rotations = 0
        self.bindings: list[tuple[int, int, int]] = []
        self.priority: dict[int, tuple] = {n.id: (n.slack, n.id, 1) for n in self.nodes}

        consumers = dag.allocations()
        order = issue_order(dag)
        first = {}
        for v in order:
            ref = dag.nodes[v].extern_dep
            if ref is not None and ref not in first:
                first[ref] = v
        self.requests = list(first)
        self.remaining = {ref: len(cs) for ref, cs in consumers.items()}
        self.consumer_end: dict[ExternRef, int] = {}
        self.production = {ref: production_cycles(dag, ref, first[ref]) for ref in first}
        self.ready_at: dict[ExternRef, int] = {}
        self.bound_at: dict[ExternRef, int] = {}
        slot_of = None
        check_footprints(self.state, dag, self.requests, options.policy)
        if options.policy == HEURISTIC and self.requests:
            slot_of = estimate_cycles(dag, config_from_qcb(qcb), prepared=True).slot_of
        self.binder = Binder(self.state, dag, self.requests, options.policy, slot_of)

    # -- geometry ---------------------------------------------------------------
    def cell(self, sym) -> Cell:
        try:
            return self.qmap.cell(sym)
        except KeyError:
            raise RoutingError(f"symbol {sym} has no patch", "unmapped-symbol") from None

    def terminals(self, cell: Cell, need: str) -> list[Cell]:
        zs, xs = side_cells(cell, self.device.z_sides)
        if self.state.is_rotated(cell):
            zs, xs = xs, zs
        sides = zs if need == "Z" else xs if need == "X" else zs + xs
        return sorted(n for n in sides if self.qcb.inside(n) and self.qcb.kind(n) == ROUTE)

    def needs(self, node: GateNode) -> list[str]:
        rules = list(node.boundary) or ["either"] * len(node.operands)
        out = []
        for i, rule in enumerate(rules):
            if rule == "CX":
                out.append("Z" if i == 0 else "X")
            else:
                out.append(rule)
        return out

    # -- node handlers ----------------------------------------------------------
    def plan(self, node: GateNode, t: int) -> _Plan | None:
        p = _Plan(self.state, node.id)
        cells = [self.cell(s) for s in node.operands]
        if node.kind == ROTATION or node.opcode in ROTATING:
            return p if self._rotate(p, node, cells[0], t) else None
        if node.opcode in LOCAL_KINDS:
            return p if p.add(LOCAL_KINDS[node.opcode], cells, t, node.cycles) else None
        if node.extern_dep is not None:
            return p if self._extern(p, node, cells, t) else None
        if node.opcode in ("CNOT", "CZ"):
            return p if self._network(p, node, cells, t) else None
        if len(cells) == 1:
            # resource-state merge with a neighbouring ancilla
            for anc in self.terminals(cells[0], self.needs(node)[0]):
                q = _Plan(self.state, node.id)
                if q.merge([cells[0], anc], t, node.cycles):
                    return q
            return None
        raise RoutingError(f"node {node.id}: no routing rule for {node.opcode}", "unsupported")

    def _rotate(self, p: _Plan, node: GateNode, cell: Cell, t: int) -> bool:
        dur = ROTATION_CYCLES if node.kind == ROTATION else node.cycles
        for anc in self.terminals(cell, "either"):
            q = _Plan(self.state, node.id)
            if q.add("rotate", [cell, anc], t, dur):
                p.instructions, p.locks = q.instructions, q.locks
                return True
        return False

    def _connect(self, src: list[Cell], dst: list[Cell], t: int, dur: int, blocked: set[Cell]) -> list[Cell] | None:
        return find_path(self.state, src, dst, t, t + dur, blocked)

    def _disjoint(self, p: _Plan, path: list[Cell], t: int) -> list[list[Cell]]:
        """Maximal interior runs of ancillae idle long enough to hold a Bell pair."""
        if not self.options.disjoint or t < BELL_IDLE or len(path) < BELL_MIN_RUN + 2:
            return []
        runs: list[list[Cell]] = []
        cur: list[Cell] = []
        for cell in path[1:-1] + [None]:
            ok = False
            if cell is not None:
                last = self.state.last_used(cell, t)
                ok = (last is None or last <= t - BELL_IDLE) and cell not in p.locks and p.free(cell, t - BELL_IDLE, t)
            if ok:
                cur.append(cell)
                continue
            if len(cur) >= BELL_MIN_RUN:
                runs.append(cur)
            cur = []
        return runs

    def _emit_path(self, p: _Plan, head: Cell, path: list[Cell], tail: Cell, t: int, dur: int) -> bool:
        segments = self._disjoint(p, path, t)
        if segments:
            mark = p.checkpoint()
            if self._emit_disjoint(p, head, path, tail, t, dur, segments):
                return True
            p.rollback(mark)
        p.paths.append(RoutePath(tuple(path), "direct", (), DIRECT_ESTABLISHMENT))
        return p.merge([head, *path, tail], t, dur)

    def _emit_disjoint(
        self, p: _Plan, head: Cell, path: list[Cell], tail: Cell, t: int, dur: int, segments: list[list[Cell]]
    ) -> bool:
        """Bell pairs across each idle run, established before ``t``; the rest merges at ``t``."""
        bell_cost = 2 * DIRECT_ESTABLISHMENT
        parts: list[list[Cell]] = [[]]
        seg_cells = {c for s in segments for c in s}
        for cell in path:
            if cell in seg_cells:
                if parts[-1]:
                    parts.append([])
            else:
                parts[-1].append(cell)
        parts = [x for x in parts if x]
        parts[0] = [head, *parts[0]]
        parts[-1] = [*parts[-1], tail]
        for seg in segments:
            if not p.add("merge", seg, t - bell_cost, bell_cost, "bell"):
                return False
        for part in parts:
            if not p.merge(part, t, dur):
                return False
        p.paths.append(RoutePath(tuple(path), "disjoint", tuple(tuple(s) for s in segments), bell_cost))
        return True

    def _network(self, p: _Plan, node: GateNode, cells: list[Cell], t: int) -> bool:
        needs = self.needs(node)
        dur = node.cycles
        if any(not p.free(c, t, t + dur) for c in cells):
            return False
        first = self._connect(self.terminals(cells[0], needs[0]), self.terminals(cells[1], needs[1]), t, dur, set())
        if first is None:
            return False
        if len(cells) == 2:
            return self._emit_path(p, cells[0], first, cells[1], t, dur)
        net = list(first)
        for cell, need in zip(cells[2:], needs[2:]):
            branch = self._connect(net, self.terminals(cell, need), t, dur, set())
            if branch is None:
                return False
            net.extend(c for c in branch if c not in net)
        p.paths.append(RoutePath(tuple(net), "direct", (), DIRECT_ESTABLISHMENT))
        return p.merge([*cells, *net], t, dur)

    def _transfers(self, p: _Plan, cells: list[Cell], needs: list[str], ios: list[Cell], t: int, dur: int) -> int | None:
        """One merge per operand into its IO patch.

        Transfers start together when their routes fit side by side; a transfer
        whose route collides slips behind the earlier ones. Returns the end of
        the last transfer.
        """
        end = t
        for k, (cell, need, io) in enumerate(zip(cells, needs, ios)):
            below = [(io[0] + 1, io[1])]
            for slip in range(k + 1):
                ts = t + slip * dur
                busy = {c for c, ivs in p.locks.items() if any(s < ts + dur and e > ts for s, e in ivs)}
                path = self._connect(self.terminals(cell, need), below, ts, dur, busy)
                if path is None:
                    continue
                mark = p.checkpoint()
                if self._emit_path(p, cell, path, io, ts, dur):
                    end = max(end, ts + dur)
                    break
                p.rollback(mark)
            else:
                return None
        return end

    def _extern(self, p: _Plan, node: GateNode, cells: list[Cell], t: int) -> bool:
        ref = node.extern_dep
        slot = self.binder.bound.get(ref)
        if slot is None or self.ready_at[ref] > t:
            return False
        tpl = self.dag.template(ref.template)
        op = tpl.op(node.extern_op) if node.extern_op else None
        needs = self.needs(node)
        ios = [slot.io_cell(i) for i in range(len(cells))]
        if node.kind != EXTERN_OP or op is None or op.is_factory:
            return self._transfers(p, cells, needs, ios, t, node.cycles) is not None
        # data-consuming extern op: move in, run, move out
        io_cost = self.device.cost("EXTERN_IO")
        t_run = t
        if op.inputs:
            t_run = self._transfers(p, cells, needs, ios, t, io_cost)
            if t_run is None:
                return False
        if op.cycles:
            if not p.add("extern-invoke", slot.segment.cells(), t_run, op.cycles):
                return False
            if not p.add("idle-lock", cells, t_run, op.cycles):
                return False
        if op.outputs:
            return self._transfers(p, cells, needs, ios, t_run + op.cycles, io_cost) is not None
        return True

    # -- edge tracking ----------------------------------------------------------
    def misoriented(self, node: GateNode) -> list[int]:
        """Operands whose required boundary faces no route but whose other boundary does."""
        if node.kind == ROTATION or not node.nonlocal_:
            return []
        out = []
        for i, (sym, need) in enumerate(zip(node.operands, self.needs(node))):
            if need not in ("Z", "X"):
                continue
            cell = self.cell(sym)
            other = "X" if need == "Z" else "Z"
            if not self.terminals(cell, need) and self.terminals(cell, other):
                out.append(i)
        return out

    def inject_rotation(self, node: GateNode, i: int) -> int:
        sym = node.operands[i]
        rid = len(self.nodes)
        rot = GateNode(
            rid, ROTATION, "ROTATE", (sym,), cycles=ROTATION_CYCLES, boundary=("either",), slack=node.slack
        )
        self.nodes.append(rot)
        self.preds.append(set())
        self.succs.append(set())
        for a in sorted(self.preds[node.id]):
            if sym in self.nodes[a].operands:
                self.edges.append((a, rid))
                self.preds[rid].add(a)
                self.succs[a].add(rid)
        self.edges.append((rid, node.id))
        self.preds[node.id].add(rid)
        self.succs[rid].add(node.id)
        self.priority[rid] = (node.slack, node.id, 0)
        self.rotations += 1
        log.debug("node %d: rotating %s before use", node.id, sym)
        return rid

    # -- extern lifecycle ---------------------------------------------------------
    def bind(self, t: int) -> None:
        for ref, slot in self.binder.bind(t):
            self.bound_at[ref] = t
            prod = self.production[ref]
            self.ready_at[ref] = t + prod
            if prod:
                plan = _Plan(self.state, None)
                if not plan.add("extern-invoke", slot.segment.cells(), t, prod, "production"):
                    raise RoutingError(f"slot {slot.index} busy while producing", "internal")
                plan.commit()
                self.instructions.extend(plan.instructions)

    def consumed(self, ref: ExternRef, end: int) -> None:
        self.consumer_end[ref] = max(self.consumer_end.get(ref, 0), end)
        self.remaining[ref] -= 1
        if self.remaining[ref] == 0:
            at = self.consumer_end[ref]
            slot = self.binder.release(ref, at)
            self.bindings.append((self.bound_at[ref], at, len(slot.segment.cells())))
            self.instructions.append(Instruction(at, "extern-reset", tuple(slot.segment.cells()), None, 0, "reset"))

    # -- main loop ------------------------------------------------------------------
    def run(self) -> None:
        waiting = [len(self.preds[v]) for v in range(len(self.nodes))]
        ready = {v for v in range(len(self.nodes)) if waiting[v] == 0}
        running: list[tuple[int, int]] = []
        t = 0
        done = 0
        while done < len(self.nodes):
            if t > self.options.max_cycles:
                raise RoutingError("routing did not finish within the cycle limit", "no-progress")
            progress = True
            while progress:
                progress = False
                while running and running[0][0] <= t:
                    _, v = heapq.heappop(running)
                    done += 1
                    for w in self.succs[v]:
                        waiting[w] -= 1
                        if waiting[w] == 0:
                            ready.add(w)
                    progress = True
                self.bind(t)
                for v in sorted(ready, key=lambda v: self.priority[v]):
                    node = self.nodes[v]
                    wrong = self.misoriented(node)
                    if wrong:
                        ready.discard(v)
                        for i in wrong:
                            rid = self.inject_rotation(node, i)
                            waiting.append(0)
                            ready.add(rid)
                        waiting[v] += len(wrong)
                        progress = True
                        break
                    plan = self.plan(node, t)
                    if plan is None:
                        continue
                    plan.commit()
                    self.instructions.extend(plan.instructions)
                    self.paths.extend(plan.paths)
                    finish = plan.end(t)
                    self.start[v] = t
                    self.end[v] = finish
                    heapq.heappush(running, (finish, v))
                    ready.discard(v)
                    if node.kind == ROTATION or node.opcode in ROTATING:
                        self.state.toggle(self.cell(node.operands[0]))
                    if node.extern_dep is not None:
                        self.consumed(node.extern_dep, finish)
                    progress = True
            if done == len(self.nodes):
                break
            t = self.next_event(t, running)

    def next_event(self, t: int, running: list[tuple[int, int]]) -> int:
        times = [e for e, _ in running if e > t]
        times += [s.free_at for s in self.state.slots if s.free_at > t and s.free_at != float("inf")]
        times += [r for r in self.ready_at.values() if r > t]
        for ivs in self.state.locks.values():
            i = bisect.bisect_right(ivs, t, key=lambda iv: iv[1])
            if i < len(ivs):
                times.append(ivs[i][1])
        if not times:
            raise RoutingError(
                f"stuck at cycle {t}: {len(self.nodes) - len(self.end)} nodes cannot be routed", "no-path"
            )
        return int(min(times))


def compile_program(
    dag: CircuitDag,
    qcb: Qcb,
    qmap: QubitMap,
    device: DeviceSpec | None = None,
    options: CompileOptions | None = None,
) -> CompilationResult:
    """Route every node of ``dag`` on ``qcb`` and emit a time-ordered instruction stream."""
    device = device or DeviceSpec(qcb.width, qcb.height)
    options = options or CompileOptions()
    dag = prepare(dag)
    router = _Router(dag, qcb, qmap, device, options)
    router.run()
    if router.binder.waiting:
        raise RoutingError("extern allocations were never bound", "no-progress")
    final = CircuitDag(
        tuple(router.nodes),
        tuple(router.edges),
        dag.symbols,
        dag.io,
        dag.macros,
        dag.externs,
        dag.magic,
        dag.barriers,
        dag.barrier_slots,
        dag.name,
        dag.registers,
    )
    return CompilationResult(
        final,
        qcb,
        qmap,
        device,
        options,
        sorted(router.instructions, key=sort_key),
        router.start,
        router.end,
        router.paths,
        router.rotations,
        router.bindings,
    )


__all__ = ["CompilationResult", "CompileOptions", "compile_program"]
