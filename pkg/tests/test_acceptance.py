"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py`` (the summary block is printed at the
end of the session) or directly with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import io
import math
import random
import sys
import time
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import random_doc  # noqa: E402
from lsqcb.device import DIRECT_ESTABLISHMENT, DeviceSpec  # noqa: E402
from lsqcb.ir import EXTERN_OP, expand_macros, parse_circuit  # noqa: E402
from lsqcb.mapper import QubitMap, tag_orientation  # noqa: E402
from lsqcb.pipeline import compile_circuit, factory_tower, smallest_board  # noqa: E402
from lsqcb.qcb import EXTERN, IO, REGISTER, ROUTE, Qcb, initial_placement, optimize_placement, validate_qcb  # noqa: E402
from lsqcb.router import (  # noqa: E402
    FIFO,
    SHARED,
    CompileOptions,
    Instruction,
    compile_program,
    package_as_extern,
    validate_stream,
    write_stream,
)
from lsqcb.router.validate import node_windows  # noqa: E402
from lsqcb.sched import HeuristicConfig, estimate_cycles, prepare  # noqa: E402
from lsqcb.stdlib import (  # noqa: E402
    classical_simulate,
    gen_adder,
    gen_ccz_distillery,
    gen_divider,
    gen_multiplier,
    gen_qram_fanout_swap,
    gen_t_factory,
    gen_toffoli,
    generate,
)

RESULTS: dict[int, tuple[bool, str]] = {}

CASE_LIMIT_S = 60.0
FUZZ_LIMIT_S = 300.0


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def summary_lines() -> list[str]:
    return [f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {d}" for n, (ok, d) in sorted(RESULTS.items())]


def codes(problems):
    return {p.code for p in problems}


# -- 1 -------------------------------------------------------------------------------


def structural_cases():
    cases = [(f"adder n={n}", generate("adder", n=n)) for n in range(1, 7)]
    cases += [(f"mcx n={n}", generate("mcx", n=n)) for n in range(1, 7)]
    cases += [(f"qft n={n}", generate("qft", n=n)) for n in range(1, 6)]
    for fam in ("qram-bb", "qram-fanout-swap"):
        cases += [(f"{fam} addr={a}", generate(fam, addr=a)) for a in range(1, 4)]
    for seed in range(4):
        for gates in (1, 6, 12, 18):
            cases.append((f"toffoli net g={gates} s={seed}", generate("toffoli", gates=gates, registers=6, seed=seed)))
    return cases


def test_criterion_01_structural_suite():
    bad, slowest = [], 0.0
    cases = structural_cases()
    for label, doc in cases:
        t0 = time.perf_counter()
        dag = prepare(parse_circuit(doc))
        device = smallest_board(dag)
        base = initial_placement(dag, device.width, device.height)
        opt = optimize_placement(base, dag)
        problems = validate_qcb(base, dag, allow_unallocated=True) + validate_qcb(opt, dag)
        elapsed = time.perf_counter() - t0
        slowest = max(slowest, elapsed)
        if problems or elapsed > CASE_LIMIT_S:
            bad.append(f"{label}: {sorted(codes(problems))} {elapsed:.1f}s")
    record(1, not bad, f"{len(cases)} cases, slowest {slowest:.2f}s" + (f"; failures {bad}" if bad else ""))


# -- 2 -------------------------------------------------------------------------------


def test_criterion_02_arithmetic_oracle():
    wrong = []
    dag = gen_adder(4)
    for a in range(16):
        for b in range(16):
            s = classical_simulate(dag, {"a": a, "b": b}, clean=["c"])
            if s.value("b") != a + b or s.value("a") != a:
                wrong.append(f"add {a}+{b}")
    dag = gen_multiplier(3, 3)
    for x in range(8):
        for y in range(8):
            if classical_simulate(dag, {"x": x, "y": y}, clean=["s"]).value("out") != x * y:
                wrong.append(f"mul {x}*{y}")
    dag = gen_divider(4, 2)
    for n in range(16):
        for d in range(1, 4):
            s = classical_simulate(dag, {"n": n, "d": d}, clean=["s"])
            if (s.value("q"), s.value("r")) != (n // d, n % d):
                wrong.append(f"div {n}/{d}->({s.value('q')},{s.value('r')})")
    sizes = dict(gen_multiplier(3, 3).registers), dict(gen_divider(4, 2).registers)
    if sizes[0]["out"] != 3 + 3 + 1 or sizes[1]["q"] != 4 - 2 + 1 or sizes[1]["r"] != 4 + 1:
        wrong.append(f"register sizes {sizes}")
    record(2, not wrong, f"256 add, 64 mul, 48 div; {len(wrong)} mismatches {wrong[:6]}")


# -- 3 -------------------------------------------------------------------------------


def compile_one_slot(doc):
    dag = prepare(parse_circuit(doc))
    result = compile_circuit(dag, smallest_board(dag), optimize=False)
    slots = {t: len(result.qcb.extern_segments(t)) for t in dag.extern_types()}
    return result, slots


def test_criterion_03_deadlock_freedom():
    t0 = time.perf_counter()
    result, slots = compile_one_slot(generate("toffoli", strategy="t-dag"))
    problems = [f"toffoli slots {slots}"] if slots != {"T_factory": 1} else []
    problems += [p.code for p in validate_stream(result.qcb, result.instructions, result.dag.edges)]
    rng = random.Random(2024)
    fuzzed = 0
    while fuzzed < 100:
        doc = random_doc(rng, rng.randint(3, 6), 30)
        if not any(g["op"] in ("T", "TDG", "CCZ") for g in doc["gates"]):
            continue
        fuzzed += 1
        r, s = compile_one_slot(doc)
        if set(s.values()) != {1} or validate_stream(r.qcb, r.instructions, r.dag.edges):
            problems.append(f"fuzz {fuzzed}: slots {s}")
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed <= FUZZ_LIMIT_S
    record(3, ok, f"toffoli {result.total_cycles} cycles on one T slot; 100 fuzz DAGs in {elapsed:.1f}s {problems[:3]}")


# -- 4 -------------------------------------------------------------------------------


def density_height(n, rho, width=8):
    return math.ceil(n * (1 + 1 / rho) / width)


def test_criterion_04_cnot_trend():
    n, rounds, width, seeds = 16, 20, 8, range(5)
    cnots = n * rounds // 2
    stats = {}
    for rho in (1 / 2, 1 / 8, 1 / 16):
        h = density_height(n, rho)
        runs = [compile_circuit(generate("cnot-network", n=n, rounds=rounds, seed=s), DeviceSpec(width, h)) for s in seeds]
        stats[rho] = (
            sum(r.total_cycles for r in runs) / len(runs),
            sum(r.spacetime_volume for r in runs) / len(runs) / cnots,
        )
    ok = stats[1 / 2][0] >= stats[1 / 8][0] and stats[1 / 16][1] >= stats[1 / 8][1]
    detail = ", ".join(f"rho=1/{round(1 / r)}: {c:.1f} cycles {v:.2f} vol/CNOT" for r, (c, v) in stats.items())
    record(4, ok, detail)


# -- 5 -------------------------------------------------------------------------------


def config(channels, t, ccz):
    return HeuristicConfig(channels, {"T_factory": ((1, 1),) * t, "CCZ_factory": ((3, 2),) * ccz})


def test_criterion_05_resource_monotonicity():
    rng = random.Random(5)
    bad = []
    for k in range(200):
        dag = prepare(parse_circuit(random_doc(rng, rng.randint(2, 7), 30)))
        for channels, t, ccz in ((1, 1, 1), (2, 1, 1), (1, 3, 2)):
            base = estimate_cycles(dag, config(channels, t, ccz), prepared=True).makespan
            for more in (config(channels + 1, t, ccz), config(channels, t + 1, ccz), config(channels, t, ccz + 1)):
                if estimate_cycles(dag, more, prepared=True).makespan > base:
                    bad.append(k)
    record(5, not bad, f"200 DAGs x 9 resource steps; {len(bad)} increases")


# -- 6 -------------------------------------------------------------------------------


def tiny_board(rows, registers):
    doc = {"width": len(rows[0]), "height": len(rows), "grid": list(rows), "segments": [], "io_count": 0}
    for r, c, w in registers:
        doc["segments"].append({"row": r, "col": c, "width": w, "height": 1, "kind": "Register"})
    return Qcb.from_document(doc)


def tiny_compile(rows, registers, positions, gates, disjoint=False):
    qcb = tiny_board(rows, registers)
    dag = prepare(parse_circuit({"registers": [{"name": "q", "size": len(positions)}], "gates": gates}))
    qmap = tag_orientation(qcb, QubitMap({s: positions[i] for i, s in enumerate(dag.symbols)}))
    return compile_program(dag, qcb, qmap, DeviceSpec(qcb.width, qcb.height), CompileOptions(disjoint=disjoint))


def gate(name, *qs):
    return {"op": name, "args": [f"q[{i}]" for i in qs]}


def extern_depth(dag):
    depth = [0] * len(dag.nodes)
    preds = dag.predecessors()
    for node in dag.nodes:
        depth[node.id] = (node.kind == EXTERN_OP) + max((depth[p] for p in preds[node.id]), default=0)
    return max(depth, default=0)


def test_criterion_06_exact_quantities():
    found = {}
    found["toffoli T"] = sum(n.opcode in ("T", "TDG") for n in expand_macros(gen_toffoli("t-dag")).nodes)
    found["15-1 externs"] = sum(n.extern_dep is not None for n in expand_macros(gen_t_factory(1)).nodes)
    found["ccz externs"] = sum(n.extern_dep is not None for n in expand_macros(gen_ccz_distillery()).nodes)
    rot = tiny_compile(["BBB", "RRR"], [(1, 0, 3)], [(1, 0), (1, 1), (1, 2)], [gate("CNOT", 0, 1)])
    found["rotation tocs"] = sorted({i.duration for i in rot.instructions if i.kind == "rotate"})
    idle = [gate("PREP_Z", 0)] * 3 + [gate("CZ", 0, 1)]
    bell = tiny_compile(["RLLLLLR", "BBBBBBB"], [(0, 0, 1), (0, 6, 1)], [(0, 0), (0, 6)], idle, disjoint=True)
    found["bell / direct"] = sorted({i.duration / DIRECT_ESTABLISHMENT for i in bell.instructions if i.tag == "bell"})
    found["fanout depth"] = [extern_depth(expand_macros(gen_qram_fanout_swap(a, 1))) for a in (1, 2, 3, 4)]
    want = {
        "toffoli T": 7,
        "15-1 externs": 15,
        "ccz externs": 8,
        "rotation tocs": [3],
        "bell / direct": [2.0],
        "fanout depth": [2, 4, 6, 8],
    }
    wrong = {k: v for k, v in found.items() if v != want[k]}
    record(6, not wrong, f"{found}" if not wrong else f"mismatch {wrong}")


# -- 7 -------------------------------------------------------------------------------


@lru_cache(maxsize=None)
def tower():
    return factory_tower(2)


def test_criterion_07_recursive_composition():
    doc, templates = tower()
    (lower,) = templates
    device = smallest_board(doc)
    result = compile_circuit(doc, device)
    board_problems = validate_qcb(result.qcb, result.dag)
    stream_problems = validate_stream(result.qcb, result.instructions, result.dag.edges)
    placed = len(result.qcb.extern_segments(lower.name))
    ok = not board_problems and not stream_problems and placed >= 1
    record(
        7,
        ok,
        f"{lower.name} {lower.width}x{lower.height} ({lower.operations[0].cycles} cycles) x{placed} "
        f"inside {device.width}x{device.height} level-2 board, {result.total_cycles} cycles, "
        f"{len(board_problems) + len(stream_problems)} violations",
    )


# -- 8 -------------------------------------------------------------------------------


def stream_bytes(result):
    buf = io.StringIO()
    write_stream(buf, result.header(), result.instructions)
    return buf.getvalue().encode()


def test_criterion_08_policy_equivalence():
    workloads = [
        generate("t-factory-15-1"),
        generate("toffoli", strategy="t-dag"),
        generate("adder", n=3),
        generate("ccz-distillery"),
        random_doc(random.Random(8), 5, 40, ccz=False),
    ]
    differ = []
    for doc in workloads:
        dag = prepare(parse_circuit(doc))
        assert len(dag.extern_types()) == 1
        device = smallest_board(dag)
        a = compile_circuit(dag, device, policy=FIFO)
        b = compile_circuit(dag, device, policy=SHARED)
        if stream_bytes(a) != stream_bytes(b):
            differ.append(dag.name)
    record(8, not differ, f"{len(workloads)} single-type workloads, differing: {differ}")


# -- 9 -------------------------------------------------------------------------------


def corpus():
    rng = random.Random(9)
    docs = [generate("adder", n=2), generate("mcx", n=3), generate("qram-bb", addr=1), generate("t-factory-15-1")]
    while len(docs) < 50:
        docs.append(random_doc(rng, rng.randint(3, 6), 25))
    out = []
    for doc in docs:
        dag = prepare(parse_circuit(doc))
        out.append(compile_circuit(dag, smallest_board(dag), disjoint=len(out) % 2 == 1))
    return out


def shift(ins, delta):
    return Instruction(ins.cycle + delta, ins.kind, ins.patches, ins.node, ins.duration, ins.tag)


def mutate(result, rng, kind):
    """Corrupted copy of ``result.instructions`` plus the violation codes that must appear."""
    ins = list(result.instructions)
    qcb = result.qcb
    if kind == "lock-overlap":
        busy = [i for i in ins if i.duration > 0 and i.patches]
        victim = rng.choice(busy)
        return ins + [shift(victim, 0)], {"lock-overlap"}
    if kind == "reorder":
        win = node_windows(ins)
        edges = [(a, b) for a, b in result.dag.edges if a in win and b in win and win[a][1] > 0]
        if not edges:
            return None
        a, b = rng.choice(edges)
        delta = (win[a][1] - 1) - win[b][0]
        if delta >= 0:
            delta = -1 - (win[b][0] - win[a][1])
        moved = [shift(i, delta) if i.node == b and i.cycle + delta >= 0 else i for i in ins]
        return moved, {"dependency-violation"}
    merges = [k for k, i in enumerate(ins) if i.kind == "merge" and any(qcb.kind(p) == ROUTE for p in i.patches)]
    if not merges:
        return None
    k = rng.choice(merges)
    target = ins[k]
    bad_cells = [c for c in qcb.cells() if qcb.kind(c) not in (ROUTE, REGISTER, IO, EXTERN)]
    if not bad_cells:
        routes = {p for p in target.patches if qcb.kind(p) == ROUTE}
        bad_cells = [
            c for c in qcb.cells_of(REGISTER)
            if not any((c[0] + dr, c[1] + dc) in routes for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)))
        ]
    if not bad_cells:
        return None
    cell = rng.choice(sorted(bad_cells))
    ins[k] = Instruction(target.cycle, target.kind, target.patches + (cell,), target.node, target.duration, target.tag)
    return ins, {"off-route-merge", "route-disconnected"}


@lru_cache(maxsize=None)
def validator_corpus():
    return corpus()


def test_criterion_09_validator_adversarial():
    results = validator_corpus()
    clean_bad = [r.dag.name for r in results if validate_stream(r.qcb, r.instructions, r.dag.edges)]
    rng = random.Random(99)
    kinds = ["lock-overlap", "reorder", "off-route"]
    mutated, missed, k = 0, [], 0
    while mutated < 50 and k < 1000:
        r = results[k % len(results)]
        kind = kinds[k % 3]
        k += 1
        m = mutate(r, rng, kind)
        if m is None:
            continue
        stream, expected = m
        mutated += 1
        found = codes(validate_stream(r.qcb, stream, r.dag.edges))
        if not found & expected:
            missed.append(f"{r.dag.name}:{kind}:{sorted(found)}")
    ok = mutated == 50 and not missed and not clean_bad and len(results) == 50
    record(9, ok, f"{mutated} mutated ({len(missed)} missed {missed[:3]}), {len(results)} clean ({len(clean_bad)} flagged)")


# -- 10 ------------------------------------------------------------------------------


def rz_curve(factory, slots=8):
    doc = generate("rz", theta=37 * math.pi / 256, epsilon=2**-10)
    doc["externs"] = [factory.to_document()]
    doc["magic"] = {"T": factory.name, "TDG": factory.name}
    dag = prepare(parse_circuit(doc))
    shape = (factory.width, factory.height)
    return [
        estimate_cycles(dag, HeuristicConfig(1, {factory.name: (shape,) * k}), prepared=True).makespan
        for k in range(1, slots + 1)
    ]


def plateau_start(curve):
    return next(k for k in range(len(curve), 0, -1) if k == 1 or curve[k - 2] != curve[-1])


def test_criterion_10_saturation():
    # The saturation point scales with factory latency, so the level-1 factory is
    # compiled on three board sizes; the fastest one must saturate within 8 slots.
    level_one = generate("t-factory-15-1")
    factories = {
        side: package_as_extern(compile_circuit(level_one, DeviceSpec(side, side)), f"T15_{side}", "T")
        for side in (6, 8, 10)
    }
    curves = {side: rz_curve(f, 16) for side, f in factories.items()}
    monotone = all(b <= a for c in curves.values() for a, b in zip(c, c[1:]))
    k_star = plateau_start(curves[10][:8])
    ok = monotone and k_star < 8
    others = ", ".join(
        f"{s}x{s} factory ({factories[s].operations[0].cycles} cycles) k*={plateau_start(c)}" for s, c in curves.items()
    )
    record(10, ok, f"10x10 factory, T slots 1..8 = {curves[10][:8]}, k*={k_star}; over 16 slots: {others}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
