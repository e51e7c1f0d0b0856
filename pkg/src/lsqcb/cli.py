"""Command line: compile, bench, validate, render and gen."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .device import DeviceSpec
from .errors import AllocationError, LsqcbError, ParseError, RoutingError, ScheduleError, SynthesisError
from .formats import Layout, dumps, load_circuit, load_device, load_layout, load_stream, save_stream, write_json
from .mapper import MappingError
from .pipeline import compile_circuit, factory_tower, smallest_board
from .qcb.render import render_ascii, render_svg
from .router import POLICIES, cost_report, package_as_extern, validate_stream

log = logging.getLogger("lsqcb")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_ALLOCATION = 3
EXIT_ROUTING = 4
EXIT_VALIDATION = 5


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, (AllocationError, MappingError)):
        return EXIT_ALLOCATION
    if isinstance(exc, (RoutingError, ScheduleError, SynthesisError)):
        return EXIT_ROUTING
    return 1


def parse_value(text: str) -> Any:
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def parse_params(items: Sequence[str]) -> dict[str, Any]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ParseError(f"parameter {item!r} is not key=value")
        out[key.replace("-", "_")] = parse_value(value)
    return out


def generate_document(family: str, params: dict[str, Any]) -> dict:
    from .stdlib import FAMILIES, generate

    if family not in FAMILIES:
        raise ParseError(f"unknown family {family!r}; choose from {', '.join(sorted(FAMILIES))}")
    if family in ("t-factory-15-1", "t-factory-slice") and int(params.get("level", 1)) >= 2:
        style = "parallel" if family == "t-factory-15-1" else "slice"
        doc, _ = factory_tower(int(params["level"]), style)
        return doc
    try:
        return generate(family, **params)
    except TypeError as exc:
        raise ParseError(f"{family}: {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"{family}: {exc}") from exc


# -- compile ---------------------------------------------------------------------


def cmd_compile(args: argparse.Namespace) -> int:
    circuit = load_circuit(args.circuit)
    device = load_device(args.device) if args.device else smallest_board(circuit)
    result = compile_circuit(
        circuit, device, policy=args.policy, disjoint=args.disjoint, optimize=not args.no_optimize
    )
    problems = validate_stream(result.qcb, result.instructions, result.dag.edges)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_stream(out / "stream.jsonl", result.header(), result.instructions)
    report = cost_report(result)
    report["seed"] = args.seed
    write_json(out / "cost.json", report)
    write_json(out / "layout.json", Layout(result.qcb, result.qmap, device).to_document())
    if result.dag.io:
        name = args.extern_name or f"{result.dag.name}_EXT"
        write_json(out / "extern.json", package_as_extern(result, name).to_document())
    print(f"{result.dag.name}: {result.total_cycles} cycles, volume {result.spacetime_volume} -> {out}")
    if problems:
        for p in problems:
            print(f"{p.code}: {p.detail}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


# -- bench -------------------------------------------------------------------------


def bench_row(family: str, params: dict[str, Any], width: int, height: int, policy: str, disjoint: bool) -> dict:
    row: dict[str, Any] = {"size": f"{width}x{height}", "width": width, "height": height}
    try:
        doc = generate_document(family, params)
        result = compile_circuit(doc, DeviceSpec(width, height), policy=policy, disjoint=disjoint)
        report = cost_report(result)
        row.update(
            cycles=result.total_cycles,
            volume=result.spacetime_volume,
            externs=report["extern_consumers"],
            slots={t: len(result.qcb.extern_segments(t)) for t in report["extern_consumers"]},
            error=None,
        )
    except LsqcbError as exc:
        row.update(cycles=None, volume=None, externs={}, slots={}, error=f"{exc.code}: {exc}")
    return row


def bench_sizes(args: argparse.Namespace) -> list[tuple[int, int]]:
    sizes = []
    for text in args.sizes or ():
        w, sep, h = text.lower().partition("x")
        if not sep:
            raise ParseError(f"size {text!r} is not WxH")
        sizes.append((int(w), int(h)))
    if args.heights:
        if args.width is None:
            raise ParseError("--heights needs --width")
        sizes.extend((args.width, h) for h in args.heights)
    return sizes


def bench_table(rows: list[dict]) -> str:
    types = sorted({t for r in rows for t in r["externs"]})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["size", "width", "height", "cycles", "volume"] + [f"{t}_consumers" for t in types] + ["error"])
    for r in rows:
        writer.writerow(
            [r["size"], r["width"], r["height"], r["cycles"], r["volume"]]
            + [r["externs"].get(t, 0) for t in types]
            + [r["error"] or ""]
        )
    return buf.getvalue()


def cmd_bench(args: argparse.Namespace) -> int:
    params = parse_params(args.param)
    sizes = bench_sizes(args)
    jobs = [(args.family, params, w, h, args.policy, args.disjoint) for w, h in sizes]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(bench_row, *zip(*jobs)))
    else:
        rows = [bench_row(*job) for job in jobs]
    table = bench_table(rows)
    doc = {"format_version": 1, "family": args.family, "params": params, "rows": rows}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench.csv").write_text(table)
        write_json(out / "bench.json", doc)
    sys.stdout.write(table)
    return EXIT_OK


# -- validate ----------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    stream = load_stream(args.stream)
    layout = load_layout(args.layout)
    problems = validate_stream(layout.qcb, stream.instructions, stream.edges)
    print(json.dumps([{"code": p.code, "detail": p.detail, "cycle": p.cycle} for p in problems], indent=2))
    return EXIT_VALIDATION if problems else EXIT_OK


# -- render ------------------------------------------------------------------------


def frames(instructions, total: int) -> list[set]:
    """Patches locked during each cycle; zero-duration instructions mark their own cycle."""
    out: list[set] = [set() for _ in range(total)]
    for ins in instructions:
        for t in range(ins.cycle, min(total, max(ins.end, ins.cycle + 1))):
            out[t].update(ins.patches)
    return out


def cmd_render(args: argparse.Namespace) -> int:
    layout = load_layout(args.layout)
    qcb = layout.qcb
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
        (out / "board.txt").write_text(render_ascii(qcb) + "\n")
        (out / "board.svg").write_text(render_svg(qcb, title="board") + "\n")
    else:
        print(render_ascii(qcb))
    if args.stream:
        stream = load_stream(args.stream)
        total = int(stream.header.get("total_cycles", max((i.end for i in stream.instructions), default=0)))
        locked = frames(stream.instructions, total)
        text = []
        for t, cells in enumerate(locked):
            text.append(f"cycle {t}\n{render_ascii(qcb, cells)}\n")
            if out:
                (out / f"frame_{t:05d}.svg").write_text(render_svg(qcb, cells, title=f"cycle {t}") + "\n")
        if out:
            (out / "frames.txt").write_text("\n".join(text))
        else:
            print("\n" + "\n".join(text), end="")
        log.info("rendered %d frames", total)
    return EXIT_OK


# -- gen ---------------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> int:
    doc = generate_document(args.family, parse_params(args.param))
    if args.out:
        write_json(Path(args.out), doc)
    else:
        sys.stdout.write(dumps(doc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lsqcb", description="Lattice-surgery compiler for quantum circuit boards.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def routing_flags(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--policy", choices=POLICIES, default="heuristic", help="extern binding policy")
        sp.add_argument("--disjoint", action="store_true", help="pre-establish Bell segments on idle routes")

    c = sub.add_parser("compile", help="compile a circuit document")
    c.add_argument("--circuit", required=True)
    c.add_argument("--device", help="device document; omitted means the smallest square board that fits")
    routing_flags(c)
    c.add_argument("--no-optimize", action="store_true", help="skip the placement optimization pass")
    c.add_argument("--seed", type=int, default=0, help="recorded in the cost report; compilation is deterministic")
    c.add_argument("--extern-name", help="template name for the packaged extern")
    c.add_argument("--out", default="out")
    c.set_defaults(func=cmd_compile)

    b = sub.add_parser("bench", help="sweep a generator across board sizes")
    b.add_argument("family")
    b.add_argument("param", nargs="*", help="generator parameters as key=value")
    b.add_argument("--width", type=int)
    b.add_argument("--heights", type=int, nargs="*")
    b.add_argument("--sizes", nargs="*", help="explicit WxH sizes")
    routing_flags(b)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("validate", help="check a stream against its layout")
    v.add_argument("--stream", required=True)
    v.add_argument("--layout", required=True)
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("render", help="ASCII and SVG renders of a layout, per cycle with a stream")
    r.add_argument("--layout", required=True)
    r.add_argument("--stream")
    r.add_argument("--out")
    r.set_defaults(func=cmd_render)

    g = sub.add_parser("gen", help="emit a benchmark circuit document")
    g.add_argument("family")
    g.add_argument("param", nargs="*", help="generator parameters as key=value")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("LSQCB_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LsqcbError as exc:
        element = getattr(exc, "element", None)
        where = f" [{element}]" if element else ""
        print(f"error: {exc.code}{where}: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
