"""Wrapping a compiled circuit as an extern template for use inside other circuits."""

from __future__ import annotations

from ..errors import PackagingError
from ..ir.types import ExternOp, ExternTemplate


def package_as_extern(result, name: str, op_name: str | None = None) -> ExternTemplate:
    """One operation whose inputs and outputs are the circuit's IO symbols.

    A circuit with only output IO becomes a factory: its operation consumes
    nothing and yields its outputs after ``total_cycles``.
    """
    io = result.dag.io
    if not io:
        raise PackagingError(f"circuit {result.dag.name} declares no IO symbols", "no-io")
    inputs = sum(1 for s in io if s.direction in ("in", "inout"))
    outputs = sum(1 for s in io if s.direction in ("out", "inout"))
    op = ExternOp(op_name or name, inputs, outputs, max(1, result.total_cycles))
    return ExternTemplate(name, result.qcb.width, result.qcb.height, (op,))
