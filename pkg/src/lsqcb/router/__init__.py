"""Routing, extern binding and instruction-stream generation."""

from .binding import FIFO, HEURISTIC, POLICIES, SHARED, Binder
from .compile import CompilationResult, CompileOptions, compile_program
from .cost import cost_report
from .package import package_as_extern
from .state import BoardState, Slot
from .stream import Instruction, RoutePath, Stream, read_stream, write_stream
from .validate import StreamViolation, validate_stream

__all__ = [
    "FIFO",
    "HEURISTIC",
    "POLICIES",
    "SHARED",
    "Binder",
    "BoardState",
    "CompilationResult",
    "CompileOptions",
    "Instruction",
    "RoutePath",
    "Slot",
    "Stream",
    "StreamViolation",
    "compile_program",
    "cost_report",
    "package_as_extern",
    "read_stream",
    "validate_stream",
    "write_stream",
]
