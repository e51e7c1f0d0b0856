"""Board allocation: patch types, placement rules and validation."""

from .board import EXTERN, FREE, GLYPHS, IO, LOCAL, PATCH_TYPES, REGISTER, ROUTE, Qcb, Segment
from .placement import (
    find_extern,
    find_register,
    initial_placement,
    join_io,
    optimize_placement,
    place_all,
    place_extern,
    place_io,
    place_register,
    split_largest_register,
)
from .render import render_ascii, render_svg
from .validate import Violation, validate_qcb

__all__ = [
    "EXTERN",
    "FREE",
    "GLYPHS",
    "IO",
    "LOCAL",
    "PATCH_TYPES",
    "REGISTER",
    "ROUTE",
    "Qcb",
    "Segment",
    "Violation",
    "find_extern",
    "find_register",
    "initial_placement",
    "join_io",
    "optimize_placement",
    "place_all",
    "place_extern",
    "place_io",
    "place_register",
    "render_ascii",
    "render_svg",
    "split_largest_register",
    "validate_qcb",
]
