"""Lattice-surgery compiler for quantum circuit boards."""

__version__ = "0.1.0"
