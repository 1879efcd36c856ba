"""Nonlocal Hamilton-Jacobi solver on metric networks with Kirchhoff conditions.

Thin wrapper over the C++ core. All functions take and return JSON/CSV text;
see the README for the problem-file schema.
"""

from ._khj import flcheck, solution_csv, solve, sweep, validate

__all__ = ["validate", "solve", "sweep", "flcheck", "solution_csv"]
