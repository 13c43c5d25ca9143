"""Periodic nonlocal Cahn-Hilliard solver (C++ core)."""

from ._core import (
    ConfigError,
    DimensionError,
    IoError,
    NchError,
    Simulation,
    SolverError,
    StabilityError,
    default_config,
    laplacian,
    laplacian_eigenvalue,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "IoError",
    "NchError",
    "Simulation",
    "SolverError",
    "StabilityError",
    "default_config",
    "laplacian",
    "laplacian_eigenvalue",
]
