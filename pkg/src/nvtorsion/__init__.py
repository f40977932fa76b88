"""Simulation toolkit for NV-spin gates mediated by a nanodiamond torsional mode."""

from . import analysis, dynamics, linalg, nvphysics, protocols

__version__ = "0.1.0"

__all__ = ["analysis", "dynamics", "linalg", "nvphysics", "protocols", "__version__"]
