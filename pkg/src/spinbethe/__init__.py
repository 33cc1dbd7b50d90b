"""Bethe-ansatz completeness census for integrable spin-s chains."""

__version__ = "0.1.0"

from .spin import HalfInt, q_polynomial
from .bethe import BetheSystem, RootSet, energy, residual
from .homotopy import HomotopyConfig, solve_all
from .classify import classify
from .reptheory import CensusRow, expected_count, ledger, multiplicity

__all__ = [
    "__version__",
    "HalfInt",
    "q_polynomial",
    "BetheSystem",
    "RootSet",
    "energy",
    "residual",
    "HomotopyConfig",
    "solve_all",
    "classify",
    "CensusRow",
    "expected_count",
    "ledger",
    "multiplicity",
]
