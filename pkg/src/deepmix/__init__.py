"""Projected ensembles of mixed quantum states.

Dense statevector simulation, analytic and Monte Carlo reference-ensemble
moments, kicked Ising dynamics, and a reproducible batch experiment
harness.
"""

__version__ = "0.1.0"

from .errors import BudgetError, ConfigError, DeepmixError, SolvabilityError

__all__ = [
    "BudgetError",
    "ConfigError",
    "DeepmixError",
    "SolvabilityError",
    "__version__",
]
