"""Rare-earth electro-nuclear qubit modelling and gate-design toolkit.

Subpackage map:

- ``qcore``     angular-momentum operators, propagation, gate fidelity floor
- ``pulses``    truncated-Gaussian selective pulses and duration optimization
- ``ions``      single- and two-ion spin Hamiltonians, dipolar couplings
- ``gates``     CNOT construction, schedules, error budgets
- ``analysis``  speed/fidelity trade-off curves and operating-point tools
- ``materials`` host-material records, symmetry screening, field placement
- ``cli``       command-line front end (``renq`` entry point)
"""

from .constants import CONST, PhysicalConstants
from .errors import (ConfigError, InfeasibleError, InputError, ModelError,
                     RegimeError, RegimeWarning, RenqError)

__version__ = "0.1.0"

__all__ = [
    "CONST",
    "PhysicalConstants",
    "RenqError",
    "InputError",
    "ModelError",
    "RegimeError",
    "InfeasibleError",
    "ConfigError",
    "RegimeWarning",
    "__version__",
]
