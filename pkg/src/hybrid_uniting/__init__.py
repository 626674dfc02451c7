"""Uniting two output-feedback hybrid controllers under a hybrid supervisor.

Modules: ``core`` (hybrid-system solver), ``composer`` (plants, controllers,
closed loops), ``observer`` (norm observers), ``supervisor`` and ``design``
(the uniting supervisor and its parameter design), ``perturb`` (disturbances
and set inflation), ``examples`` (the two worked systems), ``scenario`` and
``cli`` (presets, configs and the command line).
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .core import HybridArc, HybridSystemDef, JumpPriority, SolverConfig, Termination, solve

__all__ = ["BACKEND", "HybridArc", "HybridSystemDef", "JumpPriority", "SolverConfig", "Termination", "solve",
           "__version__"]
