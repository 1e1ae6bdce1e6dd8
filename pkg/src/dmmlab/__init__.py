"""Workbench for distributed mobility-management handover studies.

Closed-form performance model, protocol state machines, and a deterministic
road-network simulator for plain, predictive and reactive handover schemes,
plus a CLI for sweeps, figures and model-versus-simulation comparisons.
"""

from .model import Scheme
from .params import SystemParameters, defaults, parse_scenario

__all__ = ["Scheme", "SystemParameters", "defaults", "parse_scenario"]
__version__ = "0.1.0"
