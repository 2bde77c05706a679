"""Qubit thermalization in non-Markovian collision models."""

from ._version import __version__
from .model import ModelParams, Strategy, bloch_state, thermal_state
from .engine import Trajectory, run_exact, run_trajectory
from .analysis import blp_measure, entropy_ledger, exact_decomposition
