"""Multiuser molecular communication on a hexagonal grid.

Analytical channel impulse response of a transparent cylindrical receiver
under diffusion with axial flow, Poisson models of the desired signal and
of inter-user interference, the ML threshold detector, error rates, user
rate and area rate efficiency, plus Monte Carlo and particle-based
simulators that check the analysis.
"""

__version__ = "0.1.0"

from .channel import ChannelParams, cir, cir_uca, find_sampling_time
from .detector import compute_threshold, ml_decide, threshold_decide
from .errors import NumericalError
from .grid import build_layout, distance_classes
from .iui import enumerate_states, iui_ensemble, sample_states
from .metrics import evaluate_link, optimize_d_hex, user_rate
from .montecarlo import McConfig, run_mc
from .pbs import PbsConfig, estimate_cir

__all__ = [
    "ChannelParams", "cir", "cir_uca", "find_sampling_time",
    "compute_threshold", "ml_decide", "threshold_decide", "NumericalError",
    "build_layout", "distance_classes", "enumerate_states", "iui_ensemble",
    "sample_states", "evaluate_link", "optimize_d_hex", "user_rate",
    "McConfig", "run_mc", "PbsConfig", "estimate_cir",
]
