"""Round-robin DPS QKD: key rates, optimisation, interferometer losses and Monte Carlo."""

__version__ = "0.1.0"

from .keyrate import (
    ProtocolParams,
    RateReport,
    asymptotic_rate,
    binary_entropy,
    finite_rate,
    optimal_vth,
    source_tag_error,
)
from .model import LinkParams, evaluate, predicted_report
from .optimize import SweepPoint, distance_sweep, max_distance, optimize_mu

__all__ = [
    "ProtocolParams", "RateReport", "LinkParams", "SweepPoint",
    "asymptotic_rate", "binary_entropy", "finite_rate", "optimal_vth", "source_tag_error",
    "evaluate", "predicted_report", "distance_sweep", "max_distance", "optimize_mu",
]
