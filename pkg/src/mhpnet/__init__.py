"""Two-tier UAV/BS downlink: hardcore point processes, MISR-gain rate
approximations, Monte Carlo checks and the altitude/power-control search."""

__version__ = "0.1.0"

from .analysis import (NetworkConfig, MisrGain, RateEstimate, ase, misr_gain,  # noqa: E402
                       rate_bue, rate_uue)
from .channel import Environment  # noqa: E402
from .geometry import MhpParams, Window, sample_mhp, sample_ppp  # noqa: E402
from .optimizer import OptimizationProblem, solve_p0  # noqa: E402
from .simulation import SimulationSpec, estimate_misr, estimate_rates  # noqa: E402

__all__ = [
    "__version__",
    "Environment",
    "MhpParams",
    "MisrGain",
    "NetworkConfig",
    "OptimizationProblem",
    "RateEstimate",
    "SimulationSpec",
    "Window",
    "ase",
    "estimate_misr",
    "estimate_rates",
    "misr_gain",
    "rate_bue",
    "rate_uue",
    "sample_mhp",
    "sample_ppp",
    "solve_p0",
]
