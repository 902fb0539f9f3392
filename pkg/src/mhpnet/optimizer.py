"""Best (altitude, power control factor) pair for UAV users under a BS-user
rate floor.

The BS-user rate falls and the UAV-user rate rises with eta, so at each
altitude the floor is met with equality by a single eta, found by bisection.
The altitude itself is searched on a grid.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional

import numpy as np

from .analysis import DEFAULT_QUAD, NetworkConfig, RateQuadrature, misr_gain, rate_bue, rate_uue
from .numerics import binary_search_root

__all__ = [
    "OptimizationProblem",
    "OptimizationResult",
    "TracePoint",
    "feasible_eta",
    "solve_p0",
    "write_trace_csv",
]


@dataclass(frozen=True)
class OptimizationProblem:
    base_cfg: NetworkConfig
    R_th: float
    h_min: float = 50.0
    h_max: float = 300.0
    h_step: float = 10.0
    eta_tol: float = 1e-5

    def __post_init__(self):
        if not self.R_th > 0:
            raise ValueError("rate target must be positive")
        if not self.h_min < self.h_max:
            raise ValueError("h_min must be below h_max")
        if not (self.h_step > 0 and self.eta_tol > 0):
            raise ValueError("grid step and tolerance must be positive")

    def altitudes(self) -> np.ndarray:
        n = int(math.floor((self.h_max - self.h_min) / self.h_step + 1e-9))
        return self.h_min + self.h_step * np.arange(n + 1)


@dataclass(frozen=True)
class TracePoint:
    h: float
    eta: Optional[float]
    rate_u: Optional[float]
    rate_b: Optional[float]

    @property
    def feasible(self) -> bool:
        return self.eta is not None


@dataclass
class OptimizationResult:
    status: str
    h_star: Optional[float] = None
    eta_star: Optional[float] = None
    rate_u_star: Optional[float] = None
    rate_b_star: Optional[float] = None
    trace: List[TracePoint] = field(default_factory=list)


@lru_cache(maxsize=8192)
def _rate_b(cfg: NetworkConfig, quad: RateQuadrature) -> float:
    return rate_bue(cfg, quad).value


def feasible_eta(h: float, R_th: float, cfg: NetworkConfig, tol: float = 1e-5,
                 quad: RateQuadrature = DEFAULT_QUAD) -> Optional[float]:
    """Largest eta in [0, 1] meeting the BS-user floor at altitude ``h``.

    Returns 1 when full power already meets the floor and None when even
    silent UAVs cannot.
    """
    at_h = cfg.replace(h=float(h))

    def slack(eta):
        return _rate_b(at_h.replace(eta=float(eta)), quad) - R_th

    if slack(1.0) >= 0:
        return 1.0
    if slack(0.0) < 0:
        return None
    eta = binary_search_root(slack, 0.0, 1.0, tol)
    # the returned point must satisfy the floor; step to the feasible end of
    # the final bracket if the midpoint landed just short
    return eta if slack(eta) >= 0 else max(eta - 0.5 * tol, 0.0)


def solve_p0(problem: OptimizationProblem, quad: RateQuadrature = DEFAULT_QUAD) -> OptimizationResult:
    """Grid over altitude, bisection over eta, argmax of the UAV-user rate.

    The gain is recomputed per altitude (it does not involve eta). Ties go to
    the lowest altitude.
    """
    cfg = problem.base_cfg
    trace = []
    for h in problem.altitudes():
        eta = feasible_eta(h, problem.R_th, cfg, problem.eta_tol, quad)
        if eta is None:
            trace.append(TracePoint(float(h), None, None, None))
            continue
        point = cfg.replace(h=float(h), eta=eta)
        G = misr_gain(point, quad).gain
        trace.append(TracePoint(float(h), eta, rate_uue(point, G, quad).value,
                                _rate_b(point, quad)))
    feasible = [p for p in trace if p.feasible]
    if not feasible:
        return OptimizationResult("infeasible", trace=trace)
    best = min(feasible, key=lambda p: (-p.rate_u, p.h))
    return OptimizationResult("optimal", best.h, best.eta, best.rate_u, best.rate_b, trace)


def write_trace_csv(path, result: OptimizationResult, header_comment: str = "") -> None:
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["h_m", "eta_star", "rate_u_nats", "rate_b_nats", "feasible"])
        for p in result.trace:
            w.writerow([_fmt(p.h), _fmt(p.eta), _fmt(p.rate_u), _fmt(p.rate_b),
                        "true" if p.feasible else "false"])


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))
