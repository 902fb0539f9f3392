"""Monte Carlo estimates of SIR, average rate and MISR for a typical user.

The typical user sits at the origin and the point patterns are generated
around it. Each trial draws from its own random stream, derived from
``(seed, trial_index, purpose)`` via :class:`numpy.random.SeedSequence`, so a
trial is reproducible on its own and the aggregate does not depend on how the
trials are scheduled.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .analysis import MisrGain, NetworkConfig, RateEstimate
from .channel import _p_los
from .geometry import MhpParams, Window, sample_mhp, sample_ppp

__all__ = [
    "SimulationSpec",
    "TrialResult",
    "trial_rng",
    "uue_sir",
    "bue_sir",
    "simulate_uue_trial",
    "simulate_bue_trial",
    "estimate_rates",
    "estimate_misr",
    "write_trials_csv",
]

_UUE, _BUE, _MISR_MHP, _MISR_PPP = range(4)
MAX_REJECTIONS = 1000


@dataclass(frozen=True)
class SimulationSpec:
    n_trials: int = 10_000
    seed: int = 2024
    window: Window = field(default_factory=lambda: Window(5000.0, 500.0))
    interference_radius: Optional[float] = None
    workers: int = 1

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if self.interference_radius is not None and self.interference_radius > self.window.outer:
            raise ValueError("interference radius exceeds the simulated window")

    @property
    def radius(self) -> float:
        return self.window.radius if self.interference_radius is None else self.interference_radius


@dataclass(frozen=True)
class TrialResult:
    sir: float
    rate_sample: float
    serving_state: str
    serving_distance: float
    interference_uav: float = 0.0
    interference_bs: float = 0.0
    rejections: int = 0
    flag: str = ""


def trial_rng(seed: int, trial_index: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial_index, purpose)))


def _link_states(dist3d, h, env, rng):
    los = rng.random(len(dist3d)) < _p_los(dist3d, h, env)
    alpha = np.where(los, env.alpha_l, env.alpha_n)
    m = np.where(los, env.m_l, env.m_n)
    return los, alpha, m


def _gains(m, rng, unit):
    if unit:
        return np.ones(len(m))
    return rng.gamma(m, 1.0 / m) if len(m) else np.empty(0)


def _within(points, radius):
    rho2 = points[:, 0] ** 2 + points[:, 1] ** 2
    return rho2[rho2 <= radius * radius]


def uue_sir(uav_xy, bs_xy, cfg: NetworkConfig, rng: np.random.Generator,
            unit_fading: bool = False) -> TrialResult:
    """SIR of a UAV user at the origin served by its nearest UAV.

    ``uav_xy`` and ``bs_xy`` are planar positions already cut to the
    interference radius; UAVs hover at ``cfg.h``.
    """
    env = cfg.env
    rho2 = np.asarray(uav_xy, dtype=float).reshape(-1, 2)
    rho2 = rho2[:, 0] ** 2 + rho2[:, 1] ** 2
    dist = np.sqrt(rho2 + cfg.h ** 2)
    k = int(np.argmin(dist))
    los, alpha, m = _link_states(dist, cfg.h, env, rng)
    g = _gains(m, rng, unit_fading)
    power = g * dist ** -alpha
    signal = power[k]
    i_uav = float(power.sum() - signal)
    bs = np.asarray(bs_xy, dtype=float).reshape(-1, 2)
    if len(bs) and cfg.lambda_b > 0:
        g_b = np.ones(len(bs)) if unit_fading else rng.exponential(1.0, len(bs))
        i_bs = float(cfg.P_b / (cfg.eta * cfg.P_u) * np.sum(g_b * np.hypot(bs[:, 0], bs[:, 1]) ** -env.alpha_b))
    else:
        i_bs = 0.0
    state = "LoS" if los[k] else "NLoS"
    return _result(signal, i_uav, i_bs, state, float(dist[k]))


def bue_sir(r0: float, uav_xy, bs_xy, cfg: NetworkConfig, rng: np.random.Generator,
            unit_fading: bool = False) -> TrialResult:
    """SIR of a BS user at the origin whose BS is ``r0`` away; ``bs_xy`` holds
    the other BSs only."""
    env = cfg.env
    g0 = 1.0 if unit_fading else rng.exponential(1.0)
    signal = g0 * r0 ** -env.alpha_b
    bs = np.asarray(bs_xy, dtype=float).reshape(-1, 2)
    if len(bs):
        g_b = np.ones(len(bs)) if unit_fading else rng.exponential(1.0, len(bs))
        i_bs = float(np.sum(g_b * np.hypot(bs[:, 0], bs[:, 1]) ** -env.alpha_b))
    else:
        i_bs = 0.0
    uav = np.asarray(uav_xy, dtype=float).reshape(-1, 2)
    i_uav = 0.0
    if cfg.eta > 0 and len(uav):
        dist = np.sqrt(uav[:, 0] ** 2 + uav[:, 1] ** 2 + cfg.h ** 2)
        _, alpha, m = _link_states(dist, cfg.h, env, rng)
        g = _gains(m, rng, unit_fading)
        i_uav = float(cfg.eta * cfg.P_u / cfg.P_b * np.sum(g * dist ** -alpha))
    return _result(signal, i_uav, i_bs, "G2G", float(r0))


def _result(signal, i_uav, i_bs, state, distance):
    interference = i_uav + i_bs
    if interference <= 0:
        return TrialResult(math.inf, math.inf, state, distance, i_uav, i_bs, flag="no_interference")
    sir = signal / interference
    return TrialResult(sir, math.log1p(sir), state, distance, i_uav, i_bs)


def _cut(pattern, radius):
    pts = pattern.points
    return pts[pts[:, 0] ** 2 + pts[:, 1] ** 2 <= radius * radius]


def simulate_uue_trial(cfg: NetworkConfig, spec: SimulationSpec, trial_index: int) -> TrialResult:
    if cfg.eta <= 0:
        raise ValueError("a UAV-user trial needs eta > 0")
    rng = trial_rng(spec.seed, trial_index, _UUE)
    for rejections in range(MAX_REJECTIONS):
        uav = _cut(sample_mhp(cfg.mhp, spec.window, rng, altitude=cfg.h), spec.radius)
        if len(uav):
            break
    else:
        raise RuntimeError("no UAV inside the interference radius after repeated draws")
    bs = _cut(sample_ppp(cfg.lambda_b, spec.window, rng), spec.radius)
    res = uue_sir(uav, bs, cfg, rng)
    return res if not rejections else _with_rejections(res, rejections)


def _with_rejections(res, n):
    from dataclasses import replace
    return replace(res, rejections=n)


def simulate_bue_trial(cfg: NetworkConfig, spec: SimulationSpec, trial_index: int) -> TrialResult:
    rng = trial_rng(spec.seed, trial_index, _BUE)
    r0 = cfg.R_b * math.sqrt(rng.random())
    bs = _cut(sample_ppp(cfg.lambda_b, spec.window, rng), spec.radius)
    if cfg.lambda_u > 0:
        uav = _cut(sample_mhp(cfg.mhp, spec.window, rng, altitude=cfg.h), spec.radius)
    else:
        uav = np.empty((0, 2))
    return bue_sir(r0, uav, bs, cfg, rng)


def _run_chunk(args):
    fn, cfg, spec, lo, hi = args
    return [fn(cfg, spec, i) for i in range(lo, hi)]


def run_trials(fn, cfg: NetworkConfig, spec: SimulationSpec) -> list:
    """Run ``fn(cfg, spec, i)`` for every trial index, returned in index order."""
    if spec.workers <= 1:
        return [fn(cfg, spec, i) for i in range(spec.n_trials)]
    step = math.ceil(spec.n_trials / (4 * spec.workers))
    chunks = [(fn, cfg, spec, lo, min(lo + step, spec.n_trials))
              for lo in range(0, spec.n_trials, step)]
    with ProcessPoolExecutor(spec.workers) as pool:
        return [res for part in pool.map(_run_chunk, chunks) for res in part]


def _summarise(results: Sequence[TrialResult]) -> RateEstimate:
    samples = np.array([r.rate_sample for r in results if not r.flag])
    excluded = len(results) - len(samples)
    n = len(samples)
    mean = float(samples.mean())
    half = float(1.96 * samples.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    note = f"{excluded} trials without interference excluded" if excluded else ""
    return RateEstimate(mean, "monte_carlo", half, note)


def estimate_rates(cfg: NetworkConfig, spec: SimulationSpec, return_trials: bool = False):
    """Monte Carlo average rates of the UAV user and the BS user.

    Returns ``(uue, bue)`` RateEstimates with 95% normal half-widths, plus the
    per-trial results when ``return_trials`` is set.
    """
    bue_trials = run_trials(simulate_bue_trial, cfg, spec)
    if cfg.eta > 0 and cfg.lambda_u > 0:
        uue_trials = run_trials(simulate_uue_trial, cfg, spec)
        uue = _summarise(uue_trials)
    else:
        uue_trials = []
        uue = RateEstimate(0.0, "monte_carlo", 0.0, "UUE silenced")
    bue = _summarise(bue_trials)
    if return_trials:
        return uue, bue, uue_trials, bue_trials
    return uue, bue


def _mean_isr(uav, cfg: NetworkConfig, radius: float):
    # link states of the serving and interfering UAVs are averaged out
    # analytically, leaving the mean over positions only
    env, h = cfg.env, cfg.h
    rho2 = uav[:, 0] ** 2 + uav[:, 1] ** 2
    rho2 = rho2[rho2 <= radius * radius]
    if len(rho2) < 1:
        return None
    dist = np.sqrt(rho2 + h * h)
    k = int(np.argmin(dist))
    r = dist[k]
    others = np.delete(dist, k)
    pl = _p_los(others, h, env)
    interference = np.array([np.sum(pl * others ** -env.alpha_l),
                             np.sum((1 - pl) * others ** -env.alpha_n)]).sum()
    pl0 = _p_los(r, h, env)
    return interference * (pl0 * r ** env.alpha_l + (1 - pl0) * r ** env.alpha_n)


def _misr_trial(cfg, spec, i, purpose):
    rng = trial_rng(spec.seed, i, purpose)
    for _ in range(MAX_REJECTIONS):
        if purpose == _MISR_MHP:
            pat = sample_mhp(cfg.mhp, spec.window, rng)
        else:
            pat = sample_ppp(cfg.lambda_p, spec.window, rng, tier="UAV")
        isr = _mean_isr(pat.points, cfg, spec.radius)
        if isr is not None:
            return isr
    raise RuntimeError("no UAV inside the interference radius after repeated draws")


def _misr_mhp_trial(cfg, spec, i):
    return _misr_trial(cfg, spec, i, _MISR_MHP)


def _misr_ppp_trial(cfg, spec, i):
    return _misr_trial(cfg, spec, i, _MISR_PPP)


@dataclass(frozen=True)
class SimulatedMisr(MisrGain):
    stderr_ppp: float = 0.0
    stderr_mhp: float = 0.0


def estimate_misr(cfg: NetworkConfig, spec: SimulationSpec) -> SimulatedMisr:
    """Sample means of the fading-averaged ISR for the hardcore deployment and
    for a PPP of the parent intensity."""
    mhp = np.array(run_trials(_misr_mhp_trial, cfg, spec))
    ppp = np.array(run_trials(_misr_ppp_trial, cfg, spec))
    n = spec.n_trials
    se = (lambda a: float(a.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf)
    return SimulatedMisr(float(ppp.mean()), float(mhp.mean()), se(ppp), se(mhp))


def write_trials_csv(path, tiers: Iterable[tuple]) -> None:
    """Per-trial dump; ``tiers`` yields ``(tier_name, results)`` pairs."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "tier", "sir", "rate_nats", "serving_state", "serving_distance_m"])
        for tier, results in tiers:
            for i, r in enumerate(results):
                w.writerow([i, tier, repr(r.sir), repr(r.rate_sample), r.serving_state,
                            repr(r.serving_distance)])
