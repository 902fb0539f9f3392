"""Mean interference-to-signal ratios, the hardcore gain and average rates.

Rates are in nats/s/Hz. The nested integrals are evaluated on fixed tensor
Gauss-Legendre rules (see :class:`RateQuadrature`): every outer node carries
its own inner rule, scaled to where the inner integrand changes shape, and the
far tails of the interference integrals are closed analytically with the
first-order expansion of the Laplace factor.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .channel import Environment, _p_los
from .geometry import MhpParams, parent_density, product_density
from .numerics import (INNER, QuadratureSpec, beta_function, gauss_legendre,
                       integrate_semi_infinite)

__all__ = [
    "dbm_to_watts",
    "watts_to_dbm",
    "NetworkConfig",
    "MisrGain",
    "RateEstimate",
    "RateQuadrature",
    "serving_pdf_uav",
    "misr_ppp_cond",
    "misr_mhp_cond",
    "misr_gain",
    "capacity_from_laplace",
    "kappa_s",
    "kappa_b",
    "K_s",
    "K_b",
    "rate_uue",
    "rate_bue",
    "rate_uue_given_r",
    "rate_bue_given_r",
    "ase",
]

STATES = ("l", "n")


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w) + 30.0


@dataclass(frozen=True)
class NetworkConfig:
    """Physical parameters of the two-tier network, SI units.

    Defaults are the dense-urban set: 10 UAVs and 10 BSs per km^2, 37 dBm on
    both tiers, 100 m hardcore distance. ``R_b`` (BS user disk radius) has no
    published value; the 162 m default is a calibration choice.

    ``literal_misr`` switches the hardcore interference integrand to its
    printed form: LoS probability taken at the UAV-to-UAV separation and the
    nearest-neighbour boundary written with ``|cos(phi)|``.
    """

    lambda_u: float = 1e-5
    lambda_b: float = 1e-5
    d: float = 100.0
    h: float = 100.0
    P_u: float = dbm_to_watts(37.0)
    P_b: float = dbm_to_watts(37.0)
    eta: float = 1.0
    R_b: float = 162.0
    env: Environment = field(default_factory=Environment)
    literal_misr: bool = False

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("power control factor eta must lie in [0, 1]")
        if self.h < 0:
            raise ValueError("altitude must be non-negative")
        if self.lambda_u < 0 or self.lambda_b < 0:
            raise ValueError("densities must be non-negative")
        if self.d < 0:
            raise ValueError("hardcore distance must be non-negative")
        if self.lambda_u * math.pi * self.d ** 2 >= 1.0:
            raise ValueError("lambda_u * pi * d^2 must be below 1")
        if not self.R_b > 0:
            raise ValueError("R_b must be positive")
        if not (self.P_u > 0 and self.P_b > 0):
            raise ValueError("transmit powers must be positive")

    @property
    def lambda_p(self) -> float:
        return parent_density(self.lambda_u, self.d)

    @property
    def mhp(self) -> MhpParams:
        return MhpParams(self.lambda_p, self.d)

    def replace(self, **changes) -> "NetworkConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class MisrGain:
    misr_ppp: float
    misr_mhp: float

    @property
    def gain(self) -> float:
        return self.misr_ppp / self.misr_mhp


@dataclass(frozen=True)
class RateEstimate:
    value: float
    source: str = "analytical"
    half_width: float = 0.0
    note: str = ""

    def __post_init__(self):
        if self.source not in ("analytical", "monte_carlo"):
            raise ValueError(f"unknown source {self.source!r}")
        if self.value < 0 or self.half_width < 0:
            raise ValueError("rates and half-widths are non-negative")

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class RateQuadrature:
    """Node counts of the tensor rules. Defaults agree with a doubled rule to
    better than 1e-5 relative at the default network."""

    n_rho: int = 48          # serving distance, UAV tiers
    n_u: int = 40            # serving distance, BS users
    z_range: tuple = (-20.0, 40.0)   # log threshold range
    z_panels: int = 10
    n_inner: int = 16        # nodes per panel, all inner rules
    inner_span: float = 14.0  # log-range beyond the knee of inner integrands
    n_phi: int = 16
    n_v: int = 24

    def scaled(self, factor: int) -> "RateQuadrature":
        return RateQuadrature(self.n_rho * factor, self.n_u * factor, self.z_range,
                              self.z_panels * factor, self.n_inner * factor,
                              self.inner_span, self.n_phi * factor, self.n_v * factor)


DEFAULT_QUAD = RateQuadrature()


# -- serving distance ------------------------------------------------------

def serving_pdf_uav(r, lam: float, h: float):
    """Density of the distance to the nearest UAV of a PPP of intensity
    ``lam`` hovering at altitude ``h``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < h):
        raise ValueError("serving distance cannot be shorter than the altitude")
    out = 2 * np.pi * lam * r * np.exp(-np.pi * lam * (r * r - h * h))
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=16)
def _rho_rule(n: int):
    # rho = sqrt(pi lam (r^2 - h^2)) has density 2 rho exp(-rho^2) on [0, inf)
    rho, w = gauss_legendre(0.0, 6.5, n // 4 or 1, panels=4)
    return rho, w * 2 * rho * np.exp(-rho * rho)


def _serving_nodes(lam: float, h: float, quad: RateQuadrature):
    rho, w = _rho_rule(quad.n_rho)
    return np.sqrt(h * h + rho * rho / (np.pi * lam)), w


# -- inner interference integrals -------------------------------------------

def _near_rule(lower, ratio, h, n):
    """Nodes on [lower, ratio * lower] in t = sqrt(y - h), where the LoS
    probability is smooth (it has a square-root kink at y = h). Weights are
    for a y-weighted log rule, i.e. ``sum g(y) y^2 w`` approximates
    ``int g(y) y dy``."""
    u, wu = gauss_legendre(0.0, 1.0, n)
    t0 = np.sqrt(np.maximum(lower - h, 0.0))[..., None]
    t1 = np.sqrt(ratio * lower - h)[..., None]
    t = t0 + (t1 - t0) * u
    y = h + t * t
    return y, 2 * t * (t1 - t0) * wu / y


def _laplace_uav_integral(lower, A, cfg: NetworkConfig, quad: RateQuadrature):
    """sum_q int_lower^inf [1 - (1 + A y^-a_q / m_q)^-m_q] P_q(y) y dy.

    ``A`` broadcasts against ``lower``. The first e-fold above ``lower`` is
    integrated in sqrt(y - h); beyond it the rule runs in log(y), with one
    segment up to the knee y_c where the Laplace factor saturates and one past
    it, followed by the analytic first-order tail.
    """
    env, h = cfg.env, cfg.h
    lower = np.asarray(lower, dtype=float)
    A = np.asarray(A, dtype=float)
    lower, A = np.broadcast_arrays(lower, A)
    n = quad.n_inner
    y0, w0 = _near_rule(lower, math.e, h, n)
    start = math.e * lower
    knee = start.copy()
    for q in STATES:
        knee = np.maximum(knee, (A / env.m(q)) ** (1.0 / env.alpha(q)))
    s1, w1 = gauss_legendre(0.0, 1.0, n)
    s2, w2 = gauss_legendre(0.0, quad.inner_span, n, panels=3)
    seg1 = np.log(knee / start)[..., None]
    y1 = start[..., None] * np.exp(seg1 * s1)
    y2 = knee[..., None] * np.exp(s2)
    ys = [(y0, w0), (y1, w1 * seg1), (y2, np.broadcast_to(w2, y2.shape))]
    total = np.zeros(A.shape)
    Ab = A[..., None]
    for q in STATES:
        a, m = env.alpha(q), env.m(q)
        for y, w in ys:
            pq = _pq(q, y, h, env)
            kappa = -np.expm1(-m * np.log1p(Ab * y ** -a / m)) * pq
            total += np.sum(kappa * y * y * w, axis=-1)
        Y = y2[..., -1]
        total += _pq(q, Y, h, env) * A * Y ** (2 - a) / (a - 2)
    return total


def _pq(q, y, h, env):
    pl = _p_los(y, h, env)
    return pl if q == "l" else 1.0 - pl


def _ppp_isr_tail(r, cfg: NetworkConfig, quad: RateQuadrature = DEFAULT_QUAD):
    """sum_q int_r^inf P_q(y) y^(1 - a_q) dy, vectorised over ``r``."""
    env, h = cfg.env, cfg.h
    r = np.atleast_1d(np.asarray(r, dtype=float))
    y0, w0 = _near_rule(r, math.e, h, quad.n_inner)
    s, w = gauss_legendre(1.0, 2 * quad.inner_span, quad.n_inner, panels=4)
    y = r[:, None] * np.exp(s)
    out = np.zeros(len(r))
    for q in STATES:
        a = env.alpha(q)
        out += np.sum(_pq(q, y0, h, env) * y0 ** (2 - a) * w0, axis=-1)
        out += np.sum(_pq(q, y, h, env) * y ** (2 - a) * w, axis=-1)
        Y = y[:, -1]
        out += _pq(q, Y, h, env) * Y ** (2 - a) / (a - 2)
    return out


def misr_ppp_cond(r, s: str, cfg: NetworkConfig, lam: Optional[float] = None):
    """Mean ISR given a serving link of length ``r`` in state ``s`` when the
    interferers form a PPP of intensity ``lam`` (default: the parent
    intensity) beyond ``r``."""
    lam = cfg.lambda_p if lam is None else lam
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < cfg.h):
        raise ValueError("serving distance cannot be shorter than the altitude")
    out = 2 * np.pi * lam * r_arr ** cfg.env.alpha(s) * _ppp_isr_tail(r_arr.ravel(), cfg).reshape(r_arr.shape)
    return float(out) if out.ndim == 0 else out


def _phi_pieces(x, d, literal, n_phi):
    cuts = []
    for c in (d / (2 * x), d / x) if x > 0 else ():
        if c < 1:
            cuts.append(math.acos(c))
            if literal:
                cuts.append(math.pi - math.acos(c))
    edges = np.unique(np.clip([0.0, *cuts, math.pi], 0.0, math.pi))
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            p, w = gauss_legendre(a, b, n_phi)
            nodes.append(p)
            weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def _mhp_isr_inner(r: float, cfg: NetworkConfig, quad: RateQuadrature = DEFAULT_QUAD) -> float:
    """(1/lambda_u) * double integral over interferer offsets (v, phi) from the
    serving UAV, weighted by the product density; excludes r^a_s."""
    env, h, d = cfg.env, cfg.h, cfg.d
    params = cfg.mhp
    lu = params.lambda_u
    x = math.sqrt(max(r * r - h * h, 0.0))
    phi, wphi = _phi_pieces(x, d, cfg.literal_misr, quad.n_phi)
    cosphi = np.cos(phi)
    lo = 2 * x * (np.abs(cosphi) if cfg.literal_misr else cosphi)
    lo = np.maximum(lo, d)

    def f(v, chi):
        D = np.sqrt(np.maximum(v * v + r * r - 2 * x * v * cosphi[:, None], r * r * 1e-300))
        arg = v if cfg.literal_misr else D
        total = 0.0
        pl = _p_los(arg, h, env)
        for q, pq in (("l", pl), ("n", 1.0 - pl)):
            total = total + pq * v * D ** -env.alpha(q)
        return total * chi

    inner = np.zeros(len(phi))
    # hardcore ring d <= v < 2d; v = 2d - (2d - lo)(1 - w)^2 removes the
    # square-root behaviour of the product density at 2d
    ring = lo < 2 * d
    if d > 0 and np.any(ring):
        w_n, w_w = gauss_legendre(0.0, 1.0, quad.n_v)
        span = np.where(ring, 2 * d - lo, 0.0)[:, None]
        v = 2 * d - span * (1 - w_n) ** 2
        jac = 2 * span * (1 - w_n) * w_w
        inner += np.sum(f(v, product_density(v.ravel(), params).reshape(v.shape)) * jac, axis=1)
    # free region v >= max(lo, 2d), product density lambda_u^2
    base = np.maximum(np.maximum(lo, 2 * d), 1e-9 * max(r, 1.0))
    far = np.maximum(base, r) * math.exp(quad.inner_span)
    span = np.log(far / base)[:, None]
    s_n, s_w = gauss_legendre(0.0, 1.0, quad.n_v, panels=4)
    v = base[:, None] * np.exp(span * s_n)
    inner += np.sum(f(v, lu * lu) * v * span * s_w, axis=1)
    V = v[:, -1]
    pl = _p_los(V, h, env)
    for q, pq in (("l", pl), ("n", 1.0 - pl)):
        a = env.alpha(q)
        inner += lu * lu * pq * V ** (2 - a) / (a - 2)
    return 2.0 * float(np.sum(inner * wphi)) / lu


def misr_mhp_cond(r, s: str, cfg: NetworkConfig, quad: RateQuadrature = DEFAULT_QUAD):
    """Mean ISR given a serving UAV at 3D distance ``r`` in state ``s`` of the
    hardcore process, through its second-order product density."""
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr < cfg.h):
        raise ValueError("serving distance cannot be shorter than the altitude")
    if cfg.lambda_u <= 0:
        raise ValueError("the hardcore MISR needs lambda_u > 0")
    a = cfg.env.alpha(s)
    out = np.array([rr ** a * _mhp_isr_inner(rr, cfg, quad) for rr in r_arr])
    return float(out[0]) if np.ndim(r) == 0 else out


def _misr_gain_key(cfg: NetworkConfig) -> NetworkConfig:
    # the gain does not depend on powers, eta, the BS tier or R_b
    return cfg.replace(eta=1.0, lambda_b=0.0, P_u=1.0, P_b=1.0, R_b=1.0)


@lru_cache(maxsize=256)
def _misr_gain_cached(cfg: NetworkConfig, quad: RateQuadrature) -> MisrGain:
    env = cfg.env
    lp, lu = cfg.lambda_p, cfg.lambda_u
    r_p, w_p = _serving_nodes(lp, cfg.h, quad)
    tail = _ppp_isr_tail(r_p, cfg, quad)
    pl = _p_los(r_p, cfg.h, env)
    ppp = 0.0
    for s, ps in (("l", pl), ("n", 1.0 - pl)):
        ppp += np.sum(ps * 2 * np.pi * lp * r_p ** env.alpha(s) * tail * w_p)
    r_u, w_u = _serving_nodes(lu, cfg.h, quad)
    inner = np.array([_mhp_isr_inner(r, cfg, quad) for r in r_u])
    pl = _p_los(r_u, cfg.h, env)
    mhp = 0.0
    for s, ps in (("l", pl), ("n", 1.0 - pl)):
        mhp += np.sum(ps * r_u ** env.alpha(s) * inner * w_u)
    return MisrGain(float(ppp), float(mhp))


def misr_gain(cfg: NetworkConfig, quad: RateQuadrature = DEFAULT_QUAD) -> MisrGain:
    """Unconditional MISR of the parent PPP and of the hardcore process, and
    their ratio. Cached per (altitude, densities, environment)."""
    if cfg.lambda_u <= 0:
        raise ValueError("the hardcore gain needs lambda_u > 0")
    return _misr_gain_cached(_misr_gain_key(cfg), quad)


# -- Laplace transforms and rates --------------------------------------------

def capacity_from_laplace(laplace_Y: Callable[[float], float],
                          laplace_X: Callable[[float], float],
                          spec: QuadratureSpec = INNER) -> float:
    """E[ln(1 + X/Y)] from the Laplace transforms of independent X, Y >= 0."""
    return integrate_semi_infinite(
        lambda z: laplace_Y(z) * (1.0 - laplace_X(z)) / z, 0.0, spec)


def _bs_beta(alpha_b: float) -> float:
    delta = 2.0 / alpha_b
    return beta_function(delta, 1.0 - delta)


def kappa_s(r, y, z, s: str, G: float, cfg: NetworkConfig):
    """Per-interferer Laplace deficit seen by a UAV user served in state ``s``."""
    env = cfg.env
    y = np.asarray(y, dtype=float)
    out = 0.0
    for q in STATES:
        m = env.m(q)
        x = np.asarray(z) * y ** -env.alpha(q) * np.asarray(r) ** env.alpha(s) / (m * G)
        out = out + -np.expm1(-m * np.log1p(x)) * _pq(q, y, cfg.h, env)
    return out


def kappa_b(r, y, z, cfg: NetworkConfig):
    """Per-UAV Laplace deficit seen by a BS user at distance ``r`` from its BS."""
    env = cfg.env
    y = np.asarray(y, dtype=float)
    out = 0.0
    for q in STATES:
        m = env.m(q)
        x = (np.asarray(z) * cfg.eta * cfg.P_u * np.asarray(r) ** env.alpha_b
             / (m * cfg.P_b * y ** env.alpha(q)))
        out = out + -np.expm1(-m * np.log1p(x)) * _pq(q, y, cfg.h, env)
    return out


def _K_s_grid(r, z, s, G, cfg, quad):
    env = cfg.env
    A = z * r ** env.alpha(s) / G
    uav = 2 * np.pi * cfg.lambda_p * _laplace_uav_integral(r, A, cfg, quad)
    if cfg.lambda_b == 0:
        return uav
    with np.errstate(divide="ignore"):
        ratio = z * cfg.P_b * r ** env.alpha(s) / (cfg.eta * cfg.P_u)
    bs = (2 * np.pi * cfg.lambda_b / env.alpha_b) * ratio ** (2 / env.alpha_b) * _bs_beta(env.alpha_b)
    return uav + bs


def _K_b_grid(r, z, cfg, quad):
    env = cfg.env
    bs = (2 * np.pi * cfg.lambda_b / env.alpha_b) * z ** (2 / env.alpha_b) * r * r * _bs_beta(env.alpha_b)
    if cfg.eta == 0 or cfg.lambda_u == 0:
        return bs + 0.0 * r * z
    A = z * cfg.eta * cfg.P_u * r ** env.alpha_b / cfg.P_b
    return 2 * np.pi * cfg.lambda_u * _laplace_uav_integral(cfg.h, A, cfg, quad) + bs


def K_s(r, z, s: str, G: float, cfg: NetworkConfig, quad: RateQuadrature = DEFAULT_QUAD):
    """Laplace exponent of the (gain-scaled) interference at a UAV user.

    Infinite for eta = 0 and z > 0: the BS tier then drowns a silent UAV.
    """
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(r < cfg.h):
        raise ValueError("serving distance cannot be shorter than the altitude")
    if cfg.eta == 0:
        out = np.where(z > 0, np.inf, 0.0) * np.ones(np.broadcast(r, z).shape)
    else:
        out = _K_s_grid(r, z, s, G, cfg, quad)
    return float(out) if np.ndim(out) == 0 else out


def K_b(r, z, cfg: NetworkConfig, quad: RateQuadrature = DEFAULT_QUAD):
    """Laplace exponent of the interference at a BS user ``r`` from its BS."""
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(r < 0) or np.any(r > cfg.R_b):
        raise ValueError("BS user distance must lie in [0, R_b]")
    out = _K_b_grid(r, z, cfg, quad)
    return float(out) if np.ndim(out) == 0 else out


def _z_rule(quad: RateQuadrature):
    t, w = gauss_legendre(*quad.z_range, quad.n_inner, panels=quad.z_panels)
    z = np.exp(t)
    return z, w


def rate_uue_given_r(r, s: str, G: float, cfg: NetworkConfig,
                     quad: RateQuadrature = DEFAULT_QUAD):
    """E[ln(1 + SIR)] of a UAV user whose serving link has length ``r`` and
    state ``s`` (gain-scaled PPP approximation)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    z, wz = _z_rule(quad)
    m = cfg.env.m(s)
    K = _K_s_grid(r[None, :], z[:, None], s, G, cfg, quad)
    # in t = ln z the factor (1 - (1 + z/m)^-m)/z picks up a Jacobian z
    signal = -np.expm1(-m * np.log1p(z / m))
    out = np.sum((signal * wz)[:, None] * np.exp(-K), axis=0)
    return out + z[0]  # int_0^{z_min} of an integrand equal to 1 at 0


def rate_bue_given_r(r, cfg: NetworkConfig, quad: RateQuadrature = DEFAULT_QUAD):
    """E[ln(1 + SIR)] of a BS user at distance ``r`` from its BS."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    z, wz = _z_rule(quad)
    K = _K_b_grid(r[None, :], z[:, None], cfg, quad)
    out = np.sum((z / (1 + z) * wz)[:, None] * np.exp(-K), axis=0)
    return out + z[0]


def rate_uue(cfg: NetworkConfig, G: Optional[float] = None,
             quad: RateQuadrature = DEFAULT_QUAD) -> RateEstimate:
    """Average rate of the typical UAV user, nats/s/Hz.

    ``G`` defaults to :func:`misr_gain` of ``cfg``. With eta = 0 the UAVs are
    silent and the rate is 0.
    """
    if cfg.eta == 0:
        return RateEstimate(0.0, note="UUE silenced")
    if G is None:
        G = misr_gain(cfg, quad).gain
    r, w = _serving_nodes(cfg.lambda_p, cfg.h, quad)
    pl = _p_los(r, cfg.h, cfg.env)
    total = 0.0
    for s, ps in (("l", pl), ("n", 1.0 - pl)):
        total += np.sum(ps * rate_uue_given_r(r, s, G, cfg, quad) * w)
    return RateEstimate(float(total))


@lru_cache(maxsize=16)
def _disk_rule(n: int):
    # u = (r/R_b)^2 is uniform on [0, 1]; substituting u = w^3 clusters nodes
    # near r = 0 where the conditional rate grows logarithmically
    w, wt = gauss_legendre(0.0, 1.0, n // 4 or 1, panels=4)
    return np.sqrt(w ** 3), 3 * w * w * wt


def rate_bue(cfg: NetworkConfig, quad: RateQuadrature = DEFAULT_QUAD) -> RateEstimate:
    """Average rate of the typical BS user, nats/s/Hz."""
    if cfg.h <= 0 and cfg.eta > 0 and cfg.lambda_u > 0:
        raise ValueError("BS-user rate needs UAVs above ground (h > 0)")
    frac, w = _disk_rule(quad.n_u)
    r = cfg.R_b * frac
    return RateEstimate(float(np.sum(rate_bue_given_r(r, cfg, quad) * w)))


def ase(cfg: NetworkConfig, G: Optional[float] = None,
        quad: RateQuadrature = DEFAULT_QUAD) -> float:
    """Area spectral efficiency lambda_u R_u + lambda_b R_B (nats/s/Hz/m^2)."""
    total = cfg.lambda_b * rate_bue(cfg, quad).value if cfg.lambda_b > 0 else 0.0
    if cfg.lambda_u > 0:
        total += cfg.lambda_u * rate_uue(cfg, G, quad).value
    return total
