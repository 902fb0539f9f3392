"""Air-to-ground link model: LoS probability, path loss and Nakagami fading."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "Environment",
    "elevation_angle",
    "los_probability",
    "nlos_probability",
    "path_loss",
    "sample_gamma_fading",
]


@dataclass(frozen=True)
class Environment:
    """Propagation constants.

    ``B`` and ``C`` shape the sigmoid LoS model, ``alpha_*`` are path-loss
    exponents (LoS, NLoS, ground-to-ground) and ``m_l``/``m_n`` are the
    Nakagami shapes of LoS and NLoS air-to-ground links. ``fixed_los`` pins the
    LoS probability to a constant, which is how the degenerate always-LoS
    checks are expressed.
    """

    B: float = 0.136
    C: float = 11.95
    alpha_l: float = 3.0
    alpha_n: float = 4.0
    alpha_b: float = 4.0
    m_l: float = 3.0
    m_n: float = 1.0
    fixed_los: Optional[float] = None

    def __post_init__(self):
        if not (self.B > 0 and self.C > 0):
            raise ValueError("environment constants B and C must be positive")
        for name in ("alpha_l", "alpha_n", "alpha_b"):
            if not getattr(self, name) > 2:
                raise ValueError(f"{name} must exceed 2")
        if not (self.m_l >= 1 and self.m_n >= 1):
            raise ValueError("Nakagami shapes must be >= 1")
        if self.fixed_los is not None and not 0 <= self.fixed_los <= 1:
            raise ValueError("fixed_los must be a probability")

    def alpha(self, state: str) -> float:
        return {"l": self.alpha_l, "n": self.alpha_n}[state]

    def m(self, state: str) -> float:
        return {"l": self.m_l, "n": self.m_n}[state]


def _check_range(r, h):
    if np.any(np.asarray(r) < h):
        raise ValueError("link distance must not be shorter than the altitude")


def elevation_angle(r, h):
    """Elevation angle in degrees of a link of 3D length ``r`` at altitude ``h``."""
    _check_range(r, h)
    return np.degrees(np.arcsin(np.asarray(h, dtype=float) / r))


def _p_los(r, h, env: Environment):
    # unchecked; sin(theta) is clipped so horizontal offsets shorter than h
    # (the literal-reading variant of the MHP integrand) stay defined
    if env.fixed_los is not None:
        return np.full(np.shape(r), env.fixed_los) if np.ndim(r) else env.fixed_los
    with np.errstate(divide="ignore"):
        ratio = np.minimum(h / np.asarray(r, dtype=float), 1.0)
    theta = np.degrees(np.arcsin(ratio))
    return 1.0 / (1.0 + env.C * np.exp(-env.B * (theta - env.C)))


def los_probability(r, h, env: Environment):
    """Probability that an air-to-ground link of 3D length ``r`` is LoS."""
    _check_range(r, h)
    return _p_los(r, h, env)


def nlos_probability(r, h, env: Environment):
    return 1.0 - los_probability(r, h, env)


def path_loss(distance, alpha):
    distance = np.asarray(distance, dtype=float)
    if np.any(distance <= 0):
        raise ValueError("path loss is singular at zero distance")
    out = distance ** -float(alpha)
    return float(out) if out.ndim == 0 else out


def sample_gamma_fading(m: float, rng: np.random.Generator, size=None):
    """Unit-mean Gamma(m, 1/m) power gains (Nakagami-m fading)."""
    if m < 1:
        raise ValueError("Nakagami shape must be >= 1")
    return rng.gamma(m, 1.0 / m, size=size)
