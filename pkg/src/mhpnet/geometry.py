"""Poisson and Matérn type-II hardcore point processes on a disk.

Closed forms for the hardcore process (intensity, second-order product
density) live next to the samplers so they can be checked against each other.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .kernels import matern_keep, pair_counts

__all__ = [
    "Window",
    "PointPattern",
    "MhpParams",
    "ProductDensityEstimate",
    "mhp_density",
    "parent_density",
    "sample_ppp",
    "sample_mhp",
    "union_area",
    "product_density",
    "ring_product_density",
    "estimate_product_density",
    "write_patterns_csv",
    "read_patterns_csv",
]


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class Window:
    """Disk of ``radius`` about the origin, padded by ``guard`` metres.

    Points are generated over radius + guard; statistics only use the inner
    disk.
    """

    radius: float
    guard: float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("window radius must be positive")
        if self.guard < 0:
            raise ValueError("guard must be non-negative")

    @property
    def outer(self) -> float:
        return self.radius + self.guard

    @property
    def area(self) -> float:
        """Area of the inner (statistics) disk."""
        return math.pi * self.radius ** 2

    @property
    def outer_area(self) -> float:
        return math.pi * self.outer ** 2

    @classmethod
    def for_hardcore(cls, radius: float, d: float) -> "Window":
        return cls(radius, max(5.0 * d, 500.0))


@dataclass
class PointPattern:
    points: np.ndarray
    tier: str
    window: Window
    altitude: float = 0.0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if self.tier not in ("UAV", "BS"):
            raise ValueError(f"unknown tier {self.tier!r}")

    def __len__(self):
        return len(self.points)

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    def inner_mask(self) -> np.ndarray:
        return np.hypot(self.x, self.y) <= self.window.radius

    def min_distance(self) -> float:
        """Smallest pairwise planar distance (inf for fewer than two points)."""
        from scipy.spatial import cKDTree
        if len(self) < 2:
            return math.inf
        dist, _ = cKDTree(self.points).query(self.points, k=2)
        return float(dist[:, 1].min())


@dataclass(frozen=True)
class MhpParams:
    lambda_p: float
    d: float

    def __post_init__(self):
        if not self.lambda_p > 0:
            raise ValueError("parent density must be positive")
        if self.d < 0:
            raise ValueError("hardcore distance must be non-negative")

    @property
    def lambda_u(self) -> float:
        return mhp_density(self.lambda_p, self.d)

    @property
    def retention(self) -> float:
        return self.lambda_u / self.lambda_p

    @classmethod
    def from_density(cls, lambda_u: float, d: float) -> "MhpParams":
        return cls(parent_density(lambda_u, d), d)


def mhp_density(lambda_p: float, d: float) -> float:
    """Intensity of the type-II hardcore process thinned from a PPP of
    intensity ``lambda_p`` with hardcore distance ``d``."""
    a = lambda_p * math.pi * d * d
    if a == 0.0:
        return float(lambda_p)
    # -expm1 keeps precision for small a
    return -math.expm1(-a) / (math.pi * d * d)


def parent_density(lambda_u: float, d: float) -> float:
    """Parent intensity that thins to ``lambda_u``; inverse of :func:`mhp_density`."""
    a = lambda_u * math.pi * d * d
    if a == 0.0:
        return float(lambda_u)
    if a >= 1.0:
        raise ValueError(
            f"unreachable density: lambda_u*pi*d^2 = {a:.4g} >= 1 for any parent density")
    return -math.log1p(-a) / (math.pi * d * d)


def _uniform_disk(rng, n, radius):
    rad = radius * np.sqrt(rng.random(n))
    ang = 2.0 * np.pi * rng.random(n)
    return np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])


def sample_ppp(density: float, window: Window, seed=None, tier: str = "BS",
               altitude: float = 0.0) -> PointPattern:
    if density < 0:
        raise ValueError("density must be non-negative")
    rng = _rng(seed)
    n = rng.poisson(density * window.outer_area) if density > 0 else 0
    return PointPattern(_uniform_disk(rng, n, window.outer), tier, window, altitude)


def sample_mhp(params: MhpParams, window: Window, seed=None, altitude: float = 0.0,
               backend=None) -> PointPattern:
    """Matérn type-II hardcore sample: parent PPP, uniform marks, and removal
    of every parent that has a lower-marked parent within ``params.d``."""
    rng = _rng(seed)
    parents = sample_ppp(params.lambda_p, window, rng, tier="UAV", altitude=altitude)
    if params.d == 0.0 or len(parents) < 2:
        return parents
    marks = rng.random(len(parents))
    keep = matern_keep(parents.x, parents.y, marks, params.d, backend=backend)
    return PointPattern(parents.points[keep], "UAV", window, altitude)


def union_area(v, d: float):
    """Area covered by two disks of radius ``d`` whose centres are ``v`` apart."""
    v = np.asarray(v, dtype=float)
    if np.any(v < 0) or np.any(v > 2 * d):
        raise ValueError("union_area needs 0 <= v <= 2d")
    out = (2 * np.pi * d * d - 2 * d * d * np.arccos(v / (2 * d))
           + v * np.sqrt(np.maximum(d * d - v * v / 4, 0.0)))
    return float(out) if out.ndim == 0 else out


def product_density(v, params: MhpParams):
    """Second-order product density of the hardcore process at separation ``v``."""
    scalar = np.ndim(v) == 0
    v = np.atleast_1d(np.asarray(v, dtype=float))
    d, lp, lu = params.d, params.lambda_p, params.lambda_u
    out = np.where(v >= 2 * d, lu * lu, 0.0)
    mid = (v >= d) & (v < 2 * d)
    if d > 0 and mid.any():
        out[mid] = ring_product_density(union_area(v[mid], d), params)
    return float(out[0]) if scalar else out


def ring_product_density(V, params: MhpParams):
    """Product density on d <= v < 2d written through the union area ``V`` of
    the two exclusion disks. At V = 2 pi d^2 (v -> 2d from below) it equals
    lambda_u^2."""
    V = np.asarray(V, dtype=float)
    c = np.pi * params.d ** 2
    lp = params.lambda_p
    num = 2 * V * -np.expm1(-lp * c) - 2 * c * -np.expm1(-lp * V)
    return num / (c * V * (V - c))


@dataclass
class ProductDensityEstimate:
    edges: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    realizations: int

    @property
    def centres(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def estimate_product_density(patterns: Sequence[PointPattern], bin_edges,
                             backend=None) -> ProductDensityEstimate:
    """Pair-distance histogram estimate of the second-order product density.

    Ordered pairs are counted with the first point in the inner disk and the
    second anywhere, which is unbiased as long as the guard is at least the
    largest bin edge. Counts are divided by realizations, inner area and
    annulus area.
    """
    patterns = list(patterns)
    if not patterns:
        raise ValueError("need at least one pattern")
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be strictly increasing")
    annulus = np.pi * np.diff(edges ** 2)
    per_real = np.empty((len(patterns), len(edges) - 1))
    for k, pat in enumerate(patterns):
        if pat.window.guard < edges[-1]:
            raise ValueError("guard must cover the largest separation")
        counts = pair_counts(pat.x, pat.y, pat.inner_mask(), edges, backend=backend)
        per_real[k] = counts / (pat.window.area * annulus)
    n = len(patterns)
    stderr = per_real.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.full(len(annulus), np.nan)
    return ProductDensityEstimate(edges, per_real.mean(axis=0), stderr, n)


def write_patterns_csv(path, patterns: Iterable[PointPattern]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x_m", "y_m", "tier"])
        for pat in patterns:
            for x, y in pat.points:
                w.writerow([repr(float(x)), repr(float(y)), pat.tier])


def read_patterns_csv(path, window: Window) -> dict:
    """Read a pattern CSV back; returns ``{tier: PointPattern}``."""
    pts = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["x_m", "y_m", "tier"]:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        for row in reader:
            pts.setdefault(row["tier"], []).append((float(row["x_m"]), float(row["y_m"])))
    return {tier: PointPattern(np.array(p), tier, window) for tier, p in pts.items()}
