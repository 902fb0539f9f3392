"""Quadrature, special functions and bracketing root search.

Scalar routines (``integrate_adaptive`` and friends) are used for one-off
evaluations and as independent checks. The rate integrals in
:mod:`mhpnet.analysis` are tensorised over fixed Gauss-Legendre rules built
by :func:`gauss_legendre` so that they are smooth in their parameters, which
the bisection in :mod:`mhpnet.optimizer` relies on.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

__all__ = [
    "QuadratureSpec",
    "QuadratureError",
    "DivergenceError",
    "InfeasibleBracketError",
    "integrate_adaptive",
    "integrate_semi_infinite",
    "beta_function",
    "binary_search_root",
    "gauss_legendre",
    "INNER",
    "OUTER",
]


class QuadratureError(RuntimeError):
    """Adaptive quadrature gave up; carries the best estimate reached."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


class DivergenceError(QuadratureError):
    pass


class InfeasibleBracketError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-6
    abs_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be non-negative")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


INNER = QuadratureSpec(rel_tol=1e-6, abs_tol=1e-10)
OUTER = QuadratureSpec(rel_tol=1e-4, abs_tol=1e-10)

# 7-point Gauss / 15-point Kronrod pair on [-1, 1].
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss nodes are the odd-indexed Kronrod abscissae.
_GAUSS = np.zeros(15)
_GAUSS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = np.array([f(mid + half * t) for t in _NODES], dtype=float)
    if not np.all(np.isfinite(fx)):
        raise QuadratureError(f"non-finite integrand on [{a}, {b}]", math.nan, math.inf)
    k = half * float(fx @ _KRONROD)
    g = half * float(fx @ _GAUSS)
    return k, abs(k - g)


def integrate_adaptive(f: Callable[[float], float], a: float, b: float,
                       spec: QuadratureSpec = INNER) -> float:
    """Globally adaptive Gauss-Kronrod (G7/K15) quadrature of ``f`` on [a, b].

    The interval with the largest error estimate is bisected until the summed
    error is below ``max(abs_tol, rel_tol * |result|)``. Raises
    :class:`QuadratureError` after ``spec.max_subdivisions`` bisections.
    """
    if b < a:
        raise ValueError("integrate_adaptive requires a <= b")
    if a == b:
        return 0.0
    k, e = _gk15(f, a, b)
    heap = [(-e, a, b, k)]
    total, err = k, e
    for _ in range(spec.max_subdivisions):
        if err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
            return total
        neg_e, lo, hi, k_old = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        k1, e1 = _gk15(f, lo, mid)
        k2, e2 = _gk15(f, mid, hi)
        total += k1 + k2 - k_old
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, lo, mid, k1))
        heapq.heappush(heap, (-e2, mid, hi, k2))
    # recompute from the pieces to shed accumulated rounding
    total = math.fsum(item[3] for item in heap)
    err = math.fsum(-item[0] for item in heap)
    if err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
        return total
    raise QuadratureError("adaptive quadrature did not converge", total, err)


def _tail_weight(f, y):
    try:
        return abs(y * f(y))
    except (OverflowError, ZeroDivisionError):
        return math.inf


def integrate_semi_infinite(f: Callable[[float], float], a: float,
                            spec: QuadratureSpec = INNER) -> float:
    """Integrate ``f`` over [a, inf) via y = a + u/(1-u), u in [0, 1)."""
    scale = max(1.0, abs(a))
    far, farther = _tail_weight(f, a + 1e6 * scale), _tail_weight(f, a + 1e12 * scale)
    # y f(y) must shrink substantially over six decades for the tail to be
    # integrable in practice
    if not math.isfinite(farther) or (farther > 0 and farther >= 0.5 * far):
        raise DivergenceError("integrand does not decay at infinity", math.nan, math.inf)

    def g(u):
        w = 1.0 - u
        return f(a + u / w) / (w * w)

    return integrate_adaptive(g, 0.0, 1.0, spec)


def beta_function(P: float, Q: float) -> float:
    """Euler Beta function B(P, Q) through log-gamma."""
    if not (P > 0 and Q > 0):
        raise ValueError(f"Beta function needs positive arguments, got ({P}, {Q})")
    return math.exp(math.lgamma(P) + math.lgamma(Q) - math.lgamma(P + Q))


def binary_search_root(g: Callable[[float], float], lo: float, hi: float,
                       tol: float = 1e-9) -> float:
    """Bisection for a monotone ``g`` with a sign change on [lo, hi].

    Returns the midpoint of the final bracket, whose width is at most ``tol``.
    Raises :class:`InfeasibleBracketError` when ``g(lo)`` and ``g(hi)`` share
    a strict sign.
    """
    if not lo <= hi:
        raise ValueError("binary_search_root requires lo <= hi")
    g_lo, g_hi = g(lo), g(hi)
    if g_lo == 0:
        return lo
    if g_hi == 0:
        return hi
    if (g_lo > 0) == (g_hi > 0):
        raise InfeasibleBracketError(
            f"no sign change on [{lo}, {hi}]: g(lo)={g_lo}, g(hi)={g_hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if g_mid == 0:
            return mid
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, n: int, panels: int = 1):
    """Composite Gauss-Legendre nodes and weights on [a, b].

    ``panels`` equal sub-intervals with ``n`` nodes each; returns two flat
    arrays of length ``n * panels``.
    """
    x, w = _leggauss(n)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    return (mid + half * x).ravel(), (half * w).ravel()
