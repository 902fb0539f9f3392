import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from mhpnet.numerics import (DivergenceError, InfeasibleBracketError, QuadratureError,
                             QuadratureSpec, beta_function, binary_search_root, gauss_legendre,
                             integrate_adaptive, integrate_semi_infinite)


def test_adaptive_matches_closed_forms():
    assert integrate_adaptive(np.sin, 0.0, math.pi) == pytest.approx(2.0, rel=1e-10)
    assert integrate_adaptive(lambda x: 1 / (1 + x * x), -1.0, 1.0) == pytest.approx(math.pi / 2, rel=1e-10)


def test_adaptive_handles_endpoint_singularity():
    # int_0^1 x^-1/2 dx = 2
    val = integrate_adaptive(lambda x: x ** -0.5, 0.0, 1.0, QuadratureSpec(1e-6, 1e-10, 500))
    assert val == pytest.approx(2.0, rel=1e-5)


def test_adaptive_reports_best_estimate_on_failure():
    with pytest.raises(QuadratureError) as info:
        integrate_adaptive(lambda x: np.sin(1 / x), 1e-6, 1.0, QuadratureSpec(1e-12, 0.0, 3))
    assert math.isfinite(info.value.estimate)
    assert info.value.error > 0


def test_semi_infinite_exponential_integral():
    # int_1^inf e^-x / x dx = E1(1)
    val = integrate_semi_infinite(lambda x: math.exp(-x) / x, 1.0)
    assert val == pytest.approx(special.exp1(1.0), rel=1e-8)


def test_semi_infinite_power_tail():
    assert integrate_semi_infinite(lambda x: x ** -3, 1.0) == pytest.approx(0.5, rel=1e-8)


def test_semi_infinite_divergence_is_reported():
    with pytest.raises(DivergenceError):
        integrate_semi_infinite(lambda x: 1.0 / x, 1.0)


def test_beta_at_reciprocal_half():
    assert beta_function(0.5, 0.5) == pytest.approx(math.pi, rel=1e-14)


@given(st.floats(0.05, 0.95))
def test_beta_reflection(p):
    assert beta_function(p, 1 - p) == pytest.approx(math.pi / math.sin(math.pi * p), rel=1e-12)


@given(st.floats(0.1, 20), st.floats(0.1, 20))
def test_beta_symmetric_and_matches_scipy(p, q):
    assert beta_function(p, q) == pytest.approx(beta_function(q, p), rel=1e-14)
    assert beta_function(p, q) == pytest.approx(special.beta(p, q), rel=1e-12)


@pytest.mark.parametrize("p,q", [(0.0, 1.0), (1.0, -0.5)])
def test_beta_rejects_non_positive(p, q):
    with pytest.raises(ValueError):
        beta_function(p, q)


def test_bisection_finds_cube_root():
    root = binary_search_root(lambda x: x ** 3 - 2, 0.0, 2.0, tol=1e-10)
    assert root == pytest.approx(2 ** (1 / 3), abs=1e-10)


@given(st.floats(-5, 5), st.floats(1e-8, 1e-3))
def test_bisection_tolerance(c, tol):
    root = binary_search_root(lambda x: x - c, -10.0, 10.0, tol=tol)
    assert abs(root - c) <= tol


def test_bisection_without_sign_change():
    with pytest.raises(InfeasibleBracketError):
        binary_search_root(lambda x: x * x + 1, -1.0, 1.0)


@given(st.integers(1, 12), st.integers(1, 4))
def test_gauss_legendre_is_exact_for_polynomials(n, panels):
    x, w = gauss_legendre(-1.0, 2.0, n, panels)
    deg = 2 * n - 1
    exact = (2.0 ** (deg + 1) - (-1.0) ** (deg + 1)) / (deg + 1)
    assert np.sum(w * x ** deg) == pytest.approx(exact, rel=1e-11)


@pytest.mark.parametrize("kwargs", [dict(rel_tol=0.0), dict(abs_tol=-1.0), dict(max_subdivisions=0)])
def test_quadrature_spec_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureSpec(**kwargs)
