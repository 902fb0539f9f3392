import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from mhpnet.analysis import (DEFAULT_QUAD, NetworkConfig, K_b, K_s, ase, capacity_from_laplace,
                             dbm_to_watts, kappa_b, kappa_s, misr_gain, misr_mhp_cond,
                             misr_ppp_cond, rate_bue, rate_bue_given_r, rate_uue, rate_uue_given_r,
                             serving_pdf_uav, watts_to_dbm)
from mhpnet.channel import _p_los
from mhpnet.geometry import product_density

CFG = NetworkConfig()


@given(st.floats(-50.0, 80.0))
def test_dbm_round_trip(p):
    assert watts_to_dbm(dbm_to_watts(p)) == pytest.approx(p, abs=1e-12)


def test_dbm_known_value():
    assert dbm_to_watts(37.0) == pytest.approx(5.011872336272722, rel=1e-14)
    assert dbm_to_watts(30.0) == 1.0


@pytest.mark.parametrize("h", [0.0, 100.0, 300.0])
def test_serving_pdf_normalised(h):
    total, _ = integrate.quad(serving_pdf_uav, h, np.inf, args=(1e-5, h))
    assert total == pytest.approx(1.0, rel=1e-8)


def test_serving_pdf_rejects_short_links():
    with pytest.raises(ValueError):
        serving_pdf_uav(50.0, 1e-5, 100.0)


@pytest.mark.parametrize("kwargs", [dict(eta=1.5), dict(h=-1.0), dict(lambda_u=-1.0), dict(R_b=0.0),
                                    dict(lambda_u=1.01 / (math.pi * 100 ** 2))])
def test_network_config_validation(kwargs):
    with pytest.raises(ValueError):
        NetworkConfig(**kwargs)


def test_capacity_lemma_exponential_over_constant():
    val = capacity_from_laplace(lambda z: math.exp(-z), lambda z: 1 / (1 + z))
    assert val == pytest.approx(math.e * special.exp1(1.0), abs=1e-8)


def test_capacity_lemma_ratio_of_exponentials():
    # X/Y of iid unit exponentials has ccdf 1/(1+t), so E ln(1 + X/Y) = 1
    val = capacity_from_laplace(lambda z: 1 / (1 + z), lambda z: 1 / (1 + z))
    assert val == pytest.approx(1.0, abs=1e-8)


def _ppp_isr_oracle(r, s, cfg, lam):
    env, h = cfg.env, cfg.h

    def f(y):
        pl = _p_los(y, h, env)
        return (pl * y ** -env.alpha_l + (1 - pl) * y ** -env.alpha_n) * y

    val, _ = integrate.quad(lambda s: f(math.exp(s)) * math.exp(s), math.log(r), math.log(r) + 45,
                            epsabs=0, epsrel=1e-11, limit=400)
    return 2 * np.pi * lam * r ** env.alpha(s) * val


@pytest.mark.parametrize("r,s", [(100.0, "l"), (180.0, "n"), (600.0, "l")])
def test_misr_ppp_conditional_against_quad(r, s):
    assert misr_ppp_cond(r, s, CFG) == pytest.approx(_ppp_isr_oracle(r, s, CFG, CFG.lambda_p), rel=1e-6)


def _mhp_isr_oracle(r, s, cfg):
    env, h, d = cfg.env, cfg.h, cfg.d
    p = cfg.mhp
    x = math.sqrt(r * r - h * h)

    def inner(v, phi):
        D = math.sqrt(v * v + r * r - 2 * x * v * math.cos(phi))
        pl = _p_los(D, h, env)
        return product_density(v, p) * (pl * D ** -env.alpha_l + (1 - pl) * D ** -env.alpha_n) * v

    def outer(phi):
        lo = max(d, 2 * x * math.cos(phi))
        ring = integrate.quad(inner, lo, 2 * d, args=(phi,), epsrel=1e-10, limit=200)[0] if lo < 2 * d else 0.0
        # the free part decays slowly; integrate it in log(v)
        base = max(lo, 2 * d)
        free = integrate.quad(lambda s: inner(math.exp(s), phi) * math.exp(s), math.log(base),
                              math.log(base) + 45, epsrel=1e-10, limit=400)[0]
        return ring + free

    cuts = [math.acos(c) for c in (d / (2 * x), d / x) if c < 1]
    val, _ = integrate.quad(outer, 0, math.pi, points=cuts or None, epsrel=1e-8, limit=200)
    return r ** env.alpha(s) * 2 * val / p.lambda_u


@pytest.mark.parametrize("r,s", [(120.0, "l"), (260.0, "n")])
def test_misr_mhp_conditional_against_nested_quad(r, s):
    assert misr_mhp_cond(r, s, CFG) == pytest.approx(_mhp_isr_oracle(r, s, CFG), rel=1e-4)


@pytest.mark.parametrize("r", [110.0, 250.0])
def test_misr_mhp_reduces_to_ppp_without_hardcore(r):
    cfg = CFG.replace(d=0.01)
    assert misr_mhp_cond(r, "l", cfg) == pytest.approx(misr_ppp_cond(r, "l", cfg, lam=cfg.lambda_u),
                                                       rel=1e-5)


def test_gain_is_the_ratio():
    g = misr_gain(CFG)
    assert g.misr_ppp > 0 and g.misr_mhp > 0
    assert g.gain == g.misr_ppp / g.misr_mhp


def test_gain_ignores_power_and_bs_tier():
    assert misr_gain(CFG).gain == misr_gain(CFG.replace(eta=0.3, lambda_b=3e-5, R_b=50.0)).gain


def test_gain_quadrature_converged():
    assert misr_gain(CFG, DEFAULT_QUAD.scaled(2)).gain == pytest.approx(misr_gain(CFG).gain, rel=1e-5)


@pytest.mark.parametrize("z", [1e-3, 0.7, 40.0])
def test_K_b_against_quad(z):
    r = 80.0
    uav, _ = integrate.quad(lambda y: kappa_b(r, y, z, CFG) * y, CFG.h, np.inf, epsrel=1e-10, limit=300)
    bs, _ = integrate.quad(lambda t: t / (1 + t ** 4 / (z * r ** 4)), 0, np.inf, epsrel=1e-10, limit=300)
    oracle = 2 * np.pi * CFG.lambda_u * uav + 2 * np.pi * CFG.lambda_b * bs
    assert K_b(r, z, CFG) == pytest.approx(oracle, rel=1e-6)


@pytest.mark.parametrize("z,s", [(1e-2, "l"), (3.0, "n"), (200.0, "l")])
def test_K_s_against_quad(z, s):
    r, G, cfg = 150.0, 1.07, CFG.replace(eta=0.4)
    uav, _ = integrate.quad(lambda y: kappa_s(r, y, z, s, G, cfg) * y, r, np.inf, epsrel=1e-10, limit=300)
    ratio = z * cfg.P_b * r ** cfg.env.alpha(s) / (cfg.eta * cfg.P_u)
    bs, _ = integrate.quad(lambda t: t / (1 + t ** 4 / ratio), 0, np.inf, epsrel=1e-10, limit=300)
    oracle = 2 * np.pi * cfg.lambda_p * uav + 2 * np.pi * cfg.lambda_b * bs
    assert K_s(r, z, s, G, cfg) == pytest.approx(oracle, rel=1e-6)


def test_K_s_silent_uavs():
    assert K_s(150.0, 1.0, "l", 1.0, CFG.replace(eta=0.0)) == math.inf
    assert K_s(150.0, 0.0, "l", 1.0, CFG.replace(eta=0.0)) == 0.0


def test_K_b_range_check():
    with pytest.raises(ValueError):
        K_b(CFG.R_b * 1.01, 1.0, CFG)


@pytest.mark.parametrize("r,s", [(105.0, "l"), (300.0, "n")])
def test_conditional_uue_rate_against_adaptive_lemma(r, s):
    G, m = 1.07, CFG.env.m(s)
    oracle = capacity_from_laplace(lambda z: math.exp(-K_s(r, z, s, G, CFG)),
                                   lambda z: (1 + z / m) ** -m)
    assert rate_uue_given_r(r, s, G, CFG)[0] == pytest.approx(oracle, rel=1e-5)


@pytest.mark.parametrize("r", [5.0, 60.0, 150.0])
def test_bue_rate_without_uavs_against_coverage_integral(r):
    # Rayleigh, alpha = 4, PPP interferers: P(SIR > t) = exp(-lambda pi^2 r^2 sqrt(t) / 2)
    cfg = CFG.replace(lambda_u=0.0)
    lam = cfg.lambda_b

    def ccdf(t):
        if t > 700:
            return 0.0
        return math.exp(-lam * math.pi ** 2 * r * r * math.sqrt(math.expm1(t)) / 2)

    oracle, _ = integrate.quad(ccdf, 0, np.inf, epsrel=1e-10, limit=300)
    assert rate_bue_given_r(r, cfg)[0] == pytest.approx(oracle, rel=1e-6)


def test_bue_rate_without_uavs_disk_average():
    cfg = CFG.replace(lambda_u=0.0)
    oracle, _ = integrate.quad(lambda r: rate_bue_given_r(r, cfg)[0] * 2 * r / cfg.R_b ** 2, 0, cfg.R_b,
                               epsrel=1e-9, limit=200)
    assert rate_bue(cfg).value == pytest.approx(oracle, rel=1e-6)


def test_rates_quadrature_converged():
    fine = DEFAULT_QUAD.scaled(2)
    cfg = CFG.replace(eta=0.5, h=150.0)
    assert rate_uue(cfg).value == pytest.approx(rate_uue(cfg, quad=fine).value, rel=1e-5)
    assert rate_bue(cfg).value == pytest.approx(rate_bue(cfg, quad=fine).value, rel=1e-5)


def test_silent_uavs():
    assert rate_uue(CFG.replace(eta=0.0)).value == 0.0
    assert rate_bue(CFG.replace(eta=0.0)).value == pytest.approx(rate_bue(CFG.replace(lambda_u=0.0)).value,
                                                                rel=1e-12)


def test_bue_rate_needs_altitude():
    with pytest.raises(ValueError):
        rate_bue(CFG.replace(h=0.0))


def test_ase_without_uavs():
    cfg = CFG.replace(lambda_u=0.0)
    assert ase(cfg) == cfg.lambda_b * rate_bue(cfg).value


@settings(max_examples=6)
@given(st.floats(50.0, 300.0), st.floats(0.05, 0.95), st.floats(0.01, 0.05))
def test_rates_monotone_in_eta(h, eta, step):
    lo, hi = CFG.replace(h=h, eta=eta), CFG.replace(h=h, eta=min(eta + step, 1.0))
    G = misr_gain(lo).gain
    assert rate_uue(hi, G).value > rate_uue(lo, G).value
    assert rate_bue(hi).value < rate_bue(lo).value


def test_literal_reading_differs_but_is_finite():
    lit = misr_gain(CFG.replace(literal_misr=True))
    assert math.isfinite(lit.gain) and lit.gain > 0
    assert lit.gain != misr_gain(CFG).gain
