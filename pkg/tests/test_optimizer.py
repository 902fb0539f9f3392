import numpy as np
import pytest

from mhpnet.analysis import NetworkConfig, rate_bue
from mhpnet.optimizer import OptimizationProblem, feasible_eta, solve_p0, write_trace_csv

CFG = NetworkConfig()


def test_altitude_grid():
    assert OptimizationProblem(CFG, 1.0).altitudes().tolist() == list(range(50, 301, 10))
    assert OptimizationProblem(CFG, 1.0, 50, 120, 50).altitudes().tolist() == [50, 100]


@pytest.mark.parametrize("kwargs", [dict(R_th=0.0), dict(R_th=1.0, h_min=300, h_max=50),
                                    dict(R_th=1.0, h_step=0.0)])
def test_problem_validation(kwargs):
    with pytest.raises(ValueError):
        OptimizationProblem(CFG, **kwargs)


def test_loose_floor_allows_full_power():
    assert feasible_eta(100.0, 0.1, CFG) == 1.0


def test_unreachable_floor():
    # even silent UAVs leave the BS user below 10 nats/s/Hz
    assert rate_bue(CFG.replace(eta=0.0)).value < 10
    assert feasible_eta(100.0, 10.0, CFG) is None


@pytest.mark.parametrize("h,r_th", [(50.0, 0.8), (150.0, 1.0)])
def test_floor_is_tight(h, r_th):
    tol = 1e-5
    eta = feasible_eta(h, r_th, CFG, tol)
    assert 0 < eta < 1
    assert rate_bue(CFG.replace(h=h, eta=eta)).value >= r_th
    assert rate_bue(CFG.replace(h=h, eta=min(eta + 2 * tol, 1.0))).value < r_th
    assert rate_bue(CFG.replace(h=h, eta=eta)).value - r_th < 1e-3


def test_infeasible_problem():
    res = solve_p0(OptimizationProblem(CFG, 10.0, 50, 150, 50))
    assert res.status == "infeasible"
    assert res.h_star is None and res.eta_star is None
    assert len(res.trace) == 3 and not any(p.feasible for p in res.trace)


class _Reversed(OptimizationProblem):
    def altitudes(self):
        return super().altitudes()[::-1]


def test_result_does_not_depend_on_grid_order():
    args = (CFG, 0.9, 50, 250, 50)
    fwd = solve_p0(OptimizationProblem(*args))
    rev = solve_p0(_Reversed(*args))
    assert (fwd.h_star, fwd.eta_star, fwd.rate_u_star) == (rev.h_star, rev.eta_star, rev.rate_u_star)


def test_optimum_is_best_feasible_point():
    res = solve_p0(OptimizationProblem(CFG, 0.9, 50, 250, 50))
    assert res.status == "optimal"
    feasible = [p for p in res.trace if p.feasible]
    assert res.rate_u_star == max(p.rate_u for p in feasible)
    assert all(p.rate_b >= 0.9 for p in feasible)


def test_trace_csv(tmp_path):
    res = solve_p0(OptimizationProblem(CFG, 0.9, 50, 150, 50))
    path = tmp_path / "trace.csv"
    write_trace_csv(path, res, "note")
    lines = path.read_text().splitlines()
    assert lines[0] == "# note"
    assert lines[1] == "h_m,eta_star,rate_u_nats,rate_b_nats,feasible"
    assert len(lines) == 2 + len(res.trace)
    assert all(line.endswith(("true", "false")) for line in lines[2:])
