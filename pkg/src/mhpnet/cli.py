"""Command-line front end.

    mhpnet rates CONFIG -o rates.csv [--sweep eta=0.1:1.0:0.1] [--no-sim]
    mhpnet ase CONFIG -o ase.csv [--no-sim]
    mhpnet optimize CONFIG -o table.csv [--r-th 0.6,0.7] [--trace-dir DIR]
    mhpnet validate CONFIG

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import logging
import math
import os
import sys
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .analysis import ase, misr_gain, rate_bue, rate_uue
from .config import KM2, ConfigError, RunConfig, load_config
from .geometry import sample_mhp
from .optimizer import solve_p0, write_trace_csv
from .simulation import estimate_misr, estimate_rates, trial_rng

__all__ = ["cmd_rates", "cmd_ase", "cmd_optimize", "cmd_validate", "main",
           "parse_sweep", "CheckResult"]

log = logging.getLogger("mhpnet")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3
SWEEP_KEYS = ("eta", "h_m")


class NumericalFailure(RuntimeError):
    pass


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _header(cfg: RunConfig) -> str:
    return (f"# mhpnet {__version__} seed={cfg['seed']} seed_source={cfg.seed_source} "
            f"config={cfg.digest()}")


def _write_csv(path, cfg: RunConfig, columns: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(_header(cfg) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow(row)


def parse_sweep(text: str):
    """``key=start:stop:step`` (inclusive) or ``key=a,b,c``; returns
    ``(key, values)``."""
    if "=" not in text:
        raise ConfigError(f"sweep must look like key=start:stop:step, got {text!r}", None, "--sweep")
    key, spec = (s.strip() for s in text.split("=", 1))
    if key not in SWEEP_KEYS:
        raise ConfigError(f"cannot sweep {key!r}; choose from {', '.join(SWEEP_KEYS)}", None, "--sweep")
    try:
        if ":" in spec:
            start, stop, step = (float(t) for t in spec.split(":"))
            if not step > 0 or stop < start:
                raise ValueError("need step > 0 and stop >= start")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = tuple(round(start + i * step, 12) for i in range(n))
        else:
            values = tuple(float(t) for t in spec.split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"bad sweep {text!r}: {exc}", None, "--sweep") from None
    if not values:
        raise ConfigError("empty sweep", None, "--sweep")
    return key, values


def _numeric(fn, *args, **kwargs):
    # library ValueErrors at this point come from parameter combinations the
    # parser let through; anything else is a numerical failure
    try:
        return fn(*args, **kwargs)
    except (ArithmeticError, RuntimeError) as exc:
        raise NumericalFailure(str(exc)) from exc


def cmd_rates(config_path, out_path, sweep: Optional[str] = None, simulate: bool = True,
              cfg: Optional[RunConfig] = None) -> int:
    """One row per (eta, h) pair: analytical rates, Monte Carlo rates with
    95% half-widths, and the hardcore gain."""
    cfg = cfg or load_config(config_path)
    if sweep:
        key, values = parse_sweep(sweep)
        cfg = cfg.with_values(**{key: values})
    spec = cfg.simulation()
    columns = ["eta", "h_m", "rate_u_analytic", "rate_b_analytic"]
    if simulate:
        columns += ["rate_u_mc", "rate_b_mc", "mc_halfwidth_u", "mc_halfwidth_b"]
    columns.append("gain_G")
    rows = []
    for eta, h in itertools.product(cfg["eta"], cfg["h_m"]):
        net = cfg.network(eta=eta, h=h)
        log.info("rates at eta=%g h=%g", eta, h)
        G = _numeric(misr_gain, net).gain if net.lambda_u > 0 else 1.0
        row = [eta, h, _numeric(rate_uue, net, G).value, _numeric(rate_bue, net).value]
        if simulate:
            uue, bue = _numeric(estimate_rates, net, spec)
            row += [uue.value, bue.value, uue.half_width, bue.half_width]
        row.append(G)
        rows.append([_fmt(x) for x in row])
    _write_csv(out_path, cfg, columns, rows)
    return EXIT_OK


def cmd_ase(config_path, out_path, simulate: bool = True, cfg: Optional[RunConfig] = None) -> int:
    """Area spectral efficiency over the configured UAV densities, in
    nats/s/Hz/km^2."""
    cfg = cfg or load_config(config_path)
    spec = cfg.simulation()
    rows = []
    for lam in cfg["ase_lambda_u_per_km2"]:
        net = cfg.network(lambda_u=lam * KM2)
        log.info("ase at lambda_u=%g /km^2", lam)
        analytic = _numeric(ase, net) / KM2
        mc = None
        if simulate:
            uue, bue = _numeric(estimate_rates, net, spec)
            mc = (net.lambda_u * uue.value + net.lambda_b * bue.value) / KM2
        rows.append([_fmt(lam), _fmt(analytic), _fmt(mc)])
    _write_csv(out_path, cfg, ["lambda_u_per_km2", "ase_analytic", "ase_mc"], rows)
    return EXIT_OK


def _trace_path(out_path, trace_dir, r_th):
    stem = os.path.splitext(os.path.basename(out_path))[0]
    folder = trace_dir if trace_dir is not None else os.path.dirname(os.path.abspath(out_path))
    return os.path.join(folder, f"{stem}_trace_rth{r_th:g}.csv")


def cmd_optimize(config_path, r_th_list: Optional[Sequence[float]], out_path,
                 trace_dir: Optional[str] = None, cfg: Optional[RunConfig] = None) -> int:
    """Optimal (altitude, eta) per rate target, plus one trace file each."""
    cfg = cfg or load_config(config_path)
    targets = tuple(r_th_list) if r_th_list else cfg["r_th_list"]
    if any(not r > 0 for r in targets):
        raise ConfigError("rate targets must be positive", None, "--r-th")
    if trace_dir is not None:
        os.makedirs(trace_dir, exist_ok=True)
    rows = []
    for r_th in targets:
        log.info("optimising for R_th=%g", r_th)
        res = _numeric(solve_p0, cfg.problem(r_th))
        rows.append([_fmt(r_th), _fmt(res.h_star), _fmt(res.eta_star), _fmt(res.rate_u_star),
                     res.status])
        write_trace_csv(_trace_path(out_path, trace_dir, r_th), res,
                        _header(cfg)[2:] + f" r_th={r_th!r}")
    _write_csv(out_path, cfg, ["r_th", "h_star_m", "eta_star", "rate_u_star", "status"], rows)
    return EXIT_OK


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: str
    expected: str
    tolerance: str

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"{tag}  {self.name:<22} measured={self.measured}  expected={self.expected}  "
                f"tol={self.tolerance}")


def _rel(a, b):
    return abs(a - b) / abs(b)


def _check_points(cfg: RunConfig) -> List[CheckResult]:
    net, spec = cfg.network(), cfg.simulation()
    n = cfg["validate_realizations"]
    min_dist = math.inf
    densities = []
    for i in range(n):
        pat = sample_mhp(net.mhp, spec.window, trial_rng(spec.seed, i, 100))
        min_dist = min(min_dist, pat.min_distance())
        densities.append(pat.inner_mask().sum() / spec.window.area)
    emp = float(np.mean(densities))
    return [
        CheckResult("hardcore", min_dist >= net.d, f"{min_dist:.3f} m", f">= {net.d:g} m", "exact"),
        CheckResult("density", _rel(emp, net.lambda_u) <= 0.01, f"{emp / KM2:.5f} /km2",
                    f"{net.lambda_u / KM2:.5f} /km2", "1%"),
    ]


def _check_misr(cfg: RunConfig) -> CheckResult:
    net = cfg.network()
    spec = replace(cfg.simulation(), n_trials=cfg["validate_trials"])
    sim = estimate_misr(net, spec).gain
    an = misr_gain(net).gain
    return CheckResult("misr_gain", _rel(sim, an) <= 0.05, f"G_mc={sim:.4f}", f"G={an:.4f}", "5%")


def _check_rates(cfg: RunConfig) -> List[CheckResult]:
    net = cfg.network()
    spec = replace(cfg.simulation(), n_trials=cfg["validate_trials"])
    uue, bue = estimate_rates(net, spec)
    out = []
    for name, an, mc in (("rate_uue", rate_uue(net).value, uue.value),
                         ("rate_bue", rate_bue(net).value, bue.value)):
        ok = _rel(an, mc) <= 0.10 if mc > 0 else an == mc
        out.append(CheckResult(name, ok, f"analytic={an:.4f}", f"mc={mc:.4f}", "10%"))
    return out


def cmd_validate(config_path, cfg: Optional[RunConfig] = None, stream=None) -> int:
    """Point-process statistics, the MISR oracle and Monte Carlo vs analytic
    rates at the configured network. Exit 0 iff every check passes."""
    cfg = cfg or load_config(config_path)
    stream = stream or sys.stdout
    results = []
    for step in (_check_points, _check_misr, _check_rates):
        got = _numeric(step, cfg)
        for res in (got if isinstance(got, list) else [got]):
            print(res.line(), file=stream, flush=True)
            results.append(res)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed", file=stream)
    return EXIT_OK if not failed else EXIT_VALIDATION


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mhpnet", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"mhpnet {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("rates", help="analytical and simulated average rates")
    r.add_argument("config")
    r.add_argument("-o", "--out", required=True)
    r.add_argument("--sweep", help="eta=START:STOP:STEP or h_m=a,b,c")
    r.add_argument("--no-sim", action="store_true", help="skip Monte Carlo columns")

    a = sub.add_parser("ase", help="area spectral efficiency against UAV density")
    a.add_argument("config")
    a.add_argument("-o", "--out", required=True)
    a.add_argument("--no-sim", action="store_true")

    o = sub.add_parser("optimize", help="optimal altitude and power control per rate target")
    o.add_argument("config")
    o.add_argument("-o", "--out", required=True)
    o.add_argument("--r-th", type=_floats, help="comma-separated rate targets (nats/s/Hz)")
    o.add_argument("--trace-dir", help="folder for per-target traces (default: next to --out)")

    v = sub.add_parser("validate", help="run the statistical and numerical checks")
    v.add_argument("config")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if args.command == "rates":
            return cmd_rates(args.config, args.out, args.sweep, not args.no_sim)
        if args.command == "ase":
            return cmd_ase(args.config, args.out, not args.no_sim)
        if args.command == "optimize":
            return cmd_optimize(args.config, args.r_th, args.out, args.trace_dir)
        return cmd_validate(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
