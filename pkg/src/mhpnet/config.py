"""Flat ``key=value`` run configuration with unit-suffixed keys.

Example::

    # dense urban
    lambda_u_per_km2 = 10
    p_u_dbm = 37
    d_m = 100

Densities are given per km^2, distances in metres and powers in dBm; they are
converted to SI units here and nowhere else. Lists are comma separated.
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from .analysis import NetworkConfig, dbm_to_watts
from .channel import Environment
from .geometry import Window
from .optimizer import OptimizationProblem
from .simulation import SimulationSpec

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "SEED_ENV"]

SEED_ENV = "MHPNET_SEED"
KM2 = 1e-6  # per km^2 -> per m^2


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based when the fault has a source line."""

    def __init__(self, message: str, line: Optional[int] = None, source: str = "<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _opt_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "none") else float(text)


_EXECUTION_ONLY = ("workers",)

# key -> (parser, default)
_KEYS = {
    "lambda_u_per_km2": (float, 10.0),
    "lambda_b_per_km2": (float, 10.0),
    "d_m": (float, 100.0),
    "h_m": (_floats, (100.0,)),
    "eta": (_floats, (1.0,)),
    "p_u_dbm": (float, 37.0),
    "p_b_dbm": (float, 37.0),
    "r_b_m": (float, 162.0),
    "b_env": (float, 0.136),
    "c_env": (float, 11.95),
    "alpha_l": (float, 3.0),
    "alpha_n": (float, 4.0),
    "alpha_b": (float, 4.0),
    "m_l": (float, 3.0),
    "m_n": (float, 1.0),
    "fixed_los": (_opt_float, None),
    "literal_misr": (_bool, False),
    "n_trials": (int, 10_000),
    "seed": (int, 2024),
    "window_radius_m": (float, 5000.0),
    "guard_m": (float, 500.0),
    "interference_radius_m": (_opt_float, None),
    "workers": (int, 1),
    "h_min_m": (float, 50.0),
    "h_max_m": (float, 300.0),
    "h_step_m": (float, 10.0),
    "eta_tol": (float, 1e-5),
    "r_th_list": (_floats, (0.6, 0.7, 0.8, 0.9, 1.0, 1.1)),
    "ase_lambda_u_per_km2": (_floats, (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0)),
    "validate_realizations": (int, 100),
    "validate_trials": (int, 2000),
}


@dataclass(frozen=True)
class RunConfig:
    """Parsed configuration. ``values`` keeps the user-facing (unit-suffixed)
    values; the properties build the SI-unit objects used by the library."""

    values: Dict[str, object] = field(default_factory=dict)
    seed_source: str = "config"

    def __getitem__(self, key):
        return self.values[key]

    def network(self, **changes) -> NetworkConfig:
        v = self.values
        env = Environment(B=v["b_env"], C=v["c_env"], alpha_l=v["alpha_l"], alpha_n=v["alpha_n"],
                          alpha_b=v["alpha_b"], m_l=v["m_l"], m_n=v["m_n"], fixed_los=v["fixed_los"])
        cfg = NetworkConfig(lambda_u=v["lambda_u_per_km2"] * KM2, lambda_b=v["lambda_b_per_km2"] * KM2,
                            d=v["d_m"], h=v["h_m"][0], P_u=dbm_to_watts(v["p_u_dbm"]),
                            P_b=dbm_to_watts(v["p_b_dbm"]), eta=v["eta"][0], R_b=v["r_b_m"],
                            env=env, literal_misr=v["literal_misr"])
        return cfg.replace(**changes) if changes else cfg

    def simulation(self) -> SimulationSpec:
        v = self.values
        return SimulationSpec(n_trials=v["n_trials"], seed=v["seed"],
                              window=Window(v["window_radius_m"], v["guard_m"]),
                              interference_radius=v["interference_radius_m"], workers=v["workers"])

    def problem(self, R_th: float) -> OptimizationProblem:
        v = self.values
        return OptimizationProblem(self.network(), R_th, v["h_min_m"], v["h_max_m"],
                                   v["h_step_m"], v["eta_tol"])

    def canonical(self) -> str:
        """Stable text form of every value that can change a result; the basis
        of :meth:`digest`. Execution-only keys (``workers``) are left out."""
        lines = []
        for key in sorted(self.values):
            if key in _EXECUTION_ONLY:
                continue
            val = self.values[key]
            if isinstance(val, tuple):
                val = ",".join(repr(x) for x in val)
            lines.append(f"{key}={val!r}" if not isinstance(val, str) else f"{key}={val}")
        return "\n".join(lines)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:12]

    def with_values(self, **changes) -> "RunConfig":
        merged = dict(self.values)
        merged.update(changes)
        out = RunConfig(merged, self.seed_source)
        out._check(None, "<override>")
        return out

    def _check(self, lines: Optional[Dict[str, int]], source: str):
        lines = lines or {}
        try:
            self.network()
        except ValueError as exc:
            raise ConfigError(str(exc), _blame(lines, exc), source) from None
        for key in ("h_m", "eta"):
            for x in self.values[key]:
                try:
                    self.network(**{"h" if key == "h_m" else "eta": x})
                except ValueError as exc:
                    raise ConfigError(str(exc), lines.get(key), source) from None
        try:
            self.simulation()
            self.problem(1.0)
        except ValueError as exc:
            raise ConfigError(str(exc), _blame(lines, exc), source) from None
        if any(r <= 0 for r in self.values["r_th_list"]):
            raise ConfigError("rate targets must be positive", lines.get("r_th_list"), source)
        for lam in self.values["ase_lambda_u_per_km2"]:
            try:
                self.network(lambda_u=lam * KM2)
            except ValueError as exc:
                raise ConfigError(str(exc), lines.get("ase_lambda_u_per_km2"), source) from None


# which keys to point at when a constructor rejects the combined values
_BLAME = [
    ("eta", "eta"), ("altitude", "h_m"), ("lambda_u * pi", "d_m"), ("lambda_u * pi", "lambda_u_per_km2"), ("densit", "lambda_u_per_km2"),
    ("hardcore", "d_m"), ("R_b", "r_b_m"), ("power", "p_u_dbm"), ("B must", "b_env"),
    ("C must", "c_env"), ("path-loss", "alpha_l"), ("Nakagami", "m_l"), ("LoS", "fixed_los"),
    ("n_trials", "n_trials"), ("window", "window_radius_m"), ("guard", "guard_m"),
    ("interference radius", "interference_radius_m"), ("h_min", "h_min_m"),
    ("step", "h_step_m"),
]


def _blame(lines, exc) -> Optional[int]:
    msg = str(exc)
    for key in sorted(lines, key=len, reverse=True):
        if key in msg:
            return lines[key]
    for needle, key in _BLAME:
        if needle in msg and key in lines:
            return lines[key]
    return None


def parse_config(text: str, source: str = "<config>", env: Optional[dict] = None) -> RunConfig:
    """Parse configuration text. Unknown keys, malformed lines and values that
    violate a model invariant raise :class:`ConfigError` naming the line."""
    values = {k: default for k, (_, default) in _KEYS.items()}
    lines: Dict[str, int] = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {raw.strip()!r}", no, source)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", no, source)
        if key in lines:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", no, source)
        try:
            values[key] = _KEYS[key][0](val)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", no, source) from None
        lines[key] = no
    for key in ("h_m", "eta", "r_th_list", "ase_lambda_u_per_km2"):
        if not values[key]:
            raise ConfigError(f"{key} needs at least one value", lines.get(key), source)
    env = os.environ if env is None else env
    seed_source = "config" if "seed" in lines else "default"
    if env.get(SEED_ENV, "").strip():
        try:
            values["seed"] = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer", None, source) from None
        seed_source = "env"
    cfg = RunConfig(values, seed_source)
    cfg._check(lines, source)
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, str(path))
