import math
from pathlib import Path

import pytest

from mhpnet.analysis import dbm_to_watts
from mhpnet.config import SEED_ENV, ConfigError, load_config, parse_config

DEFAULT = Path(__file__).resolve().parents[1] / "configs" / "default.conf"


def test_shipped_config_matches_table_values():
    cfg = load_config(DEFAULT)
    net = cfg.network()
    assert net.lambda_u == pytest.approx(1e-5) and net.lambda_b == pytest.approx(1e-5)
    assert net.P_u == pytest.approx(dbm_to_watts(37.0)) and net.d == 100.0
    env = net.env
    assert (env.alpha_l, env.alpha_n, env.alpha_b, env.m_l, env.m_n) == (3, 4, 4, 3, 1)
    assert (env.B, env.C) == (0.136, 11.95)
    assert net.R_b == 162.0


def test_empty_text_gives_defaults():
    assert parse_config("", env={}).network() == load_config(DEFAULT).network()


def test_comments_and_units():
    cfg = parse_config("# comment\nlambda_u_per_km2 = 5  # trailing\np_u_dbm=30\nh_m = 80, 120\n", env={})
    assert cfg.network().lambda_u == pytest.approx(5e-6)
    assert cfg.network().P_u == 1.0
    assert cfg["h_m"] == (80.0, 120.0)


@pytest.mark.parametrize("text,line,needle", [
    ("d_m = 100\nbogus = 3\n", 2, "unknown key"),
    ("\n\nd_m 100\n", 3, "key=value"),
    ("seed = 1\nseed = 2\n", 2, "duplicate"),
    ("eta = 1.5\n", 1, "eta"),
    ("# x\nd_m = 200\n", 2, "lambda_u * pi"),
    ("alpha_l = 2\n", 1, "alpha_l"),
    ("n_trials = ten\n", 1, "n_trials"),
    ("r_b_m = -1\n", 1, "R_b"),
])
def test_line_level_diagnostics(text, line, needle):
    with pytest.raises(ConfigError) as info:
        parse_config(text, "run.conf", env={})
    assert info.value.line == line
    assert f"run.conf:{line}:" in str(info.value)
    assert needle in str(info.value)


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.conf")


def test_seed_override_from_environment():
    cfg = parse_config("seed = 3\n", env={SEED_ENV: "99"})
    assert cfg["seed"] == 99 and cfg.seed_source == "env"
    with pytest.raises(ConfigError):
        parse_config("", env={SEED_ENV: "x"})


def test_digest_tracks_results_not_execution():
    base = parse_config("", env={})
    assert base.digest() == parse_config("workers = 4\n", env={}).digest()
    assert base.digest() != parse_config("seed = 5\n", env={}).digest()
    assert len(base.digest()) == 12


def test_with_values_revalidates():
    cfg = parse_config("", env={})
    assert cfg.with_values(eta=(0.1, 0.2))["eta"] == (0.1, 0.2)
    with pytest.raises(ConfigError):
        cfg.with_values(eta=(0.1, 2.0))


def test_dbm_conversion_at_boundary():
    cfg = parse_config("p_b_dbm = 43\n", env={})
    assert cfg.network().P_b == pytest.approx(10 ** 1.3)
    assert math.isclose(10 * math.log10(cfg.network().P_b) + 30, 43.0, abs_tol=1e-12)
