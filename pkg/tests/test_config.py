import json
import math
import pickle

import pytest

from ris_lab.config import (ConfigError, SystemConfig, db_to_linear, dbm_to_watt, default_user_distances,
                            load_config, to_linear, validate, watt_to_dbm)


def test_unit_conversions():
    lin = to_linear(SystemConfig())
    assert lin.sigma2 == pytest.approx(2.51188643150958e-13, rel=1e-14)
    assert lin.P_t == pytest.approx(1e4, rel=1e-14)
    assert lin.G_S == pytest.approx(1e4)
    assert lin.G_B == pytest.approx(100.0)
    assert lin.kappa == pytest.approx(10.0)
    assert watt_to_dbm(dbm_to_watt(23.0)) == pytest.approx(23.0)
    assert db_to_linear(0) == 1.0


def test_defaults_are_the_reference_scenario():
    cfg = SystemConfig()
    assert (cfg.K, cfg.M, cfg.L, cfg.mu) == (5, 3, 30, 2)
    assert cfg.B_w == 20e6 and cfg.f_c == 14e9
    assert cfg.d_SR == 300e3 and cfg.d_Re == 450e3
    assert cfg.d_Rk[0] == 300e3 and cfg.d_Rk[-1] == 500e3 and len(cfg.d_Rk) == 5
    assert validate(cfg) == []


def test_linear_config_falls_through():
    lin = to_linear(SystemConfig(L=7))
    assert lin.L == 7 and lin.B_w == 20e6
    assert pickle.loads(pickle.dumps(lin)).P_t == lin.P_t


def test_derive_respreads_users():
    cfg = SystemConfig().derive(K=3)
    assert cfg.d_Rk == default_user_distances(3)
    assert cfg.derive(L=4).d_Rk == cfg.d_Rk


@pytest.mark.parametrize("changes, text", [
    ({"alpha_split": 0.0}, "alpha_split out of (0,1]"),
    ({"alpha_split": 1.5}, "alpha_split out of (0,1]"),
    ({"d_Rk": (1.0, 2.0)}, "d_Rk length mismatch"),
    ({"L": 0}, "L must be"),
    ({"d_SR": -1.0}, "d_SR"),
    ({"precoder_policy": "zf"}, "precoder_policy"),
])
def test_validation_messages(changes, text):
    cfg = SystemConfig(**changes)
    errs = validate(cfg)
    assert any(text in e for e in errs), errs
    with pytest.raises(ConfigError):
        to_linear(cfg)


def test_all_errors_reported_at_once():
    errs = validate(SystemConfig(alpha_split=2.0, L=0, d_Re=0.0))
    assert len(errs) >= 3


def test_json_round_trip(tmp_path):
    cfg = SystemConfig(K=2, L=6, P_t_dBm=40.0)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert load_config(path) == cfg
    assert load_config(path, L=9).L == 9


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"L": 4, "Lx": 3}))
    with pytest.raises(ConfigError, match="Lx"):
        load_config(path)


def test_n_phases():
    assert SystemConfig(mu=3).n_phases == 8
    assert math.isclose(dbm_to_watt(30.0), 1.0)
