import pytest

from cdgarch.config import RUN_DEFAULTS, load_config, reference_config_path
from cdgarch.errors import ConditionError, ConfigError
from cdgarch.kernels import ExponentialKernel, TabulatedKernel

MINIMAL = """
[model]
eta = 1.0
c_mu = 2.0
c_nu = 0.5
"""


def test_reference_config_loads():
    cfg = load_config(reference_config_path())
    m = cfg.model
    assert isinstance(m.f_mu, ExponentialKernel) and m.r == 1.0
    assert m.noise.seed == cfg.run.seed == 20240917
    assert cfg.defaulted == []


def test_defaults_are_recorded():
    cfg = load_config(text=MINIMAL)
    assert cfg.model.f_mu is None and cfg.model.f_nu is None
    assert cfg.run.delta == RUN_DEFAULTS["delta"]
    assert "run.delta" in cfg.defaulted and "noise.lambda_L" in cfg.defaulted


def test_unknown_key_is_an_error():
    with pytest.raises(ConfigError, match="dleta"):
        load_config(text=MINIMAL + "\n[run]\ndleta = 0.1\n")


def test_unknown_section_is_an_error():
    with pytest.raises(ConfigError, match="kernel.xi"):
        load_config(text=MINIMAL + "\n[kernel.xi]\nkind = none\n")


def test_seed_in_noise_section_rejected():
    with pytest.raises(ConfigError):
        load_config(text="[noise]\nseed = 3\n" + MINIMAL)


def test_missing_model_key():
    with pytest.raises(ConfigError, match="c_nu"):
        load_config(text="[model]\neta = 1\nc_mu = 2\n")


def test_malformed_number():
    with pytest.raises(ConfigError):
        load_config(text=MINIMAL.replace("2.0", "two"))


def test_invalid_model_values_become_config_errors():
    with pytest.raises(ConfigError):
        load_config(text=MINIMAL.replace("eta = 1.0", "eta = -1.0"))


def test_tabulated_kernel_from_relative_path(tmp_path):
    (tmp_path / "k.csv").write_text("u,f\n-1.0,0.0\n-0.5,0.5\n0.0,1.0\n")
    (tmp_path / "c.ini").write_text(MINIMAL + "\n[kernel.nu]\nkind = tabulated\npath = k.csv\n")
    cfg = load_config(tmp_path / "c.ini")
    assert isinstance(cfg.model.f_nu, TabulatedKernel)
    assert cfg.model.q == 1.0
    assert "path = " in cfg.to_ini()


def test_phi_choices():
    cfg = load_config(reference_config_path())
    assert cfg.phi_segment().phi0 == pytest.approx(0.5247, abs=1e-4)
    cfg.run.phi = "floor"
    assert cfg.phi_segment().phi0 == pytest.approx(0.370, abs=1e-3)
    cfg.run.phi = "1.25"
    assert cfg.phi_segment().phi0 == 1.25
    cfg.run.phi = "warm"
    with pytest.raises(ConfigError):
        cfg.phi_segment()


def test_stationary_phi_needs_condition():
    cfg = load_config(text=MINIMAL.replace("c_mu = 2.0", "c_mu = 0.5"))
    with pytest.raises(ConditionError):
        cfg.phi_segment()


def test_resolved_ini_round_trip():
    cfg = load_config(text=MINIMAL)
    again = load_config(text=cfg.to_ini())
    assert again.digest() == cfg.digest()
    assert again.defaulted == []
