import numpy as np
import pytest

import dbnoise as dbn
from dbnoise.config import DEFAULTS, config_lines, parse_config_text


def test_defaults_build():
    cfg = dbn.default_config()
    assert cfg.grid.n_points == 28001
    assert cfg.model.mass_ratio == 0.067
    assert cfg.potential.barrier_height == 0.4
    assert cfg.packet.direction == 1
    assert cfg.propagation.settle_threshold == 1e-6
    assert len(cfg.sweep_energies) == 29
    assert len(cfg.sweep_frequencies) == 33
    assert cfg.sweep_frequencies[0] == -8e-4


def test_parse_text_with_comments():
    text = """
    # a comment
    model.mass_ratio = 0.1   # inline comment
    grid.dx = 0.2
    packet.energy = 0.05
    """
    values = parse_config_text(text)
    assert values == {"model.mass_ratio": 0.1, "grid.dx": 0.2, "packet.energy": 0.05}
    cfg = dbn.build_experiment(values)
    assert cfg.model.mass_ratio == 0.1
    assert cfg.grid.dx == pytest.approx(0.2)


def test_unknown_key_rejected():
    with pytest.raises(dbn.ConfigError, match="unknown key"):
        parse_config_text("model.massratio = 0.1")
    with pytest.raises(dbn.ConfigError):
        dbn.build_experiment({"bogus.key": 1.0})


def test_bad_value_rejected():
    with pytest.raises(dbn.ConfigError, match="bad value"):
        parse_config_text("model.mass_ratio = abc")
    with pytest.raises(dbn.ConfigError, match="key = value"):
        parse_config_text("model.mass_ratio 0.1")


def test_zero_barrier_means_free():
    cfg = dbn.build_experiment({"potential.v_b": 0.0})
    assert cfg.potential is None


def test_packet_position_validation():
    with pytest.raises(dbn.ConfigError):
        dbn.build_experiment({"packet.x0": 0.0})
    # closer than 3 sigma + structure half width
    with pytest.raises(dbn.ConfigError, match="3 sigma"):
        dbn.build_experiment({"packet.x0": -100.0, "packet.sigma": 50.0})


def test_occupation_validation():
    with pytest.raises(dbn.ConfigError):
        dbn.build_experiment({"occupation.f_a": 1.5})


def test_sweep_validation():
    with pytest.raises(dbn.ConfigError):
        dbn.build_experiment({"sweep.n_energies": 0})
    with pytest.raises(dbn.ConfigError):
        dbn.build_experiment({"sweep.e_min": 0.2, "sweep.e_max": 0.1})
    cfg = dbn.build_experiment(
        {"sweep.n_frequencies": 1, "sweep.w_min": 0.0, "sweep.w_max": 0.0}
    )
    assert np.array_equal(cfg.sweep_frequencies, [0.0])


def test_config_lines_round_trip():
    cfg = dbn.build_experiment({"packet.energy": 0.0812, "potential.osc_sign": -1})
    text = "\n".join(config_lines(cfg))
    values = parse_config_text(text)
    rebuilt = dbn.build_experiment(values)
    assert rebuilt.raw == cfg.raw


def test_write_default_config(tmp_path):
    path = tmp_path / "default.cfg"
    dbn.write_default_config(path)
    cfg = dbn.load_config(path)
    assert cfg.raw == dbn.default_config().raw


def test_every_default_key_has_type_and_value():
    for key, (typ, val) in DEFAULTS.items():
        assert isinstance(val, typ)
