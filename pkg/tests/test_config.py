import pytest

from spheroid_mc.config import ExperimentConfig, config_from_dict, load_config
from spheroid_mc.errors import ConfigError


def test_defaults_are_table1():
    cfg = load_config(None)
    assert cfg == ExperimentConfig()
    assert cfg.transmitter.radius_um == 275.0
    assert cfg.receiver.degradation_rate == 0.01
    assert cfg.separation == pytest.approx(1e-3)
    assert cfg.ook.T_s == 600.0
    assert cfg.tx_spec().cell_count == 24000


def test_yaml_round_trip(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("receiver: {cell_count: 20000}\ngrid: {n_max: 30}\nseparation_um: 1500\n")
    cfg = load_config(path)
    assert cfg.receiver.cell_count == 20000
    assert cfg.receiver.degradation_rate == 0.01
    assert cfg.grid.n_max == 30
    assert cfg.separation_um == 1500.0
    assert config_from_dict(cfg.to_dict()) == cfg


def test_digest_tracks_content():
    a = ExperimentConfig()
    assert a.digest() == ExperimentConfig().digest()
    assert a.override(seed=1).digest() != a.digest()


def test_override_precedence():
    cfg = config_from_dict({"ook": {"T_s": 300, "J": 2}}).override(T_s=900, J=None, particles=10)
    assert cfg.ook.T_s == 900.0
    assert cfg.ook.J == 2
    assert cfg.pbs.particles == 10


@pytest.mark.parametrize(
    "raw, key",
    [
        ({"grid": {"dtt": 1}}, "grid.dtt"),
        ({"colour": 1}, "colour"),
        ({"ook": {"J": 2.5}}, "ook.J"),
        ({"ook": {"J": 21}}, "ook.J"),
        ({"pbs": {"seed": "x"}}, "pbs.seed"),
        ({"receiver": {"cell_count": 10**9}}, "receiver.cell_count"),
        ({"separation_um": 400}, "separation_um"),
        ({"grid": {"dt": 0}}, "grid.dt"),
        ({"grid": 3}, "grid"),
    ],
)
def test_invalid_configs_name_the_key(raw, key):
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        config_from_dict(raw)


def test_bad_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("grid: [1, 2\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    top = tmp_path / "list.yaml"
    top.write_text("- 1\n")
    with pytest.raises(ConfigError):
        load_config(top)
