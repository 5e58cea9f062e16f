import pytest

from config import SUITES, ExperimentConfig, load_config
from errors import ConfigError


def _write(tmp_path, text, name="lab.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_defaults_without_file():
    config = load_config()
    assert config == ExperimentConfig()
    assert config.lattice.d == 1 and config.lattice.N == 8
    assert config.time.cfl_fraction == 0.5
    assert config.run.selected_suites() == SUITES


def test_ini_file_is_parsed(tmp_path):
    path = _write(tmp_path, "[lattice]\nd = 2\nN = 6\nmetric = bump\n\n[time]\ndt = 0.01\nsteps = 12\n\n[run]\ndegrees = 1, 2\nsuites = green, phase\n")
    config = load_config(path)
    assert config.lattice.d == 2
    assert config.lattice.metric == "bump"
    assert config.time.dt == 0.01 and config.time.cfl_fraction is None
    assert config.run.degrees == (1, 2)
    # registry order, not file order
    assert config.run.selected_suites() == ("green", "phase")


def test_shipped_configs_load():
    from pathlib import Path

    for path in sorted((Path(__file__).resolve().parent.parent / "configs").glob("*.ini")):
        load_config(path)


def test_single_cell_ring_rejected_with_line(tmp_path):
    path = _write(tmp_path, "[lattice]\nd = 1\nN = 1\n")
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert info.value.line == 3
    assert "lattice.N" in str(info.value)


def test_unknown_key_reports_line(tmp_path):
    path = _write(tmp_path, "[time]\nsteps = 10\nstepz = 11\n")
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert info.value.line == 3


def test_unknown_section_reports_header_line(tmp_path):
    path = _write(tmp_path, "[lattice]\nd = 1\n\n[camera]\nfps = 30\n")
    with pytest.raises(ConfigError, match="unknown section") as info:
        load_config(path)
    assert info.value.line == 4


def test_key_outside_section(tmp_path):
    with pytest.raises(ConfigError, match="outside"):
        load_config(_write(tmp_path, "d = 1\n"))


def test_cfl_and_dt_are_exclusive(tmp_path):
    path = _write(tmp_path, "[time]\ncfl = 0.5\ndt = 0.01\n")
    with pytest.raises(ConfigError, match="either cfl or dt"):
        load_config(path)


def test_overrides_win_over_file(tmp_path):
    path = _write(tmp_path, "[lattice]\nN = 6\n\n[run]\nseed = 3\n")
    config = load_config(path, {("lattice", "N"): 10, ("run", "seed"): None})
    assert config.lattice.N == 10
    assert config.run.seed == 3


def test_unknown_suite_rejected():
    with pytest.raises(ConfigError, match="unknown suite"):
        load_config(None, {("run", "suites"): "identities,optics"})


def test_degree_above_dimension_rejected():
    with pytest.raises(ConfigError, match="outside 0..1"):
        load_config(None, {("run", "degrees"): "0,2"})


@pytest.mark.parametrize("metric", ["flat", "bump"])
def test_metric_choices(metric):
    assert load_config(None, {("lattice", "metric"): metric}).lattice.metric == metric


def test_unknown_metric_rejected():
    with pytest.raises(ConfigError):
        load_config(None, {("lattice", "metric"): "sphere"})


def test_tolerance_override(tmp_path):
    config = load_config(_write(tmp_path, "[tolerances]\nccr = 1e-2\n"))
    assert config.tolerances.ccr == 1e-2
    assert config.tolerances.weyl == 1e-6


def test_echo_is_plain_json_data():
    echo = load_config().echo()
    assert echo["lattice"]["N"] == 8
    assert echo["run"]["suites"] == ["all"]
