from __future__ import annotations

import pytest

from probeid.harness.config import ConfigError, RunConfig, load_config, parse_config


def test_defaults_validate():
    cfg = RunConfig().validate()
    assert cfg.family == "ExchangeNoField" and cfg.budgets == (1e3, 1e4, 1e5, 1e6, 1e7)


def test_parse_dotted_keys_and_comments():
    cfg = parse_config(
        """
        # model
        model.family = ising_transverse   # alias
        model.N = 3
        theta.w1 = 1.5
        theta.w2 = 2
        theta.w3 = 3
        theta.J1 = 4
        theta.J2 = 5
        era.hankel_sizes = 6, 12
        robustness.budgets = 10 100 1000
        run.seed = 18446744073709551615
        """
    ).validate()
    assert cfg.family == "IsingTransverse" and cfg.N == 3
    assert cfg.hankel_sizes == (6, 12) and cfg.budgets == (10.0, 100.0, 1000.0)
    assert cfg.seed == 2**64 - 1 and cfg.theta["w1"] == 1.5


@pytest.mark.parametrize("text", [
    "model.colour = red",
    "model.N = three",
    "justtext",
    "model.N = 2\nmodel.N = 3",
    "model.family = Heisenberg",
])
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


@pytest.mark.parametrize("text", [
    "theta.J9 = 1",
    "model.N = 3\ntheta.J1 = 1",
    "dt.policy = explicit",
    "robustness.budgets = 100 10",
    "robustness.scenario = fixed_x",
    "run.format = xml",
    "probe.observables = X9",
    "probe.sign = 0",
    "run.seed = -1",
])
def test_validation_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text).validate()


def test_observables_default_and_explicit():
    cfg = parse_config("model.family = ExchangeTransverse\nmodel.N = 2").validate()
    assert [str(o) for o in cfg.observable_list()] == ["X1", "Y1"]
    cfg = parse_config("model.family = ExchangeTransverse\nmodel.N = 2\nprobe.observables = X1").validate()
    assert [str(o) for o in cfg.observable_list()] == ["X1"]


def test_echo_is_plain_json_data():
    echo = parse_config("era.hankel_sizes = 2 4\ntheta.J1 = 2").echo()
    assert echo["hankel_sizes"] == [2, 4] and echo["theta"] == {"J1": 2.0}


def test_load_config(tmp_path):
    assert load_config(None) == RunConfig()
    p = tmp_path / "run.cfg"
    p.write_text("model.N = 4\n")
    assert load_config(p).N == 4
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")
