import pytest
from hypothesis import given
from hypothesis import strategies as st

from crossfire.config import PRESETS, ConfigError, ScenarioConfig, validate_config


def test_empty_is_defaults():
    assert validate_config("") == ScenarioConfig()
    assert validate_config("# only a comment\n") == ScenarioConfig()


def test_defaults_documented_values():
    c = ScenarioConfig()
    assert c.topology.capacity == 2e6 and c.topology.delay == 10
    assert c.monitor.poll_interval == 5 and c.monitor.tick == 1
    assert c.sim.duration == 1800 and c.attack.attack_start == 300 and c.attack.dur == 300
    assert c.detect.window == 30
    assert (c.detect.svm_regularization, c.detect.svm_epochs) == (1.0, 200)
    assert (c.detect.forest_trees, c.detect.forest_depth, c.detect.forest_features) == (100, 12, "sqrt")


def test_negative_bs_names_field_and_line():
    with pytest.raises(ConfigError) as exc:
        validate_config("attack:\n  bs: -5\n")
    (issue,) = exc.value.issues
    assert issue.path == "attack.bs" and issue.line == 2 and ">= 0" in issue.message


def test_all_issues_reported():
    text = "attack:\n  bs: -5\nmonitor:\n  tick: 2\ntopology:\n  n_subtrees: 0\n"
    with pytest.raises(ConfigError) as exc:
        validate_config(text)
    paths = {i.path for i in exc.value.issues}
    assert paths == {"attack.bs", "monitor.tick", "topology.n_subtrees"}
    assert {i.line for i in exc.value.issues} == {2, 4, 6}


def test_type_and_unknown_field_errors():
    with pytest.raises(ConfigError) as exc:
        validate_config("attack:\n  bs: fast\n  colour: red\nbogus: 1\n")
    paths = {i.path for i in exc.value.issues}
    assert paths == {"attack.bs", "attack.colour", "bogus"}


def test_yaml_syntax_error():
    with pytest.raises(ConfigError):
        validate_config("attack: [\n")


def test_presets_and_override_order():
    c = validate_config("preset: d30\n")
    assert c.attack.attack_start == 1800 and c.sim.duration == 5400
    c = validate_config("preset: d30\nattack:\n  dur: 600\n")
    assert c.attack.dur == 600 and c.attack.attack_start == 1800
    c = validate_config("attack:\n  bs: 60\n", overrides={"attack": {"bs": 150.0, "dur": 100.0}})
    assert c.attack.bs == 60 and c.attack.dur == 100
    assert set(PRESETS) == {"d5", "d30"}


@given(st.floats(0, 600, allow_nan=False), st.integers(1, 12), st.sampled_from([1.0, 5.0]),
       st.lists(st.integers(0, 1000), min_size=1, max_size=4))
def test_round_trip(bs, n, tick, seeds):
    text = (f"topology:\n  n_subtrees: {n}\nattack:\n  bs: {bs!r}\nmonitor:\n  tick: {tick}\n"
            f"seeds: {seeds}\n")
    c = validate_config(text)
    assert validate_config(c.to_yaml()) == c
