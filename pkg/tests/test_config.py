import pytest

from DiagCountSDK.DiagCountConfig import Config, load_config


def test_defaults():
    config = load_config(environ={})
    assert config == Config()
    assert config.enumeration_budget == 2 ** 28
    assert config.workers == 1
    assert config.oracle_strategy == "auto"
    assert config.log_level == "WARNING"


def test_yaml_file(tmp_path):
    path = tmp_path / "diagcount.yaml"
    path.write_text("workers: 4\noracle_strategy: closure\nfull_gl_limit: 5000\n")
    config = load_config(str(path), environ={})
    assert config.workers == 4
    assert config.oracle_strategy == "closure"
    assert config.full_gl_limit == 5000


def test_yaml_path_from_environment(tmp_path):
    path = tmp_path / "diagcount.yaml"
    path.write_text("oracle_check_types: true\n")
    assert load_config(environ={"DIAGCOUNT_CONFIG": str(path)}).oracle_check_types is True


def test_empty_yaml_file(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    assert load_config(str(path), environ={}) == Config()


@pytest.mark.parametrize("body", ["colour: blue\n", "- 1\n- 2\n"])
def test_yaml_rejects_bad_content(tmp_path, body):
    path = tmp_path / "bad.yaml"
    path.write_text(body)
    with pytest.raises(ValueError):
        load_config(str(path), environ={})


def test_environment_overrides_file(tmp_path):
    path = tmp_path / "diagcount.yaml"
    path.write_text("workers: 4\nenumeration_budget: 1000\n")
    environ = {"DIAGCOUNT_THREADS": "2", "DIAGCOUNT_LOG_LEVEL": "debug"}
    config = load_config(str(path), environ=environ)
    assert config.workers == 2
    assert config.enumeration_budget == 1000
    assert config.log_level == "DEBUG"


def test_explicit_overrides_win():
    config = load_config(environ={"DIAGCOUNT_BUDGET": "500"}, enumeration_budget=99, log_level=None)
    assert config.enumeration_budget == 99
    assert config.log_level == "WARNING"


@pytest.mark.parametrize("kwargs", [
    {"enumeration_budget": 0},
    {"workers": 0},
    {"oracle_strategy": "random"},
    {"log_level": "LOUD"},
])
def test_invalid_values(kwargs):
    with pytest.raises(ValueError):
        Config(**kwargs)


def test_invalid_environment_value():
    with pytest.raises(ValueError):
        load_config(environ={"DIAGCOUNT_THREADS": "many"})
