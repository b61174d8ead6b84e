"""
Testing of the run settings: config files, overrides and validation.
"""
import pytest

from fcmstab.utils.common import ValidationError
from fcmstab.utils.config import RunConfig, coerce, load_config, parse_config

CONFIG_TEXT = """
# dataset settings
n-per-edge = 5
d_min = 0.001   # closer to the vertices
batch = none

threshold=0.1
"""


def test_parse_config():
    settings = parse_config(CONFIG_TEXT)
    assert settings == {
        "n_per_edge": 5,
        "d_min": 0.001,
        "batch": None,
        "threshold": 0.1,
    }


def test_config_line_without_value():
    with pytest.raises(ValidationError, match="line 2"):
        parse_config("epochs = 3\nepochs 4\n")


def test_coerce():
    pytest.assume(coerce("lr0", "1e-3") == 1e-3)
    pytest.assume(coerce("model", "model.json") == "model.json")
    pytest.assume(coerce("configs", "") is None)
    with pytest.raises(ValidationError):
        coerce("epochs", "many")
    with pytest.raises(ValidationError):
        coerce("colour", "blue")


def test_load_config_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("epochs = 10\nlr0 = 0.01\nseed = 4\n")
    config = load_config(path, {"epochs": 3, "seed": None})
    pytest.assume(config.epochs == 3)
    pytest.assume(config.lr0 == 0.01)
    # None overrides leave the file value
    pytest.assume(config.seed == 4)
    pytest.assume(config.hidden == RunConfig().hidden)


def test_load_config_without_file():
    assert load_config(overrides={"lmax": 5}).lmax == 5


def test_unknown_settings(tmp_path):
    with pytest.raises(ValidationError):
        load_config(overrides={"colour": "blue"})
    path = tmp_path / "run.cfg"
    path.write_text("colour = blue\n")
    with pytest.raises(ValidationError):
        load_config(path)
    with pytest.raises(ValidationError):
        load_config(tmp_path / "missing.cfg")


@pytest.mark.parametrize(
    "overrides",
    [
        {"threads": 0},
        {"lambda_source": "guess"},
        {"mode": "fastest"},
        {"problem": "cubic"},
        {"repeat": 0},
    ],
)
def test_invalid_settings(overrides):
    with pytest.raises(ValidationError):
        RunConfig().merge(overrides)


def test_int_list():
    pytest.assume(RunConfig.int_list("1,8,64,") == (1, 8, 64))
    with pytest.raises(ValidationError):
        RunConfig.int_list("1,eight")


def test_path_checks(tmp_path):
    existing = tmp_path / "train.csv"
    existing.write_text("")
    config = RunConfig(train=str(existing), val=str(tmp_path / "val.csv"))
    config.validate_inputs("train")
    with pytest.raises(ValidationError):
        config.validate_inputs("val")
    with pytest.raises(ValidationError):
        config.validate_inputs("test")
    config.merge({"out": str(tmp_path / "out.csv")}).validate_outputs("out")
    with pytest.raises(ValidationError):
        config.merge({"out": str(tmp_path / "a" / "b.csv")}).validate_outputs("out")
