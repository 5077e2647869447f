import json

import pandas as pd
import pytest

from pricequery.io import IO, ConfigWarning, load_config


def test__packaged_defaults():
    config = load_config()
    assert config["harness"]["trials"] == 200
    assert config["estimation"]["C"] == 20.0
    assert config["reports"]["schema_version"] == "1.0"
    assert "lb-mhr-f0" in config["builtin_distributions"]


def test__user_file_merges_per_section(tmp_path):
    path = tmp_path / "user.yaml"
    path.write_text("harness:\n  trials: 5\ncalibration:\n  ladder: [3, 4]\n")
    config = load_config(path)
    assert config["harness"]["trials"] == 5
    assert config["harness"]["seed"] == 7
    assert config["calibration"]["ladder"] == [3, 4]
    assert load_config()["harness"]["trials"] == 200


def test__missing_user_file(tmp_path):
    with pytest.raises(ConfigWarning):
        load_config(tmp_path / "nothing.yaml")


def test__user_file_must_be_a_mapping(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigWarning):
        load_config(path)


def test__save_json(tmp_path, capsys):
    path = tmp_path / "report.json"
    IO.save_json({"b": 1, "a": [1.5, None]}, path)
    assert "Save to ->" in capsys.readouterr().out
    assert path.read_text().index('"a"') < path.read_text().index('"b"')
    assert IO.load_json(path) == {"a": [1.5, None], "b": 1}
    IO.save_json({"c": 2}, path)
    assert json.loads(path.read_text()) == {"c": 2}


def test__save_dataFrame(tmp_path):
    path = tmp_path / "report.csv"
    IO.save_dataFrame(pd.DataFrame([{"x": 1, "y": 2.5}]), path)
    df = pd.read_csv(path)
    assert list(df.columns) == ["x", "y"]
    assert df["y"].iloc[0] == 2.5
