import os
import json
import copy
from pathlib import Path
from typing import Optional, Union

import pandas as pd
import yaml

dir_src = Path(__file__).parent.absolute()
default_config_file = dir_src / "configs/defaults.yaml"


class ConfigWarning(BaseException):
    pass


def load_config(filename: Optional[Union[str, Path]] = None) -> dict:
    """
    Packaged defaults, with the sections of a user YAML file merged over
    them one level deep.
    """
    with open(default_config_file, "r") as f:
        config = yaml.load(f, Loader=yaml.FullLoader)
    if filename is None:
        return config
    if not os.path.isfile(filename):
        raise ConfigWarning(f"config file {filename} does not exist")
    with open(filename, "r") as f:
        try:
            user = yaml.load(f, Loader=yaml.FullLoader) or {}
        except yaml.YAMLError as err:
            raise ConfigWarning(f"{filename} is not valid YAML: {err}")
    if not isinstance(user, dict):
        raise ConfigWarning(f"{filename} must hold a mapping of sections")
    merged = copy.deepcopy(config)
    for section, values in user.items():
        if isinstance(values, dict) and isinstance(merged.get(section), dict):
            merged[section].update(values)
        else:
            merged[section] = values
    return merged


class IO:
    @staticmethod
    def _remove_existing_file(filename: Union[str, Path]) -> None:
        if os.path.exists(filename):
            os.remove(filename)

    @staticmethod
    def save_json(data: dict, filename: Union[str, Path]) -> None:
        """
        Write a report; keys are sorted so equal reports give equal bytes.
        """
        IO._remove_existing_file(filename)
        print(f"Save to -> {filename}")
        with open(filename, "w") as f:
            json.dump(data, f, indent=2, sort_keys=True)
            f.write("\n")

    @staticmethod
    def save_dataFrame(df: pd.DataFrame, filename: Union[str, Path]) -> None:
        IO._remove_existing_file(filename)
        print(f"Save to -> {filename}")
        df.to_csv(filename, index=False)

    @staticmethod
    def load_json(filename: Union[str, Path]) -> dict:
        with open(filename, "r") as f:
            return json.load(f)
