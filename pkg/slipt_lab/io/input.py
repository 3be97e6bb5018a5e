"""Module containing generic input functionality code."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable

import tomli
import yaml

from slipt_lab.exceptions import ConfigError
from slipt_lab.typing import Config

logger = logging.getLogger(__name__)


def parse_json(data: str) -> Config:
    """Parse JSON formatted string into a dictionary.

    Parameters
    ----------
    data
        String containing standard JSON-formatted data.

    Returns
    -------
    Config
        A dictionary containing the parsed data.

    Raises
    ------
    ConfigError
        If the string cannot be decoded by json.loads.
    """
    try:
        return json.loads(data)

    except json.decoder.JSONDecodeError as e:
        msg = f"""
        Cannot convert JSON config to a dictionary: {e}

        Ensure that the contents are of form:

        {{"receiver": {{"r_load_ohm": 1e4}}, "sweep": {{"p_mw": [0, 10, 100]}}}}
        """
        logger.error(msg)
        raise ConfigError(msg) from e


def parse_toml(data: str) -> Config:
    """Parse TOML formatted string into a dictionary.

    Parameters
    ----------
    data
        String containing standard TOML-formatted data.

    Returns
    -------
    Config
        A dictionary containing the parsed data.
    """
    try:
        return tomli.loads(data)
    except tomli.TOMLDecodeError as e:
        msg = f"Cannot parse TOML config: {e}"
        logger.error(msg)
        raise ConfigError(msg) from e


def parse_yaml(data: str) -> Config:
    """Parse YAML formatted string into a dictionary.

    Parameters
    ----------
    data
        String containing standard YAML-formatted data.

    Returns
    -------
    Config
        A dictionary containing the parsed data.
    """
    try:
        return yaml.safe_load(data) or {}
    except yaml.YAMLError as e:
        msg = f"Cannot parse YAML config: {e}"
        logger.error(msg)
        raise ConfigError(msg) from e


def read_file(file: Path) -> str:
    """Load contents of specified file.

    Parameters
    ----------
    file
        The file path of the file to be read.

    Returns
    -------
    str
        The contents of the provided file.

    Raises
    ------
    FileNotFoundError
        If the provided file does not exist.
    """
    if file.exists():
        return file.read_text()
    else:
        msg = f"{file=} cannot be found."
        logger.error(msg)
        raise FileNotFoundError(msg)


def parse_override(text: str) -> Config:
    """Parse one `--set` override of the form `dotted.key=value`.

    The value is read as a TOML value, so numbers, booleans and arrays keep
    their type; anything TOML cannot read is taken as a string.

    Example
    -------
    >>> parse_override("receiver.r_load_ohm=2e4")
    {'receiver': {'r_load_ohm': 20000.0}}
    >>> parse_override("run.model=accurate")
    {'run': {'model': 'accurate'}}
    """
    key, sep, value = text.partition("=")
    key, value = key.strip(), value.strip()
    if not sep or not key:
        msg = f"Override {text!r} is not of the form key=value."
        raise ConfigError(msg)

    try:
        return tomli.loads(f"{key} = {value}")
    except tomli.TOMLDecodeError:
        pass

    try:
        return tomli.loads(f"{key} = {json.dumps(value)}")
    except tomli.TOMLDecodeError as e:
        msg = f"Override key {key!r} is not a valid dotted key."
        raise ConfigError(msg) from e


def merge_overrides(overrides: Iterable[Config]) -> Dict[str, Any]:
    """Deep-merge a sequence of override dictionaries, later ones winning."""
    merged: Dict[str, Any] = {}

    def merge(target: Dict[str, Any], source: Config) -> None:
        for key, value in source.items():
            if isinstance(value, dict) and isinstance(target.get(key), dict):
                merge(target[key], value)
            else:
                target[key] = value

    for override in overrides:
        merge(merged, override)
    return merged
