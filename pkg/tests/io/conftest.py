"""Functions, classes and fixtures available across all tests in io."""

from typing import Any, Dict

import pytest


@pytest.fixture(scope="session")
def json_config_string() -> str:
    """Fixture to provide a json format string."""
    return (
        "{"
        '"run": {"model": "accurate", "seed": 3},'
        '"receiver": {"r_load_ohm": 20000.0,'
        ' "junctions": {"junction1": {"lambda_max_nm": 1100}}},'
        '"sweep": {"p_mw": [0, 10], "models": ["accurate", "circuit_oracle"]},'
        '"transient": {"cold_start": true}'
        "}"
    )


@pytest.fixture(scope="session")
def toml_config_string() -> str:
    """Fixture to provide a toml format string."""
    return """
        [run]
        model = 'accurate'
        seed = 3

        [receiver]
        r_load_ohm = 20000.0

            [receiver.junctions.junction1]
            lambda_max_nm = 1100

        [sweep]
        p_mw = [0, 10]
        models = ['accurate', 'circuit_oracle']

        [transient]
        cold_start = true
    """


@pytest.fixture(scope="session")
def yaml_config_string() -> str:
    """Fixture to provide a yaml format string."""
    return """
        run:
            model: accurate
            seed: 3

        receiver:
            r_load_ohm: 20000.0
            junctions:
                junction1:
                    lambda_max_nm: 1100

        sweep:
            p_mw:
                - 0
                - 10
            models:
                - accurate
                - circuit_oracle

        transient:
            cold_start: True
    """


@pytest.fixture
def expected_standard_config() -> Dict[str, Any]:
    """Fixture providing the loaded config from loading the temp file."""
    return {
        "run": {
            "model": "accurate",
            "seed": 3,
        },
        "receiver": {
            "r_load_ohm": 20000.0,
            "junctions": {"junction1": {"lambda_max_nm": 1100}},
        },
        "sweep": {
            "p_mw": [0, 10],
            "models": ["accurate", "circuit_oracle"],
        },
        "transient": {
            "cold_start": True,
        },
    }
