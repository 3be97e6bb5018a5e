"""Tests for the input.py module."""

import pytest

from slipt_lab.exceptions import ConfigError
from slipt_lab.io.input import *
from slipt_lab.test_utils import *


class TestParseJson:
    """Tests for parse_json function."""

    def test_expected(
        self,
        json_config_string,
        expected_standard_config,
    ):
        """Test expected functionality."""
        actual = parse_json(json_config_string)

        assert actual == expected_standard_config

    def test_raises_config_error_on_bad_json(self):
        """Test malformed JSON is reported as a configuration error."""
        with pytest.raises(ConfigError, match="Cannot convert JSON config"):
            parse_json('{"run": {"seed": 3}')


class TestParseToml:
    """Tests for parse_toml function."""

    def test_expected(
        self,
        toml_config_string,
        expected_standard_config,
    ):
        """Test expected functionality."""
        actual = parse_toml(toml_config_string)

        assert actual == expected_standard_config

    def test_raises_config_error_on_bad_toml(self):
        """Test malformed TOML is reported as a configuration error."""
        with pytest.raises(ConfigError, match="Cannot parse TOML"):
            parse_toml("[run\nseed = 3")


class TestParseYaml:
    """Tests for parse_yaml function."""

    def test_expected(
        self,
        yaml_config_string,
        expected_standard_config,
    ):
        """Test expected functionality."""
        actual = parse_yaml(yaml_config_string)

        assert actual == expected_standard_config

    def test_empty_document_is_empty_config(self):
        """Test an empty file gives an empty dictionary."""
        assert parse_yaml("") == {}


class TestReadFile:
    """Tests for read_file function."""

    def test_expected(self, tmp_path):
        """Test file contents are returned."""
        path = tmp_path / "run.toml"
        path.write_text("[run]\nseed = 3\n")

        assert read_file(path) == "[run]\nseed = 3\n"

    def test_raises_when_missing(self, tmp_path):
        """Test a missing file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            read_file(tmp_path / "missing.toml")


class TestParseOverride:
    """Tests for parse_override function."""

    @parametrize_cases(
        Case(
            label="float_value",
            text="receiver.r_load_ohm=2e4",
            expected={"receiver": {"r_load_ohm": 20000.0}},
        ),
        Case(
            label="integer_value",
            text="run.seed=42",
            expected={"run": {"seed": 42}},
        ),
        Case(
            label="array_value",
            text="sweep.p_mw=[0, 10]",
            expected={"sweep": {"p_mw": [0, 10]}},
        ),
        Case(
            label="boolean_value",
            text="transient.cold_start=true",
            expected={"transient": {"cold_start": True}},
        ),
        Case(
            label="bare_word_is_string",
            text="run.model=closed_form_multi",
            expected={"run": {"model": "closed_form_multi"}},
        ),
        Case(
            label="nested_junction_key",
            text="receiver.junctions.junction1.lambda_max_nm = 1100",
            expected={"receiver": {"junctions": {"junction1": {"lambda_max_nm": 1100}}}},
        ),
    )
    def test_expected(self, text, expected):
        """Test dotted keys and typed values."""
        assert parse_override(text) == expected

    @pytest.mark.parametrize("text", ["receiver.r_load_ohm", "=3", "bad key=3"])
    def test_raises_config_error(self, text):
        """Test malformed overrides are configuration errors."""
        with pytest.raises(ConfigError):
            parse_override(text)


class TestMergeOverrides:
    """Tests for merge_overrides function."""

    def test_later_overrides_win(self):
        """Test deep merge order."""
        actual = merge_overrides(
            [
                {"run": {"seed": 1, "model": "accurate"}},
                {"run": {"seed": 2}},
                {"sweep": {"p_mw": [0]}},
            ],
        )

        assert actual == {"run": {"seed": 2, "model": "accurate"}, "sweep": {"p_mw": [0]}}

    def test_empty(self):
        """Test no overrides give an empty dictionary."""
        assert merge_overrides([]) == {}
