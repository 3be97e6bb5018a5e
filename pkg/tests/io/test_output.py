"""Tests for the output.py module."""

import json

import pandas as pd
import pytest

from slipt_lab.io.input import parse_json, parse_yaml
from slipt_lab.io.output import *
from slipt_lab.test_utils import *


@pytest.fixture
def harvest_table():
    """Small harvested power table with a missing value."""
    return create_dataframe(
        [
            ("n_junctions", "model", "p_mw", "p_harv_w"),
            (1, "accurate", 0.0, 0.0),
            (1, "accurate", 10.0, 1.25e-4),
            (4, "closed_form_multi", 10.0, None),
        ],
    )


class TestFormatTable:
    """Tests for format_table."""

    def test_csv(self, harvest_table):
        """Test header, no index and unix line endings."""
        actual = format_table(harvest_table, "csv")

        assert actual == (
            "n_junctions,model,p_mw,p_harv_w\n"
            "1,accurate,0.0,0.0\n"
            "1,accurate,10.0,0.000125\n"
            "4,closed_form_multi,10.0,\n"
        )

    def test_json_records(self, harvest_table):
        """Test records with missing values as null."""
        actual = json.loads(format_table(harvest_table, "json"))

        assert actual[1] == {
            "n_junctions": 1,
            "model": "accurate",
            "p_mw": 10.0,
            "p_harv_w": 1.25e-4,
        }
        assert actual[2]["p_harv_w"] is None

    def test_identical_tables_give_identical_text(self, harvest_table):
        """Test the rendering is deterministic."""
        assert format_table(harvest_table) == format_table(harvest_table.copy())

    def test_raises_for_unknown_format(self, harvest_table):
        """Test the format guard."""
        with pytest.raises(ValueError, match="Unknown table format"):
            format_table(harvest_table, "xlsx")


class TestWriteTable:
    """Tests for write_table."""

    def test_writes_file_in_new_directory(self, harvest_table, tmp_path):
        """Test parent directories are created."""
        path = tmp_path / "runs" / "eh_curve.csv"

        write_table(harvest_table, path)

        assert path.read_text() == format_table(harvest_table)
        pd.testing.assert_frame_equal(pd.read_csv(path), harvest_table)

    def test_writes_stdout_without_path(self, harvest_table, capsys):
        """Test tables go to stdout when no path is given."""
        write_table(harvest_table, fmt="json")

        assert capsys.readouterr().out == format_table(harvest_table, "json")


class TestMetadataPath:
    """Tests for metadata_path."""

    def test_expected(self, tmp_path):
        """Test the sidecar name keeps the table suffix."""
        assert metadata_path(tmp_path / "rate.csv") == tmp_path / "rate.csv.meta.json"


class TestWriteMetadata:
    """Tests for write_metadata."""

    def test_writes_sidecar(self, tmp_path):
        """Test the sidecar is sorted JSON."""
        path = tmp_path / "ber.csv"
        metadata = {"seed": 0, "command": "ber", "version": "0.1.0"}

        write_metadata(path, metadata)

        text = metadata_path(path).read_text()
        assert json.loads(text) == metadata
        assert text.index('"command"') < text.index('"seed"')

    def test_logs_without_path(self, caplog):
        """Test metadata is logged when the table goes to stdout."""
        caplog.set_level("INFO")

        write_metadata(None, {"seed": 5})

        assert '"seed": 5' in caplog.text


class TestSerialiseConfig:
    """Tests for serialise_config."""

    @pytest.fixture
    def resolved_config(self):
        """Resolved configuration subset."""
        return {
            "run": {"model": "auto", "seed": 0, "jobs": None},
            "sweep": {"p_mw": [0.0, 10.0], "models": ["accurate"]},
        }

    @parametrize_cases(
        Case(label="json", fmt="json", parser=parse_json),
        Case(label="yaml", fmt="yaml", parser=parse_yaml),
    )
    def test_parses_back(self, resolved_config, fmt, parser):
        """Test the serialised text parses to the same configuration."""
        assert parser(serialise_config(resolved_config, fmt)) == resolved_config

    def test_raises_for_unknown_format(self, resolved_config):
        """Test the format guard."""
        with pytest.raises(ValueError, match="Unknown config format"):
            serialise_config(resolved_config, "toml")
