"""Module containing generic output functionality code."""

import json
import logging
import sys
from pathlib import Path
from typing import Any, Literal, Mapping, Optional

import pandas as pd
import yaml

logger = logging.getLogger(__name__)

TableFormat = Literal["csv", "json"]


def _records_json(df: pd.DataFrame) -> str:
    records = df.astype(object).where(df.notna(), None).to_dict(orient="records")
    return json.dumps(records, indent=2, default=str) + "\n"


def format_table(df: pd.DataFrame, fmt: TableFormat = "csv") -> str:
    """Render a table as CSV or JSON records text.

    CSV output has a header row, no index, `\\n` line endings and shortest
    round-trip float formatting, so identical tables give identical bytes.

    Raises
    ------
    ValueError
        If `fmt` is neither "csv" nor "json".
    """
    if fmt == "csv":
        return df.to_csv(index=False, lineterminator="\n")
    if fmt == "json":
        return _records_json(df)
    msg = f"Unknown table format {fmt!r}; expected 'csv' or 'json'."
    raise ValueError(msg)


def write_table(
    df: pd.DataFrame,
    path: Optional[Path] = None,
    fmt: TableFormat = "csv",
) -> None:
    """Write a table to `path`, or to stdout when no path is given.

    Parameters
    ----------
    df
        Table to write.
    path, optional
        Destination file; parent directories are created.
    fmt
        "csv" or "json" records.
    """
    text = format_table(df, fmt)
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, newline="")
    logger.info(f"Wrote {len(df)} rows to {path}")


def metadata_path(path: Path) -> Path:
    """Return the `<out>.meta.json` sidecar path of an output table."""
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_metadata(path: Optional[Path], metadata: Mapping[str, Any]) -> None:
    """Write the metadata sidecar of a table, or log it when writing to stdout."""
    text = json.dumps(metadata, indent=4, sort_keys=True, default=str)
    if path is None:
        logger.info(f"Run metadata:\n{text}")
        return

    sidecar = metadata_path(path)
    sidecar.parent.mkdir(parents=True, exist_ok=True)
    sidecar.write_text(text + "\n")
    logger.debug(f"Wrote metadata to {sidecar}")


def serialise_config(config: Mapping[str, Any], fmt: Literal["json", "yaml"] = "json") -> str:
    """Serialise a resolved configuration so that parsing it gives it back.

    Raises
    ------
    ValueError
        If `fmt` is neither "json" nor "yaml".
    """
    if fmt == "json":
        return json.dumps(config, indent=4, sort_keys=True)
    if fmt == "yaml":
        return yaml.safe_dump(dict(config), sort_keys=True)
    msg = f"Unknown config format {fmt!r}; expected 'json' or 'yaml'."
    raise ValueError(msg)
