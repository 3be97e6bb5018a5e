"""Logging setup for slipt-lab runs, plus the DEV level and timer helpers.

Every module logs through ``logging.getLogger(__name__)``; this module only
decides where the records go. Records are written to stderr so tables sent
to stdout stay machine readable.
"""

import logging
from typing import Callable, Dict, List, Optional

import pandas as pd
from humanfriendly import format_timespan

from slipt_lab.exceptions import AcceptanceError

logger = logging.getLogger(__name__)

PACKAGE_LOGGER = "slipt_lab"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Between DEBUG and INFO: resolved configs, per-point solver summaries.
LOG_DEV_LEVEL_NUM = 15
logging.addLevelName(LOG_DEV_LEVEL_NUM, "DEV")

# Names accepted by the CLI `--log-level` flag.
LOG_LEVELS: Dict[str, int] = {
    "DEBUG": logging.DEBUG,
    "DEV": LOG_DEV_LEVEL_NUM,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
}


def log_dev(self, message, *args, **kwargs):  # noqa: E302
    """Log `message` at the DEV level.

    See https://stackoverflow.com/a/13638084 for the pattern.
    """
    if self.isEnabledFor(LOG_DEV_LEVEL_NUM):
        self._log(LOG_DEV_LEVEL_NUM, message, args, **kwargs)


logging.Logger.dev = log_dev  # noqa: E305


def init_logger_basic(log_level: int) -> None:
    """Send records of every logger at `log_level` or above to stderr.

    Parameters
    ----------
    log_level
        A `logging` level, or `LOG_DEV_LEVEL_NUM` for the DEV level.
    """
    logging.basicConfig(level=log_level, format=LOG_FORMAT, datefmt=DATE_FORMAT)

    logger.dev("Initialised logger for slipt-lab run.")


def init_logger_advanced(
    log_level: int,
    handlers: Optional[List[logging.Handler]] = None,
    log_format: Optional[str] = None,
    date_format: Optional[str] = None,
) -> None:
    """Attach `handlers` to the package logger, e.g. a log file for a long sweep.

    Parameters
    ----------
    log_level
        Level of the `slipt_lab` logger.
    handlers
        Handlers to format and attach. Without any, `logging.basicConfig`
        is used as in `init_logger_basic`.
    log_format
        Record format, by default `LOG_FORMAT`.
    date_format
        Timestamp format, by default `DATE_FORMAT`.

    Raises
    ------
    ValueError
        If any item in `handlers` is not a `logging.Handler`.

    Examples
    --------
    >>> init_logger_advanced(logging.INFO, [logging.FileHandler("ber.log")])
    """
    log_format = log_format or LOG_FORMAT
    date_format = date_format or DATE_FORMAT
    handlers = handlers or []

    for handler in handlers:
        if not isinstance(handler, logging.Handler):
            msg = f"Handler {handler} is not an instance of logging.Handler or its subclasses"
            raise ValueError(msg)

    package_logger = logging.getLogger(PACKAGE_LOGGER)
    package_logger.setLevel(log_level)

    formatter = logging.Formatter(log_format, date_format)
    for handler in handlers:
        handler.setFormatter(formatter)
        package_logger.addHandler(handler)

    if not handlers:
        logging.basicConfig(level=log_level, format=log_format, datefmt=date_format)

    package_logger.debug(
        f"Initialised logger for slipt-lab run with {len(handlers)} extra handler(s).",
    )


def timer_args(
    name: str,
    logger: Optional[Callable[[str], None]] = logger.info,
) -> Dict[str, str]:
    """Return keyword arguments for a `codetiming.Timer` around `name`.

    The elapsed time is logged in words ("eh-curve: 3.2 seconds").

    Parameters
    ----------
    name
        Timer name, also the prefix of the log line.
    logger
        Callable receiving the log line, or None to stay silent.
    """
    return {
        "name": name,
        "text": lambda secs: f"{name}: {format_timespan(secs)}",
        "logger": logger,
        "initial_text": "Running {name}",
    }


def print_full_table_and_raise_error(
    df: pd.DataFrame,
    message: str,
    stop_pipeline: bool = False,
    show_records: bool = False,
) -> None:
    """Log `message`, optionally with the whole table, and optionally stop the run.

    Parameters
    ----------
    df
        Table to log in full when `show_records` is set.
    message
        Summary line.
    stop_pipeline
        Log at ERROR and raise instead of logging at INFO.
    show_records
        Log `df` before `message`.

    Raises
    ------
    AcceptanceError
        With `message`, when `stop_pipeline` is set.
    """
    log = logger.error if stop_pipeline else logger.info

    if show_records:
        log(df.to_string())
    log(message)

    if stop_pipeline:
        raise AcceptanceError(message)
