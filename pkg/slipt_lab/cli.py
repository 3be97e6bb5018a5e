"""Command line entry point: `slipt-lab <subcommand> [options]`.

Every subcommand loads the run configuration (defaults, then `--config`, then
`--set` overrides), builds one table and writes it to `--out` or stdout with a
JSON metadata sidecar. Exit codes: 0 success, 1 configuration error, 2 solver
or model error, 3 failed validation.
"""

import argparse
import logging
import os
import sys
import textwrap
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from codetiming import Timer
from pydantic import ValidationError

from slipt_lab import __version__
from slipt_lab.acceptance import report_validation, run_validation
from slipt_lab.exceptions import (
    AcceptanceError,
    ConfigError,
    DegenerateDistributionError,
    DomainError,
    ModelMismatchError,
    SolverError,
)
from slipt_lab.io.config import LoadConfig
from slipt_lab.io.input import merge_overrides, parse_override
from slipt_lab.io.output import serialise_config, write_metadata, write_table
from slipt_lab.logging import LOG_LEVELS, init_logger_advanced, init_logger_basic, timer_args
from slipt_lab.scenario import CONFIG_VALIDATORS, config_defaults
from slipt_lab.sweeps import COMMANDS, SweepResult, deviations
from slipt_lab.typing import Config

logger = logging.getLogger(__name__)

JOBS_ENV_VAR = "SLIPT_LAB_JOBS"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_VALIDATION = 3

SUBCOMMAND_HELP = {
    "eh-curve": "Harvested power against transmit power for every model.",
    "sensitivity": "Receiver sensitivity over the peak-power grid.",
    "rate": "Achievable rates of the optimal and uniform input cdfs.",
    "ber": "Analytic and Monte Carlo bit-error rates of OOK.",
    "cdf": "Capacity-achieving and uniform input cdfs.",
    "tradeoff": "Rate-power region over the energy-signal power grid.",
    "transient": "Transient simulation of a symbol sequence.",
    "validate": "Run the validation battery; exit code 3 if any check fails.",
}


def _config_keys_help() -> str:
    """List every configuration key by section, units in the key suffix."""
    lines = ["configuration keys (set with --set section.key=value):"]
    for section, model in CONFIG_VALIDATORS.items():
        text = f"{section}: {', '.join(model.model_fields)}"
        lines.extend(
            textwrap.wrap(text, 78, initial_indent="  ", subsequent_indent="    "),
        )
    lines.append("  receiver.junctions.junctionK: lambda_min_nm, lambda_max_nm, efficiency,")
    lines.append("    i_sat1_a, i_sat2_a, r_shunt_ohm, r_series_ohm")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subparser per subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON, TOML or YAML run configuration.")
    common.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override one dotted configuration key; repeatable.",
    )
    common.add_argument("--out", type=Path, help="Output table path (default stdout).")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--seed", type=int, help="Root seed, overriding run.seed.")
    common.add_argument("--jobs", type=int, help=f"Worker processes (or ${JOBS_ENV_VAR}).")
    common.add_argument("--log-level", choices=list(LOG_LEVELS), default="INFO")
    common.add_argument("--log-file", type=Path, help="Also write the log to this file.")
    common.add_argument(
        "--dump-config",
        type=Path,
        help="Write the resolved configuration here (YAML for .yaml/.yml, else JSON).",
    )

    parser = argparse.ArgumentParser(
        prog="slipt-lab",
        description="Multi-junction photovoltaic receiver models for lightwave "
        "information and power transfer.",
        epilog=_config_keys_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, text in SUBCOMMAND_HELP.items():
        sub = subparsers.add_parser(
            name,
            parents=[common],
            help=text,
            description=text,
            epilog=_config_keys_help(),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        if name == "transient":
            sub.add_argument("--waveform", type=Path, help="Also write the sampled waveform.")
    return parser


def load_run_config(
    config_path: Optional[Path] = None,
    overrides: Sequence[str] = (),
    seed: Optional[int] = None,
) -> Dict[str, Config]:
    """Resolve and validate the run configuration.

    Raises
    ------
    ConfigError
        For unreadable files, malformed overrides or unknown keys.
    pydantic.ValidationError
        For values outside their allowed range.
    """
    parsed = [parse_override(text) for text in overrides]
    if seed is not None:
        parsed.append({"run": {"seed": seed}})
    config = LoadConfig(
        config_path=config_path,
        config_overrides=merge_overrides(parsed),
        config_validators=CONFIG_VALIDATORS,
        config_defaults=config_defaults,
    )
    return config.config


def resolve_jobs(flag: Optional[int], config: Config) -> int:
    """Parallelism from the flag, then `run.jobs`, then the environment, else 1."""
    if flag is not None:
        jobs = flag
    elif config["run"]["jobs"] is not None:
        jobs = config["run"]["jobs"]
    elif os.environ.get(JOBS_ENV_VAR):
        try:
            jobs = int(os.environ[JOBS_ENV_VAR])
        except ValueError as e:
            msg = f"{JOBS_ENV_VAR} must be an integer, got {os.environ[JOBS_ENV_VAR]!r}."
            raise ConfigError(msg) from e
    else:
        jobs = 1
    if jobs < 1:
        msg = f"Number of jobs must be at least 1, got {jobs}."
        raise ConfigError(msg)
    return jobs


def _metadata(
    command: str,
    config: Config,
    result: SweepResult,
    notes: Sequence[str],
) -> Dict[str, Any]:
    return {
        "command": command,
        "version": __version__,
        "seed": config["run"]["seed"],
        "models": list(result.models),
        "deviations": list(notes),
        "warnings": list(result.warnings),
        "config": config,
    }


def _execute(args: argparse.Namespace) -> None:
    config = load_run_config(args.config, args.set, args.seed)
    if args.dump_config is not None:
        fmt = "yaml" if args.dump_config.suffix in {".yaml", ".yml"} else "json"
        args.dump_config.parent.mkdir(parents=True, exist_ok=True)
        args.dump_config.write_text(serialise_config(config, fmt))
        logger.info(f"Wrote resolved configuration to {args.dump_config}")
    jobs = resolve_jobs(args.jobs, config)
    n_swept = config["sweep"]["n_junctions"] if args.command != "transient" else None
    notes = deviations(config, n_swept)
    for note in notes:
        logger.info(f"Default deviation: {note}")

    if args.command == "validate":
        report = run_validation(config, jobs)
        write_table(report, args.out, args.format)
        result = SweepResult(table=report, models=("validation",))
        write_metadata(args.out, _metadata(args.command, config, result, notes))
        report_validation(report)
        return

    result = COMMANDS[args.command](config, jobs)
    write_table(result.table, args.out, args.format)
    write_metadata(args.out, _metadata(args.command, config, result, notes))
    if args.command == "transient" and args.waveform is not None:
        write_table(result.frames["waveform"], args.waveform, args.format)


def run(argv: Optional[List[str]] = None) -> int:
    """Parse `argv`, run the subcommand and return the exit code."""
    args = build_parser().parse_args(argv)
    level = LOG_LEVELS[args.log_level]
    if args.log_file is None:
        init_logger_basic(level)
    else:
        init_logger_advanced(level, [logging.FileHandler(args.log_file)])

    try:
        with Timer(**timer_args(f"slipt-lab {args.command}")):
            _execute(args)
    except (ConfigError, ValidationError, FileNotFoundError, DomainError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except (SolverError, ModelMismatchError, DegenerateDistributionError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_SOLVER
    except AcceptanceError:
        return EXIT_VALIDATION
    return EXIT_OK


def main() -> None:
    """Console script entry point."""
    sys.exit(run())
