"""Run configuration: defaults, then a config file, then overrides, then validation."""

import copy
import json
import logging
from pathlib import Path
from typing import Callable, Dict, Literal, Optional, Type

from pydantic import BaseModel

from slipt_lab.exceptions import ConfigError
from slipt_lab.helpers.python import overwrite_dictionary
from slipt_lab.io.input import parse_json, parse_toml, parse_yaml, read_file
from slipt_lab.typing import Config
from slipt_lab.validation import apply_validation

logger = logging.getLogger(__name__)

# Builds the base dictionary from the file contents and the overrides.
DefaultsFactory = Callable[[Config, Config], Config]

CONFIG_PARSERS: Dict[str, Callable[[str], Config]] = {
    "json": parse_json,
    "toml": parse_toml,
    "yaml": parse_yaml,
    "yml": parse_yaml,
}


class LoadConfig:
    """Resolve and hold one run configuration.

    The layers are merged in order: `config_defaults` (if given), the file at
    `config_path` (if given), then `config_overrides`. When defaults are used,
    every later key must already exist in them, so misspelt keys fail with
    `ConfigError` instead of being ignored. Each top-level section is then
    passed through its validator and set as an attribute, e.g.
    ``LoadConfig(...).receiver``.

    Attributes
    ----------
    config
        The resolved configuration.
    config_original
        The file contents as parsed, before any merging (empty without a file).
    config_path, config_file, config_dir
        The file path, its name and its directory, or None.
    config_type
        The parser key used for the file.
    config_overrides
        The overrides applied last, if any.
    config_validators
        Pydantic models per section, if any.
    """

    def __init__(
        self: "LoadConfig",
        config_path: Optional[Path] = None,
        config_overrides: Optional[Config] = None,
        config_type: Optional[Literal["json", "toml", "yaml"]] = None,
        config_validators: Optional[Dict[str, Type[BaseModel]]] = None,
        config_defaults: Optional[DefaultsFactory] = None,
    ) -> None:
        """Load, merge and validate.

        Parameters
        ----------
        config_path, optional
            JSON, TOML or YAML file. Without one only defaults and overrides
            are used.
        config_overrides, optional
            Nested dictionary of values to apply last.
        config_type, optional
            Parser to use, by default the file suffix.
        config_validators, optional
            Pydantic model per top-level section. Sections without one are
            kept as they are, with a warning.
        config_defaults, optional
            Callable building the base dictionary from the file contents and
            the overrides (the junction table depends on `junction_count`).

        Raises
        ------
        ConfigError
            For an unsupported file type or an unknown key.
        pydantic.ValidationError
            For values a section validator rejects.
        """
        self.config_path = Path(config_path) if config_path is not None else None
        self.config_file = self.config_path.name if self.config_path else None
        self.config_dir = self.config_path.parent if self.config_path else None
        self.config_type = config_type
        self.config_overrides = config_overrides
        self.config_validators = config_validators

        file_config = self._read_file() if self.config_path is not None else {}
        self.config_original = copy.deepcopy(file_config)
        logger.debug(self._dump("config file contents", self.config_original))

        if config_defaults is None:
            self.config = file_config
        else:
            defaults = config_defaults(file_config, self.config_overrides or {})
            self.config = self._merge(copy.deepcopy(dict(defaults)), file_config, "config file")

        if self.config_overrides:
            self.config = self._merge(self.config, self.config_overrides, "overrides")
            logger.debug(self._dump("config with overrides", self.config))

        if self.config_validators:
            for section, values in self.config.items():
                self.config[section] = apply_validation(
                    config=values,
                    Validator=self.config_validators.get(section),
                )

        logger.dev(self._dump("resolved config", self.config))

        for section, values in self.config.items():
            setattr(self, section, values)

    def _read_file(self: "LoadConfig") -> Config:
        """Parse `config_path` with the parser for `config_type`."""
        self.config_type = self.config_type or self.config_path.suffix.lstrip(".")
        parser = CONFIG_PARSERS.get(self.config_type)
        if parser is None:
            msg = f"No config parser present for file type = {self.config_type}"
            logger.error(msg)
            raise ConfigError(msg)

        logger.info(f"Loading config from file: {self.config_path}")
        return parser(read_file(self.config_path)) or {}

    @staticmethod
    def _merge(base: Config, override: Config, source: str) -> Config:
        try:
            return overwrite_dictionary(base, copy.deepcopy(dict(override)))
        except ValueError as e:
            msg = f"Unknown key in {source}: {e}"
            raise ConfigError(msg) from e

    @staticmethod
    def _dump(title: str, data: Config) -> str:
        return f"\n{title}\n{json.dumps(data, indent=4, default=str)}"
