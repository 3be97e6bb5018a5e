"""Models and sweeps for multi-junction photovoltaic lightwave receivers."""

import slipt_lab.logging  # noqa: F401  (registers the DEV log level)

__version__ = "0.1.0"
