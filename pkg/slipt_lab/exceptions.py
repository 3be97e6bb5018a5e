"""Common custom exceptions that can be raised by the models and the CLI.

The purpose of these is to provide a clearer indication of why an error is
being raised over the standard builtin errors (e.g. `ConvergenceError` vs
`RuntimeError`), and to let the CLI map each failure family onto its own exit
code.
"""

from typing import Any, Mapping, Optional


class ConfigError(Exception):
    """Custom exception to raise when there is an issue in a config object."""

    pass


class DomainError(ValueError):
    """Custom exception to raise when an argument lies outside its physical domain."""

    pass


class ModelMismatchError(Exception):
    """Custom exception to raise when a model does not apply to the receiver."""

    pass


class DegenerateDistributionError(Exception):
    """Custom exception to raise when an input cdf collapses to a point mass."""

    pass


class AcceptanceError(Exception):
    """Custom exception to raise when one or more validation criteria fail."""

    pass


class SolverError(Exception):
    """Custom exception to raise when a numerical solver fails.

    Attributes
    ----------
    diagnostics
        Solver state at the point of failure (brackets, iterates, residuals).
    """

    def __init__(
        self,
        message: str,
        diagnostics: Optional[Mapping[str, Any]] = None,
    ) -> None:
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class BracketError(SolverError):
    """Custom exception to raise when a root cannot be bracketed."""

    pass


class ConvergenceError(SolverError):
    """Custom exception to raise when Newton iteration fails to converge.

    Attributes
    ----------
    last_iterate
        The final iterate reached before giving up.
    """

    def __init__(
        self,
        message: str,
        last_iterate: Any = None,
        diagnostics: Optional[Mapping[str, Any]] = None,
    ) -> None:
        super().__init__(message, diagnostics)
        self.last_iterate = last_iterate


class IntegratorError(SolverError):
    """Custom exception to raise when a transient step cannot be completed.

    Attributes
    ----------
    time
        Simulation time (s) of the step that failed.
    """

    def __init__(
        self,
        message: str,
        time: float,
        diagnostics: Optional[Mapping[str, Any]] = None,
    ) -> None:
        super().__init__(message, diagnostics)
        self.time = time


class SaturationError(SolverError):
    """Custom exception to raise when a diode exponential would overflow.

    Attributes
    ----------
    sign
        Sign of the current the overflowing branch drives towards infinity.
    """

    def __init__(
        self,
        message: str,
        sign: int,
        diagnostics: Optional[Mapping[str, Any]] = None,
    ) -> None:
        super().__init__(message, diagnostics)
        self.sign = sign
