"""Numerical helpers shared by the receiver models.

Bracketed scalar root finding on top of `scipy.optimize.brentq`, geometric
bracket expansion and high-order finite differences.
"""

import logging
import math
from typing import Callable, Optional, Tuple

from scipy.optimize import brentq

from slipt_lab.exceptions import BracketError, SolverError

logger = logging.getLogger(__name__)

# brentq refuses rtol below 4 * machine epsilon.
MIN_RTOL = 4 * 2.220446049250313e-16


def find_root(
    func: Callable[[float], float],
    lower: float,
    upper: float,
    rtol: float = MIN_RTOL,
    xtol: float = 1e-300,
    name: str = "root",
    max_iter: int = 500,
) -> float:
    """Find the root of a scalar function on a sign-changing bracket.

    Parameters
    ----------
    func
        Continuous function of one variable.
    lower, upper
        Bracket end points. `func` must take opposite signs (or zero) at them.
    rtol, xtol
        Relative and absolute tolerances passed to `scipy.optimize.brentq`.
    name
        Description of the quantity being solved for, used in errors and logs.
    max_iter
        Maximum number of Brent iterations.

    Returns
    -------
    float
        The root.

    Raises
    ------
    BracketError
        If the end points do not bracket a root.
    SolverError
        If Brent's method does not converge within `max_iter` iterations.
    """
    f_lower = func(lower)
    if f_lower == 0.0:
        return lower

    f_upper = func(upper)
    if f_upper == 0.0:
        return upper

    if math.copysign(1.0, f_lower) == math.copysign(1.0, f_upper):
        msg = f"No sign change bracketing the {name} on [{lower!r}, {upper!r}]."
        logger.debug(msg)
        raise BracketError(
            msg,
            diagnostics={
                "lower": lower,
                "upper": upper,
                "f_lower": f_lower,
                "f_upper": f_upper,
            },
        )

    root, result = brentq(
        func,
        lower,
        upper,
        xtol=xtol,
        rtol=max(rtol, MIN_RTOL),
        maxiter=max_iter,
        full_output=True,
        disp=False,
    )
    if not result.converged:
        msg = f"Brent iteration for the {name} did not converge: {result.flag}."
        raise SolverError(
            msg,
            diagnostics={
                "lower": lower,
                "upper": upper,
                "iterations": result.iterations,
                "last": root,
            },
        )

    return root


def expand_bracket(
    func: Callable[[float], float],
    lower: float,
    upper: float,
    cap: float,
    factor: float = 2.0,
    name: str = "root",
) -> Tuple[float, float]:
    """Grow the upper end of a bracket geometrically until the sign changes.

    `func(lower)` is taken as the reference sign; `upper` is multiplied by
    `factor` until `func(upper)` has the opposite sign or `upper` exceeds
    `cap`.

    Returns
    -------
    Tuple[float, float]
        A bracket `(lower, upper)` with a sign change.

    Raises
    ------
    BracketError
        If no sign change is found below `cap`.
    """
    f_lower = func(lower)
    f_upper = func(upper)
    while math.copysign(1.0, f_lower) == math.copysign(1.0, f_upper) and f_upper != 0:
        if upper >= cap:
            msg = f"Bracket expansion for the {name} reached the cap {cap!r}."
            raise BracketError(
                msg,
                diagnostics={"lower": lower, "upper": upper, "cap": cap},
            )
        upper = min(upper * factor, cap)
        f_upper = func(upper)

    return lower, upper


def derivative(
    func: Callable[[float], float],
    x: float,
    step: Optional[float] = None,
    lower_limit: float = 0.0,
) -> float:
    """Fourth-order finite-difference derivative.

    A central five-point stencil is used unless it would step below
    `lower_limit`, in which case the fourth-order forward stencil is used.

    Parameters
    ----------
    func
        Function to differentiate.
    x
        Evaluation point.
    step, optional
        Step size; defaults to `max(1e-6 * |x|, 1e-12)`.
    lower_limit
        Smallest argument `func` accepts.
    """
    h = step if step is not None else max(1e-6 * abs(x), 1e-12)

    if x - 2 * h >= lower_limit:
        return (
            -func(x + 2 * h) + 8 * func(x + h) - 8 * func(x - h) + func(x - 2 * h)
        ) / (12 * h)

    f = [func(x + k * h) for k in range(5)]
    return (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
