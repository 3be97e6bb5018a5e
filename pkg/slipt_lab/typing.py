"""Contains custom types for type hinting."""

from typing import Any, Mapping, Protocol, Sequence, Union

import numpy as np
import numpy.typing as npt

Config = Mapping[str, Any]

# Scalars or arrays accepted by the vectorised spectral functions.
FloatOrArray = Union[float, npt.NDArray[np.float64]]

# Per-junction photocurrents (A), ordered as the receiver junctions.
CurrentVector = Union[Sequence[float], npt.NDArray[np.float64]]


class HarvestCurve(Protocol):
    """Normalized receiver output as a function of information transmit power.

    `amplitude(s)` returns x(s) = sqrt(P_harv(g_s * s)) in sqrt(W) and
    `amplitude_slope(s)` its derivative dx/ds. Any object with these two
    methods can drive the information-theoretic calculations.
    """

    def amplitude(self, s: float) -> float:  # noqa: D102
        ...

    def amplitude_slope(self, s: float) -> float:  # noqa: D102
        ...
