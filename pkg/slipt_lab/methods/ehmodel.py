"""Energy-harvesting models of the multi-junction photovoltaic receiver.

Every junction is a photocurrent source in parallel with a diffusion diode, a
recombination diode and a shunt resistance:

    Phi(v) = j - I_1 (e^{v/V_T} - 1) - I_2 (e^{v/2V_T} - 1) - v / R_sh

The junctions are stacked in series with the load R_L, so the DC output
current solves i R_Sigma = sum_n Phi_n^{-1}(i). Four models of that current
are provided (the accurate fixed point, the approximate product equation, the
single-junction Lambert-W form and the multi-junction logarithmic form)
together with two comparison baselines: a single-diode receiver and a receiver
that tracks its maximum power point.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from slipt_lab.exceptions import ModelMismatchError, SaturationError
from slipt_lab.helpers.numerics import derivative, expand_bracket, find_root
from slipt_lab.methods.spectral import JunctionSpec, PhotocurrentState, ReceiverSpec
from slipt_lab.typing import CurrentVector, FloatOrArray

logger = logging.getLogger(__name__)

# Largest exponent evaluated before a SaturationError is raised.
EXP_LIMIT = 700.0

CURRENT_RTOL = 1e-13
CURRENT_XTOL = 1e-21
BRACKET_CAP_FACTOR = 1e3

# Junction currents below this multiple of I_n are outside the regime of the
# multi-junction logarithmic form.
HIGH_CURRENT_RATIO = 100.0

# Transmit power (W) at which the MPP baseline is calibrated.
MPP_CALIBRATION_POWER = 0.1

_HALLEY_MAX_ITER = 50


class EhModelKind(str, Enum):
    """Energy-harvesting model selector."""

    ACCURATE = "accurate"
    APPROXIMATE = "approximate"
    CLOSED_FORM_SINGLE = "closed_form_single"
    CLOSED_FORM_MULTI = "closed_form_multi"
    BASELINE_SINGLE_DIODE = "baseline_single_diode"
    BASELINE_MPP = "baseline_mpp"

    @property
    def single_junction_only(self) -> bool:
        return self in {
            EhModelKind.CLOSED_FORM_SINGLE,
            EhModelKind.BASELINE_SINGLE_DIODE,
            EhModelKind.BASELINE_MPP,
        }


@dataclass(frozen=True)
class EhSolution:
    """Result of one energy-harvesting model evaluation.

    Attributes
    ----------
    i_eh
        Output DC current (A).
    v
        Junction voltages (V).
    p_harv
        Harvested power R_L * i_eh**2 (W).
    model_tag
        Model that produced the solution.
    residual
        Final residual of the defining equation, in the model's own units.
    warnings
        Quality warnings raised while evaluating the model.
    """

    i_eh: float
    v: Tuple[float, ...]
    p_harv: float
    model_tag: EhModelKind
    residual: float = 0.0
    warnings: Tuple[str, ...] = ()

    @classmethod
    def from_current(
        cls,
        i_eh: float,
        v: Sequence[float],
        rx: ReceiverSpec,
        model_tag: EhModelKind,
        residual: float = 0.0,
        warnings: Sequence[str] = (),
    ) -> "EhSolution":
        """Build a solution, deriving p_harv = R_L * i_eh**2."""
        i_eh = float(i_eh)
        return cls(
            i_eh=i_eh,
            v=tuple(float(value) for value in v),
            p_harv=rx.r_load * i_eh**2,
            model_tag=model_tag,
            residual=float(residual),
            warnings=tuple(warnings),
        )


def _check_exponent(argument: float) -> None:
    if argument > EXP_LIMIT:
        msg = f"Diode exponent {argument!r} exceeds {EXP_LIMIT}."
        raise SaturationError(msg, sign=-1, diagnostics={"exponent": argument})


def phi(
    v: float,
    junction: JunctionSpec,
    j_n: float,
    v_t: float,
    recombination: bool = True,
) -> float:
    """Output current of one junction at junction voltage `v`.

    Parameters
    ----------
    v
        Junction voltage (V).
    junction
        Junction description.
    j_n
        Photocurrent of the junction (A).
    v_t
        Thermal voltage (V).
    recombination
        Include the recombination diode. Without it the junction is the
        diffusion-only single-diode circuit.

    Returns
    -------
    float
        j_n - I_1 (e^{v/V_T} - 1) - I_2 (e^{v/2V_T} - 1) - v / R_sh in amperes.

    Raises
    ------
    SaturationError
        If v / V_T exceeds the exponent limit; the current would diverge to
        minus infinity.
    """
    argument = v / v_t
    _check_exponent(argument)
    current = j_n - junction.i_sat1 * math.expm1(argument) - v / junction.r_shunt
    if recombination:
        current -= junction.i_sat2 * math.expm1(0.5 * argument)
    return current


def phi_inverse(
    i: float,
    junction: JunctionSpec,
    j_n: float,
    v_t: float,
    recombination: bool = True,
) -> float:
    """Junction voltage at which the junction delivers current `i`.

    Phi is strictly decreasing, so the root is bracketed analytically: for
    i < j_n it lies in [0, V_T ln(1 + (j_n - i) / I_1)], for i > j_n in
    [-(i - j_n) R_sh, 0].

    Raises
    ------
    BracketError
        If no bracket can be established (e.g. an infinite shunt with a
        reverse current beyond the diode saturation currents).
    """
    if i == j_n:
        return 0.0

    def residual(v: float) -> float:
        return phi(v, junction, j_n, v_t, recombination) - i

    if i < j_n:
        lower, upper = 0.0, v_t * math.log1p((j_n - i) / junction.i_sat1)
    else:
        start = (i - j_n) * junction.r_shunt
        if not math.isfinite(start):
            start = v_t
        _, depth = expand_bracket(
            lambda x: residual(-x),
            0.0,
            start,
            cap=max(start, 1e12),
            name="reverse junction voltage",
        )
        lower, upper = -depth, 0.0

    return find_root(residual, lower, upper, name="junction voltage")


def lambert_w0_exp(y: FloatOrArray) -> FloatOrArray:
    """Principal Lambert-W branch evaluated from the log of its argument.

    Returns w with w e^w = e^y by solving w + ln w = y with Halley's method,
    which never forms e^y and so stays finite for arguments far beyond the
    double range.

    Parameters
    ----------
    y
        Natural logarithm of the Lambert-W argument, scalar or array.

    Returns
    -------
    FloatOrArray
        W_0(e^y), with the same shape as `y`.
    """
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    w = np.empty_like(y_arr)

    # Below e^-40, W(x) = x - x^2 + ... equals x to double precision.
    tiny = y_arr < -40.0
    large = y_arr > 3.0
    moderate = ~tiny & ~large

    w[tiny] = np.exp(y_arr[tiny])
    log_y = np.log(y_arr[large])
    w[large] = y_arr[large] - log_y + log_y / y_arr[large]
    w[moderate] = np.log1p(np.exp(y_arr[moderate]))

    active = ~tiny
    for _ in range(_HALLEY_MAX_ITER):
        if not active.any():
            break
        wa = w[active]
        f = wa + np.log(wa) - y_arr[active]
        df = 1.0 + 1.0 / wa
        d2f = -1.0 / wa**2
        step = 2.0 * f * df / (2.0 * df**2 - f * d2f)
        updated = wa - step
        updated = np.where(updated > 0, updated, 0.5 * wa)
        w[active] = updated
        done = np.abs(step) <= 4 * np.finfo(float).eps * updated
        active[np.flatnonzero(active)[done]] = False

    return w if np.ndim(y) else float(w[0])


@lru_cache(maxsize=256)
def effective_saturation_current(
    junction: JunctionSpec,
    v_t: float,
    fit_range: Optional[Tuple[float, float]] = None,
) -> Tuple[float, Optional[str]]:
    """Saturation current I_n used by the approximate models.

    The approximate models assume both diodes share one saturation current.
    When they differ and a voltage range is configured, I_n minimises
    the integral over that range of
    |I_1 e^{v/V_T} + I_2 e^{v/2V_T} - I_n (e^{v/V_T} + e^{v/2V_T})|.

    Returns
    -------
    Tuple[float, Optional[str]]
        The saturation current and a warning when I_1 had to be used for
        unequal diode currents without a fit range.
    """
    i_1, i_2 = junction.i_sat1, junction.i_sat2
    if i_1 == i_2:
        return i_1, None

    if fit_range is None:
        msg = (
            f"Diode saturation currents differ ({i_1!r} A, {i_2!r} A) and no "
            "saturation_fit_range is configured; using I_1."
        )
        logger.warning(msg)
        return i_1, msg

    v_low, v_high = fit_range

    def deviation(log_current: float) -> float:
        current = math.exp(log_current)
        value, _ = quad(
            lambda v: abs(
                i_1 * math.exp(v / v_t)
                + i_2 * math.exp(0.5 * v / v_t)
                - current * (math.exp(v / v_t) + math.exp(0.5 * v / v_t)),
            ),
            v_low,
            v_high,
            limit=200,
        )
        return value

    bounds = (math.log(min(i_1, i_2)), math.log(max(i_1, i_2)))
    result = minimize_scalar(
        deviation,
        bounds=bounds,
        method="bounded",
        options={"xatol": 1e-10},
    )
    fitted = math.exp(result.x)
    logger.info(f"Fitted effective saturation current {fitted!r} A over {fit_range} V.")
    return fitted, None


def _saturation_currents(rx: ReceiverSpec) -> Tuple[Tuple[float, ...], Tuple[str, ...]]:
    currents, warnings = [], []
    for junction in rx.junctions:
        current, warning = effective_saturation_current(
            junction,
            rx.v_t,
            rx.saturation_fit_range,
        )
        currents.append(current)
        if warning:
            warnings.append(warning)
    return tuple(currents), tuple(warnings)


def _require_single_junction(rx: ReceiverSpec, model: EhModelKind) -> None:
    if rx.n_junctions != 1:
        msg = f"The {model.value} model needs a single junction, receiver has {rx.n_junctions}."
        raise ModelMismatchError(msg)


def _accurate(
    j: CurrentVector,
    rx: ReceiverSpec,
    model_tag: EhModelKind = EhModelKind.ACCURATE,
    recombination: bool = True,
    v_t: Optional[float] = None,
) -> EhSolution:
    currents = [float(value) for value in j]
    v_t = rx.v_t if v_t is None else v_t
    if not any(currents):
        return EhSolution.from_current(0.0, [0.0] * rx.n_junctions, rx, model_tag)

    def voltages(i: float) -> list:
        return [
            phi_inverse(i, junction, j_n, v_t, recombination)
            for junction, j_n in zip(rx.junctions, currents)
        ]

    def mismatch(i: float) -> float:
        return i * rx.r_sigma - sum(voltages(i))

    start = max(
        j_n + 2 * (junction.i_sat1 + junction.i_sat2)
        for junction, j_n in zip(rx.junctions, currents)
    )
    _, upper = expand_bracket(
        mismatch,
        0.0,
        start,
        cap=max(start, BRACKET_CAP_FACTOR * max(currents)),
        name="accurate output current",
    )
    i_eh = find_root(
        mismatch,
        0.0,
        upper,
        rtol=CURRENT_RTOL,
        xtol=CURRENT_XTOL,
        name="accurate output current",
    )
    v = voltages(i_eh)
    return EhSolution.from_current(
        i_eh,
        v,
        rx,
        model_tag,
        residual=i_eh * rx.r_sigma - sum(v),
    )


def _approximate(j: CurrentVector, rx: ReceiverSpec) -> EhSolution:
    currents = [float(value) for value in j]
    saturation, warnings = _saturation_currents(rx)
    if not any(currents):
        return EhSolution.from_current(
            0.0,
            [0.0] * rx.n_junctions,
            rx,
            EhModelKind.APPROXIMATE,
            warnings=warnings,
        )

    slope = rx.r_sigma / rx.v_t

    def log_balance(i: float) -> float:
        return sum(
            math.log1p((j_n - i) / i_n) for j_n, i_n in zip(currents, saturation)
        ) - slope * i

    # The weakest junction limits the current: every log argument stays positive below top.
    upper = min(j_n + i_n for j_n, i_n in zip(currents, saturation))
    while any((j_n - upper) / i_n <= -1.0 for j_n, i_n in zip(currents, saturation)):
        upper = float(np.nextafter(upper, 0.0))

    if log_balance(upper) >= 0:
        i_eh = upper
    else:
        i_eh = find_root(
            log_balance,
            0.0,
            upper,
            rtol=CURRENT_RTOL,
            xtol=CURRENT_XTOL,
            name="approximate output current",
        )

    v = [
        rx.v_t * math.log1p((j_n - i_eh) / i_n) for j_n, i_n in zip(currents, saturation)
    ]
    return EhSolution.from_current(
        i_eh,
        v,
        rx,
        EhModelKind.APPROXIMATE,
        residual=log_balance(i_eh),
        warnings=warnings,
    )


def _lambert_current(
    j: float,
    saturation: float,
    r_sigma: float,
    v_t: float,
) -> Tuple[float, float]:
    """Return (i, W) with i = (V_T / R_Sigma) ln(W / a), a = I R_Sigma / V_T.

    This is j + I - (V_T / R_Sigma) W rearranged so that no cancellation
    occurs when W is large.
    """
    if j == 0:
        return 0.0, saturation * r_sigma / v_t
    slope = r_sigma / v_t
    log_a = math.log(saturation * slope)
    w = lambert_w0_exp(log_a + slope * (j + saturation))
    return max((math.log(w) - log_a) / slope, 0.0), w


def _closed_form_single(j: CurrentVector, rx: ReceiverSpec) -> EhSolution:
    _require_single_junction(rx, EhModelKind.CLOSED_FORM_SINGLE)
    saturation, warnings = _saturation_currents(rx)
    i_eh, _ = _lambert_current(float(j[0]), saturation[0], rx.r_sigma, rx.v_t)
    return EhSolution.from_current(
        i_eh,
        [i_eh * rx.r_sigma],
        rx,
        EhModelKind.CLOSED_FORM_SINGLE,
        warnings=warnings,
    )


def _baseline_single_diode(j: CurrentVector, rx: ReceiverSpec) -> EhSolution:
    # Same circuit as the accurate model, shunt and series resistances included,
    # but the junction has no recombination diode.
    _require_single_junction(rx, EhModelKind.BASELINE_SINGLE_DIODE)
    return _accurate(
        j,
        rx,
        EhModelKind.BASELINE_SINGLE_DIODE,
        recombination=False,
        v_t=rx.baseline_ideality * rx.v_t,
    )


def _closed_form_multi(j: CurrentVector, rx: ReceiverSpec) -> EhSolution:
    currents = [float(value) for value in j]
    saturation, warnings = _saturation_currents(rx)
    warnings = list(warnings)

    low = [
        index
        for index, (j_n, i_n) in enumerate(zip(currents, saturation), start=1)
        if j_n <= HIGH_CURRENT_RATIO * i_n
    ]
    if low:
        msg = (
            f"Junctions {low} carry less than {HIGH_CURRENT_RATIO:g} x I_n; the "
            "multi-junction logarithmic form assumes high currents."
        )
        logger.debug(msg)
        warnings.append(msg)

    v = [rx.v_t * math.log1p(j_n / i_n) for j_n, i_n in zip(currents, saturation)]
    i_eh = sum(v) / rx.r_sigma
    return EhSolution.from_current(
        i_eh,
        v,
        rx,
        EhModelKind.CLOSED_FORM_MULTI,
        warnings=warnings,
    )


_SOLVERS: Dict[EhModelKind, Callable[[CurrentVector, ReceiverSpec], EhSolution]] = {
    EhModelKind.ACCURATE: _accurate,
    EhModelKind.APPROXIMATE: _approximate,
    EhModelKind.CLOSED_FORM_SINGLE: _closed_form_single,
    EhModelKind.CLOSED_FORM_MULTI: _closed_form_multi,
    EhModelKind.BASELINE_SINGLE_DIODE: _baseline_single_diode,
}


def solve_accurate(state: PhotocurrentState, s: float, rx: ReceiverSpec) -> EhSolution:
    """Accurate model: root of i R_Sigma - sum_n Phi_n^{-1}(i) = 0.

    Parameters
    ----------
    state
        Junction photocurrents and information gain.
    s
        Information transmit power (W).
    rx
        Receiver description.

    Returns
    -------
    EhSolution
        Output current, junction voltages and harvested power.
    """
    return _accurate(state.junction_currents(s), rx)


def solve_approximate(state: PhotocurrentState, s: float, rx: ReceiverSpec) -> EhSolution:
    """Approximate model: root of sum_n ln(1 + (j_n - i)/I_n) - R_Sigma i / V_T = 0."""
    return _approximate(state.junction_currents(s), rx)


def closed_form_single(state: PhotocurrentState, s: float, rx: ReceiverSpec) -> EhSolution:
    """Single-junction Lambert-W form of the approximate model.

    Raises
    ------
    ModelMismatchError
        If the receiver has more than one junction.
    """
    return _closed_form_single(state.junction_currents(s), rx)


def closed_form_multi(state: PhotocurrentState, s: float, rx: ReceiverSpec) -> EhSolution:
    """Multi-junction logarithmic form, i = (V_T / R_Sigma) sum_n ln(1 + j_n / I_n).

    A warning is attached when any junction carries j_n <= 100 I_n.
    """
    return _closed_form_multi(state.junction_currents(s), rx)


def baseline_single_diode(
    state: PhotocurrentState,
    s: float,
    rx: ReceiverSpec,
) -> EhSolution:
    """Comparison receiver with the diffusion diode only."""
    return _baseline_single_diode(state.junction_currents(s), rx)


def mpp_power(junction: JunctionSpec, j: float, v_t: float) -> float:
    """Maximum of v Phi(v) over [0, v_oc], the power of a matched load (W)."""
    if j <= 0:
        return 0.0
    v_oc = phi_inverse(0.0, junction, j, v_t)
    result = minimize_scalar(
        lambda v: -v * phi(v, junction, j, v_t),
        bounds=(0.0, v_oc),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return max(-result.fun, 0.0)


@lru_cache(maxsize=256)
def baseline_mpp_scale(g_s: float, rx: ReceiverSpec) -> float:
    """Calibration factor of the MPP baseline.

    The factor matches the baseline to the single-junction closed form at
    s = 100 mW with no ambient light and no energy signal.
    """
    _require_single_junction(rx, EhModelKind.BASELINE_MPP)
    j_cal = g_s * MPP_CALIBRATION_POWER
    reference = _closed_form_single([j_cal], rx).p_harv
    matched = mpp_power(rx.junctions[0], j_cal, rx.v_t)
    if matched == 0:
        logger.warning("MPP baseline cannot be calibrated without information current.")
        return 1.0
    return reference / matched


def baseline_mpp(state: PhotocurrentState, s: float, rx: ReceiverSpec) -> float:
    """Calibrated maximum-power-point baseline; returns the harvested power (W)."""
    return _mpp_at(state, state.g_s * s, rx)


def _mpp_at(state: PhotocurrentState, j_s: float, rx: ReceiverSpec) -> float:
    _require_single_junction(rx, EhModelKind.BASELINE_MPP)
    j = float(state.with_info_current(j_s)[0])
    return baseline_mpp_scale(state.g_s, rx) * mpp_power(rx.junctions[0], j, rx.v_t)


def evaluate(
    model: EhModelKind,
    state: PhotocurrentState,
    s: float,
    rx: ReceiverSpec,
) -> EhSolution:
    """Evaluate any model that produces a full `EhSolution`.

    Raises
    ------
    ValueError
        For the MPP baseline, which only yields a power; see `harvested_power`.
    """
    return _evaluate_at(EhModelKind(model), state, state.g_s * s, rx)


def _evaluate_at(
    model: EhModelKind,
    state: PhotocurrentState,
    j_s: float,
    rx: ReceiverSpec,
) -> EhSolution:
    if model is EhModelKind.BASELINE_MPP:
        msg = "The MPP baseline yields a power only; use harvested_power."
        raise ValueError(msg)
    return _SOLVERS[model](state.with_info_current(j_s), rx)


def _power_at(
    model: EhModelKind,
    state: PhotocurrentState,
    j_s: float,
    rx: ReceiverSpec,
) -> float:
    if model is EhModelKind.BASELINE_MPP:
        return _mpp_at(state, j_s, rx)
    return _evaluate_at(model, state, j_s, rx).p_harv


def _amplitude_at(
    model: EhModelKind,
    state: PhotocurrentState,
    j_s: float,
    rx: ReceiverSpec,
) -> float:
    if model is EhModelKind.BASELINE_MPP:
        return math.sqrt(_mpp_at(state, j_s, rx))
    return math.sqrt(rx.r_load) * _evaluate_at(model, state, j_s, rx).i_eh


def harvested_power(
    model: EhModelKind,
    state: PhotocurrentState,
    s: float,
    rx: ReceiverSpec,
) -> float:
    """Harvested power (W) of any model at transmit power `s`."""
    return _power_at(EhModelKind(model), state, state.g_s * s, rx)


def _current_slope(
    model: EhModelKind,
    state: PhotocurrentState,
    j_s: float,
    rx: ReceiverSpec,
) -> Optional[Tuple[float, float]]:
    """Analytic (i, di/dj^s) for the closed forms, None otherwise."""
    j = state.with_info_current(j_s)
    info = state.info_junction - 1

    if model is EhModelKind.CLOSED_FORM_SINGLE:
        _require_single_junction(rx, model)
        saturation, _ = _saturation_currents(rx)
        i, w = _lambert_current(float(j[0]), saturation[0], rx.r_sigma, rx.v_t)
        return i, 1.0 / (1.0 + w)

    if model is EhModelKind.CLOSED_FORM_MULTI:
        saturation, _ = _saturation_currents(rx)
        i = _closed_form_multi(j, rx).i_eh
        return i, (rx.v_t / rx.r_sigma) / (float(j[info]) + saturation[info])

    return None


def dP_djs(  # noqa: N802
    model: EhModelKind,
    state: PhotocurrentState,
    s: float,
    rx: ReceiverSpec,
) -> float:
    """Derivative of the harvested power with respect to the information current.

    Analytic for the Lambert-W and logarithmic forms (2 R_L i di/dj^s with
    di/dj^s = 1 / (1 + W) and (V_T / R_Sigma) / (j_1 + I_1) respectively);
    fourth-order finite differences with step max(1e-6 j^s, 1e-12 A) for the
    numerically solved models.

    Returns
    -------
    float
        dP_harv / dj^s in W/A, never negative.
    """
    model = EhModelKind(model)
    j_s = state.g_s * s
    analytic = _current_slope(model, state, j_s, rx)
    if analytic is not None:
        i, slope = analytic
        return 2.0 * rx.r_load * i * slope

    return max(derivative(lambda x: _power_at(model, state, x, rx), j_s), 0.0)


def amplitude(
    model: EhModelKind,
    state: PhotocurrentState,
    s: float,
    rx: ReceiverSpec,
) -> float:
    """Normalized receiver output x = sqrt(P_harv) (sqrt(W))."""
    return _amplitude_at(EhModelKind(model), state, state.g_s * s, rx)


def amplitude_slope(
    model: EhModelKind,
    state: PhotocurrentState,
    s: float,
    rx: ReceiverSpec,
) -> float:
    """Derivative dx/dj^s of the normalized output (sqrt(W) per A).

    x = sqrt(R_L) i stays smooth where P_harv vanishes, so the slope is taken
    on x directly rather than through dP/dj^s.
    """
    model = EhModelKind(model)
    j_s = state.g_s * s
    analytic = _current_slope(model, state, j_s, rx)
    if analytic is not None:
        return math.sqrt(rx.r_load) * analytic[1]

    return max(derivative(lambda x: _amplitude_at(model, state, x, rx), j_s), 0.0)
