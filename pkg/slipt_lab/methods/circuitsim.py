"""Circuit-level oracle for the photovoltaic receiver.

The receiver network is simulated directly from its element equations and does
not reuse the energy-harvesting models: the junction stack, its series
resistances, the RL low-pass branch feeding the harvesting load R_L and the RC
high-pass branch feeding the information load R_d.

`solve_dc` finds the DC operating point with a damped Newton iteration on
all junction voltages and the stack current at once. `simulate_transient`
integrates the two filter states (inductor current and capacitor voltage)
with the implicit trapezoidal rule, solving the nonlinear stack at every step,
and reproduces the integrate-and-dump information read-out.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from slipt_lab.exceptions import ConvergenceError, DomainError, IntegratorError
from slipt_lab.methods.spectral import PhotocurrentState, ReceiverSpec
from slipt_lab.typing import CurrentVector

logger = logging.getLogger(__name__)

# Exponent arguments are clipped here inside the Newton iteration.
EXP_CLIP = 700.0

MAX_NEWTON_ITER = 200
MAX_HALVINGS = 60
RESIDUAL_RTOL = 1e-12
RESIDUAL_FLOOR = 1e-6
SOURCE_STEPS = 10
STALL_FACTOR = 16.0

# Coarsest allowed step as a fraction of the symbol period.
MAX_STEP_FRACTION = 1e-3
SETTLING_TOLERANCE = 1e-4

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class _Stack:
    """Element values of the junction stack as arrays."""

    i_sat1: np.ndarray
    i_sat2: np.ndarray
    g_shunt: np.ndarray
    v_crit: np.ndarray
    v_t: float
    r_series: float

    @classmethod
    def from_receiver(cls, rx: ReceiverSpec) -> "_Stack":
        i_sat1 = np.array([junction.i_sat1 for junction in rx.junctions])
        return cls(
            i_sat1=i_sat1,
            i_sat2=np.array([junction.i_sat2 for junction in rx.junctions]),
            g_shunt=np.array([1.0 / junction.r_shunt for junction in rx.junctions]),
            v_crit=rx.v_t * np.log(rx.v_t / (math.sqrt(2.0) * i_sat1)),
            v_t=rx.v_t,
            r_series=rx.series_resistance,
        )

    def currents(self, v: np.ndarray, j: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Return the junction currents and their conductances -dPhi/dv."""
        argument = np.minimum(v / self.v_t, EXP_CLIP)
        current = (
            j
            - self.i_sat1 * np.expm1(argument)
            - self.i_sat2 * np.expm1(0.5 * argument)
            - v * self.g_shunt
        )
        conductance = (
            self.i_sat1 * np.exp(argument) / self.v_t
            + self.i_sat2 * np.exp(0.5 * argument) / (2.0 * self.v_t)
            + self.g_shunt
        )
        return current, conductance

    def limit(self, v_new: np.ndarray, v_old: np.ndarray) -> np.ndarray:
        """Limit forward-bias voltage steps to a logarithmic increase."""
        limited = v_new.copy()
        step = v_new - v_old
        active = (v_new > self.v_crit) & (np.abs(step) > 2.0 * self.v_t)
        for n in np.flatnonzero(active):
            if v_old[n] > 0:
                argument = 1.0 + step[n] / self.v_t
                limited[n] = (
                    v_old[n] + self.v_t * math.log(argument)
                    if argument > 0
                    else self.v_crit[n]
                )
            else:
                limited[n] = self.v_t * math.log(v_new[n] / self.v_t)
        return limited


def _residual(
    stack: _Stack,
    v: np.ndarray,
    i: float,
    j: np.ndarray,
    a_term: float,
    b_term: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """Stack equations Phi_n(v_n) - i and the load-side balance A + B u - i."""
    current, conductance = stack.currents(v, j)
    u = v.sum() - i * stack.r_series
    return np.append(current - i, a_term + b_term * u - i), conductance


def _tolerance(i: float, j: np.ndarray) -> float:
    # The second term is the rounding floor of Phi near saturation.
    scale = max(float(np.max(j, initial=0.0)), abs(i))
    return max(RESIDUAL_RTOL * max(RESIDUAL_FLOOR, abs(i)), 256 * _EPS * scale)


def _newton(
    stack: _Stack,
    j: np.ndarray,
    a_term: float,
    b_term: float,
    v: np.ndarray,
    i: float,
    max_iter: int = MAX_NEWTON_ITER,
) -> Tuple[np.ndarray, float, int, float]:
    """Damped Newton iteration on (v_1, ..., v_N, i).

    Returns
    -------
    Tuple[np.ndarray, float, int, float]
        Junction voltages, stack current, iterations and residual max-norm.

    Raises
    ------
    ConvergenceError
        If the residual cannot be reduced or `max_iter` is reached.
    """
    n_junctions = v.size
    v = v.astype(float).copy()
    f, conductance = _residual(stack, v, i, j, a_term, b_term)
    norm = float(np.max(np.abs(f)))

    for iteration in range(max_iter + 1):
        if norm <= _tolerance(i, j):
            return v, i, iteration, norm
        if iteration == max_iter:
            break

        jacobian = np.zeros((n_junctions + 1, n_junctions + 1))
        jacobian[np.arange(n_junctions), np.arange(n_junctions)] = -conductance
        jacobian[:n_junctions, n_junctions] = -1.0
        jacobian[n_junctions, :n_junctions] = b_term
        jacobian[n_junctions, n_junctions] = -b_term * stack.r_series - 1.0
        step = np.linalg.solve(jacobian, -f)

        v_target = stack.limit(v + step[:n_junctions], v)
        # The load-side balance is linear; keep it satisfied by the limited voltages.
        i_target = i + (f[n_junctions] + b_term * (v_target - v).sum()) / (
            1.0 + b_term * stack.r_series
        )

        damping = 1.0
        for _ in range(MAX_HALVINGS):
            v_trial = v + damping * (v_target - v)
            i_trial = i + damping * (i_target - i)
            f_trial, conductance_trial = _residual(stack, v_trial, i_trial, j, a_term, b_term)
            norm_trial = float(np.max(np.abs(f_trial)))
            if norm_trial < norm:
                break
            damping *= 0.5
        else:
            # Stalled at rounding level just above the tolerance.
            if norm <= STALL_FACTOR * _tolerance(i, j):
                return v, i, iteration, norm
            msg = "Newton line search could not reduce the stack residual."
            raise ConvergenceError(
                msg,
                last_iterate=np.append(v, i),
                diagnostics={"iteration": iteration, "residual_norm": norm},
            )

        v, i, f, conductance, norm = v_trial, i_trial, f_trial, conductance_trial, norm_trial

    msg = f"Newton iteration did not converge in {max_iter} iterations."
    raise ConvergenceError(
        msg,
        last_iterate=np.append(v, i),
        diagnostics={"residual_norm": norm},
    )


@dataclass(frozen=True)
class DcOperatingPoint:
    """DC operating point of the full receiver network.

    Attributes
    ----------
    v
        Junction voltages (V).
    i_eh
        Current through the harvesting load (A).
    iterations
        Newton iterations used.
    residual_norm
        Max-norm of the final current residuals (A).
    """

    v: Tuple[float, ...]
    i_eh: float
    iterations: int
    residual_norm: float

    def p_harv(self, rx: ReceiverSpec) -> float:
        return rx.r_load * self.i_eh**2


def solve_dc(rx: ReceiverSpec, j: CurrentVector) -> DcOperatingPoint:
    """Solve the DC operating point of the receiver for junction photocurrents `j`.

    Newton's method runs on F(v, i) = [Phi_n(v_n) - i, sum_n v_n - i R_Sigma]
    from the zero state, limiting forward-bias voltage steps and halving the
    step until the residual max-norm decreases. Should the direct solve fail,
    the photocurrents are ramped up from a tenth of their value (source
    stepping).

    Parameters
    ----------
    rx
        Receiver description.
    j
        Photocurrent of every junction (A).

    Returns
    -------
    DcOperatingPoint

    Raises
    ------
    DomainError
        If any photocurrent is negative or the vector length differs from N.
    ConvergenceError
        If neither the direct solve nor source stepping converges.
    """
    currents = np.asarray(j, dtype=float)
    if currents.shape != (rx.n_junctions,) or np.any(currents < 0):
        msg = f"Expected {rx.n_junctions} non-negative photocurrents, got {currents}."
        raise DomainError(msg)

    stack = _Stack.from_receiver(rx)
    b_term = 1.0 / rx.r_load
    zero = np.zeros(rx.n_junctions)

    try:
        v, i, iterations, norm = _newton(stack, currents, 0.0, b_term, zero, 0.0)
    except ConvergenceError as error:
        logger.warning(f"Direct DC solve failed ({error}); retrying with source stepping.")
        v, i, iterations = zero, 0.0, 0
        for fraction in np.linspace(0.1, 1.0, SOURCE_STEPS):
            v, i, used, norm = _newton(stack, fraction * currents, 0.0, b_term, v, i)
            iterations += used

    logger.debug(f"DC operating point i = {i!r} A after {iterations} Newton iterations.")
    return DcOperatingPoint(
        v=tuple(float(value) for value in v),
        i_eh=float(i),
        iterations=iterations,
        residual_norm=norm,
    )


def settling_period(rx: ReceiverSpec, tolerance: float = SETTLING_TOLERANCE) -> float:
    """Symbol period after which the information high-pass decays to `tolerance`.

    The slowest time constant of the high-pass branch is C_d (R_d + R_L),
    reached when the junction stack behaves as a current source.
    """
    if not 0 < tolerance < 1:
        msg = f"Settling tolerance must lie in (0, 1), got {tolerance!r}."
        raise DomainError(msg)
    return math.log(1.0 / tolerance) * rx.c_info * (rx.r_info + rx.r_load)


@dataclass(frozen=True)
class TransientTrace:
    """Sampled waveforms and per-slot outputs of a transient run.

    Attributes
    ----------
    t
        Time grid (s), K * M + 1 points for K slots of M steps.
    i_out
        Junction stack current (A).
    i_eh
        Current through the harvesting load (A).
    i_id
        Current through the information load (A).
    v_c
        High-pass capacitor voltage (V).
    r_k
        Integrate-and-dump output per slot, the integral of R_d i_ID (V s).
    y_k
        Normalized output symbols rebuilt from the running sum of r_k (sqrt(W)).
    y_direct
        Normalized output symbols read from v_C at each slot end (sqrt(W)).
    symbols
        Transmit powers s[k] (W).
    steps_per_slot
        Integration steps per symbol period.
    """

    t: np.ndarray
    i_out: np.ndarray
    i_eh: np.ndarray
    i_id: np.ndarray
    v_c: np.ndarray
    r_k: np.ndarray
    y_k: np.ndarray
    y_direct: np.ndarray
    symbols: Tuple[float, ...] = field(default=())
    steps_per_slot: int = 0

    def slot_end(self, k: int) -> int:
        """Index of the sample at the end of slot `k`."""
        return (k + 1) * self.steps_per_slot

    def slot_slice(self, k: int) -> slice:
        """Samples of slot `k`, both end points included."""
        return slice(k * self.steps_per_slot, self.slot_end(k) + 1)

    def waveform_frame(self) -> pd.DataFrame:
        """Sampled branch currents and capacitor voltage, one row per time point."""
        return pd.DataFrame(
            {
                "t": self.t,
                "i_out": self.i_out,
                "i_eh": self.i_eh,
                "i_id": self.i_id,
                "v_c": self.v_c,
            },
        )

    def slot_frame(self) -> pd.DataFrame:
        """Per-slot transmit power, r[k] and normalized output symbols."""
        return pd.DataFrame(
            {
                "k": np.arange(len(self.r_k)),
                "s": np.asarray(self.symbols, dtype=float),
                "r_k": self.r_k,
                "y_k": self.y_k,
                "y_direct": self.y_direct,
            },
        )


def simulate_transient(
    rx: ReceiverSpec,
    state: PhotocurrentState,
    symbols: Sequence[float],
    dt: float,
    symbol_period: Optional[float] = None,
    cold_start: bool = False,
    a_sq: Optional[float] = None,
) -> TransientTrace:
    """Integrate the receiver network over a sequence of transmit symbols.

    The inductor current i_L and capacitor voltage v_C are advanced with the
    trapezoidal rule. Eliminating both gives, at every step, the stack current
    as i = A + B u of the stack terminal voltage u, which closes the Newton
    system of the junction stack.

    Parameters
    ----------
    rx
        Receiver description.
    state
        Junction photocurrents; slot k adds g_s s[k] to the information junction.
    symbols
        Transmit powers s[k] (W), held constant over each slot.
    dt
        Integration step (s), at most a thousandth of the symbol period. The
        period is split into round(T / dt) equal steps.
    symbol_period, optional
        Slot duration T (s); defaults to `settling_period(rx)`.
    cold_start
        Start from a discharged network instead of the DC point of the first
        symbol.
    a_sq, optional
        Peak transmit power; symbols above it are rejected.

    Returns
    -------
    TransientTrace

    Raises
    ------
    DomainError
        If dt is too coarse or the symbols are empty or out of range.
    IntegratorError
        If the stack Newton solve fails at some step.
    """
    period = settling_period(rx) if symbol_period is None else symbol_period
    if not 0 < dt <= MAX_STEP_FRACTION * period * (1 + 1e-12):
        msg = f"Step {dt!r} s must be positive and at most T / 1000 = {period / 1000!r} s."
        raise DomainError(msg)
    symbols = tuple(float(value) for value in symbols)
    if not symbols or any(value < 0 for value in symbols):
        msg = "Symbol sequence must be non-empty and non-negative."
        raise DomainError(msg)
    if a_sq is not None and any(value > a_sq for value in symbols):
        msg = f"Symbols must not exceed A^2 = {a_sq!r} W."
        raise DomainError(msg)

    steps = int(round(period / dt))
    dt = period / steps
    n_samples = len(symbols) * steps + 1
    stack = _Stack.from_receiver(rx)
    r_d, c_d = rx.r_info, rx.c_info

    alpha = dt / (2.0 * rx.inductance)
    beta = dt / (2.0 * c_d * r_d)
    b_l = alpha / (1.0 + alpha * rx.r_load)
    b_c = beta / (1.0 + beta)

    t = np.linspace(0.0, len(symbols) * period, n_samples)
    i_out = np.empty(n_samples)
    i_eh = np.empty(n_samples)
    i_id = np.empty(n_samples)
    v_c = np.empty(n_samples)

    first = state.junction_currents(symbols[0])
    if cold_start:
        i_l, v_cap = 0.0, 0.0
        v, i, _, _ = _newton(stack, first, 0.0, 1.0 / r_d, np.zeros(rx.n_junctions), 0.0)
    else:
        dc = solve_dc(rx, first)
        v, i = np.array(dc.v), dc.i_eh
        i_l, v_cap = dc.i_eh, dc.i_eh * rx.r_load

    u = v.sum() - i * stack.r_series
    i_out[0], i_eh[0], v_c[0] = i, i_l, v_cap
    i_id[0] = (u - v_cap) / r_d

    for k, symbol in enumerate(symbols):
        j = state.junction_currents(symbol)
        for step in range(1, steps + 1):
            n = k * steps + step
            a_l = (i_l + alpha * (u - rx.r_load * i_l)) / (1.0 + alpha * rx.r_load)
            a_c = (v_cap + beta * (u - v_cap)) / (1.0 + beta)
            try:
                v, i, _, _ = _newton(
                    stack,
                    j,
                    a_l - a_c / r_d,
                    b_l + (1.0 - b_c) / r_d,
                    v,
                    i,
                )
            except ConvergenceError as error:
                msg = f"Stack Newton solve failed at t = {t[n]!r} s: {error}"
                raise IntegratorError(msg, time=float(t[n]), diagnostics=error.diagnostics)

            u = v.sum() - i * stack.r_series
            i_l = a_l + b_l * u
            v_cap = a_c + b_c * u
            i_out[n], i_eh[n], v_c[n] = i, i_l, v_cap
            i_id[n] = (u - v_cap) / r_d

    # Trapezoid of R_d i_ID per slot; its running sum is C_d R_d times the v_C increment.
    increments = 0.5 * dt * r_d * (i_id[1:] + i_id[:-1])
    r_k = increments.reshape(len(symbols), steps).sum(axis=1)
    root_load = math.sqrt(rx.r_load)
    y_k = (v_c[0] + np.cumsum(r_k) / (r_d * c_d)) / root_load
    y_direct = v_c[steps::steps] / root_load

    logger.dev(
        f"Transient over {len(symbols)} slots of {period:.4g} s with {steps} steps each.",
    )
    return TransientTrace(
        t=t,
        i_out=i_out,
        i_eh=i_eh,
        i_id=i_id,
        v_c=v_c,
        r_k=r_k,
        y_k=y_k,
        y_direct=y_direct,
        symbols=symbols,
        steps_per_slot=steps,
    )
