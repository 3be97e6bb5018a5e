"""Information reception over the photovoltaic receiver.

The receiver output x(s) = sqrt(P_harv(g_s s)) is a saturating function of the
transmit power s in [0, A^2]. This module computes the receiver sensitivity
theta = x(A^2) - x(0), the input distribution that makes x uniform (and so
maximizes the entropy-power lower bound on the rate), achievable-rate lower
bounds for arbitrary input distributions, average harvested powers, and the
bit-error rate of on-off keying with maximum-likelihood detection.

All rates are achievable-rate lower bounds in nats per channel use.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.special import erfc, erfcx

from slipt_lab.exceptions import DegenerateDistributionError, DomainError
from slipt_lab.helpers.numerics import MIN_RTOL, find_root
from slipt_lab.methods import ehmodel
from slipt_lab.methods.ehmodel import EhModelKind
from slipt_lab.methods.spectral import PhotocurrentState, ReceiverSpec
from slipt_lab.typing import FloatOrArray, HarvestCurve

logger = logging.getLogger(__name__)

QUAD_EPSREL = 1e-9
QUAD_LIMIT = 200
MIN_MC_TRIALS = 10_000
MC_PARTITION = 2**20
INVERSE_TABLE_POINTS = 1025

# Above this argument the tail is evaluated with the scaled erfc.
_Q_SWITCH = 8.0

# Normal quantile of the two-sided 95% interval.
_Z_95 = 1.959963984540054


class DistributionKind(str, Enum):
    """Input distribution of the information signal."""

    OPTIMAL = "optimal"
    UNIFORM = "uniform"
    OOK = "ook"


@dataclass(frozen=True)
class ReceiverCurve:
    """Receiver output curve x(s) of an energy-harvesting model."""

    state: PhotocurrentState
    rx: ReceiverSpec
    model: EhModelKind

    def amplitude(self, s: float) -> float:
        return ehmodel.amplitude(self.model, self.state, s, self.rx)

    def amplitude_slope(self, s: float) -> float:
        """dx/ds = g_s dx/dj^s."""
        return self.state.g_s * ehmodel.amplitude_slope(self.model, self.state, s, self.rx)


@dataclass(frozen=True)
class SensitivityResult:
    """Receiver output span over the transmit-power range.

    Attributes
    ----------
    x0
        Output at s = 0 (sqrt(W)).
    xa
        Output at s = A^2 (sqrt(W)).
    theta
        Sensitivity xa - x0 (sqrt(W)).
    a_sq
        Peak transmit power A^2 (W).
    """

    x0: float
    xa: float
    theta: float
    a_sq: float

    @property
    def threshold(self) -> float:
        """Maximum-likelihood decision threshold (x0 + xa) / 2."""
        return 0.5 * (self.x0 + self.xa)


def curve_sensitivity(a_sq: float, curve: HarvestCurve) -> SensitivityResult:
    """Sensitivity of any output curve at peak power `a_sq`."""
    if a_sq < 0:
        msg = f"A^2 must be non-negative, got {a_sq!r}."
        raise DomainError(msg)
    x0 = curve.amplitude(0.0)
    xa = x0 if a_sq == 0 else curve.amplitude(a_sq)
    return SensitivityResult(x0=x0, xa=xa, theta=max(xa - x0, 0.0), a_sq=a_sq)


def sensitivity(
    a_sq: float,
    state: PhotocurrentState,
    rx: ReceiverSpec,
    model: EhModelKind,
) -> SensitivityResult:
    """Sensitivity theta(A^2) of the receiver under an energy-harvesting model.

    Parameters
    ----------
    a_sq
        Peak transmit power A^2 (W).
    state
        Junction photocurrents without the information signal, and g_s.
    rx
        Receiver description.
    model
        Energy-harvesting model used for x(s).

    Returns
    -------
    SensitivityResult
    """
    return curve_sensitivity(a_sq, ReceiverCurve(state, rx, EhModelKind(model)))


@dataclass(frozen=True)
class InfoChannel:
    """Output curve together with the peak transmit power."""

    curve: HarvestCurve
    a_sq: float

    @classmethod
    def from_receiver(
        cls,
        state: PhotocurrentState,
        rx: ReceiverSpec,
        model: EhModelKind,
        a_sq: float,
    ) -> "InfoChannel":
        return cls(ReceiverCurve(state, rx, EhModelKind(model)), a_sq)

    @cached_property
    def sensitivity(self) -> SensitivityResult:
        return curve_sensitivity(self.a_sq, self.curve)


@dataclass(frozen=True)
class NoiseModel:
    """Additive white Gaussian noise on the normalized receiver output.

    `sigma_sq` shares the units of x^2; the default 1e-9 corresponds to -60 dBm.
    """

    sigma_sq: float = 1e-9

    def __post_init__(self) -> None:
        if not self.sigma_sq > 0:
            msg = f"Noise variance must be strictly positive, got {self.sigma_sq!r}."
            raise DomainError(msg)

    @classmethod
    def from_dbm(cls, dbm: float) -> "NoiseModel":
        """Noise variance 10^(dBm / 10) mW."""
        return cls(10 ** (dbm / 10) / 1000)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma_sq)


def _require_spread(channel: InfoChannel) -> SensitivityResult:
    sens = channel.sensitivity
    if sens.theta == 0:
        msg = "Sensitivity is zero; the capacity-achieving cdf is a point mass."
        raise DegenerateDistributionError(msg)
    return sens


def optimal_cdf(s: float, channel: InfoChannel) -> float:
    """Capacity-achieving cdf F*(s) = (x(s) - x0) / theta on [0, A^2].

    Raises
    ------
    DegenerateDistributionError
        If theta = 0.
    """
    sens = _require_spread(channel)
    if s < 0:
        return 0.0
    if s >= channel.a_sq:
        return 1.0
    return min(max((channel.curve.amplitude(s) - sens.x0) / sens.theta, 0.0), 1.0)


def sample_optimal(u: float, channel: InfoChannel) -> float:
    """Inverse-transform sample of the capacity-achieving distribution.

    Solves x(s) = x0 + u theta for s on [0, A^2].

    Parameters
    ----------
    u
        Uniform variate in [0, 1].
    channel
        Output curve and peak power.

    Returns
    -------
    float
        Transmit power s (W).
    """
    if not 0 <= u <= 1:
        msg = f"Uniform variate must lie in [0, 1], got {u!r}."
        raise DomainError(msg)
    sens = _require_spread(channel)
    if u == 0:
        return 0.0
    if u == 1:
        return channel.a_sq

    target = sens.x0 + u * sens.theta
    return find_root(
        lambda s: channel.curve.amplitude(s) - target,
        0.0,
        channel.a_sq,
        rtol=MIN_RTOL,
        xtol=1e-15 * channel.a_sq,
        name="capacity-achieving transmit power",
    )


def sample_optimal_batch(
    u: np.ndarray,
    channel: InfoChannel,
    table_points: int = INVERSE_TABLE_POINTS,
) -> np.ndarray:
    """Vectorised sampling through a monotone interpolant of the exact inverse.

    The inverse cdf is solved exactly at `table_points` equally spaced
    probabilities and interpolated with a shape-preserving cubic.
    """
    nodes = np.linspace(0.0, 1.0, table_points)
    powers = np.array([sample_optimal(node, channel) for node in nodes])
    inverse = PchipInterpolator(nodes, powers)
    return np.clip(inverse(np.asarray(u, dtype=float)), 0.0, channel.a_sq)


def max_rate(channel: InfoChannel, noise: NoiseModel) -> float:
    """Maximum achievable-rate lower bound 1/2 ln(1 + theta^2 / (2 pi e sigma^2))."""
    theta = channel.sensitivity.theta
    return 0.5 * math.log1p(theta**2 / (2 * math.pi * math.e * noise.sigma_sq))


def _rate_from_entropy(entropy: float, noise: NoiseModel) -> float:
    return 0.5 * math.log1p(math.exp(2 * entropy) / (2 * math.pi * math.e * noise.sigma_sq))


def output_entropy(kind: DistributionKind, channel: InfoChannel) -> float:
    """Differential entropy (nats) of the noiseless output x under an input cdf.

    By the change of variables x = x(s), h(x) = h(s) + E[ln x'(s)], which is
    integrated over [0, A^2] with the input density. The capacity-achieving
    cdf makes x uniform on [x0, xA], so its value should come out as ln theta;
    any gap measures how well the amplitude slope matches the amplitude curve.
    """
    kind = DistributionKind(kind)
    if kind is DistributionKind.OOK:
        msg = "OOK has no density; use the bit-error-rate path."
        raise ValueError(msg)

    if channel.sensitivity.theta == 0:
        return -math.inf

    density = InputDistribution(kind, channel).pdf
    tiny = np.finfo(float).tiny

    def integrand(s: float) -> float:
        f_s = density(s)
        if f_s <= 0:
            return 0.0
        return f_s * (math.log(max(channel.curve.amplitude_slope(s), tiny)) - math.log(f_s))

    entropy, abserr = quad(
        integrand,
        0.0,
        channel.a_sq,
        epsrel=QUAD_EPSREL,
        epsabs=QUAD_EPSREL,
        limit=QUAD_LIMIT,
    )
    logger.debug(f"{kind.value} output entropy {entropy!r} (+/- {abserr:.3g}).")
    return entropy


def rate_for_cdf(
    kind: DistributionKind,
    channel: InfoChannel,
    noise: NoiseModel,
) -> float:
    """Achievable-rate lower bound 1/2 ln(1 + e^{2h} / (2 pi e sigma^2)) for an input cdf.

    Parameters
    ----------
    kind
        Optimal or uniform input distribution.
    channel
        Output curve and peak power.
    noise
        Output noise.

    Returns
    -------
    float
        Rate in nats per channel use; 0 when theta = 0.
    """
    entropy = output_entropy(kind, channel)
    if entropy == -math.inf:
        return 0.0
    return _rate_from_entropy(entropy, noise)


def avg_power_optimal(channel: InfoChannel) -> float:
    """Average harvested power (x_A^2 + x_0^2 + x_A x_0) / 3 under the optimal cdf (W)."""
    sens = channel.sensitivity
    return (sens.xa**2 + sens.x0**2 + sens.xa * sens.x0) / 3


def avg_power_for_cdf(kind: DistributionKind, channel: InfoChannel) -> float:
    """Average harvested power, the expectation of x(s)^2 under an input cdf (W).

    Densities are integrated in s: the uniform cdf weights x^2 by 1 / A^2, the
    optimal cdf by x'(s) / theta. OOK averages its two points.
    """
    kind = DistributionKind(kind)
    sens = channel.sensitivity
    if kind is DistributionKind.OOK:
        return 0.5 * (sens.x0**2 + sens.xa**2)
    if channel.a_sq == 0 or sens.theta == 0:
        return sens.x0**2

    curve = channel.curve
    if kind is DistributionKind.UNIFORM:
        integrand = lambda s: curve.amplitude(s) ** 2 / channel.a_sq  # noqa: E731
    else:
        integrand = lambda s: (  # noqa: E731
            curve.amplitude(s) ** 2 * curve.amplitude_slope(s) / sens.theta
        )

    value, _ = quad(
        integrand,
        0.0,
        channel.a_sq,
        epsrel=1e-10,
        epsabs=0.0,
        limit=QUAD_LIMIT,
    )
    return value


@dataclass(frozen=True)
class InputDistribution:
    """Input cdf of the information transmit power on [0, A^2]."""

    kind: DistributionKind
    channel: InfoChannel

    def cdf(self, s: float) -> float:
        a_sq = self.channel.a_sq
        if s < 0:
            return 0.0
        if s >= a_sq:
            return 1.0
        if self.kind is DistributionKind.OPTIMAL:
            return optimal_cdf(s, self.channel)
        if self.kind is DistributionKind.UNIFORM:
            return s / a_sq
        return 0.5

    def pdf(self, s: float) -> float:
        """Density on [0, A^2]; OOK has none."""
        a_sq = self.channel.a_sq
        if self.kind is DistributionKind.OOK:
            msg = "OOK is a two-point distribution without a density."
            raise ValueError(msg)
        if not 0 <= s <= a_sq:
            return 0.0
        if self.kind is DistributionKind.UNIFORM:
            return 1.0 / a_sq
        sens = _require_spread(self.channel)
        return self.channel.curve.amplitude_slope(s) / sens.theta

    def rate(self, noise: NoiseModel) -> float:
        return rate_for_cdf(self.kind, self.channel, noise)

    def avg_power(self) -> float:
        return avg_power_for_cdf(self.kind, self.channel)


def ml_detect(y: FloatOrArray, sens: SensitivityResult) -> FloatOrArray:
    """Maximum-likelihood OOK decision: A^2 where y >= (x0 + xA) / 2, else 0."""
    decided = np.where(np.asarray(y) >= sens.threshold, sens.a_sq, 0.0)
    return decided if decided.ndim else float(decided)


def q_function(z: FloatOrArray) -> FloatOrArray:
    """Gaussian tail probability Q(z) = erfc(z / sqrt 2) / 2.

    Large arguments go through erfcx so the tail does not underflow early.
    """
    z_arr = np.asarray(z, dtype=float)
    scaled = z_arr / math.sqrt(2.0)
    with np.errstate(over="ignore", under="ignore"):
        value = np.where(
            z_arr > _Q_SWITCH,
            0.5 * erfcx(scaled) * np.exp(-(scaled**2)),
            0.5 * erfc(scaled),
        )
    return value if value.ndim else float(value)


def ber_analytic(channel: InfoChannel, noise: NoiseModel) -> float:
    """Bit-error probability Q(theta / (2 sigma)) of ML-detected OOK."""
    return q_function(channel.sensitivity.theta / (2.0 * noise.sigma))


@dataclass(frozen=True)
class MonteCarloBer:
    """Monte Carlo bit-error estimate.

    Attributes
    ----------
    errors
        Number of detection errors.
    trials
        Number of transmitted symbols.
    ber
        Error frequency.
    half_width
        Half-width of the 95% normal-approximation binomial interval.
    """

    errors: int
    trials: int
    ber: float
    half_width: float

    @property
    def standard_error(self) -> float:
        return math.sqrt(self.ber * (1 - self.ber) / self.trials)


def _partition_sizes(trials: int, partition: int) -> Tuple[int, ...]:
    full, remainder = divmod(trials, partition)
    return (partition,) * full + ((remainder,) if remainder else ())


def _count_errors(
    seed: np.random.SeedSequence,
    size: int,
    sens: SensitivityResult,
    sigma: float,
) -> int:
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=size, dtype=np.int8).astype(bool)
    y = np.where(bits, sens.xa, sens.x0) + rng.normal(0.0, sigma, size=size)
    return int(np.count_nonzero((y >= sens.threshold) != bits))


def ber_monte_carlo(
    channel: InfoChannel,
    noise: NoiseModel,
    trials: int,
    seed: int,
    jobs: Optional[int] = None,
    partition: int = MC_PARTITION,
) -> MonteCarloBer:
    """Simulate ML detection of equiprobable OOK symbols in Gaussian noise.

    Trials are split into fixed-size partitions, each with its own generator
    spawned from `SeedSequence(seed)`, so the estimate depends only on
    `(seed, trials, partition)` and not on the number of worker threads.

    Parameters
    ----------
    channel
        Output curve and peak power.
    noise
        Output noise.
    trials
        Number of symbols, at least 10^4.
    seed
        Root seed.
    jobs, optional
        Worker threads; defaults to one.
    partition
        Symbols per partition.

    Returns
    -------
    MonteCarloBer
    """
    if trials < MIN_MC_TRIALS:
        msg = f"Monte Carlo BER needs at least {MIN_MC_TRIALS} trials, got {trials!r}."
        raise DomainError(msg)

    sens = channel.sensitivity
    sizes = _partition_sizes(int(trials), partition)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    with ThreadPoolExecutor(max_workers=jobs or 1) as pool:
        errors = sum(
            pool.map(
                lambda args: _count_errors(args[0], args[1], sens, noise.sigma),
                zip(seeds, sizes),
            ),
        )

    ber = errors / trials
    half_width = _Z_95 * math.sqrt(ber * (1 - ber) / trials)
    logger.dev(f"Monte Carlo BER {ber!r} from {errors} errors in {trials} trials.")
    return MonteCarloBer(errors=errors, trials=int(trials), ber=ber, half_width=half_width)


@dataclass(frozen=True)
class RatePowerPoint:
    """One point of the rate-power region.

    Attributes
    ----------
    p_total
        Energy-signal power (W).
    rate
        Achievable-rate lower bound (nats per channel use).
    avg_power
        Average harvested power (W).
    dist_kind
        Input distribution.
    a_sq
        Peak information power (W).
    """

    p_total: float
    rate: float
    avg_power: float
    dist_kind: DistributionKind
    a_sq: float


def rate_power_point(
    kind: DistributionKind,
    channel: InfoChannel,
    noise: NoiseModel,
    p_total: float,
) -> RatePowerPoint:
    """Rate and average harvested power of an input distribution."""
    kind = DistributionKind(kind)
    if kind is DistributionKind.OPTIMAL:
        rate, avg_power = max_rate(channel, noise), avg_power_optimal(channel)
    else:
        rate = rate_for_cdf(kind, channel, noise)
        avg_power = avg_power_for_cdf(kind, channel)
    return RatePowerPoint(
        p_total=p_total,
        rate=rate,
        avg_power=avg_power,
        dist_kind=kind,
        a_sq=channel.a_sq,
    )
