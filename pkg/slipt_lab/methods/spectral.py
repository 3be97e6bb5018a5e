"""Spectral models of the received light and the junction photocurrents.

The received light is the sum of black-body ambient light, a set of
monochromatic energy-providing laser lines and the information carrier. Each
junction of the receiver converts the part of the spectrum inside its passband
into a photocurrent through its responsivity. All quantities are SI: metres,
watts and amperes.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy import constants
from scipy.integrate import quad

from slipt_lab.exceptions import ConfigError, DomainError
from slipt_lab.typing import FloatOrArray

logger = logging.getLogger(__name__)

# Planck exponent above which exp(-x) replaces 1 / expm1(x).
_PLANCK_EXP_SWITCH = 700.0

QUAD_EPSREL = 1e-9
QUAD_EPSABS = 1e-18


@dataclass(frozen=True)
class PhysicalConstants:
    """Physical constants of the light and junction models.

    Attributes
    ----------
    c
        Speed of light (m/s).
    k_p
        Planck constant (J s).
    k_b
        Boltzmann constant (J/K).
    q_0
        Elementary charge (C).
    sun_temperature
        Black-body temperature of the sun (K).
    alpha_se
        Solid angle of the Earth seen from the sun (sr).
    sun_area
        Surface area of the sun (m^2).
    earth_area
        Surface area of the Earth (m^2).
    """

    c: float = constants.c
    k_p: float = constants.h
    k_b: float = constants.k
    q_0: float = constants.e
    sun_temperature: float = 5778.0
    alpha_se: float = 5.72e-9
    sun_area: float = 6.07e18
    earth_area: float = 5.1e14

    def __post_init__(self) -> None:
        for name, value in vars(self).items():
            if not value > 0:
                msg = f"Physical constant {name} must be strictly positive, got {value!r}."
                raise DomainError(msg)

    def equivalent_size(self, area: float) -> float:
        """Return nu_s = alpha_SE * A_S * A_P / A_E (sr m^2) for cell area A_P (m^2)."""
        if not area > 0:
            msg = f"Cell area must be strictly positive, got {area!r}."
            raise DomainError(msg)
        return self.alpha_se * self.sun_area * area / self.earth_area


CONSTANTS = PhysicalConstants()


def thermal_voltage(
    temperature: float = 300.0,
    constants: PhysicalConstants = CONSTANTS,
) -> float:
    """Return the diode thermal voltage k_b T / q_0 (V)."""
    if not temperature > 0:
        msg = f"Cell temperature must be strictly positive, got {temperature!r}."
        raise DomainError(msg)
    return constants.k_b * temperature / constants.q_0


@dataclass(frozen=True)
class SpectralBand:
    """Closed wavelength interval [lambda_min, lambda_max] in metres."""

    lambda_min: float
    lambda_max: float

    def __post_init__(self) -> None:
        if not 0 < self.lambda_min < self.lambda_max:
            msg = (
                "Spectral band requires 0 < lambda_min < lambda_max, got "
                f"[{self.lambda_min!r}, {self.lambda_max!r}]."
            )
            raise DomainError(msg)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lambda_min + self.lambda_max)

    def contains(self, wavelength: FloatOrArray, closed_lower: bool = True) -> FloatOrArray:
        """Return whether `wavelength` lies inside the band.

        The band is closed unless `closed_lower` is False, which drops the
        lower edge, e.g. when it is the upper edge of a neighbouring band.
        """
        above = wavelength >= self.lambda_min if closed_lower else wavelength > self.lambda_min
        return above & (wavelength <= self.lambda_max)

    def overlaps(self, other: "SpectralBand") -> bool:
        """Return whether two bands share more than an end point."""
        return self.lambda_min < other.lambda_max and other.lambda_min < self.lambda_max


@dataclass(frozen=True)
class JunctionSpec:
    """Optical and electrical description of one p-n junction.

    Attributes
    ----------
    band
        Passband of the junction.
    efficiency
        Dimensionless efficiency factor eta of the responsivity.
    i_sat1
        Reverse saturation current of the diffusion diode (A).
    i_sat2
        Reverse saturation current of the recombination diode (A).
    r_shunt
        Shunt resistance (ohm).
    r_series
        Series resistance (ohm).
    """

    band: SpectralBand
    efficiency: float = 0.7
    i_sat1: float = 1e-9
    i_sat2: float = 1e-9
    r_shunt: float = 1e8
    r_series: float = 100.0

    def __post_init__(self) -> None:
        if not 0 < self.efficiency <= 1:
            msg = f"Junction efficiency must lie in (0, 1], got {self.efficiency!r}."
            raise DomainError(msg)
        for name in ("i_sat1", "i_sat2", "r_shunt", "r_series"):
            if not getattr(self, name) > 0:
                msg = f"Junction {name} must be strictly positive, got {getattr(self, name)!r}."
                raise DomainError(msg)


@dataclass(frozen=True)
class ReceiverSpec:
    """Full electrical and optical description of an N-junction receiver.

    Attributes
    ----------
    junctions
        Junctions in stack order.
    r_load
        Energy-harvesting load resistance R_L (ohm).
    r_info
        Information load resistance R_d (ohm).
    c_info
        High-pass capacitance C_d (F).
    inductance
        Low-pass inductance L (H).
    v_t
        Thermal voltage (V).
    area
        Cell area A_P (m^2).
    info_junction
        1-based index of the junction absorbing the information carrier.
    info_responsivity
        Optional responsivity (A/W) at the information wavelength, used instead
        of the junction responsivity when set.
    saturation_fit_range
        Optional junction voltage range (V) over which an effective saturation
        current is fitted when the two diode currents differ.
    baseline_ideality
        Ideality factor of the single-diode comparison baseline.
    """

    junctions: Tuple[JunctionSpec, ...]
    r_load: float = 1e4
    r_info: float = 1e4
    c_info: float = 2.5e-6
    inductance: float = 1e-2
    v_t: float = field(default_factory=thermal_voltage)
    area: float = 1e-4
    info_junction: int = 1
    info_responsivity: Optional[float] = None
    saturation_fit_range: Optional[Tuple[float, float]] = None
    baseline_ideality: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "junctions", tuple(self.junctions))
        if self.saturation_fit_range is not None:
            object.__setattr__(
                self,
                "saturation_fit_range",
                tuple(self.saturation_fit_range),
            )

        if not self.junctions:
            msg = "A receiver needs at least one junction."
            raise DomainError(msg)

        for k, first in enumerate(self.junctions):
            for second in self.junctions[k + 1 :]:
                if first.band.overlaps(second.band):
                    msg = f"Junction passbands {first.band} and {second.band} intersect."
                    raise DomainError(msg)

        for name in ("r_load", "r_info", "c_info", "inductance", "v_t", "area"):
            if not getattr(self, name) > 0:
                msg = f"Receiver {name} must be strictly positive, got {getattr(self, name)!r}."
                raise DomainError(msg)

        if not 1 <= self.info_junction <= self.n_junctions:
            msg = (
                f"info_junction must lie in [1, {self.n_junctions}], "
                f"got {self.info_junction!r}."
            )
            raise DomainError(msg)

        if self.info_responsivity is not None and self.info_responsivity < 0:
            msg = "info_responsivity must be non-negative."
            raise DomainError(msg)

    @property
    def n_junctions(self) -> int:
        return len(self.junctions)

    @property
    def info_index(self) -> int:
        """0-based position of the information junction."""
        return self.info_junction - 1

    @property
    def series_resistance(self) -> float:
        """Sum of the junction series resistances (ohm)."""
        return sum(junction.r_series for junction in self.junctions)

    @property
    def r_sigma(self) -> float:
        """R_Sigma = sum of series resistances plus R_L (ohm)."""
        return self.series_resistance + self.r_load


@dataclass(frozen=True)
class AmbientModel:
    """Black-body ambient light scaled by the intensity coefficient mu_a."""

    mu_a: float = 0.0
    temperature: float = CONSTANTS.sun_temperature

    def __post_init__(self) -> None:
        if self.mu_a < 0:
            msg = f"Ambient coefficient mu_a must be non-negative, got {self.mu_a!r}."
            raise DomainError(msg)
        if not self.temperature > 0:
            msg = f"Ambient temperature must be positive, got {self.temperature!r}."
            raise DomainError(msg)


@dataclass(frozen=True)
class SpectralLine:
    """Monochromatic energy-providing laser line."""

    wavelength: float
    power: float
    gain: float = 1.0

    def __post_init__(self) -> None:
        if not self.wavelength > 0 or self.power < 0 or self.gain < 0:
            msg = (
                "Spectral line needs wavelength > 0, power >= 0 and gain >= 0, got "
                f"({self.wavelength!r}, {self.power!r}, {self.gain!r})."
            )
            raise DomainError(msg)


@dataclass(frozen=True)
class EnergySignal:
    """Sum of energy-providing laser lines."""

    lines: Tuple[SpectralLine, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "lines", tuple(self.lines))
        wavelengths = [line.wavelength for line in self.lines]
        if len(set(wavelengths)) != len(wavelengths):
            msg = f"Energy line wavelengths must be distinct, got {wavelengths}."
            raise DomainError(msg)

    @classmethod
    def split_evenly(
        cls,
        total_power: float,
        wavelengths: Sequence[float],
        gain: float = 1.0,
    ) -> "EnergySignal":
        """Build lines at `wavelengths` sharing `total_power` equally."""
        if not wavelengths:
            return cls()
        share = total_power / len(wavelengths)
        return cls(tuple(SpectralLine(wl, share, gain) for wl in wavelengths))

    @property
    def total_power(self) -> float:
        return sum(line.power for line in self.lines)


@dataclass(frozen=True)
class InfoSignal:
    """Intensity-modulated information carrier.

    Attributes
    ----------
    wavelength
        Carrier wavelength lambda_0 (m).
    gain
        Scalar channel gain h.
    a_sq
        Maximum transmit power A^2 (W).
    symbol_period
        Symbol period T (s).
    """

    wavelength: float = 980e-9
    gain: float = 1.0
    a_sq: float = 0.1
    symbol_period: float = 1e-3

    def __post_init__(self) -> None:
        if not self.wavelength > 0:
            msg = "Information wavelength must be positive."
            raise DomainError(msg)
        if self.gain < 0 or self.a_sq < 0:
            msg = "Information gain and A^2 must be non-negative."
            raise DomainError(msg)
        if not self.symbol_period > 0:
            msg = "Symbol period must be positive."
            raise DomainError(msg)


@dataclass(frozen=True)
class PhotocurrentState:
    """Photocurrents induced in each junction.

    Attributes
    ----------
    j_a
        Ambient plus energy-signal photocurrent per junction (A).
    g_s
        Information-current gain h * r(lambda_0) (A/W).
    info_junction
        1-based index of the junction receiving the information current.
    """

    j_a: Tuple[float, ...]
    g_s: float
    info_junction: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "j_a", tuple(float(j) for j in self.j_a))
        if any(j < 0 for j in self.j_a) or self.g_s < 0:
            msg = "Photocurrents and information gain must be non-negative."
            raise DomainError(msg)
        if not 1 <= self.info_junction <= len(self.j_a):
            msg = f"info_junction {self.info_junction} outside [1, {len(self.j_a)}]."
            raise DomainError(msg)

    def junction_currents(self, s: float) -> np.ndarray:
        """Return the junction photocurrents for transmit power `s` (W)."""
        return self.with_info_current(self.g_s * s)

    def with_info_current(self, j_s: float) -> np.ndarray:
        """Return the junction photocurrents for information current `j_s` (A)."""
        currents = np.array(self.j_a, dtype=float)
        currents[self.info_junction - 1] += j_s
        return currents


def planck_radiance(
    wavelength: FloatOrArray,
    temperature: float,
    constants: PhysicalConstants = CONSTANTS,
) -> FloatOrArray:
    """Spectral radiance of a black body.

    Parameters
    ----------
    wavelength
        Wavelength in metres, scalar or array.
    temperature
        Black-body temperature in kelvin.
    constants
        Physical constants to use.

    Returns
    -------
    FloatOrArray
        2 k_p c^2 lambda^-5 / (exp(k_p c / (k_b T lambda)) - 1) in
        W m^-2 sr^-1 m^-1.

    Raises
    ------
    DomainError
        If any wavelength or the temperature is not strictly positive.
    """
    wl = np.asarray(wavelength, dtype=float)
    if np.any(wl <= 0) or not temperature > 0:
        msg = "Planck radiance needs strictly positive wavelength and temperature."
        raise DomainError(msg)

    x = constants.k_p * constants.c / (constants.k_b * temperature * wl)
    prefactor = 2 * constants.k_p * constants.c**2 / wl**5
    with np.errstate(over="ignore"):
        radiance = np.where(
            x > _PLANCK_EXP_SWITCH,
            prefactor * np.exp(-x),
            prefactor / np.expm1(np.minimum(x, _PLANCK_EXP_SWITCH)),
        )

    return radiance if radiance.ndim else float(radiance)


def ambient_psd(
    wavelength: FloatOrArray,
    ambient: AmbientModel,
    rx: ReceiverSpec,
    constants: PhysicalConstants = CONSTANTS,
) -> FloatOrArray:
    """Ambient power spectral density at the cell, mu_a * nu_s * B(lambda, T) (W/m)."""
    radiance = planck_radiance(wavelength, ambient.temperature, constants)
    return ambient.mu_a * constants.equivalent_size(rx.area) * radiance


def responsivity(
    wavelength: FloatOrArray,
    junction: JunctionSpec,
    constants: PhysicalConstants = CONSTANTS,
) -> FloatOrArray:
    """Junction responsivity lambda * eta * q_0 / (k_p c) inside the band, else 0 (A/W)."""
    wl = np.asarray(wavelength, dtype=float)
    slope = junction.efficiency * constants.q_0 / (constants.k_p * constants.c)
    value = np.where(junction.band.contains(wl), slope * wl, 0.0)
    return value if value.ndim else float(value)


def ambient_photocurrent(
    junction: JunctionSpec,
    ambient: AmbientModel,
    rx: ReceiverSpec,
    constants: PhysicalConstants = CONSTANTS,
) -> float:
    """Integrate ambient_psd * responsivity over the junction band (A)."""
    if ambient.mu_a == 0:
        return 0.0

    band = junction.band
    value, abserr = quad(
        lambda wl: ambient_psd(wl, ambient, rx, constants)
        * responsivity(wl, junction, constants),
        band.lambda_min,
        band.lambda_max,
        epsrel=QUAD_EPSREL,
        epsabs=QUAD_EPSABS,
        limit=200,
    )
    logger.debug(f"Ambient photocurrent over {band}: {value!r} A (+/- {abserr:.3g}).")
    return value


def band_midpoints(bands: Iterable[SpectralBand]) -> Tuple[float, ...]:
    """Return (lambda_min + lambda_max) / 2 for each band."""
    return tuple(band.midpoint for band in bands)


def absorbing_junction(
    junctions: Sequence[JunctionSpec],
    wavelength: float,
) -> Optional[int]:
    """Return the 1-based index of the junction that absorbs `wavelength`.

    An edge shared by two bands belongs to the band below it, so a line on
    that edge feeds a single junction.
    """
    upper_edges = {junction.band.lambda_max for junction in junctions}
    for index, junction in enumerate(junctions, start=1):
        band = junction.band
        if band.contains(wavelength, closed_lower=band.lambda_min not in upper_edges):
            return index
    return None


def info_gain(
    rx: ReceiverSpec,
    info: InfoSignal,
    constants: PhysicalConstants = CONSTANTS,
) -> float:
    """Return g_s = h * r(lambda_0) for the information junction (A/W).

    Raises
    ------
    ConfigError
        If the information junction does not absorb lambda_0 and no explicit
        responsivity override is configured.
    """
    if rx.info_responsivity is not None:
        return info.gain * rx.info_responsivity

    junction = rx.junctions[rx.info_index]
    r_info = responsivity(info.wavelength, junction, constants)
    if r_info == 0:
        msg = (
            f"Information wavelength {info.wavelength!r} m lies outside the band "
            f"{junction.band} of junction {rx.info_junction}; set "
            "receiver.info_responsivity_a_per_w or widen the band."
        )
        raise ConfigError(msg)
    return info.gain * r_info


def photocurrents(
    rx: ReceiverSpec,
    ambient: AmbientModel,
    energy: EnergySignal,
    info: InfoSignal,
    constants: PhysicalConstants = CONSTANTS,
) -> PhotocurrentState:
    """Assemble the junction photocurrents from the received spectra.

    Energy lines contribute p_n g_n r(lambda_n) analytically to the junction
    that absorbs them; ambient light is integrated over each junction band.

    Parameters
    ----------
    rx
        Receiver description.
    ambient
        Ambient light model.
    energy
        Energy-providing laser lines.
    info
        Information carrier, used for the information-current gain.
    constants
        Physical constants to use.

    Returns
    -------
    PhotocurrentState
        Per-junction currents and the information-current gain.
    """
    owners = [absorbing_junction(rx.junctions, line.wavelength) for line in energy.lines]
    j_a = []
    for index, junction in enumerate(rx.junctions, start=1):
        line_current = sum(
            line.power * line.gain * responsivity(line.wavelength, junction, constants)
            for line, owner in zip(energy.lines, owners)
            if owner == index
        )
        j_a.append(line_current + ambient_photocurrent(junction, ambient, rx, constants))

    state = PhotocurrentState(
        j_a=tuple(j_a),
        g_s=info_gain(rx, info, constants),
        info_junction=rx.info_junction,
    )
    logger.dev(f"Photocurrents {state.j_a} A, information gain {state.g_s!r} A/W.")
    return state
