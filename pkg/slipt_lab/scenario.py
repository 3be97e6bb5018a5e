"""Run configuration sections and their resolution into model objects.

Each top-level section of a run configuration has a pydantic model here,
used by `LoadConfig` to validate it. `default_config` builds the full default
dictionary (the receiver circuit, the junction bands and the link
parameters of the reference setup), and `build_scenario` turns a resolved
configuration into the receiver, signal and noise objects the models
consume. Configuration units are nm, mW and cm^2; everything returned is SI.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Literal, Mapping, Optional, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    PositiveFloat,
    PositiveInt,
    field_validator,
    model_validator,
)

from slipt_lab.exceptions import ConfigError
from slipt_lab.methods.ehmodel import EhModelKind
from slipt_lab.methods.infotheory import DistributionKind, InfoChannel, NoiseModel
from slipt_lab.methods.spectral import (
    AmbientModel,
    EnergySignal,
    InfoSignal,
    JunctionSpec,
    PhotocurrentState,
    ReceiverSpec,
    SpectralBand,
    absorbing_junction,
    band_midpoints,
    photocurrents,
    thermal_voltage,
)
from slipt_lab.typing import Config
from slipt_lab.validation import FloatList, IntList, NonNegativeFloatList, StrList

logger = logging.getLogger(__name__)

NM = 1e-9
MW = 1e-3
CM2 = 1e-4

# Junction passbands (nm) of the reference receivers.
BAND_PRESETS_NM: Dict[int, List[Tuple[float, float]]] = {
    1: [(400.0, 1000.0)],
    4: [(400.0, 650.0), (650.0, 900.0), (900.0, 1100.0), (1100.0, 1800.0)],
}

# The single-junction energy line sits at the midpoint of the nominal 400-700 nm band.
ENERGY_PRESETS_NM: Dict[int, List[float]] = {1: [550.0]}

N1_BAND_DEVIATION = (
    "Single-junction band extended from 400-700 nm to 400-1000 nm so that the "
    "980 nm information carrier is absorbed."
)

ORACLE_MODEL = "circuit_oracle"

ModelName = Literal[
    "auto",
    "accurate",
    "approximate",
    "closed_form_single",
    "closed_form_multi",
    "baseline_single_diode",
    "baseline_mpp",
]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RunSection(_Section):
    """Model selection, seeding and parallelism."""

    model: ModelName = "auto"
    seed: int = Field(0, ge=0)
    jobs: Optional[PositiveInt] = None


class JunctionSection(_Section):
    """One junction; band edges in nm."""

    lambda_min_nm: Optional[PositiveFloat] = None
    lambda_max_nm: Optional[PositiveFloat] = None
    efficiency: float = Field(0.7, gt=0, le=1)
    i_sat1_a: PositiveFloat = 1e-9
    i_sat2_a: PositiveFloat = 1e-9
    r_shunt_ohm: PositiveFloat = 1e8
    r_series_ohm: PositiveFloat = 100.0


class ReceiverSection(_Section):
    """Receiver circuit; `junctions` is keyed junction1 ... junctionN."""

    junction_count: PositiveInt = 1
    junctions: Dict[str, JunctionSection]
    r_load_ohm: PositiveFloat = 1e4
    r_info_ohm: PositiveFloat = 1e4
    c_info_f: PositiveFloat = 2.5e-6
    inductance_h: PositiveFloat = 1e-2
    cell_temperature_k: PositiveFloat = 300.0
    thermal_voltage_v: Optional[PositiveFloat] = None
    area_cm2: PositiveFloat = 1.0
    info_junction: Optional[PositiveInt] = None
    info_responsivity_a_per_w: Optional[NonNegativeFloat] = None
    saturation_fit_range_v: Optional[Tuple[float, float]] = None
    baseline_ideality: PositiveFloat = 1.0

    @model_validator(mode="after")
    def check_junctions(self) -> "ReceiverSection":
        expected = {f"junction{k}" for k in range(1, self.junction_count + 1)}
        if set(self.junctions) != expected:
            msg = (
                f"receiver.junctions must define exactly {sorted(expected)}, "
                f"got {sorted(self.junctions)}."
            )
            raise ValueError(msg)
        for name, junction in self.junctions.items():
            if junction.lambda_min_nm is None or junction.lambda_max_nm is None:
                msg = f"receiver.junctions.{name} needs lambda_min_nm and lambda_max_nm."
                raise ValueError(msg)
        if self.info_junction is not None and self.info_junction > self.junction_count:
            msg = f"info_junction {self.info_junction} exceeds junction_count."
            raise ValueError(msg)
        return self


class AmbientSection(_Section):
    mu_a: NonNegativeFloat = 0.0
    sun_temperature_k: PositiveFloat = 5778.0


class EnergySection(_Section):
    """Energy-providing lines; unset wavelengths fall back to the band midpoints."""

    p_total_mw: NonNegativeFloat = 0.0
    channel_gain: NonNegativeFloat = 1.0
    wavelengths_nm: Optional[FloatList] = None


class InfoSection(_Section):
    lambda0_nm: PositiveFloat = 980.0
    channel_gain: NonNegativeFloat = 1.0
    a_sq_mw: NonNegativeFloat = 100.0
    symbol_period_s: PositiveFloat = 1e-3


class NoiseSection(_Section):
    """Output noise variance, directly or in dBm (1e-9 at -60 dBm)."""

    sigma_sq: Optional[PositiveFloat] = None
    sigma_sq_dbm: float = -60.0


class SweepSection(_Section):
    """Grids of the sweep subcommands (powers in mW)."""

    n_junctions: IntList = [1, 4]
    mu_a: NonNegativeFloatList = [0.0, 0.2, 0.7]
    p_mw: NonNegativeFloatList = [0.0, 10.0, 100.0]
    s_mw: NonNegativeFloatList = [0.0, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]
    a_sq_mw: NonNegativeFloatList = [0.0, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]
    models: StrList = [kind.value for kind in EhModelKind] + [ORACLE_MODEL]
    distributions: StrList = [DistributionKind.OPTIMAL.value, DistributionKind.UNIFORM.value]
    trials: int = Field(100_000, ge=10_000)
    cdf_points: int = Field(101, ge=2)
    tradeoff_p_mw: NonNegativeFloatList = [0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0]
    tradeoff_a_sq_mw: NonNegativeFloatList = [10.0, 100.0]

    @field_validator("models")
    @classmethod
    def known_models(cls, models: List[str]) -> List[str]:
        allowed = {kind.value for kind in EhModelKind} | {ORACLE_MODEL}
        unknown = sorted(set(models) - allowed)
        if unknown:
            msg = f"Unknown models {unknown}; choose from {sorted(allowed)}."
            raise ValueError(msg)
        return models

    @field_validator("distributions")
    @classmethod
    def known_distributions(cls, distributions: List[str]) -> List[str]:
        allowed = {kind.value for kind in DistributionKind} - {DistributionKind.OOK.value}
        unknown = sorted(set(distributions) - allowed)
        if unknown:
            msg = f"Unknown distributions {unknown}; choose from {sorted(allowed)}."
            raise ValueError(msg)
        return distributions


class TransientSection(_Section):
    """Transient run; an unset symbol period means the high-pass settling period."""

    symbols_mw: NonNegativeFloatList = [100.0, 10.0, 100.0, 10.0]
    steps_per_slot: int = Field(2000, ge=1000)
    cold_start: bool = False
    symbol_period_s: Optional[PositiveFloat] = None


class ValidateSection(_Section):
    """Sample sizes of the acceptance battery."""

    grid_points: int = Field(200, ge=4)
    mc_samples: int = Field(1_000_000, ge=1000)
    ber_trials: int = Field(10_000_000, ge=10_000)
    transient_steps_per_slot: int = Field(2000, ge=1000)
    series_resistance_fault: PositiveFloat = 1.0


CONFIG_VALIDATORS = {
    "run": RunSection,
    "receiver": ReceiverSection,
    "ambient": AmbientSection,
    "energy": EnergySection,
    "info": InfoSection,
    "noise": NoiseSection,
    "sweep": SweepSection,
    "transient": TransientSection,
    "validate": ValidateSection,
}


def _junction_defaults(bands: Optional[List[Tuple[float, float]]], count: int) -> Config:
    template = JunctionSection().model_dump()
    junctions = {}
    for k in range(count):
        entry = dict(template)
        if bands is not None:
            entry["lambda_min_nm"], entry["lambda_max_nm"] = bands[k]
        junctions[f"junction{k + 1}"] = entry
    return junctions


def default_config(junction_count: int = 1) -> Dict[str, Config]:
    """Full default configuration for a receiver with `junction_count` junctions.

    Junction counts without a band preset get junction entries with unset
    bands, which validation then rejects unless the bands are given.
    """
    receiver = {
        name: field.default
        for name, field in ReceiverSection.model_fields.items()
        if name != "junctions"
    }
    receiver["junction_count"] = junction_count
    receiver["junctions"] = _junction_defaults(
        BAND_PRESETS_NM.get(junction_count),
        junction_count,
    )
    config = {
        name: section().model_dump(mode="json")
        for name, section in CONFIG_VALIDATORS.items()
        if name != "receiver"
    }
    config["receiver"] = receiver
    return config


def peek_junction_count(*configs: Config) -> int:
    """Return the last `receiver.junction_count` set in `configs`, else 1."""
    count = 1
    for config in configs:
        value = (config or {}).get("receiver", {}).get("junction_count")
        if value is not None:
            count = value
    if not isinstance(count, int) or count < 1:
        msg = f"receiver.junction_count must be a positive integer, got {count!r}."
        raise ConfigError(msg)
    return count


def config_defaults(file_config: Config, overrides: Config) -> Dict[str, Config]:
    """Defaults factory for `LoadConfig`, sized to the requested junction count."""
    return default_config(peek_junction_count(file_config, overrides))


def resolve_model(name: str, n_junctions: int) -> EhModelKind:
    """Map a configured model name onto a model kind; "auto" picks the closed form."""
    if name == "auto":
        return (
            EhModelKind.CLOSED_FORM_SINGLE if n_junctions == 1 else EhModelKind.CLOSED_FORM_MULTI
        )
    try:
        return EhModelKind(name)
    except ValueError as e:
        msg = f"Unknown model {name!r}."
        raise ConfigError(msg) from e


@dataclass(frozen=True)
class Scenario:
    """Everything needed to evaluate one operating point."""

    receiver: ReceiverSpec
    ambient: AmbientModel
    energy: EnergySignal
    info: InfoSignal
    noise: NoiseModel
    model: EhModelKind
    deviations: Tuple[str, ...] = ()

    @cached_property
    def state(self) -> PhotocurrentState:
        return photocurrents(self.receiver, self.ambient, self.energy, self.info)

    def channel(
        self,
        a_sq: Optional[float] = None,
        model: Optional[EhModelKind] = None,
    ) -> InfoChannel:
        """Information channel at peak power `a_sq` (W), by default the configured A^2."""
        return InfoChannel.from_receiver(
            self.state,
            self.receiver,
            model or self.model,
            self.info.a_sq if a_sq is None else a_sq,
        )


def _junction_specs(receiver: Config, n_junctions: int) -> Tuple[List[JunctionSpec], bool]:
    """Junctions of the configured receiver, or of the band preset for another N.

    Returns the junctions and whether the preset bands were used.
    """
    configured = receiver["junctions"]
    if n_junctions == receiver["junction_count"]:
        sections = [configured[f"junction{k}"] for k in range(1, n_junctions + 1)]
        bands = [(s["lambda_min_nm"], s["lambda_max_nm"]) for s in sections]
        preset = BAND_PRESETS_NM.get(n_junctions) == bands
    else:
        if n_junctions not in BAND_PRESETS_NM:
            msg = f"No band preset for {n_junctions} junctions; configure the receiver instead."
            raise ConfigError(msg)
        # Swept junction counts share the electrical parameters of junction1.
        sections = [configured["junction1"]] * n_junctions
        bands = BAND_PRESETS_NM[n_junctions]
        preset = True

    junctions = [
        JunctionSpec(
            band=SpectralBand(low * NM, high * NM),
            efficiency=section["efficiency"],
            i_sat1=section["i_sat1_a"],
            i_sat2=section["i_sat2_a"],
            r_shunt=section["r_shunt_ohm"],
            r_series=section["r_series_ohm"],
        )
        for section, (low, high) in zip(sections, bands)
    ]
    return junctions, preset


def build_scenario(
    config: Mapping[str, Config],
    n_junctions: Optional[int] = None,
    mu_a: Optional[float] = None,
    p_total: Optional[float] = None,
    a_sq: Optional[float] = None,
    model: Optional[str] = None,
) -> Scenario:
    """Resolve a validated configuration into model objects.

    Parameters
    ----------
    config
        Validated configuration dictionary.
    n_junctions, optional
        Junction count; a count other than the configured one uses its band
        preset.
    mu_a, optional
        Ambient coefficient overriding `ambient.mu_a`.
    p_total, optional
        Energy-signal power in W overriding `energy.p_total_mw`.
    a_sq, optional
        Peak information power in W overriding `info.a_sq_mw`.
    model, optional
        Model name overriding `run.model`.

    Returns
    -------
    Scenario

    Raises
    ------
    ConfigError
        If the information carrier cannot be assigned to a junction.
    """
    receiver_cfg = config["receiver"]
    n = receiver_cfg["junction_count"] if n_junctions is None else n_junctions
    junctions, preset = _junction_specs(receiver_cfg, n)

    info_cfg = config["info"]
    wavelength = info_cfg["lambda0_nm"] * NM
    deviations = []
    if n == 1 and preset:
        deviations.append(N1_BAND_DEVIATION)

    info_junction = receiver_cfg["info_junction"] if n == receiver_cfg["junction_count"] else None
    if info_junction is None:
        info_junction = absorbing_junction(junctions, wavelength)
    if info_junction is None:
        if receiver_cfg["info_responsivity_a_per_w"] is None:
            msg = (
                f"Information wavelength {info_cfg['lambda0_nm']} nm lies outside every "
                "junction band; set receiver.info_junction and "
                "receiver.info_responsivity_a_per_w."
            )
            raise ConfigError(msg)
        info_junction = 1

    fit_range = receiver_cfg["saturation_fit_range_v"]
    rx = ReceiverSpec(
        junctions=tuple(junctions),
        r_load=receiver_cfg["r_load_ohm"],
        r_info=receiver_cfg["r_info_ohm"],
        c_info=receiver_cfg["c_info_f"],
        inductance=receiver_cfg["inductance_h"],
        v_t=receiver_cfg["thermal_voltage_v"]
        or thermal_voltage(receiver_cfg["cell_temperature_k"]),
        area=receiver_cfg["area_cm2"] * CM2,
        info_junction=info_junction,
        info_responsivity=receiver_cfg["info_responsivity_a_per_w"],
        saturation_fit_range=tuple(fit_range) if fit_range is not None else None,
        baseline_ideality=receiver_cfg["baseline_ideality"],
    )

    ambient_cfg = config["ambient"]
    ambient = AmbientModel(
        mu_a=ambient_cfg["mu_a"] if mu_a is None else mu_a,
        temperature=ambient_cfg["sun_temperature_k"],
    )

    energy_cfg = config["energy"]
    if energy_cfg["wavelengths_nm"] is not None and n == receiver_cfg["junction_count"]:
        line_wavelengths = [value * NM for value in energy_cfg["wavelengths_nm"]]
    elif n in ENERGY_PRESETS_NM:
        line_wavelengths = [value * NM for value in ENERGY_PRESETS_NM[n]]
    else:
        line_wavelengths = list(band_midpoints(junction.band for junction in junctions))
    energy = EnergySignal.split_evenly(
        energy_cfg["p_total_mw"] * MW if p_total is None else p_total,
        line_wavelengths,
        energy_cfg["channel_gain"],
    )

    info = InfoSignal(
        wavelength=wavelength,
        gain=info_cfg["channel_gain"],
        a_sq=info_cfg["a_sq_mw"] * MW if a_sq is None else a_sq,
        symbol_period=info_cfg["symbol_period_s"],
    )

    noise_cfg = config["noise"]
    noise = (
        NoiseModel(noise_cfg["sigma_sq"])
        if noise_cfg["sigma_sq"] is not None
        else NoiseModel.from_dbm(noise_cfg["sigma_sq_dbm"])
    )

    return Scenario(
        receiver=rx,
        ambient=ambient,
        energy=energy,
        info=info,
        noise=noise,
        model=resolve_model(config["run"]["model"] if model is None else model, n),
        deviations=tuple(deviations),
    )
