"""Cross-model, oracle and Monte Carlo validation battery.

`run_validation` evaluates every criterion and returns one report row per
check; `report_validation` logs the report and raises `AcceptanceError` when a
check failed. Sample sizes come from the `validate` configuration section so
the same battery runs at full size from the CLI and reduced size in tests.
"""

import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Callable, List, Sequence

import numpy as np
import pandas as pd
from codetiming import Timer
from scipy import constants
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.stats import norm

from slipt_lab.helpers.numerics import find_root
from slipt_lab.logging import print_full_table_and_raise_error
from slipt_lab.methods import circuitsim, ehmodel, infotheory
from slipt_lab.methods.spectral import (
    CONSTANTS,
    AmbientModel,
    PhotocurrentState,
    ReceiverSpec,
    ambient_psd,
)
from slipt_lab.scenario import MW, Scenario, SweepSection, build_scenario
from slipt_lab.sweeps import frontier_violations
from slipt_lab.typing import Config

logger = logging.getLogger(__name__)

# Photocurrent weights of the junctions in the oracle grid.
JUNCTION_WEIGHTS = (1.0, 0.7, 0.4, 0.2)
OMEGA = 0.5671432904097838
BER_TARGETS = (1e-4, 1e-3, 1e-2, 0.1, 0.3)
MEAN_POWER_P_MW = (0.0, 100.0)
AMPLITUDE_TABLE_POINTS = 4097


@dataclass(frozen=True)
class CriterionResult:
    """One row of the validation report."""

    criterion: int
    name: str
    measured: float
    tolerance: float
    passed: bool
    runtime_s: float = 0.0


def _result(criterion: int, name: str, measured: float, tolerance: float) -> CriterionResult:
    return CriterionResult(
        criterion=criterion,
        name=name,
        measured=float(measured),
        tolerance=float(tolerance),
        passed=bool(measured <= tolerance),
    )


def _relative(value: float, reference: float, floor: float = 0.0) -> float:
    if value == reference:
        return 0.0
    return abs(value - reference) / max(abs(reference), floor)


def _grid(values: Sequence[float], field_name: str) -> List[float]:
    """Configured sweep grid, or the built-in one when the grid is empty."""
    return list(values) or list(SweepSection.model_fields[field_name].default)


def scale_r_sigma(rx: ReceiverSpec, factor: float) -> ReceiverSpec:
    """Receiver whose series resistances and load are all scaled by `factor`."""
    if factor == 1:
        return rx
    junctions = tuple(replace(j, r_series=j.r_series * factor) for j in rx.junctions)
    return replace(rx, junctions=junctions, r_load=rx.r_load * factor)


class _Battery:
    """Shared state of one validation run."""

    def __init__(self, config: Config, jobs: int = 1) -> None:
        self.config = config
        self.settings = config["validate"]
        self.sweep = config["sweep"]
        self.seed = config["run"]["seed"]
        self.jobs = jobs

    def scenario(self, n: int, mu_a: float = 0.0, p_mw: float = 0.0) -> Scenario:
        return build_scenario(
            self.config,
            n_junctions=n,
            mu_a=mu_a,
            p_total=p_mw * MW,
            model="auto",
        )

    def faulted(self, rx: ReceiverSpec) -> ReceiverSpec:
        return scale_r_sigma(rx, self.settings["series_resistance_fault"])

    def oracle_equivalence(self) -> List[CriterionResult]:
        half = max(self.settings["grid_points"] // 2, 2)
        levels = np.concatenate([[0.0], np.logspace(-9, -1, half - 1)])
        worst = 0.0
        for n in (1, 4):
            rx = self.scenario(n).receiver
            weights = np.array(JUNCTION_WEIGHTS[:n]) if n > 1 else np.ones(1)
            for level in levels:
                j = level * weights
                state = PhotocurrentState(tuple(j), g_s=0.0)
                model = ehmodel.solve_accurate(state, 0.0, rx).i_eh
                oracle = circuitsim.solve_dc(rx, j).i_eh
                worst = max(worst, _relative(model, oracle, floor=1e-15))
        return [_result(1, "accurate model matches circuit DC solve", worst, 1e-9)]

    def _closed_form_error(self, n: int, mu_a: float, p_mw: float) -> float:
        scenario = self.scenario(n, mu_a, p_mw)
        rx, state = scenario.receiver, scenario.state
        faulted = self.faulted(rx)
        floor = ehmodel.HIGH_CURRENT_RATIO * np.array(
            [
                ehmodel.effective_saturation_current(j, rx.v_t, rx.saturation_fit_range)[0]
                for j in rx.junctions
            ],
        )
        worst = 0.0
        for s_mw in _grid(self.sweep["s_mw"], "s_mw"):
            j = state.junction_currents(s_mw * MW)
            # The logarithmic form only holds when every junction is well lit.
            if n > 1 and np.any(j <= floor):
                continue
            model = ehmodel.harvested_power(scenario.model, state, s_mw * MW, faulted)
            oracle = circuitsim.solve_dc(rx, j).p_harv(rx)
            worst = max(worst, _relative(model, oracle, floor=1e-30))
        return worst

    def closed_form_fidelity(self) -> List[CriterionResult]:
        worst = {
            n: max(
                self._closed_form_error(n, mu_a, p_mw)
                for mu_a in (0.0, 0.7)
                for p_mw in (0.0, 10.0, 100.0)
            )
            for n in (1, 4)
        }
        return [
            _result(2, "closed_form_single matches circuit DC solve", worst[1], 5e-3),
            _result(2, "closed_form_multi matches circuit DC solve", worst[4], 5e-2),
        ]

    def single_junction_algebra(self) -> List[CriterionResult]:
        rx = self.scenario(1).receiver
        rng = np.random.default_rng(self.seed)
        worst = 0.0
        for j in 10 ** rng.uniform(-8, -1, size=100):
            state = PhotocurrentState((float(j),), g_s=0.0)
            closed = ehmodel.closed_form_single(state, 0.0, self.faulted(rx)).i_eh
            numeric = ehmodel.solve_approximate(state, 0.0, rx).i_eh
            worst = max(worst, _relative(closed, numeric, floor=1e-30))
        return [_result(3, "Lambert-W form solves the approximate model", worst, 1e-10)]

    def lambert_identity(self) -> List[CriterionResult]:
        x = np.logspace(-6, 4, self.settings["grid_points"])
        w = ehmodel.lambert_w0_exp(np.log(x) + x)
        identity = float(np.max(np.abs(w - x) / x))
        omega = abs(ehmodel.lambert_w0_exp(0.0) - OMEGA)
        return [
            _result(4, "W0(x e^x) = x", identity, 1e-12),
            _result(4, "W0(1) equals the omega constant", omega, 1e-9),
        ]

    def spectral_sanity(self) -> List[CriterionResult]:
        rx = self.scenario(1).receiver
        ambient = AmbientModel(
            mu_a=1.0,
            temperature=self.config["ambient"]["sun_temperature_k"],
        )
        edges = np.logspace(-8, -3, 51)
        total = sum(
            quad(
                lambda wl: ambient_psd(wl, ambient, rx),
                low,
                high,
                epsrel=1e-10,
                limit=200,
            )[0]
            for low, high in zip(edges[:-1], edges[1:])
        )
        expected = (
            CONSTANTS.equivalent_size(rx.area)
            * constants.Stefan_Boltzmann
            * ambient.temperature**4
            / math.pi
        )
        logger.dev(f"Ambient power {total!r} W against Stefan-Boltzmann {expected!r} W.")
        name = "ambient spectrum integrates to Stefan-Boltzmann"
        return [_result(5, name, _relative(total, expected), 5e-3)]

    def optimal_mean_power(self) -> List[CriterionResult]:
        rng = np.random.default_rng(self.seed)
        worst = 0.0
        for n in (1, 4):
            for p_mw in MEAN_POWER_P_MW:
                scenario = self.scenario(n, 0.0, p_mw)
                channel = scenario.channel(100 * MW)
                grid = np.linspace(0.0, channel.a_sq, AMPLITUDE_TABLE_POINTS)
                power = PchipInterpolator(
                    grid,
                    [channel.curve.amplitude(s) ** 2 for s in grid],
                )
                samples = infotheory.sample_optimal_batch(
                    rng.random(self.settings["mc_samples"]),
                    channel,
                )
                estimate = float(np.mean(power(samples)))
                worst = max(worst, _relative(estimate, infotheory.avg_power_optimal(channel)))
        return [_result(6, "sampled mean power matches closed form", worst, 1e-2)]

    def rate_consistency(self) -> List[CriterionResult]:
        worst, excess = 0.0, 0
        for n in _grid(self.sweep["n_junctions"], "n_junctions"):
            for mu_a in _grid(self.sweep["mu_a"], "mu_a"):
                for p_mw in _grid(self.sweep["p_mw"], "p_mw"):
                    scenario = self.scenario(n, mu_a, p_mw)
                    for a_sq_mw in _grid(self.sweep["a_sq_mw"], "a_sq_mw"):
                        channel = scenario.channel(a_sq_mw * MW)
                        best = infotheory.max_rate(channel, scenario.noise)
                        optimal = infotheory.rate_for_cdf("optimal", channel, scenario.noise)
                        uniform = infotheory.rate_for_cdf("uniform", channel, scenario.noise)
                        worst = max(worst, abs(optimal - best))
                        excess += int(uniform > best * (1 + 1e-12) + 1e-15)
        return [
            _result(7, "optimal cdf attains the maximum rate", worst, 1e-6),
            _result(7, "uniform rate above maximum (count)", excess, 0),
        ]

    def ber_agreement(self) -> List[CriterionResult]:
        scenario = self.scenario(self.config["receiver"]["junction_count"])
        noise = scenario.noise
        a_max = 100 * MW
        theta_max = scenario.channel(a_max).sensitivity.theta
        trials = self.settings["ber_trials"]
        worst = 0.0
        for index, target in enumerate(BER_TARGETS):
            theta = 2 * noise.sigma * norm.isf(target)
            if theta > theta_max:
                logger.warning(f"BER {target} out of reach at A^2 = 100 mW; skipped.")
                continue
            a_sq = find_root(
                lambda a: scenario.channel(a).sensitivity.theta - theta,
                0.0,
                a_max,
                name="peak power of target BER",
            )
            channel = scenario.channel(a_sq)
            predicted = infotheory.ber_analytic(channel, noise)
            mc = infotheory.ber_monte_carlo(channel, noise, trials, self.seed + index, self.jobs)
            standard_error = math.sqrt(predicted * (1 - predicted) / trials)
            worst = max(worst, abs(mc.ber - predicted) / standard_error)
        return [_result(8, "Monte Carlo BER within standard errors", worst, 3.0)]

    def transient_steady_state(self) -> List[CriterionResult]:
        scenario = self.scenario(self.config["receiver"]["junction_count"])
        rx, state = scenario.receiver, scenario.state
        transient = self.config["transient"]
        period = transient["symbol_period_s"] or circuitsim.settling_period(rx)
        symbols = [value * MW for value in transient["symbols_mw"]]
        trace = circuitsim.simulate_transient(
            rx,
            state,
            symbols,
            dt=period / self.settings["transient_steps_per_slot"],
            symbol_period=period,
            a_sq=max(symbols),
        )

        current, settled, recovered = 0.0, 0.0, 0.0
        # Slots without a symbol change carry no high-pass transient.
        quiet = 1e-6 * float(np.max(np.abs(trace.i_id)))
        for k, s in enumerate(symbols):
            end = trace.slot_end(k)
            steady = ehmodel.solve_accurate(state, s, rx)
            current = max(current, _relative(trace.i_eh[end], steady.i_eh, floor=1e-15))
            peak = float(np.max(np.abs(trace.i_id[trace.slot_slice(k)])))
            if peak > quiet:
                settled = max(settled, abs(trace.i_id[end]) / peak)
            x = math.sqrt(rx.r_load) * steady.i_eh
            recovered = max(recovered, _relative(trace.y_k[k], x, floor=1e-15))
        return [
            _result(9, "transient load current reaches steady state", current, 1e-3),
            _result(9, "information current settles within the slot", settled, 1e-3),
            _result(9, "integrated symbols recover the output", recovered, 1e-3),
        ]

    def tradeoff_frontier(self) -> List[CriterionResult]:
        rows = []
        for n in (1, 4):
            for a_sq_mw in _grid(self.sweep["tradeoff_a_sq_mw"], "tradeoff_a_sq_mw"):
                for p_mw in _grid(self.sweep["tradeoff_p_mw"], "tradeoff_p_mw"):
                    scenario = self.scenario(n, 0.7, p_mw)
                    channel = scenario.channel(a_sq_mw * MW)
                    rows.append(
                        {
                            "n_junctions": n,
                            "mu_a": 0.7,
                            "a_sq_mw": a_sq_mw,
                            "p_mw": p_mw,
                            "dist_kind": "optimal",
                            "rate": infotheory.max_rate(channel, scenario.noise),
                            "avg_power_w": infotheory.avg_power_optimal(channel),
                        },
                    )
        table = pd.DataFrame(rows)
        violations = frontier_violations(table)
        by_n = table.pivot_table(
            index=["a_sq_mw", "p_mw"],
            columns="n_junctions",
            values="avg_power_w",
        )
        dominated = int((by_n[4] < by_n[1]).sum())
        return [
            _result(10, "rate-power frontier is monotone (violations)", len(violations), 0),
            _result(10, "four junctions harvest more than one (violations)", dominated, 0),
        ]

    def checks(self) -> List[Callable[[], List[CriterionResult]]]:
        return [
            self.oracle_equivalence,
            self.closed_form_fidelity,
            self.single_junction_algebra,
            self.lambert_identity,
            self.spectral_sanity,
            self.optimal_mean_power,
            self.rate_consistency,
            self.ber_agreement,
            self.transient_steady_state,
            self.tradeoff_frontier,
        ]


def run_validation(config: Config, jobs: int = 1) -> pd.DataFrame:
    """Run the validation battery and return the report table.

    Parameters
    ----------
    config
        Validated configuration; the `validate` section sizes the checks and a
        `series_resistance_fault` other than 1 corrupts R_Sigma in the
        closed-form path.
    jobs
        Worker threads of the Monte Carlo check.

    Returns
    -------
    pd.DataFrame
        Columns criterion, name, measured, tolerance, passed, runtime_s.
    """
    battery = _Battery(config, jobs)
    results = []
    for check in battery.checks():
        with Timer(name=check.__name__, logger=None) as timer:
            rows = check()
        results.extend(replace(row, runtime_s=timer.last) for row in rows)
        for row in rows:
            status = "passed" if row.passed else "FAILED"
            logger.info(f"Criterion {row.criterion} ({row.name}) {status}: {row.measured:.3g}")

    return pd.DataFrame([asdict(result) for result in results])


def report_validation(report: pd.DataFrame) -> None:
    """Log the report and raise `AcceptanceError` if any criterion failed."""
    failed = report[~report["passed"]]
    if failed.empty:
        print_full_table_and_raise_error(
            report,
            f"All {len(report)} validation checks passed.",
            show_records=True,
        )
    else:
        print_full_table_and_raise_error(
            report,
            f"{len(failed)} validation checks failed: {', '.join(failed['name'])}.",
            stop_pipeline=True,
            show_records=True,
        )
