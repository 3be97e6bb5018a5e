"""Sweep table builders behind the CLI subcommands.

Each `cmd_*` function takes a validated configuration dictionary and returns a
`SweepResult`. Outer sweep points are independent, so they can be fanned out
to a process pool; `Executor.map` keeps the row order of the serial run.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from slipt_lab.exceptions import ModelMismatchError
from slipt_lab.helpers.python import calc_product_of_dict_values, pairwise_iterable
from slipt_lab.methods import circuitsim, ehmodel, infotheory
from slipt_lab.methods.ehmodel import EhModelKind
from slipt_lab.methods.infotheory import (
    DistributionKind,
    InfoChannel,
    InputDistribution,
    NoiseModel,
)
from slipt_lab.scenario import MW, ORACLE_MODEL, Scenario, build_scenario
from slipt_lab.typing import Config

logger = logging.getLogger(__name__)

# Relative slack allowed before a frontier step counts as a violation.
FRONTIER_RTOL = 1e-9

Row = Dict[str, Any]


@dataclass
class SweepResult:
    """Output table of a subcommand with its run annotations.

    Attributes
    ----------
    table
        Rows in sweep-axis order.
    models
        Model tags used to produce the table.
    warnings
        Deduplicated solver and frontier warnings.
    frames
        Additional named tables, e.g. the transient waveform.
    """

    table: pd.DataFrame
    models: Tuple[str, ...] = ()
    warnings: Tuple[str, ...] = ()
    frames: Dict[str, pd.DataFrame] = field(default_factory=dict)


def run_points(
    func: Callable[[Config, Row], List[Row]],
    config: Config,
    points: Iterable[Row],
    jobs: int = 1,
) -> List[Row]:
    """Evaluate `func(config, point)` for every point and concatenate the rows.

    With more than one job the points go to a process pool; results come back
    in submission order either way.
    """
    worker = partial(func, config)
    points = list(points)
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(worker, points))
    else:
        chunks = [worker(point) for point in points]
    return [row for chunk in chunks for row in chunk]


def _unique(values: Iterable[str]) -> Tuple[str, ...]:
    return tuple(dict.fromkeys(values))


def _finish(rows: List[Row], columns: Sequence[str], models: Iterable[str]) -> SweepResult:
    """Assemble rows into a table, collecting row warnings and failures.

    Raises
    ------
    ModelMismatchError
        If every row failed.
    """
    warnings = _unique(w for row in rows for w in row.pop("_warnings", ()))
    table = pd.DataFrame(rows, columns=list(columns))
    if "error" in table and len(table) and table["error"].notna().all():
        msg = f"Every row failed: {table['error'].iloc[0]}"
        raise ModelMismatchError(msg)
    for warning in warnings:
        logger.warning(warning)
    return SweepResult(table=table, models=_unique(models), warnings=warnings)


def _scenario(config: Config, point: Row, **kwargs: Any) -> Scenario:
    return build_scenario(
        config,
        n_junctions=point["n_junctions"],
        mu_a=point["mu_a"],
        p_total=point["p_mw"] * MW,
        **kwargs,
    )


def _harvest(model: str, scenario: Scenario, s: float) -> Tuple[float, Tuple[str, ...]]:
    rx, state = scenario.receiver, scenario.state
    if model == ORACLE_MODEL:
        return circuitsim.solve_dc(rx, state.junction_currents(s)).p_harv(rx), ()
    kind = EhModelKind(model)
    if kind is EhModelKind.BASELINE_MPP:
        return ehmodel.harvested_power(kind, state, s, rx), ()
    solution = ehmodel.evaluate(kind, state, s, rx)
    return solution.p_harv, solution.warnings


def _eh_curve_rows(config: Config, point: Row) -> List[Row]:
    scenario = _scenario(config, point)
    base = {
        "n_junctions": point["n_junctions"],
        "mu_a": point["mu_a"],
        "p_mw": point["p_mw"],
        "model": point["model"],
    }
    rows = []
    for s_mw in config["sweep"]["s_mw"]:
        try:
            p_harv, warnings = _harvest(point["model"], scenario, s_mw * MW)
            rows.append({**base, "s_mw": s_mw, "p_harv_w": p_harv, "_warnings": warnings})
        except ModelMismatchError as e:
            rows.append({**base, "s_mw": s_mw, "p_harv_w": math.nan, "error": str(e)})
    return rows


def cmd_eh_curve(config: Config, jobs: int = 1) -> SweepResult:
    """Harvested power against transmit power for every requested model.

    The circuit-level DC solve appears as the `circuit_oracle` model.
    """
    sweep = config["sweep"]
    points = calc_product_of_dict_values(
        n_junctions=sorted(sweep["n_junctions"]),
        mu_a=sorted(sweep["mu_a"]),
        p_mw=sorted(sweep["p_mw"]),
        model=sweep["models"],
    )
    rows = run_points(_eh_curve_rows, config, points, jobs)
    columns = ["n_junctions", "mu_a", "p_mw", "model", "s_mw", "p_harv_w", "error"]
    return _finish(rows, columns, sweep["models"])


def _point_grid(config: Config, **extra: Iterable) -> Iterable[Row]:
    sweep = config["sweep"]
    return calc_product_of_dict_values(
        n_junctions=sorted(sweep["n_junctions"]),
        mu_a=sorted(sweep["mu_a"]),
        p_mw=sorted(sweep["p_mw"]),
        **extra,
    )


def _sensitivity_rows(config: Config, point: Row) -> List[Row]:
    scenario = _scenario(config, point)
    base = {key: point[key] for key in ("n_junctions", "mu_a", "p_mw")}
    base["model"] = scenario.model.value
    rows = []
    for a_sq_mw in config["sweep"]["a_sq_mw"]:
        try:
            sens = scenario.channel(a_sq_mw * MW).sensitivity
            rows.append(
                {**base, "a_sq_mw": a_sq_mw, "x0": sens.x0, "xa": sens.xa, "theta": sens.theta},
            )
        except ModelMismatchError as e:
            rows.append({**base, "a_sq_mw": a_sq_mw, "error": str(e)})
    return rows


def cmd_sensitivity(config: Config, jobs: int = 1) -> SweepResult:
    """Sensitivity theta over the A^2 grid for each (N, mu_a, p)."""
    rows = run_points(_sensitivity_rows, config, _point_grid(config), jobs)
    columns = ["n_junctions", "mu_a", "p_mw", "model", "a_sq_mw", "x0", "xa", "theta", "error"]
    return _finish(rows, columns, (row["model"] for row in rows))


def _rate(kind: DistributionKind, channel: InfoChannel, noise: NoiseModel) -> float:
    if kind is DistributionKind.OPTIMAL:
        return infotheory.max_rate(channel, noise)
    return infotheory.rate_for_cdf(kind, channel, noise)


def _rate_rows(config: Config, point: Row) -> List[Row]:
    scenario = _scenario(config, point)
    base = {key: point[key] for key in ("n_junctions", "mu_a", "p_mw")}
    base["model"] = scenario.model.value
    rows = []
    for a_sq_mw in config["sweep"]["a_sq_mw"]:
        row = {**base, "a_sq_mw": a_sq_mw}
        try:
            channel = scenario.channel(a_sq_mw * MW)
            for name in config["sweep"]["distributions"]:
                row[f"rate_{name}"] = _rate(DistributionKind(name), channel, scenario.noise)
        except ModelMismatchError as e:
            row["error"] = str(e)
        rows.append(row)
    return rows


def cmd_rate(config: Config, jobs: int = 1) -> SweepResult:
    """Achievable rate (nats per channel use) of each input distribution over A^2.

    One column per distribution, so the optimal and uniform rates of a grid
    point sit on the same row; rows where the uniform rate exceeds the optimal
    one are flagged.
    """
    distributions = config["sweep"]["distributions"]
    rows = run_points(_rate_rows, config, _point_grid(config), jobs)
    columns = ["n_junctions", "mu_a", "p_mw", "model", "a_sq_mw"]
    columns += [f"rate_{name}" for name in distributions] + ["error"]
    result = _finish(rows, columns, (row["model"] for row in rows))

    if {"optimal", "uniform"} <= set(distributions):
        table = result.table
        excess = table["rate_uniform"] > table["rate_optimal"] * (1 + FRONTIER_RTOL) + 1e-15
        if excess.any():
            warning = f"Uniform rate exceeds the optimal rate on {int(excess.sum())} rows."
            logger.warning(warning)
            result.warnings += (warning,)
    return result


def row_seed(seed: int, index: int) -> int:
    """Seed of the `index`-th Monte Carlo row derived from the run seed."""
    state = np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def _ber_rows(config: Config, point: Row) -> List[Row]:
    scenario = _scenario(config, point)
    base = {key: point[key] for key in ("n_junctions", "mu_a", "p_mw")}
    base["model"] = scenario.model.value
    trials = config["sweep"]["trials"]
    rows = []
    for offset, a_sq_mw in enumerate(config["sweep"]["a_sq_mw"]):
        row = {**base, "a_sq_mw": a_sq_mw}
        try:
            channel = scenario.channel(a_sq_mw * MW)
            mc = infotheory.ber_monte_carlo(
                channel,
                scenario.noise,
                trials,
                row_seed(config["run"]["seed"], point["index"] + offset),
            )
            row.update(
                theta=channel.sensitivity.theta,
                ber_analytic=infotheory.ber_analytic(channel, scenario.noise),
                ber_mc=mc.ber,
                ci_half_width=mc.half_width,
                errors=mc.errors,
                trials=mc.trials,
            )
        except ModelMismatchError as e:
            row["error"] = str(e)
        rows.append(row)
    return rows


def cmd_ber(config: Config, jobs: int = 1) -> SweepResult:
    """Analytic and Monte Carlo OOK bit-error rates over the A^2 grid.

    Monte Carlo rows are seeded from `run.seed` and the row position, so the
    table is the same for any number of jobs.
    """
    n_a_sq = len(config["sweep"]["a_sq_mw"])
    points = [
        {**point, "index": position * n_a_sq}
        for position, point in enumerate(_point_grid(config))
    ]
    rows = run_points(_ber_rows, config, points, jobs)
    columns = [
        "n_junctions",
        "mu_a",
        "p_mw",
        "model",
        "a_sq_mw",
        "theta",
        "ber_analytic",
        "ber_mc",
        "ci_half_width",
        "errors",
        "trials",
        "error",
    ]
    return _finish(rows, columns, (row["model"] for row in rows))


def _cdf_rows(config: Config, point: Row) -> List[Row]:
    scenario = _scenario(config, point)
    a_sq = scenario.info.a_sq
    base = {key: point[key] for key in ("n_junctions", "mu_a", "p_mw")}
    base.update(model=scenario.model.value, a_sq_mw=a_sq / MW)
    try:
        channel = scenario.channel()
        theta = channel.sensitivity.theta
    except ModelMismatchError as e:
        return [{**base, "error": str(e)}]

    optimal = InputDistribution(DistributionKind.OPTIMAL, channel)
    uniform = InputDistribution(DistributionKind.UNIFORM, channel)
    grid = np.linspace(0.0, a_sq, config["sweep"]["cdf_points"])
    rows = [
        {
            **base,
            "s_mw": s / MW,
            # With theta = 0 the capacity-achieving input is a point mass.
            "cdf_optimal": optimal.cdf(s) if theta > 0 else math.nan,
            "cdf_uniform": uniform.cdf(s),
        }
        for s in grid
    ]
    if theta == 0:
        rows[0]["_warnings"] = (
            f"Sensitivity is zero at A^2 = {a_sq / MW!r} mW (N = {point['n_junctions']}, "
            f"p = {point['p_mw']!r} mW); cdf_optimal left empty.",
        )
    return rows


def cmd_cdf(config: Config, jobs: int = 1) -> SweepResult:
    """Capacity-achieving and uniform input cdfs at the configured A^2.

    Points where the sensitivity vanishes keep their rows with an empty
    `cdf_optimal` column and a warning instead of stopping the sweep.
    """
    rows = run_points(_cdf_rows, config, _point_grid(config), jobs)
    columns = [
        "n_junctions",
        "mu_a",
        "p_mw",
        "model",
        "a_sq_mw",
        "s_mw",
        "cdf_optimal",
        "cdf_uniform",
        "error",
    ]
    return _finish(rows, columns, (row["model"] for row in rows))


def _tradeoff_rows(config: Config, point: Row) -> List[Row]:
    base = {key: point[key] for key in ("n_junctions", "mu_a", "a_sq_mw")}
    rows = []
    for p_mw in config["sweep"]["tradeoff_p_mw"]:
        scenario = _scenario(config, {**point, "p_mw": p_mw})
        row_base = {**base, "model": scenario.model.value, "p_mw": p_mw}
        try:
            channel = scenario.channel(point["a_sq_mw"] * MW)
            for name in config["sweep"]["distributions"]:
                result = infotheory.rate_power_point(
                    DistributionKind(name),
                    channel,
                    scenario.noise,
                    p_mw * MW,
                )
                rows.append(
                    {
                        **row_base,
                        "dist_kind": result.dist_kind.value,
                        "rate": result.rate,
                        "avg_power_w": result.avg_power,
                    },
                )
        except ModelMismatchError as e:
            rows.append({**row_base, "error": str(e)})
    return rows


def frontier_violations(table: pd.DataFrame) -> List[str]:
    """Check the rate-power frontier of the optimal distribution.

    Along increasing p, the average harvested power must not decrease and the
    rate must not increase.
    """
    violations = []
    optimal = table[table["dist_kind"] == DistributionKind.OPTIMAL.value]
    for key, group in optimal.groupby(["n_junctions", "mu_a", "a_sq_mw"], sort=True):
        at = f"(N, mu_a, A^2) = ({', '.join(str(value) for value in key)})"
        ordered = group.sort_values("p_mw")
        steps = zip(
            pairwise_iterable(ordered["p_mw"].tolist()),
            pairwise_iterable(ordered["avg_power_w"].tolist()),
            pairwise_iterable(ordered["rate"].tolist()),
        )
        for (p_lo, p_hi), (power_lo, power_hi), (rate_lo, rate_hi) in steps:
            if power_hi < power_lo * (1 - FRONTIER_RTOL):
                violations.append(
                    f"Average power decreases from p = {p_lo} to {p_hi} mW at {at}.",
                )
            if rate_hi > rate_lo * (1 + FRONTIER_RTOL) + 1e-15:
                violations.append(
                    f"Rate increases from p = {p_lo} to {p_hi} mW at {at}.",
                )
    return violations


def cmd_tradeoff(config: Config, jobs: int = 1) -> SweepResult:
    """Rate-power points over the energy-signal power grid.

    Frontier monotonicity of the optimal distribution is checked and any
    violation is reported as a warning.
    """
    sweep = config["sweep"]
    points = calc_product_of_dict_values(
        n_junctions=sorted(sweep["n_junctions"]),
        mu_a=sorted(sweep["mu_a"]),
        a_sq_mw=sorted(sweep["tradeoff_a_sq_mw"]),
    )
    rows = run_points(_tradeoff_rows, config, points, jobs)
    columns = [
        "n_junctions",
        "mu_a",
        "a_sq_mw",
        "model",
        "p_mw",
        "dist_kind",
        "rate",
        "avg_power_w",
        "error",
    ]
    result = _finish(rows, columns, (row["model"] for row in rows))
    violations = frontier_violations(result.table.dropna(subset=["rate"]))
    for violation in violations:
        logger.warning(violation)
    result.warnings += tuple(violations)
    return result


def cmd_transient(config: Config, jobs: int = 1) -> SweepResult:
    """Transient run over the configured symbol sequence.

    The slot table compares the integrated output symbols with the static
    output x(s) of the accurate model; the sampled waveform is returned as
    the `waveform` frame.
    """
    scenario = build_scenario(config)
    rx, state = scenario.receiver, scenario.state
    transient = config["transient"]
    period = transient["symbol_period_s"] or circuitsim.settling_period(rx)
    symbols = [value * MW for value in transient["symbols_mw"]]

    trace = circuitsim.simulate_transient(
        rx,
        state,
        symbols,
        dt=period / transient["steps_per_slot"],
        symbol_period=period,
        cold_start=transient["cold_start"],
        a_sq=scenario.info.a_sq,
    )

    table = trace.slot_frame()
    table.insert(2, "s_mw", table["s"] / MW)
    table["x_static"] = [
        ehmodel.amplitude(EhModelKind.ACCURATE, state, s, rx) for s in symbols
    ]
    table["i_eh_end"] = [trace.i_eh[trace.slot_end(k)] for k in range(len(symbols))]
    table = table.drop(columns="s")

    return SweepResult(
        table=table,
        models=("circuit_transient",),
        warnings=scenario.deviations,
        frames={"waveform": trace.waveform_frame()},
    )


COMMANDS: Mapping[str, Callable[[Config, int], SweepResult]] = {
    "eh-curve": cmd_eh_curve,
    "sensitivity": cmd_sensitivity,
    "rate": cmd_rate,
    "ber": cmd_ber,
    "cdf": cmd_cdf,
    "tradeoff": cmd_tradeoff,
    "transient": cmd_transient,
}


def deviations(config: Config, n_junctions: Optional[Iterable[int]] = None) -> Tuple[str, ...]:
    """Default-deviation notes of every junction count a command touches."""
    counts = n_junctions or [config["receiver"]["junction_count"]]
    notes: List[str] = []
    for n in sorted(set(counts)):
        notes.extend(build_scenario(config, n_junctions=n).deviations)
    return _unique(notes)
