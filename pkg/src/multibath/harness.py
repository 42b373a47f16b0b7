"""Scenario configuration, execution, and byte-stable CSV output.

Configurations are single JSON objects validated strictly: unknown keys are
rejected (with a nearest-key suggestion), every number must be finite, and
each failure carries a machine-readable code.  Scenario runs produce
:class:`ResultTable` objects whose CSV serialization is byte-identical for
identical inputs, independent of thread count.
"""

from __future__ import annotations

import difflib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .baths import BathParams, ConstantUnit, MarkovianDelta, Tabulated
from .errors import ConfigError, MultibathError, PoleError, SolverError
from .lambda_system import (
    LambdaParams,
    additive_me_solve,
    dark_state_population,
    markovian_dephasing_solve,
    me2_solve,
    min_eigenvalue,
    quantum_darkstate_solution,
)
from .series import additive_population_series, exact_population_series, interference_order
from .two_bath import (
    TwoBathModel,
    additive_population,
    additivity_error,
    characteristic_roots,
    exact_amplitude,
    exact_decay_rate,
)
from .baths import single_bath_decay_rate
from .errors import DegenerateRootsError
from .two_bath import LorentzianExponential, volterra_solve

__all__ = [
    "ScenarioConfig",
    "TimeGrid",
    "SweepSpec",
    "ResultTable",
    "parse_config",
    "run_scenario",
    "emit_csv",
    "SCENARIOS",
]

TLS_SCENARIOS = ("tls-run", "tls-sweep-lambda", "series-order")
LAMBDA_SCENARIOS = ("lambda-compare", "lambda-sweep-gamma", "lambda-sweep-omega")
SCENARIOS = TLS_SCENARIOS + LAMBDA_SCENARIOS

#: sweep parameter each sweep scenario expects
_SWEEP_PARAMETER = {
    "tls-sweep-lambda": "lambda",
    "lambda-sweep-gamma": "gamma",
    "lambda-sweep-omega": "omega",
}


@dataclass(frozen=True)
class TimeGrid:
    """Uniform output grid: n_steps intervals from 0 to t_max."""

    t_max: float
    n_steps: int

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_steps + 1)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    model: TwoBathModel | LambdaParams
    grid: TimeGrid | None
    sweep: SweepSpec | None
    truncation: int
    output: str | None


@dataclass(frozen=True)
class ResultTable:
    """Column names, row-major numeric data, and ordered metadata.

    Cells are floats or None; None marks a deliberately blank cell (rate
    poles, absent interference order).  Numeric cells must be finite.
    """

    columns: tuple[str, ...]
    rows: tuple[tuple[float | None, ...], ...]
    metadata: tuple[tuple[str, str], ...]

    def __post_init__(self):
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} cells, expected {width}")
            for cell in row:
                if cell is not None and not math.isfinite(cell):
                    raise ValueError(f"non-finite cell {cell!r} in row {i}")

    def column(self, name: str) -> list[float | None]:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


# ---------------------------------------------------------------------------
# configuration parsing


def _suggest(key: str, allowed) -> str:
    close = difflib.get_close_matches(key, sorted(allowed), n=1)
    return f"; did you mean {close[0]!r}?" if close else ""


def _check_keys(obj: dict, allowed: set[str], context: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigError(
                "unknown-key",
                f"unknown key {key!r} in {context}{_suggest(key, allowed)}",
            )


def _require(obj: dict, key: str, context: str):
    if key not in obj:
        raise ConfigError("missing-parameter", f"missing required parameter {key!r} in {context}")
    return obj[key]


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("invalid-value", f"{name} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError("non-finite-number", f"{name} must be finite, got {value!r}")
    return float(value)


def _integer(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("invalid-value", f"{name} must be an integer, got {value!r}")
    return value


def _parse_tls_model(obj, context: str) -> TwoBathModel:
    if not isinstance(obj, dict):
        raise ConfigError("invalid-value", f"{context} must be an object")
    _check_keys(obj, {"gamma1", "lambda1", "gamma2", "lambda2", "c0"}, context)
    gamma1 = _number(_require(obj, "gamma1", context), "gamma1")
    lambda1 = _number(_require(obj, "lambda1", context), "lambda1")
    gamma2 = _number(_require(obj, "gamma2", context), "gamma2")
    lambda2 = _number(_require(obj, "lambda2", context), "lambda2")
    c0 = _number(obj.get("c0", 1.0), "c0")
    try:
        return TwoBathModel(BathParams(gamma1, lambda1), BathParams(gamma2, lambda2), c0)
    except ValueError as exc:
        raise ConfigError("invalid-value", f"{context}: {exc}") from exc


def _parse_kernel(obj, context: str):
    if not isinstance(obj, dict):
        raise ConfigError("invalid-value", f"{context} must be an object")
    kind = _require(obj, "type", context)
    if kind == "constant":
        _check_keys(obj, {"type"}, context)
        return ConstantUnit()
    if kind == "delta":
        _check_keys(obj, {"type", "rate"}, context)
        rate = _number(_require(obj, "rate", context), "kernel rate")
        try:
            return MarkovianDelta(rate)
        except ValueError as exc:
            raise ConfigError("invalid-value", f"{context}: {exc}") from exc
    if kind == "tabulated":
        _check_keys(obj, {"type", "times", "values"}, context)
        times = _require(obj, "times", context)
        values = _require(obj, "values", context)
        if not isinstance(times, list) or not isinstance(values, list):
            raise ConfigError("invalid-value", f"{context}: times and values must be arrays")
        times = [_number(v, "kernel time") for v in times]
        values = [_number(v, "kernel value") for v in values]
        try:
            return Tabulated(np.asarray(times), np.asarray(values))
        except ValueError as exc:
            raise ConfigError("invalid-value", f"{context}: {exc}") from exc
    raise ConfigError(
        "invalid-value",
        f"{context}: unknown kernel type {kind!r} (expected constant, delta, or tabulated)",
    )


def _parse_lambda_model(obj, context: str) -> LambdaParams:
    if not isinstance(obj, dict):
        raise ConfigError("invalid-value", f"{context} must be an object")
    _check_keys(obj, {"omega", "gamma1", "gamma2", "gamma_perp", "kernel"}, context)
    omega = _number(_require(obj, "omega", context), "omega")
    gamma1 = _number(_require(obj, "gamma1", context), "gamma1")
    gamma2 = _number(_require(obj, "gamma2", context), "gamma2")
    gamma_perp = _number(_require(obj, "gamma_perp", context), "gamma_perp")
    kernel = _parse_kernel(obj["kernel"], f"{context}.kernel") if "kernel" in obj else ConstantUnit()
    try:
        return LambdaParams(omega, gamma1, gamma2, gamma_perp, kernel)
    except ValueError as exc:
        raise ConfigError("invalid-value", f"{context}: {exc}") from exc


def _parse_grid(obj, context: str) -> TimeGrid:
    if not isinstance(obj, dict):
        raise ConfigError("invalid-value", f"{context} must be an object")
    _check_keys(obj, {"t_max", "n_steps"}, context)
    t_max = _number(_require(obj, "t_max", context), "t_max")
    n_steps = _integer(_require(obj, "n_steps", context), "n_steps")
    if t_max <= 0:
        raise ConfigError("invalid-value", f"t_max must be > 0, got {t_max!r}")
    if n_steps < 10:
        raise ConfigError("invalid-value", f"n_steps must be >= 10, got {n_steps!r}")
    return TimeGrid(t_max, n_steps)


def _parse_sweep(obj, scenario: str, context: str) -> SweepSpec:
    if not isinstance(obj, dict):
        raise ConfigError("invalid-value", f"{context} must be an object")
    _check_keys(obj, {"parameter", "values"}, context)
    parameter = _require(obj, "parameter", context)
    expected = _SWEEP_PARAMETER[scenario]
    if parameter != expected:
        raise ConfigError(
            "invalid-value",
            f"scenario {scenario!r} sweeps parameter {expected!r}, got {parameter!r}",
        )
    values = _require(obj, "values", context)
    if not isinstance(values, list) or not values:
        raise ConfigError("invalid-value", f"{context}.values must be a non-empty array")
    parsed = []
    for v in values:
        v = _number(v, f"sweep value for {parameter}")
        if v <= 0:
            raise ConfigError("invalid-value", f"sweep values must be > 0, got {v!r}")
        parsed.append(v)
    return SweepSpec(parameter, tuple(parsed))


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON scenario document.

    Raises :class:`~multibath.errors.ConfigError` with a machine-readable
    ``code`` naming the failure kind and a message naming the offending key.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("bad-document", f"configuration is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("bad-document", "configuration must be a single JSON object")

    _check_keys(doc, {"scenario", "model", "grid", "sweep", "truncation", "output"}, "document")
    scenario = _require(doc, "scenario", "document")
    if scenario not in SCENARIOS:
        raise ConfigError(
            "unknown-scenario",
            f"unknown scenario {scenario!r}{_suggest(str(scenario), SCENARIOS)}",
        )

    if scenario in TLS_SCENARIOS:
        model = _parse_tls_model(_require(doc, "model", "document"), "model")
    else:
        model = _parse_lambda_model(_require(doc, "model", "document"), "model")

    needs_grid = scenario != "series-order"
    grid = None
    if needs_grid:
        grid = _parse_grid(_require(doc, "grid", "document"), "grid")
    elif "grid" in doc:
        raise ConfigError("invalid-value", f"scenario {scenario!r} takes no grid")

    sweep = None
    if scenario in _SWEEP_PARAMETER:
        sweep = _parse_sweep(_require(doc, "sweep", "document"), scenario, "sweep")
    elif "sweep" in doc:
        raise ConfigError("invalid-value", f"scenario {scenario!r} takes no sweep")

    truncation = 8
    if "truncation" in doc:
        if scenario != "series-order":
            raise ConfigError("invalid-value", f"scenario {scenario!r} takes no truncation")
        truncation = _integer(doc["truncation"], "truncation")
        if truncation < 6:
            raise ConfigError("invalid-value", f"truncation must be >= 6, got {truncation}")

    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("invalid-value", f"output must be a string path, got {output!r}")

    return ScenarioConfig(scenario, model, grid, sweep, truncation, output)


# ---------------------------------------------------------------------------
# scenario execution


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _kernel_label(kernel) -> str:
    if isinstance(kernel, ConstantUnit):
        return "constant"
    if isinstance(kernel, MarkovianDelta):
        return f"delta(rate={_fmt(kernel.rate)})"
    return f"tabulated(n={kernel.times.size})"


def _base_metadata(cfg: ScenarioConfig) -> list[tuple[str, str]]:
    meta = [("scenario", cfg.scenario), ("tool_version", __version__)]
    m = cfg.model
    if isinstance(m, TwoBathModel):
        meta += [
            ("gamma1", _fmt(m.bath1.gamma)),
            ("lambda1", _fmt(m.bath1.width)),
            ("gamma2", _fmt(m.bath2.gamma)),
            ("lambda2", _fmt(m.bath2.width)),
            ("c0", _fmt(m.c0)),
        ]
    else:
        meta += [
            ("omega", _fmt(m.omega)),
            ("gamma1", _fmt(m.gamma1)),
            ("gamma2", _fmt(m.gamma2)),
            ("gamma_perp", _fmt(m.gamma_perp)),
            ("kernel", _kernel_label(m.kernel)),
        ]
    if cfg.grid is not None:
        meta += [("t_max", _fmt(cfg.grid.t_max)), ("n_steps", str(cfg.grid.n_steps))]
    if cfg.sweep is not None:
        meta += [
            ("sweep_parameter", cfg.sweep.parameter),
            ("sweep_values", " ".join(_fmt(v) for v in cfg.sweep.values)),
        ]
    if cfg.scenario == "series-order":
        meta.append(("truncation", str(cfg.truncation)))
    return meta


def _sweep_map(func, values, threads: int) -> list:
    """Apply ``func`` to sweep values, ordered by input index regardless of
    execution order."""
    if threads <= 1:
        return [func(v) for v in values]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, values))


def _run_tls_run(cfg: ScenarioConfig) -> ResultTable:
    model = cfg.model
    times = cfg.grid.times()
    rate_exact: list[float | None]
    try:
        roots = characteristic_roots(model)
        amp = exact_amplitude(model, roots, times)
        rho_exact = np.abs(np.asarray(amp)) ** 2
        rate_exact = []
        for t in times:
            try:
                rate_exact.append(exact_decay_rate(model, roots, float(t)))
            except PoleError:
                rate_exact.append(None)
    except DegenerateRootsError:
        # Measure-zero parameter family: populations from the numeric path,
        # rate columns blank (no closed form to differentiate).
        kernels = [LorentzianExponential(model.bath1), LorentzianExponential(model.bath2)]
        rho_exact = volterra_solve(kernels, model.c0, times).population()
        rate_exact = [None] * times.size

    rho_add = additive_population(model, times)
    rate_add: list[float | None] = []
    for t in times:
        try:
            rate_add.append(
                single_bath_decay_rate(model.bath1, float(t))
                + single_bath_decay_rate(model.bath2, float(t))
            )
        except PoleError:
            rate_add.append(None)

    rows = tuple(
        (
            float(times[i]),
            float(rho_exact[i]),
            float(rho_add[i]),
            float(rho_exact[i] - rho_add[i]),
            rate_exact[i],
            rate_add[i],
        )
        for i in range(times.size)
    )
    return ResultTable(
        ("t", "rho_exact", "rho_additive", "epsilon", "gamma12_exact", "gamma12_additive"),
        rows,
        tuple(_base_metadata(cfg)),
    )


def _run_tls_sweep_lambda(cfg: ScenarioConfig, threads: int) -> ResultTable:
    model = cfg.model
    times = cfg.grid.times()

    def sup_eps(width: float) -> float:
        swept = TwoBathModel(
            BathParams(model.bath1.gamma, width),
            BathParams(model.bath2.gamma, width),
            model.c0,
        )
        return float(np.max(np.abs(additivity_error(swept, times))))

    sups = _sweep_map(sup_eps, cfg.sweep.values, threads)
    rows = tuple((v, s) for v, s in zip(cfg.sweep.values, sups))
    return ResultTable(("lambda", "sup_abs_epsilon"), rows, tuple(_base_metadata(cfg)))


def _run_series_order(cfg: ScenarioConfig) -> ResultTable:
    model = cfg.model
    kernels = [
        (0.5 * model.bath1.gamma * model.bath1.width, model.bath1.width),
        (0.5 * model.bath2.gamma * model.bath2.width, model.bath2.width),
    ]
    n = cfg.truncation
    exact = exact_population_series(kernels, n, model.c0)
    additive = additive_population_series(kernels, n, model.c0)
    result = interference_order(kernels, n, model.c0)
    order_cell = float(result.order) if result.order is not None else None
    gap_cell = result.gap if result.order is not None else None
    rows = tuple(
        (order_cell, gap_cell, float(k), exact[k], additive[k]) for k in range(n + 1)
    )
    return ResultTable(
        ("order", "gap", "n", "exact_coeff", "additive_coeff"),
        rows,
        tuple(_base_metadata(cfg)),
    )


def _lambda_pd_columns(params: LambdaParams, times: np.ndarray):
    pd_quantum = quantum_darkstate_solution(params, times)
    additive = additive_me_solve(params, times)
    me2 = me2_solve(params, times)
    markov = markovian_dephasing_solve(params, times)
    return (
        pd_quantum,
        dark_state_population(additive),
        dark_state_population(me2),
        dark_state_population(markov),
        min_eigenvalue(me2),
    )


def _run_lambda_compare(cfg: ScenarioConfig) -> ResultTable:
    times = cfg.grid.times()
    pd_q, pd_a, pd_m2, pd_mk, min_eig = _lambda_pd_columns(cfg.model, times)
    rows = tuple(
        (
            float(times[i]),
            float(pd_q[i]),
            float(pd_a[i]),
            float(pd_m2[i]),
            float(pd_mk[i]),
            float(min_eig[i]),
        )
        for i in range(times.size)
    )
    return ResultTable(
        ("t", "p_d_quantum", "p_d_additive", "p_d_me2", "p_d_markovian", "min_eigenvalue_me2"),
        rows,
        tuple(_base_metadata(cfg)),
    )


def _run_lambda_sweep(cfg: ScenarioConfig, threads: int) -> ResultTable:
    base = cfg.model
    times = cfg.grid.times()
    swept_name = cfg.sweep.parameter

    def final_infidelities(value: float) -> tuple[float, float, float, float]:
        if swept_name == "gamma":
            params = LambdaParams(value, value, value, base.gamma_perp, base.kernel)
        else:
            params = LambdaParams(value, base.gamma1, base.gamma2, base.gamma_perp, base.kernel)
        pd_q, pd_a, pd_m2, pd_mk, _ = _lambda_pd_columns(params, times)
        return (
            1.0 - float(pd_q[-1]),
            1.0 - float(pd_a[-1]),
            1.0 - float(pd_m2[-1]),
            1.0 - float(pd_mk[-1]),
        )

    results = _sweep_map(final_infidelities, cfg.sweep.values, threads)
    rows = tuple((v, *r) for v, r in zip(cfg.sweep.values, results))
    return ResultTable(
        (
            swept_name,
            "delta_f_quantum",
            "delta_f_additive",
            "delta_f_me2",
            "delta_f_markovian",
        ),
        rows,
        tuple(_base_metadata(cfg)),
    )


def run_scenario(cfg: ScenarioConfig, threads: int = 1) -> ResultTable:
    """Execute a validated configuration and return its result table.

    Sweep scenarios may evaluate their points on ``threads`` workers; rows
    are always assembled in input order, so the output is identical for any
    thread count.  Module-level failures are re-raised as
    :class:`~multibath.errors.SolverError` with scenario context.
    """
    if threads < 1:
        raise ConfigError("invalid-value", f"threads must be >= 1, got {threads}")
    try:
        if cfg.scenario == "tls-run":
            return _run_tls_run(cfg)
        if cfg.scenario == "tls-sweep-lambda":
            return _run_tls_sweep_lambda(cfg, threads)
        if cfg.scenario == "series-order":
            return _run_series_order(cfg)
        if cfg.scenario == "lambda-compare":
            return _run_lambda_compare(cfg)
        if cfg.scenario in ("lambda-sweep-gamma", "lambda-sweep-omega"):
            return _run_lambda_sweep(cfg, threads)
    except ConfigError:
        raise
    except (MultibathError, ValueError, ArithmeticError) as exc:
        raise SolverError(f"scenario {cfg.scenario!r}: {exc}") from exc
    raise ConfigError("unknown-scenario", f"unknown scenario {cfg.scenario!r}")


def emit_csv(table: ResultTable, path) -> None:
    """Write a result table as CSV with a '#'-prefixed metadata preamble.

    Numbers carry 17 significant digits ('.' decimal separator), cells are
    comma-separated, lines end with a single newline, and blank cells mark
    poles or absent values.  Identical tables produce identical bytes.
    """
    lines = [f"# {key} = {value}" for key, value in table.metadata]
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join("" if c is None else format(c, ".17g") for c in row))
    payload = "\n".join(lines) + "\n"
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(payload)
    except OSError as exc:
        raise SolverError(f"cannot write {path}: {exc}") from exc
