"""Scenario pipelines behind the CLI subcommands. Each returns the paths it wrote."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import Dataset, beat_period, fit_parameters, threshold_times
from .checks import run_all
from .core import basis_state, collective_operator
from .ensemble import InstrumentResponse, gauss_hermite_ensemble, hbt_trace, lifetime_trace
from .io import read_trace_csv, sha256_file, write_csv, write_json, write_trace_csv
from .observables import TimeSeries, intensity, mirror
from .scenario import ConfigError, Scenario

SUMMARY_COLUMNS = ["detuning_ueV", "tau_half_ns", "tau_e_ns", "tau_tenth_ns", "gated"]
HBT_COLUMNS = ["detuning_ueV", "g2_zero", "beat_period_ns"]
TAU_METHOD = "tau uncertainty: half sample spacing (heuristic)"
PLACEHOLDER_NOTE = "gamma1 = gamma2 = 1 ns^-1 placeholder, not calibrated"


def _map(fn, items, workers: int):
    # executor.map preserves input order, so results never depend on scheduling
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _tag(delta: float) -> str:
    return f"d{delta:g}"


def _meta(scenario: Scenario, **extra) -> dict:
    meta = dict(extra)
    if scenario.placeholder_gamma:
        meta["calibration"] = PLACEHOLDER_NOTE
    return meta


def _lifetime_states(scenario: Scenario):
    states = []
    if scenario.gated in ("both", "gated"):
        states.append(True)
    if scenario.gated in ("both", "ungated"):
        states.append(False)
    return states


def lifetime_point(scenario: Scenario, delta: float, gated: bool):
    """One wandering-averaged, IRF-convolved trace and its threshold times.

    The ungated case removes the second emitter (gamma2 = 0), leaving a
    single dephased emitter; wandering is then irrelevant and one node is used.
    """
    rho0 = basis_state(scenario.initial_state)
    irf = InstrumentResponse(scenario.sigma_irf)
    times = scenario.time.points()
    if gated:
        params = scenario.params.replace(delta=delta)
        ens = gauss_hermite_ensemble(delta, scenario.sigma_ueV, scenario.nodes)
    else:
        params = scenario.params.replace(delta=delta, gamma2=0.0)
        ens = gauss_hermite_ensemble(delta, 0.0, 1)
        if intensity(rho0, collective_operator(params.gamma1, 0.0)) <= 0:
            raise ConfigError(f"initial state {scenario.initial_state!r} leaves the ungated emitter dark", scenario.source)
    trace = lifetime_trace(params, ens, irf, times, rho0)
    return trace, threshold_times(trace, scenario.thresholds)


def _summary_row(delta, metrics, gated):
    return [delta, *metrics.times, "true" if gated else "false"]


def run_lifetime(scenario: Scenario, write_traces: bool = True, stem: str = "lifetime", config: dict | None = None):
    out = Path(scenario.out_dir)
    config = config or scenario.resolved()
    jobs = [(d, g) for d in scenario.detunings for g in _lifetime_states(scenario)]
    results = _map(lambda job: lifetime_point(scenario, *job), jobs, scenario.workers)
    paths = []
    if scenario.fmt == "json":
        payload = {"kind": stem, "thresholds": list(scenario.thresholds), "tau_method": "half sample spacing (heuristic)", "runs": []}
        for (d, g), (trace, m) in zip(jobs, results):
            run = {"detuning_ueV": d, "gated": g, "tau_ns": list(m.times), "tau_unc_ns": list(m.uncertainties), "peak_time_ns": m.peak_time}
            if write_traces:
                run["time_ns"] = trace.times
                run["value"] = trace.values
            payload["runs"].append(run)
        paths.append(write_json(out / f"{stem}.json", payload, config))
        return paths
    if write_traces:
        for (d, g), (trace, _) in zip(jobs, results):
            name = f"{stem}_{_tag(d)}_{'gated' if g else 'ungated'}.csv"
            meta = _meta(scenario, kind="intensity", mean_detuning_ueV=f"{d:g}", gated=str(g).lower(), normalisation="peak = 1")
            paths.append(write_trace_csv(out / name, trace.times, trace.values, config, **meta))
    rows = [_summary_row(d, m, g) for (d, g), (_, m) in zip(jobs, results)]
    unc = [f"{d:g}/{'gated' if g else 'ungated'}: " + " ".join(f"{u:.3g}" for u in m.uncertainties) for (d, g), (_, m) in zip(jobs, results)]
    meta = _meta(scenario, kind="lifetime-summary", thresholds=" ".join(f"{e:.6g}" for e in scenario.thresholds), tau_method=TAU_METHOD, tau_uncertainty_ns="; ".join(unc))
    paths.append(write_csv(out / f"{stem}_summary.csv", SUMMARY_COLUMNS, rows, config, **meta))
    return paths


def hbt_point(scenario: Scenario, delta: float):
    params = scenario.params.replace(delta=delta)
    ens = gauss_hermite_ensemble(delta, scenario.sigma_ueV, scenario.nodes)
    trace = hbt_trace(params, ens, scenario.hbt_time.points(), scenario.detector_sigma)
    return trace, float(trace.values[0]), beat_period(trace)


def run_hbt(scenario: Scenario, write_traces: bool = True, stem: str = "hbt", config: dict | None = None):
    out = Path(scenario.out_dir)
    config = config or scenario.resolved()
    deltas = scenario.detunings
    results = _map(lambda d: hbt_point(scenario, d), deltas, scenario.workers)
    paths = []
    if scenario.fmt == "json":
        payload = {"kind": stem, "runs": []}
        for d, (trace, g0, period) in zip(deltas, results):
            run = {"detuning_ueV": d, "g2_zero": g0, "beat_period_ns": period}
            if write_traces:
                full = mirror(trace)
                run["time_ns"] = full.times
                run["value"] = full.values
            payload["runs"].append(run)
        paths.append(write_json(out / f"{stem}.json", payload, config))
        return paths
    if write_traces:
        for d, (trace, _, _) in zip(deltas, results):
            full = mirror(trace)
            meta = _meta(scenario, kind="g2", mean_detuning_ueV=f"{d:g}", normalisation="stationary intensity squared")
            paths.append(write_trace_csv(out / f"{stem}_{_tag(d)}.csv", full.times, full.values, config, **meta))
    rows = [[d, g0, period] for d, (_, g0, period) in zip(deltas, results)]
    meta = _meta(scenario, kind="hbt-summary", beat_period="empty when no beat is resolved")
    paths.append(write_csv(out / f"{stem}_summary.csv", HBT_COLUMNS, rows, config, **meta))
    return paths


def run_sweep(scenario: Scenario):
    """Dense detuning sweep: lifetime thresholds (gated and ungated) and HBT summaries."""
    config = scenario.resolved()
    life = replace(scenario, kind="lifetime", params=scenario.params.replace(gamma_p=0.0))
    paths = run_lifetime(life, write_traces=False, stem="sweep_lifetime", config=config)
    paths += run_hbt(scenario, write_traces=False, stem="sweep_hbt", config=config)
    return paths


def load_dataset(entry: dict) -> tuple[Dataset, dict]:
    path = Path(entry["path"])
    if not path.exists():
        raise FileNotFoundError(f"data file not found: {path}")
    times, values, errors, header = read_trace_csv(path)
    delta = entry.get("delta")
    if delta is None:
        if "mean_detuning_ueV" not in header:
            raise ConfigError(f"{path}: no 'delta' given and no mean_detuning_ueV header line")
        delta = float(header["mean_detuning_ueV"])
    keep = times >= -1e-12
    times, values = times[keep], values[keep]
    if errors is not None:
        errors = errors[keep]
    if times.size < 8 or abs(times[0]) > 1e-9:
        raise ConfigError(f"{path}: g2 data must include tau = 0 and at least 8 non-negative delays")
    order = np.argsort(times, kind="stable")
    times[0] = 0.0
    try:
        trace = TimeSeries(times[order], values[order], "g2")
        trace.step  # the model needs a uniform delay grid
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    info = {"path": str(path), "sha256": sha256_file(path), "delta_ueV": float(delta), "points": int(times.size)}
    return Dataset(float(delta), trace, None if errors is None else errors[order]), info


def run_fit(scenario: Scenario):
    if not scenario.datasets:
        raise ConfigError("fit needs at least one dataset (config 'datasets' or positional files)", scenario.source)
    loaded = [load_dataset(entry) for entry in scenario.datasets]
    datasets = [d for d, _ in loaded]
    opts = scenario.fit
    result = fit_parameters(
        datasets,
        scenario.params,
        init=tuple(opts["init"]),
        n_nodes=scenario.nodes,
        detector_sigma=scenario.detector_sigma,
        max_iter=opts["max_iter"],
        xatol=opts["xatol"],
        fatol=opts["fatol"],
    )
    payload = {"kind": "fit", "result": result.as_dict(), "inputs": [info for _, info in loaded]}
    return [write_json(Path(scenario.out_dir) / "fit_result.json", payload, scenario.resolved())]


def run_oracle_check(scenario: Scenario):
    """Returns (paths, results)."""
    results = run_all(scenario.oracle["random_sets"], scenario.oracle["seed"])
    out = Path(scenario.out_dir)
    config = scenario.resolved()
    if scenario.fmt == "json":
        payload = {"kind": "oracle-check", "checks": [{"name": r.name, "error": r.error, "tolerance": r.tolerance, "passed": r.passed} for r in results]}
        return [write_json(out / "oracle_check.json", payload, config)], results
    rows = [[r.name, r.error, r.tolerance, "pass" if r.passed else "FAIL"] for r in results]
    return [write_csv(out / "oracle_check.csv", ["check", "error", "tolerance", "status"], rows, config, kind="oracle-check")], results


def format_table(results) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'error':>10}  {'tol':>8}  status"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {r.error:>10.3e}  {r.tolerance:>8.1e}  {'pass' if r.passed else 'FAIL'}")
    return "\n".join(lines)


def expected_beat_period(delta: float) -> float:
    from .core import HBAR_UEV_NS

    return math.inf if delta == 0 else 2 * math.pi * HBAR_UEV_NS / abs(delta)

