"""Runners behind the command-line subcommands.

Each runner returns plain rows plus per-point records so that the CLI
(or a script) can decide how to write them.  Point failures never abort
a scan: the numerical columns of that row carry an error token instead.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .analytics import (
    boundary_temperatures,
    g2_analytic,
    g2_analytic_zero_t,
    optimal_approx,
    optimal_exact,
    optimality_residuals,
    physical_estimate,
    SILICON_DENSITY,
    SILICON_YOUNGS_MODULUS,
)
from .config import RunConfig, SweepSpec
from .errors import ConfigError, PhononBlockError
from .fock import FockBasis
from .lindblad import SystemParams, build_liouvillian, thermal_occupancy
from .observables import (
    g2_tau,
    g2_zero,
    mean_phonon,
    phonon_distribution,
    poisson_reference,
)
from .solver import steady_state

__all__ = [
    "WORKERS_ENV",
    "PointRecord",
    "Table",
    "worker_count",
    "parallel_map",
    "error_token",
    "solve_point",
    "analytic_or_token",
    "run_steady",
    "run_sweep",
    "run_tscan",
    "run_g2tau",
    "run_fscan",
    "run_optimal",
    "run_feasibility",
    "oscillation_period",
    "antibunching_window",
]

WORKERS_ENV = "PHONONBLOCK_WORKERS"
# the closed forms assume strong coupling
ANALYTIC_MIN_J = 5.0


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw.strip() == "":
        try:
            return max(1, len(os.sched_getaffinity(0)))
        except AttributeError:
            return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1")
    return n


def parallel_map(func, items, workers: int | None = None) -> list:
    """Ordered map; runs in-process when one worker is requested."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (8 * workers))))


def error_token(exc: BaseException) -> str:
    return f"ERR:{type(exc).__name__}"


@dataclass
class PointRecord:
    """Manifest entry for one computed point."""

    index: int
    inputs: dict
    residual: float | None = None
    method: str | None = None
    error: str | None = None
    warnings: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "inputs": self.inputs,
            "residual": self.residual,
            "method": self.method,
            "error": self.error,
            "warnings": self.warnings,
        }


@dataclass
class Table:
    """Header, rows and manifest records produced by a runner."""

    header: list[str]
    rows: list[list]
    records: list[PointRecord] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def errors(self) -> list[str]:
        return [r.error for r in self.records if r.error]


def _messages(caught) -> list[str]:
    return sorted({f"{w.category.__name__}: {w.message}" for w in caught})


def solve_point(params: SystemParams, basis: FockBasis, mode: int = 1) -> dict:
    """Steady state and equal-time observables; errors become tokens."""
    out = {"g2": None, "mean": None, "residual": None, "method": None,
           "error": None, "warnings": [], "rho": None}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            report = steady_state(build_liouvillian(params, basis))
            out.update(residual=report.residual, method=report.method, rho=report.rho)
            out["mean"] = mean_phonon(report.rho, mode)
            out["g2"] = g2_zero(report.rho, mode)
        except (PhononBlockError, ValueError, ArithmeticError) as exc:
            out["error"] = error_token(exc)
    out["warnings"] = _messages(caught)
    return out


def analytic_or_token(params: SystemParams):
    if params.coupling_j < ANALYTIC_MIN_J * params.gamma:
        return "n/a"
    try:
        return g2_analytic(params)
    except (PhononBlockError, ArithmeticError) as exc:
        return error_token(exc)


def _value(x, token):
    return token if x is None else x


# ---------------------------------------------------------------- steady

def run_steady(cfg: RunConfig) -> Table:
    params = cfg.system_params()
    basis = cfg.basis
    mode = cfg.mode
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = steady_state(build_liouvillian(params, basis))
        g2 = g2_zero(report.rho, mode)
    dist = phonon_distribution(report.rho, mode)
    ref = poisson_reference(dist.mean, len(dist) - 1)
    rows = [[m, dist[m], ref[m]] for m in range(len(dist))]
    summary = {
        "g2_zero": g2,
        "mean_phonon_1": mean_phonon(report.rho, 1),
        "mean_phonon_2": mean_phonon(report.rho, 2),
        "residual": report.residual,
        "method": report.method,
    }
    if params.coupling_j >= ANALYTIC_MIN_J * params.gamma:
        summary["g2_analytic"] = analytic_or_token(params)
    else:
        summary["g2_analytic"] = None
        summary["note"] = (
            f"analytic g2 suppressed: J = {params.coupling_j:g} < "
            f"{ANALYTIC_MIN_J:g} gamma is outside the strong-coupling regime"
        )
    record = PointRecord(0, _param_dict(params), report.residual, report.method,
                         warnings=_messages(caught))
    return Table(["m", "p_m", "poisson_m"], rows, [record], summary)


def _param_dict(p: SystemParams) -> dict:
    return {k: getattr(p, k) for k in
            ("delta", "coupling_j", "kerr_u", "drive_f", "gamma", "n_th")}


# ---------------------------------------------------------------- sweep

def _axis_override(name: str, value: float) -> dict:
    if name == "temperature":
        return {"n_th": thermal_occupancy(value)}
    return {name: value}


def _sweep_job(job):
    spec, a, b = job
    params = spec.fixed.with_(**_axis_override(spec.axis1.name, a),
                              **_axis_override(spec.axis2.name, b))
    basis = FockBasis(*spec.truncation)
    res = solve_point(params, basis)
    if "distribution" in spec.outputs and res["rho"] is not None:
        res["p"] = phonon_distribution(res["rho"], 1).probabilities[:3].tolist()
    res["rho"] = None
    res["params"] = _param_dict(params)
    return res


def run_sweep(spec: SweepSpec, workers: int | None = None) -> Table:
    points = list(spec.points())
    results = parallel_map(_sweep_job, [(spec, a, b) for a, b in points], workers)
    header = [spec.axis1.name, spec.axis2.name]
    if "g2_zero" in spec.outputs:
        header += ["g2_zero", "log10_g2_zero"]
    if "mean_phonon" in spec.outputs:
        header.append("mean_phonon")
    if "distribution" in spec.outputs:
        header += ["p0", "p1", "p2"]
    if "residual" in spec.outputs:
        header.append("residual")
    rows, records = [], []
    for i, ((a, b), res) in enumerate(zip(points, results)):
        tok = res["error"]
        row = [a, b]
        if "g2_zero" in spec.outputs:
            g2 = res["g2"]
            row.append(_value(g2, tok))
            if g2 is None:
                row.append(tok)
            else:
                row.append(math.log10(g2) if g2 > 0 else "-inf")
        if "mean_phonon" in spec.outputs:
            row.append(_value(res["mean"], tok))
        if "distribution" in spec.outputs:
            row += res.get("p") or [tok] * 3
        if "residual" in spec.outputs:
            row.append(_value(res["residual"], tok))
        rows.append(row)
        records.append(PointRecord(i, res["params"], res["residual"], res["method"],
                                   tok, res["warnings"]))
    return Table(header, rows, records)


# ---------------------------------------------------------------- tscan

def _g2_job(job):
    params, basis = job
    res = solve_point(params, basis)
    res["rho"] = None
    return res


def run_tscan(cfg: RunConfig, workers: int | None = None) -> Table:
    axis = cfg.axis("t", "temperature")
    temps = list(axis.values())
    if cfg.get("include_zero", False):
        temps = [0.0] + temps
    base = cfg.system_params(n_th=0.0)
    basis = cfg.basis
    bounds = boundary_temperatures(base)
    jobs = [(base.with_(n_th=thermal_occupancy(t)), basis) for t in temps]
    results = parallel_map(_g2_job, jobs, workers)
    rows, records = [], []
    for i, (t, (p, _), res) in enumerate(zip(temps, jobs, results)):
        tok = res["error"]
        rows.append([t, p.n_th, _value(res["g2"], tok), analytic_or_token(p),
                     bounds.regime(t)])
        records.append(PointRecord(i, _param_dict(p), res["residual"], res["method"],
                                   tok, res["warnings"]))
    summary = {"t1_over_t0": bounds.t1_over_t0, "t2_over_t0": bounds.t2_over_t0}
    return Table(["t_over_t0", "n_th", "g2_numerical", "g2_analytic", "regime"],
                 rows, records, summary)


# ---------------------------------------------------------------- fscan

def run_fscan(cfg: RunConfig, workers: int | None = None) -> Table:
    axis = cfg.axis("f", "drive_f")
    forces = axis.values()
    basis = cfg.basis
    jobs, temps = [], []
    for t in cfg.temperatures():
        for f in forces:
            p = cfg.system_params(drive_f=float(f), n_th=thermal_occupancy(t))
            jobs.append((p, basis))
            temps.append(t)
    results = parallel_map(_g2_job, jobs, workers)
    rows, records = [], []
    for i, (t, (p, _), res) in enumerate(zip(temps, jobs, results)):
        tok = res["error"]
        rows.append([t, p.drive_f, _value(res["g2"], tok), analytic_or_token(p)])
        records.append(PointRecord(i, _param_dict(p), res["residual"], res["method"],
                                   tok, res["warnings"]))
    return Table(["t_over_t0", "drive_f", "g2_numerical", "g2_analytic"], rows, records)


# ---------------------------------------------------------------- g2(tau)

def _local_maxima(taus, values, min_prominence: float = 0.25) -> np.ndarray:
    """Dominant maxima, refined by a parabola through three samples.

    Peaks whose prominence is below ``min_prominence`` times the largest
    prominence are ignored, so shoulders do not halve the period.
    """
    v = np.asarray(values)
    idx, props = find_peaks(v, prominence=0.0)
    if len(idx) == 0:
        return np.array([])
    idx = idx[props["prominences"] >= min_prominence * props["prominences"].max()]
    out = []
    for i in idx:
        y0, y1, y2 = v[i - 1], v[i], v[i + 1]
        curv = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / curv if curv != 0 else 0.0
        out.append(taus[i] + shift * (taus[i + 1] - taus[i - 1]) / 2)
    return np.array(out)


def oscillation_period(taus, values) -> float:
    """Mean spacing of successive dominant maxima; NaN with fewer than two."""
    peaks = _local_maxima(np.asarray(taus, float), values)
    if len(peaks) < 2:
        return math.nan
    return float((peaks[-1] - peaks[0]) / (len(peaks) - 1))


def antibunching_window(taus, values) -> float:
    """Full width of the g2 < 1 region centred on zero delay.

    g2(tau) is even in tau for a stationary state, so the width is twice
    the first delay at which the curve climbs back to 1.  NaN when g2(0)
    is not below 1 or the curve never recovers on the grid.
    """
    taus = np.asarray(taus, float)
    v = np.asarray(values, float)
    if not v[0] < 1:
        return math.nan
    above = np.nonzero(v >= 1)[0]
    if len(above) == 0:
        return math.nan
    k = above[0]
    t = taus[k - 1] + (1 - v[k - 1]) * (taus[k] - taus[k - 1]) / (v[k] - v[k - 1])
    return float(2 * t)


def _g2tau_job(job):
    params, basis, mode, taus = job
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            liou = build_liouvillian(params, basis)
            report = steady_state(liou)
            series = g2_tau(liou, report.rho, mode, taus)
            out = {"values": series.values, "residual": report.residual,
                   "method": report.method, "error": None,
                   "g2_zero": g2_zero(report.rho, mode)}
        except (PhononBlockError, ValueError, ArithmeticError) as exc:
            out = {"values": None, "residual": None, "method": None,
                   "error": error_token(exc), "g2_zero": None}
    out["warnings"] = _messages(caught)
    return out


def run_g2tau(cfg: RunConfig, workers: int | None = None) -> Table:
    params = cfg.system_params()
    tau_max = cfg.require("tau_max")
    step = cfg.require("tau_step")
    if not (tau_max > 0 and step > 0):
        raise ConfigError("tau_max and tau_step must be positive")
    if params.coupling_j > 0:
        limit = 2 * math.pi / params.coupling_j / 20
        if step > limit * (1 + 1e-12):
            raise ConfigError(
                f"tau_step {step:g} does not resolve the oscillation: "
                f"need <= (2 pi / J) / 20 = {limit:.6g}"
            )
    n = int(round(tau_max / step))
    taus = np.arange(n + 1) * step
    temps = cfg.temperatures()
    jobs = [(params.with_(n_th=thermal_occupancy(t)), cfg.basis, cfg.mode, taus)
            for t in temps]
    results = parallel_map(_g2tau_job, jobs, workers)
    rows, records, fits = [], [], {}
    for i, (t, (p, *_), res) in enumerate(zip(temps, jobs, results)):
        tok = res["error"]
        vals = res["values"]
        for k, tau in enumerate(taus):
            rows.append([t, float(tau), tok if vals is None else float(vals[k])])
        fit = {"period": None, "window": None, "g2_zero": res["g2_zero"]}
        if vals is not None:
            fit["period"] = oscillation_period(taus, vals)
            fit["window"] = antibunching_window(taus, vals)
        fits[f"{t:g}"] = fit
        records.append(PointRecord(i, _param_dict(p), res["residual"], res["method"],
                                   tok, res["warnings"]))
    summary = {
        "expected_period": 2 * math.pi / params.coupling_j if params.coupling_j else None,
        "expected_window": math.pi / params.coupling_j if params.coupling_j else None,
        "fits": fits,
    }
    return Table(["t_over_t0", "tau", "g2_tau"], rows, records, summary)


# ---------------------------------------------------------------- optimal

def run_optimal(cfg: RunConfig) -> Table:
    j = cfg.require("coupling_j")
    gamma = cfg.get("gamma", 1.0)
    branch = cfg.get("branch", 1)
    if not (j > 0 and gamma > 0):
        raise ConfigError("coupling_j and gamma must be positive")
    exact = optimal_exact(j, gamma, branch=branch)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        approx = optimal_approx(j, gamma)
    rows = []
    for label, pt in (("exact", exact), ("approx", approx)):
        r1, r2 = optimality_residuals(pt.delta_opt, pt.u_opt, j, gamma)
        p = SystemParams(pt.delta_opt, j, pt.u_opt, 0.0, gamma)
        rows.append([label, j, gamma, pt.delta_opt, pt.u_opt, r1, r2, g2_analytic_zero_t(p)])
    record = PointRecord(0, {"coupling_j": j, "gamma": gamma, "branch": branch},
                         warnings=_messages(caught))
    header = ["kind", "coupling_j", "gamma", "delta", "kerr_u",
              "residual_1", "residual_2", "g2_zero_t"]
    return Table(header, rows, [record])


# ---------------------------------------------------------------- feasibility

def run_feasibility(cfg: RunConfig) -> Table:
    try:
        est = physical_estimate(
            cfg.require("width_d"),
            cfg.require("length_l"),
            cfg.get("youngs_e", SILICON_YOUNGS_MODULUS),
            cfg.get("density_rho", SILICON_DENSITY),
            cfg.get("gamma_si"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = [
        ["omega0", est.omega0, "rad/s"],
        ["frequency", est.frequency, "Hz"],
        ["kerr_u", est.u_physical, "1/s"],
        ["t0", est.t0, "K"],
    ]
    if "temperature_k" in cfg:
        t = cfg.get("temperature_k")
        if t < 0:
            raise ConfigError("temperature_k must be non-negative")
        rows.append(["temperature", t, "K"])
        rows.append(["n_th", est.n_th_at(t), "1"])
    if "coupling_si" in cfg:
        rows.append(["antibunching_window", est.window_seconds(cfg.get("coupling_si")), "s"])
    if est.gamma:
        q = est.quality_factors()
        rows.append(["q_omega0_over_gamma", q["omega0_over_gamma"], "1"])
        rows.append(["q_f0_over_gamma", q["f0_over_gamma"], "1"])
    return Table(["quantity", "value", "unit"], rows,
                 [PointRecord(0, dict(cfg.values))])
