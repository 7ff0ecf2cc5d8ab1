"""Disorder-ensemble experiments: sweeps, fits, comparisons, transients.

Every record in a sweep is an independent work item whose random stream is
derived deterministically from the master seed and its grid indices, so
results are byte-identical regardless of worker count or scheduling.
Sweeps emit a fixed-header CSV plus a JSON run manifest; those files are
the contract consumed by the figure renderer.
"""

from __future__ import annotations

import dataclasses
import json
import math
import multiprocessing
import os
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import pandas as pd

from . import __version__
from .chain import ChainSpec, average_ipr, build_chain
from .lindblad import (
    TransportSpec,
    build_liouvillian,
    dephasing_superoperator,
    population_variance,
    propagate,
    static_superoperator,
    steady_current,
    steady_state,
    wavepacket_variance,
)
from .optimizer import (
    DEFAULT_BOUNDS,
    FAILED,
    OptimizationResult,
    find_minimal_variance,
    find_optimal_dephasing,
)
from .redfield import BathSpec, bath_superoperator

CSV_COLUMNS = ("N", "eta", "sigma", "realization", "seed", "ipr", "gamma_opt", "i_max", "status")

DEFAULT_GRADIENTS = (0.0, 0.1, 1.0, 10.0)


def default_sigma_grid() -> tuple[float, ...]:
    """sigma = 0 plus 24 log-spaced disorder strengths in [0.01J, 10J]."""
    return (0.0,) + tuple(float(s) for s in np.geomspace(0.01, 10.0, 24))


@dataclass(frozen=True)
class SweepConfig:
    """Grid definition for a disorder-ensemble sweep."""

    lengths: tuple[int, ...]
    gradients: tuple[float, ...] = DEFAULT_GRADIENTS
    sigma_grid: tuple[float, ...] = field(default_factory=default_sigma_grid)
    realizations: int = 100
    master_seed: int = 2024
    model: str = "pure_dephasing"
    bath: BathSpec | None = None
    injection_site: int | None = None
    trap_rate: float = 3.0
    gamma_bounds: tuple[float, float] = DEFAULT_BOUNDS

    def __post_init__(self):
        if not self.lengths or not self.gradients or not self.sigma_grid:
            raise ValueError("lengths, gradients and sigma_grid must be non-empty")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if self.model not in ("pure_dephasing", "redfield"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.model == "redfield" and self.bath is None:
            raise ValueError("redfield model requires a bath")


@dataclass(frozen=True)
class SweepRecord:
    """One optimized chain realization."""

    n_sites: int
    gradient: float
    sigma: float
    realization: int
    seed: int
    ipr: float
    gamma_opt: float
    current_max: float
    status: str


@dataclass(frozen=True)
class FitResult:
    """Power-law fit gamma_opt(IPR) = A * IPR^(lambda + kappa*IPR)."""

    amplitude: float
    lambda_exp: float
    kappa_exp: float
    residual_sd: float
    cov_diag: tuple[float, float, float]
    fit_error: float
    n_points: int


def record_seed(master_seed: int, indices: tuple[int, ...]) -> int:
    """Stable 64-bit per-record seed from the master seed and grid indices."""
    stream = np.random.SeedSequence(master_seed, spawn_key=indices)
    return int(stream.generate_state(2, np.uint32).view(np.uint64)[0])


@lru_cache(maxsize=8)
def _cached_dephasing_superoperator(n_sites: int):
    return dephasing_superoperator(n_sites)


def _optimize_chain(h, config: SweepConfig) -> OptimizationResult:
    n_sites = h.shape[0] - 1
    transport = TransportSpec(0.0, config.trap_rate, config.injection_site)
    static = static_superoperator(h, transport)
    if config.model == "redfield":
        noise = bath_superoperator(h, config.bath)
    else:
        noise = _cached_dephasing_superoperator(n_sites)
    current_spec = TransportSpec(0.0, config.trap_rate, config.injection_site)

    def objective(gamma: float) -> float:
        rho = steady_state(static + gamma * noise)
        return steady_current(rho, current_spec, n_sites)

    return find_optimal_dephasing(objective, bounds=config.gamma_bounds)


def _evaluate_task(args) -> SweepRecord:
    config, indices = args
    n_idx, eta_idx, sigma_idx, real_idx = indices
    n = config.lengths[n_idx]
    eta = config.gradients[eta_idx]
    sigma = config.sigma_grid[sigma_idx]
    seed = record_seed(config.master_seed, indices)
    spec = ChainSpec(n, eta, sigma, seed=seed)
    h = build_chain(spec)
    ipr = average_ipr(h)
    result = _optimize_chain(h, config)
    return SweepRecord(
        n, eta, sigma, real_idx, seed, ipr, result.gamma_opt, result.current_max, result.status
    )


def run_sweep(
    config: SweepConfig, workers: int | None = None, progress: bool = False
) -> list[SweepRecord]:
    """Run one optimization per (N, eta, sigma, realization) grid point.

    Failed records are retained with status ``failed``; an exception is
    raised only if every record fails.
    """
    tasks = [
        (config, (ni, ei, si, ri))
        for ni in range(len(config.lengths))
        for ei in range(len(config.gradients))
        for si in range(len(config.sigma_grid))
        for ri in range(config.realizations)
    ]
    workers = workers if workers is not None else (os.cpu_count() or 1)
    if workers > 1 and len(tasks) > 1:
        with multiprocessing.Pool(workers) as pool:
            records = pool.map(_evaluate_task, tasks, chunksize=max(1, len(tasks) // (8 * workers)))
    else:
        records = []
        for k, task in enumerate(tasks):
            records.append(_evaluate_task(task))
            if progress and (k + 1) % 50 == 0:
                print(f"  {k + 1}/{len(tasks)} records", flush=True)
    if all(r.status == FAILED for r in records):
        raise RuntimeError("all sweep records failed")
    return records


def records_to_frame(records: list[SweepRecord]) -> pd.DataFrame:
    frame = pd.DataFrame(
        {
            "N": [r.n_sites for r in records],
            "eta": [r.gradient for r in records],
            "sigma": [r.sigma for r in records],
            "realization": [r.realization for r in records],
            "seed": [r.seed for r in records],
            "ipr": [r.ipr for r in records],
            "gamma_opt": [r.gamma_opt for r in records],
            "i_max": [r.current_max for r in records],
            "status": [r.status for r in records],
        }
    )
    return frame


def aggregate(records: list[SweepRecord], keys: tuple[str, ...] = ("N", "eta", "sigma")) -> pd.DataFrame:
    """Per-group statistics over non-failed records, with clipped fractions."""
    if not records:
        raise ValueError("no records to aggregate")
    frame = records_to_frame(records)
    groups = []
    for key_values, group in frame.groupby(list(keys)):
        ok = group[group["status"] != FAILED]
        row = dict(zip(keys, key_values if isinstance(key_values, tuple) else (key_values,)))
        row["count"] = len(group)
        row["failed_frac"] = 1.0 - len(ok) / len(group)
        row["clipped_low_frac"] = float((group["status"] == "clipped_low").mean())
        row["clipped_high_frac"] = float((group["status"] == "clipped_high").mean())
        if len(ok):
            for column in ("ipr", "gamma_opt", "i_max"):
                row[f"{column}_mean"] = float(ok[column].mean())
                row[f"{column}_std"] = float(ok[column].std(ddof=0))
                row[f"{column}_min"] = float(ok[column].min())
                row[f"{column}_max"] = float(ok[column].max())
        groups.append(row)
    return pd.DataFrame(groups)


def fit_power_law(records: list[SweepRecord], min_records: int = 10) -> FitResult:
    """Log-space least squares of gamma_opt against IPR.

    Uses interior, zero-gradient records only; the model is linear in
    (log A, lambda, kappa) after taking logs, and the quoted fit error is
    the quadrature sum of the covariance-matrix diagonal.
    """
    selected = [
        r for r in records if r.gradient == 0 and r.status == "interior" and r.gamma_opt > 0
    ]
    if len(selected) < min_records:
        raise ValueError(
            f"need at least {min_records} interior zero-gradient records, got {len(selected)}"
        )
    log_ipr = np.log(np.array([r.ipr for r in selected]))
    ipr = np.array([r.ipr for r in selected])
    log_gamma = np.log(np.array([r.gamma_opt for r in selected]))

    design = np.column_stack([np.ones_like(log_ipr), log_ipr, ipr * log_ipr])
    coeffs, _, rank, _ = np.linalg.lstsq(design, log_gamma, rcond=None)
    if rank < 3:
        raise ValueError("power-law fit is underdetermined")
    residuals = log_gamma - design @ coeffs
    dof = max(len(selected) - 3, 1)
    variance = float(residuals @ residuals) / dof
    covariance = variance * np.linalg.inv(design.T @ design)
    cov_diag = tuple(float(c) for c in np.diag(covariance))
    return FitResult(
        amplitude=float(np.exp(coeffs[0])),
        lambda_exp=float(coeffs[1]),
        kappa_exp=float(coeffs[2]),
        residual_sd=float(np.std(residuals, ddof=3)) if len(selected) > 3 else 0.0,
        cov_diag=cov_diag,
        fit_error=float(np.sqrt(sum(cov_diag))),
        n_points=len(selected),
    )


@dataclass(frozen=True)
class UniformisationRecord:
    """Paired optima: peak current vs minimal population variance."""

    n_sites: int
    gradient: float
    sigma: float
    realization: int
    seed: int
    ipr: float
    gamma_current: float
    current_status: str
    gamma_variance: float
    variance_status: str


def _uniformisation_task(args) -> UniformisationRecord:
    config, indices = args
    n_idx, eta_idx, sigma_idx, real_idx = indices
    n = config.lengths[n_idx]
    eta = config.gradients[eta_idx]
    sigma = config.sigma_grid[sigma_idx]
    seed = record_seed(config.master_seed, indices)
    h = build_chain(ChainSpec(n, eta, sigma, seed=seed))
    ipr = average_ipr(h)
    transport = TransportSpec(0.0, config.trap_rate, config.injection_site)
    static = static_superoperator(h, transport)
    noise = _cached_dephasing_superoperator(n)

    def current(gamma: float) -> float:
        return steady_current(steady_state(static + gamma * noise), transport, n)

    def variance(gamma: float) -> float:
        return population_variance(steady_state(static + gamma * noise), n)

    peak = find_optimal_dephasing(current, bounds=config.gamma_bounds)
    flat = find_minimal_variance(variance, bounds=config.gamma_bounds)
    return UniformisationRecord(
        n, eta, sigma, real_idx, seed, ipr,
        peak.gamma_opt, peak.status, flat.gamma_opt, flat.status,
    )


def uniformisation_comparison(
    config: SweepConfig, workers: int | None = None
) -> list[UniformisationRecord]:
    """Optimize current and separately minimize population variance per chain."""
    if config.model != "pure_dephasing":
        raise ValueError("uniformisation comparison is defined for pure dephasing")
    tasks = [
        (config, (ni, ei, si, ri))
        for ni in range(len(config.lengths))
        for ei in range(len(config.gradients))
        for si in range(len(config.sigma_grid))
        for ri in range(config.realizations)
    ]
    workers = workers if workers is not None else (os.cpu_count() or 1)
    if workers > 1 and len(tasks) > 1:
        with multiprocessing.Pool(workers) as pool:
            return pool.map(_uniformisation_task, tasks)
    return [_uniformisation_task(task) for task in tasks]


def gradient_only_scan(
    lengths: tuple[int, ...],
    eta_grid: tuple[float, ...],
    trap_rate: float = 3.0,
    gamma_bounds: tuple[float, float] = DEFAULT_BOUNDS,
) -> list[SweepRecord]:
    """Ordered-chain scan over a fine gradient grid (no disorder)."""
    config = SweepConfig(
        lengths=lengths,
        gradients=eta_grid,
        sigma_grid=(0.0,),
        realizations=1,
        trap_rate=trap_rate,
        gamma_bounds=gamma_bounds,
    )
    return run_sweep(config, workers=1)


@dataclass(frozen=True)
class TransientResult:
    """Wavepacket-variance time series for one closed-chain dephasing rate."""

    gamma: float
    times: np.ndarray
    variances: np.ndarray
    steady_value: float
    convergence_time: float | None


def transient_experiment(
    n_sites: int = 41,
    gammas: tuple[float, ...] = (0.5, 2.0, 10.0),
    times: np.ndarray | None = None,
    band: float = 0.01,
) -> list[TransientResult]:
    """Closed-chain spreading of a centre-localised state, per dephasing rate.

    The steady value is the uniform-population variance; the convergence
    time is the first instant after which the trace stays within ``band``
    of it.
    """
    if n_sites % 2 == 0:
        raise ValueError("transient experiment requires an odd chain length")
    if times is None:
        times = np.linspace(0.0, 2000.0, 801)
    center = (n_sites - 1) // 2
    rho0 = np.zeros((n_sites, n_sites), dtype=complex)
    rho0[center, center] = 1.0
    h = build_chain(ChainSpec(n_sites))
    offsets = np.arange(n_sites) - center
    steady_value = float(np.sum(offsets**2) / n_sites)

    results = []
    for gamma in gammas:
        transport = TransportSpec(gamma, trap_rate=0.0)
        liouvillian = build_liouvillian(h, transport)
        states = propagate(liouvillian, rho0, times)
        variances = np.array([wavepacket_variance(rho, n_sites) for rho in states])
        inside = np.abs(variances - steady_value) <= band * steady_value
        convergence = None
        for k in range(len(times)):
            if inside[k:].all():
                convergence = float(times[k])
                break
        results.append(TransientResult(gamma, times, variances, steady_value, convergence))
    return results


def _format_float(value: float) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{value:.12g}"


def write_records_csv(records: list[SweepRecord], path) -> None:
    """Fixed-header CSV, one row per record (the figure-renderer contract)."""
    with open(path, "w") as handle:
        handle.write(",".join(CSV_COLUMNS) + "\n")
        for r in records:
            handle.write(
                f"{r.n_sites},{_format_float(r.gradient)},{_format_float(r.sigma)},"
                f"{r.realization},{r.seed},{_format_float(r.ipr)},"
                f"{_format_float(r.gamma_opt)},{_format_float(r.current_max)},{r.status}\n"
            )


def read_records_csv(path) -> list[SweepRecord]:
    frame = pd.read_csv(path)
    missing = set(CSV_COLUMNS) - set(frame.columns)
    if missing:
        raise ValueError(f"CSV {path} is missing columns: {sorted(missing)}")
    return [
        SweepRecord(
            int(row["N"]), float(row["eta"]), float(row["sigma"]),
            int(row["realization"]), int(row["seed"]), float(row["ipr"]),
            float(row["gamma_opt"]), float(row["i_max"]), str(row["status"]),
        )
        for _, row in frame.iterrows()
    ]


def clipped_fractions(records: list[SweepRecord]) -> dict[str, float]:
    total = max(len(records), 1)
    return {
        "clipped_low": sum(r.status == "clipped_low" for r in records) / total,
        "clipped_high": sum(r.status == "clipped_high" for r in records) / total,
        "failed": sum(r.status == FAILED for r in records) / total,
    }


def write_manifest(path, config, records: list[SweepRecord] | None, runtime_seconds: float, extra: dict | None = None) -> None:
    """JSON run manifest: config echo, code version, timing, clip fractions."""

    def _encode(obj):
        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            return {k: _encode(v) for k, v in dataclasses.asdict(obj).items()}
        if isinstance(obj, (tuple, list)):
            return [_encode(v) for v in obj]
        return obj

    manifest = {
        "version": __version__,
        "config": _encode(config),
        "runtime_seconds": runtime_seconds,
        "generated_unix_time": time.time(),
    }
    if records is not None:
        manifest["records"] = len(records)
        manifest["clipped_fractions"] = clipped_fractions(records)
    if extra:
        manifest.update(extra)
    with open(path, "w") as handle:
        json.dump(manifest, handle, indent=2)
        handle.write("\n")
