"""Bounded maximization of the steady-state current over the dephasing rate.

ENAQT current curves are smooth and single-peaked on a logarithmic rate
axis, and every evaluation costs a steady-state solve, so the search is a
coarse log-spaced scan followed by golden-section refinement in log space.
Trial points where the steady-state solver fails are skipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .lindblad import SteadyStateError

DEFAULT_BOUNDS = (1e-3, 50.0)
CLIP_TOL = 1e-3
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

INTERIOR = "interior"
CLIPPED_LOW = "clipped_low"
CLIPPED_HIGH = "clipped_high"
FAILED = "failed"


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of a bounded peak search over the dephasing rate."""

    gamma_opt: float
    current_max: float
    status: str
    evaluations: int
    curve: tuple[tuple[float, float], ...] | None = None


def _classify(gamma: float, bounds: tuple[float, float]) -> str:
    if gamma <= bounds[0] + CLIP_TOL:
        return CLIPPED_LOW
    if gamma >= bounds[1] - CLIP_TOL:
        return CLIPPED_HIGH
    return INTERIOR


def find_optimal_dephasing(
    objective: Callable[[float], float],
    bounds: tuple[float, float] = DEFAULT_BOUNDS,
    n_grid: int = 40,
    rel_tol: float = 1e-4,
    current_rel_tol: float = 1e-8,
    record_curve: bool = False,
) -> OptimizationResult:
    """Maximize ``objective(gamma)`` on [bounds[0], bounds[1]].

    A 40-point log-spaced coarse scan brackets the peak, followed by
    golden-section refinement on the log axis to relative tolerance
    ``rel_tol``.  Solver failures at a trial point are skipped; the result
    is ``failed`` only if every coarse grid point fails.  Plateau ties are
    broken toward the smallest rate within ``current_rel_tol``.
    """
    lo, hi = bounds
    if not 0 < lo < hi:
        raise ValueError(f"invalid bounds {bounds}")

    samples: list[tuple[float, float]] = []
    evaluations = 0

    def evaluate(gamma: float) -> float:
        nonlocal evaluations
        evaluations += 1
        try:
            value = objective(gamma)
        except SteadyStateError:
            return -math.inf
        if not math.isfinite(value):
            return -math.inf
        samples.append((gamma, value))
        return value

    log_lo, log_hi = math.log(lo), math.log(hi)
    grid = [math.exp(log_lo + (log_hi - log_lo) * k / (n_grid - 1)) for k in range(n_grid)]
    grid_values = [evaluate(g) for g in grid]

    finite = [k for k, v in enumerate(grid_values) if v > -math.inf]
    if not finite:
        return OptimizationResult(math.nan, math.nan, FAILED, evaluations, () if record_curve else None)

    best_value = max(grid_values[k] for k in finite)
    best_idx = min(
        k for k in finite if grid_values[k] >= best_value - current_rel_tol * abs(best_value)
    )

    left = next((k for k in range(best_idx - 1, -1, -1) if k in set(finite)), None)
    right = next((k for k in range(best_idx + 1, n_grid) if k in set(finite)), None)
    a = math.log(grid[left]) if left is not None else log_lo
    b = math.log(grid[right]) if right is not None else log_hi

    # Golden-section refinement on the log axis.
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc = evaluate(math.exp(c))
    fd = evaluate(math.exp(d))
    while b - a > rel_tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = evaluate(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = evaluate(math.exp(d))

    peak_value = max(v for _, v in samples)
    gamma_opt = min(
        g for g, v in samples if v >= peak_value - current_rel_tol * abs(peak_value)
    )

    curve = tuple(sorted(samples)) if record_curve else None
    return OptimizationResult(gamma_opt, peak_value, _classify(gamma_opt, bounds), evaluations, curve)


def find_minimal_variance(
    objective: Callable[[float], float],
    bounds: tuple[float, float] = DEFAULT_BOUNDS,
    **kwargs,
) -> OptimizationResult:
    """Minimize ``objective`` (e.g. population variance) over the same bounds.

    Returns the minimizing rate; ``current_max`` holds the minimized value.
    """
    result = find_optimal_dephasing(lambda g: -objective(g), bounds, **kwargs)
    if result.status == FAILED:
        return result
    curve = None
    if result.curve is not None:
        curve = tuple((g, -v) for g, v in result.curve)
    return OptimizationResult(
        result.gamma_opt, -result.current_max, result.status, result.evaluations, curve
    )
