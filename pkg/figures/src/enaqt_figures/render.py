"""Static figure rendering from transport-sweep CSV outputs.

The renderer consumes the fixed-header CSV files written by the sweep
tooling and produces deterministic PNG/SVG images: identical inputs give
byte-identical files.  Input files are never modified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import matplotlib
import numpy as np
import pandas as pd

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SWEEP_COLUMNS = ("N", "eta", "sigma", "realization", "seed", "ipr", "gamma_opt", "i_max", "status")
UNIFORMISATION_COLUMNS = (
    "N", "eta", "sigma", "realization", "seed", "ipr",
    "gamma_opt_current", "current_status", "gamma_min_variance", "variance_status",
)
DYNAMICS_COLUMNS = ("t", "gamma", "variance")

# Deterministic output: fixed style, no timestamps in image metadata.
_RC = {
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "enaqt-figures",
}

_ETA_COLOURS = {0.0: "tab:blue", 0.1: "tab:orange", 1.0: "tab:green", 10.0: "tab:red"}


class FigureError(Exception):
    """Base failure for figure rendering."""


class SchemaError(FigureError):
    """An input file is missing or does not match its CSV contract."""


class NoDataError(FigureError):
    """The filtered dataset is empty; no image is produced."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure to render: id, input CSVs, output image, options."""

    figure: str
    inputs: tuple[Path, ...]
    output: Path
    options: Mapping[str, object] = field(default_factory=dict)


def load_csv(path: Path, columns: tuple[str, ...]) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"input file not found: {path}")
    frame = pd.read_csv(path)
    missing = set(columns) - set(frame.columns)
    if missing:
        raise SchemaError(f"{path}: missing columns {sorted(missing)}")
    return frame


def _colour(eta: float) -> str:
    return _ETA_COLOURS.get(float(eta), "tab:gray")


def _require_rows(frame: pd.DataFrame, description: str) -> pd.DataFrame:
    if frame.empty:
        raise NoDataError(f"no data: {description}")
    return frame


def binned_means(ipr: np.ndarray, values: np.ndarray, width: float = 0.5):
    """Mean of ``values`` in IPR bins of fixed width; empty bins dropped."""
    if len(ipr) == 0:
        return np.array([]), np.array([])
    edges = np.arange(np.floor(ipr.min() / width) * width, ipr.max() + width, width)
    centres, means = [], []
    for lo, hi in zip(edges, edges[1:]):
        mask = (ipr >= lo) & (ipr < hi)
        if mask.any():
            centres.append((lo + hi) / 2)
            means.append(values[mask].mean())
    return np.array(centres), np.array(means)


def _render_fig3(frames, options, ax):
    """Ensemble-mean IPR against disorder strength, std bands per gradient."""
    frame = _require_rows(frames[0][frames[0]["sigma"] > 0], "fig3 needs sigma > 0 rows")
    for eta, group in frame.groupby("eta"):
        stats = group.groupby("sigma")["ipr"].agg(["mean", "std"])
        ax.plot(stats.index, stats["mean"], color=_colour(eta), label=f"$\\eta$ = {eta:g}")
        ax.fill_between(
            stats.index, stats["mean"] - stats["std"], stats["mean"] + stats["std"],
            color=_colour(eta), alpha=0.25, linewidth=0,
        )
    ax.set_xscale("log")
    ax.set_xlabel("disorder strength $\\sigma$ / J")
    ax.set_ylabel("average IPR")
    ax.legend()


def _render_fig4(frames, options, ax):
    """Optimal dephasing rate against IPR, colour-coded by gradient."""
    frame = frames[0][frames[0]["status"] == "interior"]
    etas = options.get("eta")
    if etas is not None:
        frame = frame[frame["eta"].isin(list(np.atleast_1d(etas)))]
    frame = _require_rows(frame, "fig4 needs interior records")
    width = float(options.get("bin_width", 0.5))
    for eta, group in frame.groupby("eta"):
        ax.scatter(group["ipr"], group["gamma_opt"], s=6, alpha=0.35,
                   color=_colour(eta), label=f"$\\eta$ = {eta:g}", linewidths=0)
        centres, means = binned_means(group["ipr"].to_numpy(), group["gamma_opt"].to_numpy(), width)
        ax.plot(centres, means, color=_colour(eta), linewidth=1.5)
    ax.set_yscale("log")
    ax.set_xlabel("IPR")
    ax.set_ylabel("$\\Gamma_{opt}$ / J")
    ax.legend()


def _render_fig5(frames, options, ax):
    """Range (min-max) of the optimal rate against chain length per gradient."""
    frame = _require_rows(frames[0][frames[0]["status"] == "interior"], "fig5 needs interior records")
    for offset, (eta, group) in enumerate(frame.groupby("eta")):
        stats = group.groupby("N")["gamma_opt"].agg(["min", "max", "mean"])
        x = stats.index + 0.35 * offset
        ax.vlines(x, stats["min"], stats["max"], color=_colour(eta), linewidth=2,
                  label=f"$\\eta$ = {eta:g}")
        ax.plot(x, stats["mean"], "o", color=_colour(eta), markersize=3)
    ax.set_yscale("log")
    ax.set_xlabel("chain length N")
    ax.set_ylabel("$\\Gamma_{opt}$ range / J")
    ax.legend()


def _render_fig6(frames, options, fig):
    """Per-temperature scatter panels with clipped records in offset bands.

    Clipped records have no meaningful rate inside the axes; they are drawn
    as horizontal bands above/below the interior data, annotated with the
    percentage of the ensemble they represent.
    """
    labels = options.get("labels") or [f"input {k + 1}" for k in range(len(frames))]
    if len(labels) != len(frames):
        raise FigureError("fig6 needs one label per input")
    axes = fig.subplots(1, len(frames), sharey=True, squeeze=False)[0]
    for ax, frame, label in zip(axes, frames, labels):
        interior = frame[frame["status"] == "interior"]
        _require_rows(interior, f"fig6 panel {label!r} needs interior records")
        ax.scatter(interior["ipr"], interior["gamma_opt"], s=6, alpha=0.4,
                   color="tab:blue", linewidths=0)
        ax.set_yscale("log")
        lo, hi = interior["gamma_opt"].min(), interior["gamma_opt"].max()
        for status, position, colour in (
            ("clipped_high", hi * 4.0, "tab:red"),
            ("clipped_low", lo / 4.0, "tab:purple"),
        ):
            clipped = frame[frame["status"] == status]
            if len(clipped):
                percent = 100.0 * len(clipped) / len(frame)
                ax.axhspan(position / 1.3, position * 1.3, color=colour, alpha=0.2)
                ax.scatter(clipped["ipr"], np.full(len(clipped), position), s=6,
                           color=colour, linewidths=0)
                ax.annotate(f"{percent:.1f}%", (0.98, position), xycoords=("axes fraction", "data"),
                            ha="right", va="center", fontsize=8, color=colour)
        ax.set_title(label)
        ax.set_xlabel("IPR")
    axes[0].set_ylabel("$\\Gamma_{opt}$ / J")


def _render_fig7(frames, options, ax):
    """Gradient-only scan: optimal rate against gradient, log-log steps."""
    frame = _require_rows(frames[0][frames[0]["eta"] > 0], "fig7 needs eta > 0 rows")
    for n, group in frame.groupby("N"):
        group = group.sort_values("eta")
        ax.plot(group["eta"], group["gamma_opt"], drawstyle="steps-post", label=f"N = {n}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("gradient $\\eta$")
    ax.set_ylabel("$\\Gamma_{opt}$ / J")
    ax.legend()


def _render_fig8(frames, options, ax):
    """Mean peak-current rate vs mean minimal-variance rate per disorder."""
    frame = _require_rows(frames[0][frames[0]["sigma"] > 0], "fig8 needs sigma > 0 rows")
    current = frame.groupby("sigma")["gamma_opt_current"].mean()
    variance = frame.groupby("sigma")["gamma_min_variance"].mean()
    ax.plot(current.index, current, "o-", markersize=3, label="peak current")
    ax.plot(variance.index, variance, "s-", markersize=3, label="min. population variance")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("disorder strength $\\sigma$ / J")
    ax.set_ylabel("optimal rate / J")
    ax.legend()


def _render_fig9(frames, options, ax):
    """Closed-chain wavepacket variance against time per dephasing rate."""
    frame = _require_rows(frames[0], "fig9 needs dynamics rows")
    for gamma, group in frame.groupby("gamma"):
        group = group.sort_values("t")
        ax.plot(group["t"], group["variance"], label=f"$\\Gamma$ = {gamma:g} J")
    steady = options.get("steady_value")
    if steady is not None:
        ax.axhline(float(steady), color="black", linestyle="--", linewidth=1)
    ax.set_xlabel("time / $J^{-1}$")
    ax.set_ylabel("population variance")
    ax.legend()


_FIGURES: dict[str, tuple[tuple[str, ...], Callable, bool]] = {
    # figure id -> (required input columns, renderer, renderer takes whole figure)
    "fig3": (SWEEP_COLUMNS, _render_fig3, False),
    "fig4": (SWEEP_COLUMNS, _render_fig4, False),
    "fig5": (SWEEP_COLUMNS, _render_fig5, False),
    "fig6": (SWEEP_COLUMNS, _render_fig6, True),
    "fig7": (SWEEP_COLUMNS, _render_fig7, False),
    "fig8": (UNIFORMISATION_COLUMNS, _render_fig8, False),
    "fig9": (DYNAMICS_COLUMNS, _render_fig9, False),
}

FIGURE_IDS = tuple(sorted(_FIGURES))


def render(spec: FigureSpec) -> Path:
    """Render one figure to ``spec.output`` and return the written path."""
    if spec.figure not in _FIGURES:
        raise FigureError(f"unknown figure id {spec.figure!r}; known: {', '.join(FIGURE_IDS)}")
    if not spec.inputs:
        raise FigureError(f"{spec.figure}: at least one input CSV is required")
    columns, renderer, whole_figure = _FIGURES[spec.figure]
    frames = [load_csv(path, columns) for path in spec.inputs]

    with plt.rc_context(_RC):
        n_panels = len(frames) if whole_figure else 1
        fig = plt.figure(figsize=(3.2 * n_panels + 0.8, 3.0))
        try:
            if whole_figure:
                renderer(frames, spec.options, fig)
            else:
                renderer(frames, spec.options, fig.add_subplot(111))
            fig.tight_layout()
            output = Path(spec.output)
            output.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(output, metadata=_stable_metadata(output.suffix))
        finally:
            plt.close(fig)
    return Path(spec.output)


def _stable_metadata(suffix: str) -> dict:
    if suffix == ".png":
        return {"Software": "enaqt-figures"}
    if suffix == ".svg":
        return {"Date": None}
    return {}
