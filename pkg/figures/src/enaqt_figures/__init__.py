"""Deterministic figure rendering for transport-sweep CSV outputs."""

from .render import (
    DYNAMICS_COLUMNS,
    FIGURE_IDS,
    FigureError,
    FigureSpec,
    NoDataError,
    SWEEP_COLUMNS,
    SchemaError,
    UNIFORMISATION_COLUMNS,
    binned_means,
    load_csv,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "DYNAMICS_COLUMNS",
    "FIGURE_IDS",
    "FigureError",
    "FigureSpec",
    "NoDataError",
    "SWEEP_COLUMNS",
    "SchemaError",
    "UNIFORMISATION_COLUMNS",
    "binned_means",
    "load_csv",
    "render",
    "__version__",
]
