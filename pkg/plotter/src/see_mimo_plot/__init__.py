"""CSV-to-image rendering for secure-EE sweep results."""

from .plotter import (
    EmptyData,
    PlotSpec,
    RenderInfo,
    SchemaMismatch,
    crossover_points,
    read_sweep_csv,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "EmptyData",
    "PlotSpec",
    "RenderInfo",
    "SchemaMismatch",
    "crossover_points",
    "read_sweep_csv",
    "render",
]
