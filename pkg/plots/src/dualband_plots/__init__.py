"""Figure rendering for the dualband experiment CSVs.

Three figure kinds, one image per call, everything drawn straight from the
rows of the input files: threshold-sweep curves with the argmin marked,
the blockage improvement surface with its stability border plane, and the
threshold-vs-backpressure comparison panels.
"""

from .readers import SchemaMismatch, Table, read_table, surface_plane_rates, sweep_minimum
from .render import (
    KINDS,
    FigureSpec,
    RenderResult,
    render,
    render_blockage_surface,
    render_maxweight_compare,
    render_threshold_sweep,
)

__all__ = [
    "KINDS",
    "FigureSpec",
    "RenderResult",
    "SchemaMismatch",
    "Table",
    "read_table",
    "render",
    "render_blockage_surface",
    "render_maxweight_compare",
    "render_threshold_sweep",
    "surface_plane_rates",
    "sweep_minimum",
]
