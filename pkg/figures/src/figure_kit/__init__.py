"""Figures from fracbeam CSV files.

Four figure kinds, one per published CSV schema: eigenvalue scatter with a
sector overlay, log-log resolvent decay with a fitted slope, semilog energy
decay, and a damping-exponent heatmap with the analytic-region boundary.
Rendering is a pure function of the input files, so identical inputs give
byte-identical images.
"""

from figure_kit.csv_io import SCHEMAS, EmptyDataError, SchemaError, read_table
from figure_kit.render import FigureSpec, render

__all__ = [
    "SCHEMAS",
    "EmptyDataError",
    "SchemaError",
    "read_table",
    "FigureSpec",
    "render",
]
