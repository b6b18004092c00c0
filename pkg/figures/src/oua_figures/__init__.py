"""Batch figure rendering over experiment result directories.

This package talks to the experiment runner only through its published
file formats (run CSVs, sweep and prediction CSVs, manifest.json), so it
installs and runs with or without the runner present.
"""

from .loading import FigureError
from .render import FIGURES, FigureSpec, build, plan, render, series_map

__version__ = "0.1.0"

__all__ = [
    "FIGURES",
    "FigureError",
    "FigureSpec",
    "build",
    "plan",
    "render",
    "series_map",
    "__version__",
]
