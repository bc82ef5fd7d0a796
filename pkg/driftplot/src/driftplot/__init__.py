"""Render drift-reconstruction figures from drift-recover CSV outputs."""

__version__ = "0.1.0"

from .fields import ConvergenceData, CsvFormatError, FieldData, read_convergence, read_field
from .render import LAYOUTS, PlotJob, RenderResult, render_error_curve, render_heatmap

__all__ = [
    "ConvergenceData",
    "CsvFormatError",
    "FieldData",
    "LAYOUTS",
    "PlotJob",
    "RenderResult",
    "read_convergence",
    "read_field",
    "render_error_curve",
    "render_heatmap",
    "__version__",
]
