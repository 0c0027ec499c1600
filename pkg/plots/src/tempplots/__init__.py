"""Figure rendering for the experiment CSVs."""

from .figures import (
    CHI2_2_95,
    FIGURE_DPI,
    convergence_figure,
    ellipse_parameters,
    milstein_figure,
    save_figure,
    signature_figure,
)
from .io import PlotDataError, Table, read_table, require_columns

__version__ = "0.1.0"

__all__ = [
    "CHI2_2_95",
    "FIGURE_DPI",
    "PlotDataError",
    "Table",
    "convergence_figure",
    "ellipse_parameters",
    "milstein_figure",
    "read_table",
    "require_columns",
    "save_figure",
    "signature_figure",
    "__version__",
]
