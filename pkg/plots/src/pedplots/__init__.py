"""Figure rendering for pedflow run directories."""

from .figures import PlotJob, RenderResult, render, render_errors, render_heatmap, render_mass_balance
from .io import DensityField, RunGeometry, SchemaError, discover_snapshots, read_density

__version__ = "0.1.0"

__all__ = [
    "PlotJob",
    "RenderResult",
    "render",
    "render_heatmap",
    "render_mass_balance",
    "render_errors",
    "DensityField",
    "RunGeometry",
    "SchemaError",
    "discover_snapshots",
    "read_density",
    "__version__",
]
