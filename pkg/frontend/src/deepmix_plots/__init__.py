"""Static figure rendering for deepmix batch results."""

__version__ = "0.1.0"

from .render import PlotSpec, SchemaError, render

__all__ = ["PlotSpec", "SchemaError", "render", "__version__"]
