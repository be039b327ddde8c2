"""actuplot: renders actusim run.csv artifacts into figure images.

Strictly one-way: this package reads the documented CSV schema and never
recomputes or re-simulates anything.
"""

__version__ = "0.1.0"

from .figures import FIGURES, FigureSpec, MissingColumn, RenderError, render  # noqa: F401
