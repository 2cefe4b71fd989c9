"""Publication-style figure rendering for bandit-bench result CSVs."""

from .render import FigureSpec, load_rows, render, series_vs_alpha, series_vs_time

__all__ = ["FigureSpec", "load_rows", "render", "series_vs_alpha", "series_vs_time"]
__version__ = "0.1.0"
