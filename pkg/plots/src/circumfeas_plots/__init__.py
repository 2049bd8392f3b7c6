"""Batch figure renderer for circumfeas benchmark CSVs."""

__version__ = "0.1.0"

from .render import PlotSpec, SchemaError, render_gap_decay, render_profile
