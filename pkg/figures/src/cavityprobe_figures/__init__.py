"""Static figure rendering for cavityprobe sweep CSV files.

These scripts never recompute physics: every number displayed comes from
an input CSV produced by the simulator CLI.
"""

from .plot_family import (
    EmptyInput,
    FigureSpec,
    SchemaMismatch,
    SweepTable,
    plot_family,
    read_sweep_csv,
)

__all__ = [
    "EmptyInput",
    "FigureSpec",
    "SchemaMismatch",
    "SweepTable",
    "plot_family",
    "read_sweep_csv",
]
