"""Publication-style figures rendered from wpnoma experiment CSVs.

This package reads the CSV files the `wpnoma` sweep CLI writes and turns
them into figures.  It is a batch renderer with a hard boundary: it never
imports or invokes the simulator, so the figures can be regenerated from
archived CSVs alone.
"""

from .figures import (
    EXPECTED_COLUMNS,
    EmptyInput,
    FigureSpec,
    SchemaMismatch,
    Table,
    build_figure,
    load_table,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "EXPECTED_COLUMNS",
    "EmptyInput",
    "FigureSpec",
    "SchemaMismatch",
    "Table",
    "build_figure",
    "load_table",
    "render",
    "__version__",
]
