"""Figure rendering for trustcascade harness CSV panels."""

from .render import (EmptyInputError, FigureSpec, RenderError, SchemaError,
                     expected_columns, load_panel, render)

__all__ = ["EmptyInputError", "FigureSpec", "RenderError", "SchemaError",
           "expected_columns", "load_panel", "render"]
