"""Column type annotation by message passing over the columns of a table."""

from .cli import main

__version__ = "0.1.0"

__all__ = ["main"]
