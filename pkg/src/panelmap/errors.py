"""Exception hierarchy shared across the panelmap modules.

Every error raised by this package derives from :class:`PanelMapError`, so
callers (and the CLI, which maps exception families to exit codes) can catch
one base type.
"""

from __future__ import annotations


class PanelMapError(Exception):
    """Base class for all panelmap errors."""


class InvalidBoxError(PanelMapError, ValueError):
    """A rotated box has non-positive, non-finite, or non-canonical fields."""


class NotARectangleError(PanelMapError, ValueError):
    """A quad failed the rectangle test; carries the measured relative deviation."""

    def __init__(self, message: str, deviation: float):
        super().__init__(message)
        self.deviation = deviation


class InvalidConfigError(PanelMapError, ValueError):
    """A configuration value violates its documented constraints."""


class InvalidSpecError(PanelMapError, ValueError):
    """A synthetic scene specification cannot be realized."""


class UnknownTileError(PanelMapError, KeyError):
    """A detection references a tile id that is not part of the grid."""

    def __init__(self, tile_id: str):
        super().__init__(f"unknown tile id: {tile_id!r}")
        self.tile_id = tile_id

    def __str__(self) -> str:
        # KeyError would repr-quote the message; show it verbatim instead.
        return self.args[0]


class WorldFileError(PanelMapError, ValueError):
    """A world file could not be parsed into an invertible transform."""


class RasterIOError(PanelMapError):
    """A raster file could not be read or written."""


class UnsupportedDepthError(RasterIOError):
    """A raster file has a sample depth other than 8-bit."""


class ParseError(PanelMapError, ValueError):
    """A data file (JSON, JSONL, world file) has invalid contents."""
