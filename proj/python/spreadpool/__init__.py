"""Spread voxel pooling: scatter frustum features into their k nearest BEV cells.

Maps are float32 arrays of shape (ny, nx, C); grids are given as
``(origin_x, origin_y, cell_size, nx, ny)``.
"""

from ._core import (
    LifecycleError,
    NumericError,
    SavedContext,
    backward,
    forward,
    release,
    select_neighbors,
    version,
)

__version__ = version()

__all__ = [
    "LifecycleError",
    "NumericError",
    "SavedContext",
    "backward",
    "forward",
    "release",
    "select_neighbors",
    "version",
]
