"""Spatial-range mean-shift filtering of grayscale images.

Each pixel starts as the joint point ``(x, y, gray)``. At every step the
point moves to the plain average of the pixels that fall inside a square
window of half-width ``spatial_radius`` around it *and* whose gray differs
from the point's current gray by at most ``range_radius``. The loop stops
once a step moves the point by no more than ``epsilon`` (Euclidean, in the
joint space) or after ``max_iterations`` steps. The pixel's output is the
final gray, rounded half-up.

Only a single resolution level is used; there is no image pyramid.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import _backend
from .raster import check_gray8


@dataclass(frozen=True)
class MeanShiftParams:
    spatial_radius: int = 5
    range_radius: float = 100.0
    max_iterations: int = 5
    epsilon: float = 1.0

    def __post_init__(self):
        if int(self.spatial_radius) != self.spatial_radius or self.spatial_radius < 1:
            raise ValueError(f"spatial_radius must be an integer >= 1, got {self.spatial_radius}")
        if self.range_radius < 0:
            raise ValueError(f"range_radius must be >= 0, got {self.range_radius}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError(f"max_iterations must be an integer >= 1, got {self.max_iterations}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")


def mean_shift_filter(image, params: MeanShiftParams | None = None, *, return_iterations=False, kernels=None):
    """Mode-seeking smoothing; see the module docstring for the exact rule.

    With ``return_iterations=True`` also returns the per-pixel step count,
    which never exceeds ``params.max_iterations``. ``kernels`` overrides the
    backend chosen at import (used by the parity tests and benchmark).
    """
    img = check_gray8(image)
    p = params or MeanShiftParams()
    k = kernels or _backend.kernels
    out, iters = k.mean_shift(img, int(p.spatial_radius), float(p.range_radius),
                              int(p.max_iterations), float(p.epsilon))
    if return_iterations:
        return out, iters
    return out
