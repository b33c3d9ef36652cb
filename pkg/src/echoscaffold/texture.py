"""First-order ROI statistics and 16-level GLCM texture features.

Entropy is reported as ``-sum P ln P`` (non-negative, natural log, with
``0 ln 0 = 0``). Co-occurrences are ordered pairs for a single offset, not
symmetrized.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import savgol_filter

from . import _backend

GLCM_LEVELS = 16

# (dx, dy) unit step per supported angle; y grows downward so 45 deg points up-right
_ANGLE_STEPS = {0: (1, 0), 45: (1, -1), 90: (0, -1), 135: (-1, -1)}


@dataclass(frozen=True)
class FirstOrderStats:
    mean: float
    sd: float
    cv: float  # percent
    cv_defined: bool = True


@dataclass(frozen=True)
class Glcm16:
    counts: np.ndarray
    probs: np.ndarray
    distance: int = 1
    angle: int = 0

    @property
    def empty(self) -> bool:
        return int(self.counts.sum()) == 0


@dataclass(frozen=True)
class SecondOrderStats:
    contrast: float
    entropy: float
    energy: float
    idm: float


@dataclass(frozen=True)
class SmoothingParams:
    window: int = 11
    polyorder: int = 3

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and positive, got {self.window}")
        if not 0 <= self.polyorder < self.window:
            raise ValueError(f"need 0 <= polyorder < window, got {self.polyorder}")


def coefficient_of_variation(mean: float, sd: float) -> float:
    """``sd / mean`` in percent."""
    return sd / mean * 100.0


def first_order_stats(roi_pixels) -> FirstOrderStats:
    """Mean, population SD and CV of the ROI grays.

    A zero mean leaves CV undefined; it is then reported as 0 with
    ``cv_defined=False``.
    """
    v = np.asarray(roi_pixels, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("empty ROI")
    mean = float(v.mean())
    sd = float(np.sqrt(np.mean((v - mean) ** 2)))
    if mean == 0:
        return FirstOrderStats(mean, sd, 0.0, cv_defined=False)
    return FirstOrderStats(mean, sd, coefficient_of_variation(mean, sd))


def quantize16(roi_pixels) -> np.ndarray:
    """256 gray levels to 16: ``gray // 16``. Keeps the input's shape."""
    v = np.asarray(roi_pixels)
    if v.size and (v.min() < 0 or v.max() > 255):
        raise ValueError("gray values must lie in [0, 255]")
    return (v.astype(np.uint8) // 16).astype(np.uint8)


def angle_offset(distance: int, angle: int) -> tuple[int, int]:
    if int(distance) != distance or distance < 1:
        raise ValueError(f"GLCM distance must be an integer >= 1, got {distance}")
    if angle not in _ANGLE_STEPS:
        raise ValueError(f"GLCM angle must be one of {sorted(_ANGLE_STEPS)}, got {angle}")
    sx, sy = _ANGLE_STEPS[angle]
    return sx * distance, sy * distance


def compute_glcm(levels, distance: int = 1, angle: int = 0, *, kernels=None) -> Glcm16:
    """Count ordered level pairs ``(p, p + offset)`` over a 2-D level grid.

    A grid too small to hold any pair yields an all-zero GLCM whose
    ``empty`` flag is set; :func:`glcm_features` refuses it.
    """
    grid = np.asarray(levels)
    if grid.ndim != 2 or grid.size == 0:
        raise ValueError(f"expected a non-empty 2-D level grid, got shape {grid.shape}")
    if grid.min() < 0 or grid.max() >= GLCM_LEVELS:
        raise ValueError(f"levels must lie in [0, {GLCM_LEVELS})")
    dx, dy = angle_offset(distance, angle)
    k = kernels or _backend.kernels
    counts = k.glcm_counts(grid.astype(np.uint8), dx, dy, GLCM_LEVELS)
    total = counts.sum()
    probs = counts / total if total else np.zeros(counts.shape)
    return Glcm16(counts, probs, int(distance), int(angle))


def glcm_features(glcm: Glcm16) -> SecondOrderStats:
    if glcm.empty:
        raise ValueError("GLCM holds no pixel pairs; features are undefined")
    p = glcm.probs
    m, n = np.indices(p.shape)
    diff2 = (m - n) ** 2
    nz = p > 0
    return SecondOrderStats(
        contrast=float(np.sum(diff2 * p)),
        entropy=float(-np.sum(p[nz] * np.log(p[nz]))),
        energy=float(np.sum(p * p)),
        idm=float(np.sum(p / (1.0 + diff2))),
    )


def savitzky_golay(series, params: SmoothingParams | None = None) -> np.ndarray:
    """Local least-squares polynomial smoothing; the ends use the fitted
    polynomial of the first/last full window."""
    p = params or SmoothingParams()
    y = np.asarray(series, dtype=np.float64)
    if y.ndim != 1 or y.size < p.window:
        raise ValueError(f"series of length {y.size} is shorter than the window {p.window}")
    # the filter is linear, so smoothing y - y[0] and adding y[0] back changes
    # nothing but rounding, and makes constant series come back bit-exact
    anchor = y[0]
    return savgol_filter(y - anchor, p.window, p.polyorder, mode="interp") + anchor


def pixel_distribution(roi_pixels, smoothing: SmoothingParams | None = None) -> np.ndarray:
    """Smoothed 256-bin frequency curve of the ROI grays."""
    v = np.asarray(roi_pixels).ravel()
    if v.size == 0:
        raise ValueError("empty ROI")
    counts = np.bincount(v.astype(np.uint8), minlength=256).astype(np.float64)
    return savitzky_golay(counts, smoothing)


def roi_features(roi_grid, distance: int = 1, angle: int = 0) -> tuple[FirstOrderStats, SecondOrderStats]:
    """First- and second-order statistics of a 2-D ROI of raw grays."""
    grid = np.asarray(roi_grid)
    return first_order_stats(grid), glcm_features(compute_glcm(quantize16(grid), distance, angle))
