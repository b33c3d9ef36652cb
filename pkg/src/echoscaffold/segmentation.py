"""Otsu binarization, binary morphology and black-pixel area.

Masks follow the scaffold convention: 0 (black) is foreground, 255 (white)
background. Morphology treats everything outside the image as background.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import BLACK, WHITE, check_gray8, check_mask

N_LEVELS = 256


@dataclass(frozen=True)
class Histogram256:
    bins: np.ndarray
    total: int

    def __post_init__(self):
        if self.bins.shape != (N_LEVELS,) or (self.bins < 0).any():
            raise ValueError("histogram needs 256 non-negative bins")
        if int(self.bins.sum()) != self.total:
            raise ValueError("histogram bins do not sum to total")


@dataclass(frozen=True)
class OtsuResult:
    threshold: int
    variance_curve: np.ndarray  # G(k) for k = 0..255
    w0: float
    w1: float
    mu0: float
    mu1: float
    mu: float


@dataclass(frozen=True)
class MorphKernel:
    """Flat rectangular structuring element anchored at its center."""

    width: int = 3
    height: int = 3

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.width % 2 == 0 or self.height % 2 == 0:
            raise ValueError(f"kernel sides must be odd and positive, got {self.width}x{self.height}")


def histogram(image) -> Histogram256:
    img = check_gray8(image)
    bins = np.bincount(img.ravel(), minlength=N_LEVELS).astype(np.int64)
    return Histogram256(bins, int(img.size))


def otsu_threshold(hist: Histogram256) -> OtsuResult:
    """Global threshold maximizing the between-class variance.

    Class 0 holds gray levels ``0..k-1`` and class 1 holds ``k..255``, the
    same split ``apply_threshold`` uses. An empty class scores 0. The
    maximum is located with exact integer arithmetic, so plateaus resolve
    to their smallest ``k`` regardless of float rounding.
    """
    bins = np.asarray(hist.bins, dtype=np.int64)
    total = int(hist.total)
    if total <= 0:
        raise ValueError("cannot threshold an empty histogram")
    grand = sum(j * int(bins[j]) for j in range(N_LEVELS))

    # G(k) * N^2 * n0 * n1 = (n1*s0 - n0*s1)^2 ; compare as fractions p/q
    best_k, best_p, best_q = 0, 0, 1
    best_n0 = best_s0 = 0
    curve = np.zeros(N_LEVELS)
    n0 = s0 = 0
    for k in range(N_LEVELS):
        if k > 0:
            n0 += int(bins[k - 1])
            s0 += (k - 1) * int(bins[k - 1])
        n1, s1 = total - n0, grand - s0
        if n0 == 0 or n1 == 0:
            continue
        p = (n1 * s0 - n0 * s1) ** 2
        q = n0 * n1 * total * total
        curve[k] = p / q
        if p * best_q > best_p * q:
            best_k, best_p, best_q = k, p, q
            best_n0, best_s0 = n0, s0

    n0, s0 = best_n0, best_s0
    n1, s1 = total - n0, grand - s0
    w0, w1 = n0 / total, n1 / total
    mu0 = s0 / n0 if n0 else 0.0
    mu1 = s1 / n1 if n1 else 0.0
    return OtsuResult(best_k, curve, w0, w1, mu0, mu1, grand / total)


def apply_threshold(image, threshold: int) -> np.ndarray:
    """255 where ``pixel >= threshold``, else 0."""
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must lie in [0, 255], got {threshold}")
    img = check_gray8(image)
    return np.where(img >= threshold, WHITE, BLACK).astype(np.uint8)


def _window_extreme(mask, kernel: MorphKernel, reduce):
    h, w = mask.shape
    ry, rx = kernel.height // 2, kernel.width // 2
    pad = np.full((h + 2 * ry, w + 2 * rx), WHITE, dtype=np.uint8)
    pad[ry:ry + h, rx:rx + w] = mask
    out = mask.copy()
    for dy in range(kernel.height):
        for dx in range(kernel.width):
            reduce(out, pad[dy:dy + h, dx:dx + w], out=out)
    return out


def erode(mask, kernel: MorphKernel = MorphKernel()) -> np.ndarray:
    """Shrink the black region: a pixel stays black iff its whole footprint is black."""
    return _window_extreme(check_mask(mask), kernel, np.maximum)


def dilate(mask, kernel: MorphKernel = MorphKernel()) -> np.ndarray:
    """Grow the black region: a pixel turns black iff any footprint pixel is black."""
    return _window_extreme(check_mask(mask), kernel, np.minimum)


def morphological_open(mask, kernel: MorphKernel = MorphKernel(), iterations: int = 2) -> np.ndarray:
    """``iterations`` rounds of erode-then-dilate on the black foreground."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    out = check_mask(mask)
    for _ in range(iterations):
        out = dilate(erode(out, kernel), kernel)
    return out


def count_black(mask) -> int:
    """Scaffold area in pixels."""
    return int(np.count_nonzero(check_mask(mask) == BLACK))


def count_white(mask) -> int:
    return int(np.count_nonzero(check_mask(mask) == WHITE))

