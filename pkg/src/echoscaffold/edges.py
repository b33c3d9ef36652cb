"""Canny edge detection: Gaussian blur, Sobel gradients, NMS, hysteresis.

All convolutions replicate the border pixel. The outermost one-pixel frame
is never reported as an edge.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from . import _backend
from .raster import check_gray8


@dataclass(frozen=True)
class CannyParams:
    low_threshold: float = 140.0
    high_threshold: float = 280.0
    gaussian_kernel: int = 5
    gaussian_sigma: float = 1.4
    sobel_aperture: int = 3
    l2_gradient: bool = True

    def __post_init__(self):
        if not 0 <= self.low_threshold <= self.high_threshold:
            raise ValueError(f"need 0 <= low <= high, got {self.low_threshold}, {self.high_threshold}")
        _check_odd("gaussian_kernel", self.gaussian_kernel)
        _check_odd("sobel_aperture", self.sobel_aperture)
        if self.gaussian_sigma <= 0:
            raise ValueError("gaussian_sigma must be positive")


@dataclass(frozen=True)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray
    direction: np.ndarray  # radians, atan2(gy, gx); y grows downward

    @classmethod
    def from_components(cls, gx, gy, l2=True) -> GradientField:
        gx = np.asarray(gx, dtype=np.float64)
        gy = np.asarray(gy, dtype=np.float64)
        mag = np.hypot(gx, gy) if l2 else np.abs(gx) + np.abs(gy)
        return cls(gx, gy, mag, np.arctan2(gy, gx))

    def with_magnitude(self, magnitude) -> GradientField:
        return GradientField(self.gx, self.gy, magnitude, self.direction)


def _check_odd(name, size):
    if int(size) != size or size < 3 or size % 2 == 0:
        raise ValueError(f"{name} must be an odd integer >= 3, got {size}")


def gaussian_weights(size: int, sigma: float) -> np.ndarray:
    half = size // 2
    t = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(t * t) / (2.0 * sigma * sigma))
    return g / g.sum()


def convolve_separable(image, row_taps, col_taps) -> np.ndarray:
    """Correlate with ``outer(col_taps, row_taps)`` using edge replication.

    ``row_taps`` runs along x (columns), ``col_taps`` along y (rows).
    """
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape
    rx, ry = len(row_taps) // 2, len(col_taps) // 2
    padded = np.pad(img, ((0, 0), (rx, rx)), mode="edge")
    tmp = np.zeros((h, w))
    for i, c in enumerate(row_taps):
        if c:
            tmp += c * padded[:, i:i + w]
    padded = np.pad(tmp, ((ry, ry), (0, 0)), mode="edge")
    out = np.zeros((h, w))
    for i, c in enumerate(col_taps):
        if c:
            out += c * padded[i:i + h, :]
    return out


def gaussian_blur(image, kernel: int = 5, sigma: float = 1.4) -> np.ndarray:
    if int(kernel) != kernel or kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"Gaussian kernel size must be odd, got {kernel}")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    g = gaussian_weights(kernel, sigma)
    out = convolve_separable(check_gray8(image), g, g)
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def sobel_taps(aperture: int) -> tuple[np.ndarray, np.ndarray]:
    """(derivative, smoothing) taps; aperture 3 gives ([-1, 0, 1], [1, 2, 1])."""
    _check_odd("sobel_aperture", aperture)
    smooth = np.array([comb(aperture - 1, i) for i in range(aperture)], dtype=np.float64)
    base = np.array([comb(aperture - 3, i) for i in range(aperture - 2)], dtype=np.float64)
    deriv = np.convolve(base, [1.0, 0.0, -1.0])[::-1]
    return deriv, smooth


def sobel_gradients(image, aperture: int = 3, l2: bool = True) -> GradientField:
    deriv, smooth = sobel_taps(aperture)
    img = check_gray8(image)
    gx = convolve_separable(img, deriv, smooth)
    gy = convolve_separable(img, smooth, deriv)
    return GradientField.from_components(gx, gy, l2)


def quantize_direction(direction) -> np.ndarray:
    """Map angles to sectors 0..3 = 0, 45, 90, 135 degrees (mod 180)."""
    deg = np.mod(np.degrees(direction), 180.0)
    return (np.floor((deg + 22.5) / 45.0).astype(np.int8)) % 4


def non_max_suppression(field: GradientField, *, kernels=None) -> GradientField:
    """Zero every magnitude that is not a peak along its gradient sector.

    On a plateau of equal magnitudes exactly one pixel survives: the one
    furthest back along the gradient direction.
    """
    k = kernels or _backend.kernels
    thin = k.non_max_suppression(field.magnitude, quantize_direction(field.direction))
    return field.with_magnitude(thin)


def hysteresis(field: GradientField, low: float, high: float, *, kernels=None) -> np.ndarray:
    """Edge mask (255 on 0): ``> high`` pixels plus ``> low`` pixels 8-connected to them."""
    if not 0 <= low <= high:
        raise ValueError(f"need 0 <= low <= high, got {low}, {high}")
    k = kernels or _backend.kernels
    mag = field.magnitude if isinstance(field, GradientField) else np.asarray(field, dtype=np.float64)
    return k.hysteresis(mag, float(low), float(high))


def canny(image, params: CannyParams | None = None, *, kernels=None) -> np.ndarray:
    p = params or CannyParams()
    blurred = gaussian_blur(image, p.gaussian_kernel, p.gaussian_sigma)
    field = non_max_suppression(sobel_gradients(blurred, p.sobel_aperture, p.l2_gradient), kernels=kernels)
    mag = field.magnitude.copy()
    mag[0, :] = mag[-1, :] = 0.0
    mag[:, 0] = mag[:, -1] = 0.0
    return hysteresis(field.with_magnitude(mag), p.low_threshold, p.high_threshold, kernels=kernels)
