"""Synthetic speckle phantoms with a known dark elliptical scaffold.

Gray values are ``clamp(round(mean * factor))`` where ``factor`` is a
multiplicative speckle sample: a Rayleigh variate standardized to zero mean
and unit variance, scaled by ``noise`` and shifted to 1 (then floored at 0).
Pixel ``(x, y)`` belongs to the scaffold iff
``((x - cx) / a)**2 + ((y - cy) / b)**2 <= 1``.

Randomness comes from numpy's PCG64 (``numpy.random.default_rng``) seeded
with ``[seed, step]``, so a phantom is reproducible bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .raster import BLACK, WHITE

_RAYLEIGH_MEAN = math.sqrt(math.pi / 2.0)
_RAYLEIGH_SD = math.sqrt((4.0 - math.pi) / 2.0)


@dataclass(frozen=True)
class PhantomSpec:
    width: int = 369
    height: int = 200
    cx: float = 184.0
    cy: float = 100.0
    a: float = 110.5
    b: float = 60.5
    background_mean: float = 170.0
    background_noise: float = 0.15
    scaffold_mean: float = 70.0
    scaffold_noise: float = 0.15
    seed: int = 0

    def validate(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("phantom needs a positive size")
        if self.a < 1 or self.b < 1:
            raise ValueError(f"semi-axes must be >= 1 pixel, got a={self.a}, b={self.b}")
        if (self.cx - self.a < 0 or self.cx + self.a > self.width - 1
                or self.cy - self.b < 0 or self.cy + self.b > self.height - 1):
            raise ValueError("ellipse does not fit inside the image")
        if not self.scaffold_mean < self.background_mean:
            raise ValueError("scaffold must be darker than the background")
        if self.background_noise < 0 or self.scaffold_noise < 0:
            raise ValueError("noise scales must be >= 0")


@dataclass(frozen=True)
class DegradationSeries:
    """Shrinking, re-brightening scaffold over ``steps`` time points.

    Step ``k`` scales both semi-axes by ``shrink**k``. The scaffold mean is
    ``base.scaffold_mean + k * mean_increment`` unless ``mean_schedule``
    lists the mean for every step explicitly.
    """

    base: PhantomSpec
    steps: int = 4
    shrink: float = 0.9
    mean_increment: float = 0.0
    mean_schedule: tuple[float, ...] | None = field(default=None)

    def validate(self) -> None:
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not 0 < self.shrink <= 1:
            raise ValueError(f"shrink must lie in (0, 1], got {self.shrink}")
        if self.mean_schedule is not None and len(self.mean_schedule) != self.steps:
            raise ValueError("mean_schedule needs one entry per step")

    def spec_at(self, k: int) -> PhantomSpec:
        s = self.shrink ** k
        mean = (self.mean_schedule[k] if self.mean_schedule is not None
                else self.base.scaffold_mean + k * self.mean_increment)
        return replace(self.base, a=self.base.a * s, b=self.base.b * s, scaffold_mean=mean)


def ellipse_mask(width, height, cx, cy, a, b) -> np.ndarray:
    ys, xs = np.mgrid[0:height, 0:width]
    inside = ((xs - cx) / a) ** 2 + ((ys - cy) / b) ** 2 <= 1.0
    return np.where(inside, BLACK, WHITE).astype(np.uint8)


def speckle_factor(rng, shape, noise) -> np.ndarray:
    if noise == 0:
        return np.ones(shape)
    z = (rng.rayleigh(1.0, size=shape) - _RAYLEIGH_MEAN) / _RAYLEIGH_SD
    return np.maximum(1.0 + noise * z, 0.0)


def generate_phantom(spec: PhantomSpec, step: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(image, ground_truth_mask)``; the mask is 0 inside the scaffold."""
    spec.validate()
    mask = ellipse_mask(spec.width, spec.height, spec.cx, spec.cy, spec.a, spec.b)
    rng = np.random.default_rng([spec.seed, step])
    shape = mask.shape
    bg = spec.background_mean * speckle_factor(rng, shape, spec.background_noise)
    sc = spec.scaffold_mean * speckle_factor(rng, shape, spec.scaffold_noise)
    gray = np.where(mask == BLACK, sc, bg)
    image = np.clip(np.floor(gray + 0.5), 0, 255).astype(np.uint8)
    return image, mask


def generate_series(series: DegradationSeries) -> list[tuple[np.ndarray, np.ndarray, int]]:
    """``(image, mask, true_area)`` for each step."""
    series.validate()
    out = []
    for k in range(series.steps):
        spec = series.spec_at(k)
        image, mask = generate_phantom(spec, step=k)
        out.append((image, mask, int(np.count_nonzero(mask == BLACK))))
    return out
