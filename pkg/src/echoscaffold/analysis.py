"""Per-scan joint segmentation and texture measurement.

Stage order: mean-shift filter, Otsu (or fixed) binarization, opening,
black-pixel area, Canny contour, ROI features.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .edges import CannyParams, canny
from .meanshift import MeanShiftParams, mean_shift_filter
from .raster import BLACK, RoiRect, crop
from .segmentation import MorphKernel, apply_threshold, count_black, histogram, morphological_open, otsu_threshold
from .texture import FirstOrderStats, SecondOrderStats, roi_features


@dataclass(frozen=True)
class SegmentationSettings:
    mean_shift: MeanShiftParams = field(default_factory=MeanShiftParams)
    threshold: int | None = None  # None selects Otsu
    morph_kernel: int = 3
    morph_iterations: int = 2
    canny: CannyParams = field(default_factory=CannyParams)


@dataclass
class Segmentation:
    filtered: np.ndarray
    threshold: int
    binary: np.ndarray
    mask: np.ndarray  # after opening; this is what Canny sees
    contour: np.ndarray
    area: int
    canny_input_digest: str = ""


@dataclass(frozen=True)
class FeatureRow:
    label: str
    area: int
    mean: float
    sd: float
    cv: float
    contrast: float
    entropy: float
    energy: float
    idm: float

    @classmethod
    def build(cls, label, area, first: FirstOrderStats, second: SecondOrderStats) -> FeatureRow:
        return cls(label, int(area), first.mean, first.sd, first.cv,
                   second.contrast, second.entropy, second.energy, second.idm)


def digest(array) -> str:
    a = np.ascontiguousarray(array)
    return hashlib.sha256(repr((a.shape, a.dtype.str)).encode() + a.tobytes()).hexdigest()


def segment(image, settings: SegmentationSettings | None = None) -> Segmentation:
    s = settings or SegmentationSettings()
    filtered = mean_shift_filter(image, s.mean_shift)
    t = otsu_threshold(histogram(filtered)).threshold if s.threshold is None else s.threshold
    binary = apply_threshold(filtered, t)
    kernel = MorphKernel(s.morph_kernel, s.morph_kernel)
    mask = morphological_open(binary, kernel, s.morph_iterations)
    canny_input = mask
    contour = canny(canny_input, s.canny)
    return Segmentation(filtered, t, binary, mask, contour, count_black(mask), digest(canny_input))


def auto_roi(mask, w: int, h: int) -> RoiRect:
    """``w x h`` rect centered on the black region's centroid, kept inside the image.

    Falls back to the image center when the mask has no black pixel.
    """
    H, W = mask.shape
    if w > W or h > H:
        raise ValueError(f"ROI {w}x{h} larger than the {W}x{H} image")
    ys, xs = np.nonzero(np.asarray(mask) == BLACK)
    cx, cy = (xs.mean(), ys.mean()) if xs.size else ((W - 1) / 2, (H - 1) / 2)
    x = int(np.floor(cx - (w - 1) / 2 + 0.5))
    y = int(np.floor(cy - (h - 1) / 2 + 0.5))
    return RoiRect(min(max(x, 0), W - w), min(max(y, 0), H - h), w, h)


def measure_roi(pixels, rect: RoiRect, distance=1, angle=0) -> tuple[FirstOrderStats, SecondOrderStats]:
    return roi_features(crop(pixels, rect), distance, angle)
