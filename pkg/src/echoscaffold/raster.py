"""8-bit grayscale rasters: PGM/PNG I/O, cropping and ROI extraction.

Images are 2-D ``uint8`` numpy arrays indexed ``[row, column]`` with the
origin at the top-left corner; ``x`` runs east (columns), ``y`` runs south
(rows). Binary masks use the same representation restricted to {0, 255},
with 0 (black) marking the scaffold.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

BLACK = 0
WHITE = 255


class ImageFormatError(ValueError):
    """Base class for unreadable raster files."""


class UnsupportedFormatError(ImageFormatError):
    pass


class MaxvalError(ImageFormatError):
    pass


class TruncatedPayloadError(ImageFormatError):
    pass


class RectOutOfBoundsError(ValueError):
    pass


@dataclass(frozen=True)
class RoiRect:
    """Axis-aligned rectangle covering columns ``[x, x+w)`` and rows ``[y, y+h)``."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise TypeError(f"RoiRect.{name} must be an integer, got {v!r}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"RoiRect needs positive size, got {self.w}x{self.h}")

    @classmethod
    def full(cls, image) -> RoiRect:
        h, w = np.shape(image)
        return cls(0, 0, w, h)

    def fits(self, width: int, height: int) -> bool:
        return self.x >= 0 and self.y >= 0 and self.x + self.w <= width and self.y + self.h <= height

    def offset(self, inner: RoiRect) -> RoiRect:
        """Express ``inner`` (relative to this rect) in this rect's parent frame."""
        return RoiRect(self.x + inner.x, self.y + inner.y, inner.w, inner.h)

    def centered_in(self, outer: RoiRect) -> RoiRect:
        """Same size, moved so its center matches ``outer``'s (rounded down)."""
        return RoiRect(outer.x + (outer.w - self.w) // 2, outer.y + (outer.h - self.h) // 2, self.w, self.h)

    def as_dict(self) -> dict:
        return {"x": int(self.x), "y": int(self.y), "w": int(self.w), "h": int(self.h)}


def check_gray8(image) -> np.ndarray:
    """Validate and return ``image`` as a 2-D uint8 array (no copy if already one)."""
    arr = np.asarray(image)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.integer) or arr.min() < 0 or arr.max() > 255:
            raise ValueError("pixel values must be integers in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def check_mask(mask) -> np.ndarray:
    arr = check_gray8(mask)
    if not np.isin(arr, (BLACK, WHITE)).all():
        raise ValueError("binary mask pixels must be exactly 0 or 255")
    return arr


# header: magic, width, height, maxval, each separated by whitespace and
# optional comments, then exactly one whitespace byte before the payload
_PGM_HEADER = re.compile(
    rb"P5(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)\s"
)
_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _parse_pgm(data: bytes, source) -> np.ndarray:
    m = _PGM_HEADER.match(data)
    if m is None:
        raise UnsupportedFormatError(f"{source}: not a binary PGM (P5) file")
    width, height, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise MaxvalError(f"{source}: maxval {maxval} unsupported, need 255")
    if width <= 0 or height <= 0:
        raise UnsupportedFormatError(f"{source}: empty image {width}x{height}")
    payload = data[m.end():]
    need = width * height
    if len(payload) < need:
        raise TruncatedPayloadError(f"{source}: payload has {len(payload)} bytes, header needs {need}")
    return np.frombuffer(payload, dtype=np.uint8, count=need).reshape(height, width).copy()


def load_image(path) -> np.ndarray:
    """Read a binary PGM (P5, maxval 255) or an 8-bit grayscale PNG.

    Raises ``FileNotFoundError`` for a missing file, and the matching
    :class:`ImageFormatError` subclass for unsupported formats, a maxval
    other than 255 or a short pixel payload.
    """
    path = Path(path)
    data = path.read_bytes()
    if data.startswith(_PNG_MAGIC):
        return _load_png(path)
    if data[:2] != b"P5":
        raise UnsupportedFormatError(f"{path}: unrecognised magic {data[:2]!r}")
    return _parse_pgm(data, path)


def _load_png(path: Path) -> np.ndarray:
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise UnsupportedFormatError(f"{path}: PNG support needs Pillow (pip install echoscaffold[png])") from exc
    with Image.open(path) as im:
        if im.mode != "L":
            raise UnsupportedFormatError(f"{path}: PNG mode {im.mode!r}, need 8-bit grayscale 'L'")
        return np.array(im, dtype=np.uint8)


def encode_pgm(image) -> bytes:
    img = check_gray8(image)
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(img).tobytes()


def save_image(image, path) -> None:
    """Write ``image`` as binary PGM, or PNG when ``path`` ends in ``.png``."""
    img = check_gray8(image)
    path = Path(path)
    if path.suffix.lower() == ".png":
        from PIL import Image

        Image.fromarray(img, mode="L").save(path)
        return
    tmp = path.with_name(path.name + ".part")
    tmp.write_bytes(encode_pgm(img))
    os.replace(tmp, path)


def _checked(image, rect: RoiRect) -> np.ndarray:
    img = np.asarray(image)
    h, w = img.shape
    if not rect.fits(w, h):
        raise RectOutOfBoundsError(f"{rect} does not fit a {w}x{h} image")
    return img


def crop(image, rect: RoiRect) -> np.ndarray:
    """Copy of the ``rect`` window; output ``[j, i]`` is input ``[y + j, x + i]``."""
    img = _checked(image, rect)
    return img[rect.y:rect.y + rect.h, rect.x:rect.x + rect.w].copy()


def extract_roi(image, rect: RoiRect) -> np.ndarray:
    """Row-major 1-D sequence of the pixels under ``rect``."""
    return crop(image, rect).ravel()
