"""Batch analysis of a longitudinal scan series.

Configuration is a flat JSON object. Only ``inputs`` and ``crop`` are
required; every other key has a default and unknown keys are rejected::

    {
      "inputs": [{"path": "week0.pgm", "label": "WEEK 0"}, ...],
      "crop": {"x": 0, "y": 0, "w": 369, "h": 200},
      "roi": {"w": 135, "h": 58},            # centered on the scaffold; or give x, y too
      "roi-control": {"tissue": {"x": 10, "y": 5, "w": 75, "h": 42}},
      "spatial-radius": 5, "range-radius": 100, "max-iterations": 5, "epsilon": 1.0,
      "threshold-mode": "otsu",              # or "fixed:<T>"
      "morph-kernel": 3, "morph-iterations": 2,
      "canny-low": 140, "canny-high": 280, "gaussian-kernel": 5,
      "gaussian-sigma": 1.4, "sobel-aperture": 3, "l2-gradient": true,
      "glcm-distance": 1, "glcm-angle": 0, "sg-window": 11, "sg-polyorder": 3,
      "feature-source": "raw",               # or "filtered"
      "output-dir": "out", "emit-intermediates": false, "charts": []
    }

Relative paths resolve against the config file's directory.
"""
from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from xml.etree import ElementTree as ET

from .analysis import FeatureRow, SegmentationSettings, auto_roi, digest, segment
from .edges import CannyParams
from .meanshift import MeanShiftParams
from .raster import RoiRect, crop, load_image, save_image
from .texture import SmoothingParams, pixel_distribution, roi_features

log = logging.getLogger(__name__)

CSV_HEADER = ("time", "area_px", "mean", "sd", "cv_pct", "contrast", "entropy", "energy", "idm")
_CSV_FIELDS = dict(zip(CSV_HEADER, ("label",) + tuple(FeatureRow.__dataclass_fields__)[1:]))
DEFAULT_ROI_SIZE = (135, 58)
CONTROL_ROI_SIZE = (75, 42)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScanInput:
    path: Path
    label: str


@dataclass(frozen=True)
class ControlRois:
    """Week-0 control pair; ``scaffold=None`` centers it in the scan's main ROI."""

    tissue: RoiRect
    scaffold: RoiRect | None = None
    size: tuple[int, int] = CONTROL_ROI_SIZE


@dataclass
class PipelineConfig:
    inputs: list[ScanInput]
    crop: RoiRect
    segmentation: SegmentationSettings = field(default_factory=SegmentationSettings)
    roi: RoiRect | None = None  # None: auto-center a roi_size rect
    roi_size: tuple[int, int] = DEFAULT_ROI_SIZE
    control: ControlRois | None = None
    glcm_distance: int = 1
    glcm_angle: int = 0
    smoothing: SmoothingParams = field(default_factory=SmoothingParams)
    feature_source: str = "raw"
    output_dir: Path = Path("out")
    emit_intermediates: bool = False
    charts: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        s = self.segmentation
        roi = self.roi.as_dict() if self.roi else {"w": self.roi_size[0], "h": self.roi_size[1]}
        d = {
            "inputs": [{"path": str(i.path), "label": i.label} for i in self.inputs],
            "crop": self.crop.as_dict(),
            "roi": roi,
            "spatial-radius": s.mean_shift.spatial_radius,
            "range-radius": s.mean_shift.range_radius,
            "max-iterations": s.mean_shift.max_iterations,
            "epsilon": s.mean_shift.epsilon,
            "threshold-mode": "otsu" if s.threshold is None else f"fixed:{s.threshold}",
            "morph-kernel": s.morph_kernel,
            "morph-iterations": s.morph_iterations,
            "canny-low": s.canny.low_threshold,
            "canny-high": s.canny.high_threshold,
            "gaussian-kernel": s.canny.gaussian_kernel,
            "gaussian-sigma": s.canny.gaussian_sigma,
            "sobel-aperture": s.canny.sobel_aperture,
            "l2-gradient": s.canny.l2_gradient,
            "glcm-distance": self.glcm_distance,
            "glcm-angle": self.glcm_angle,
            "sg-window": self.smoothing.window,
            "sg-polyorder": self.smoothing.polyorder,
            "feature-source": self.feature_source,
            "output-dir": str(self.output_dir),
            "emit-intermediates": self.emit_intermediates,
            "charts": list(self.charts),
        }
        if self.control:
            c = {"tissue": self.control.tissue.as_dict()}
            if self.control.scaffold:
                c["scaffold"] = self.control.scaffold.as_dict()
            else:
                c["size"] = {"w": self.control.size[0], "h": self.control.size[1]}
            d["roi-control"] = c
        return d


_SCALARS = {
    # key: (type, default)
    "spatial-radius": (int, 5),
    "range-radius": (float, 100.0),
    "max-iterations": (int, 5),
    "epsilon": (float, 1.0),
    "threshold-mode": (str, "otsu"),
    "morph-kernel": (int, 3),
    "morph-iterations": (int, 2),
    "canny-low": (float, 140.0),
    "canny-high": (float, 280.0),
    "gaussian-kernel": (int, 5),
    "gaussian-sigma": (float, 1.4),
    "sobel-aperture": (int, 3),
    "l2-gradient": (bool, True),
    "glcm-distance": (int, 1),
    "glcm-angle": (int, 0),
    "sg-window": (int, 11),
    "sg-polyorder": (int, 3),
    "feature-source": (str, "raw"),
    "output-dir": (str, "out"),
    "emit-intermediates": (bool, False),
}
_KNOWN = set(_SCALARS) | {"inputs", "crop", "roi", "roi-control", "charts"}


def _scalar(doc, key):
    typ, default = _SCALARS[key]
    v = doc.get(key, default)
    if typ is bool:
        ok = isinstance(v, bool)
    elif typ is float:
        ok = isinstance(v, (int, float)) and not isinstance(v, bool)
    else:
        ok = isinstance(v, typ) and not isinstance(v, bool)
    if not ok:
        raise ConfigError(f"{key}: expected {typ.__name__}, got {v!r}")
    return typ(v)


def _rect(value, key, *, size_only_ok=False, default_size=None):
    if not isinstance(value, dict):
        raise ConfigError(f"{key}: expected an object with x, y, w, h")
    extra = set(value) - {"x", "y", "w", "h"}
    if extra:
        raise ConfigError(f"{key}: unknown keys {sorted(extra)}")
    if size_only_ok and "x" not in value and "y" not in value:
        w = value.get("w", default_size[0])
        h = value.get("h", default_size[1])
        if not (isinstance(w, int) and isinstance(h, int)) or w <= 0 or h <= 0:
            raise ConfigError(f"{key}: w and h must be positive integers")
        return None, (w, h)
    try:
        return RoiRect(value["x"], value["y"], value["w"], value["h"]), None
    except KeyError as exc:
        raise ConfigError(f"{key}: missing {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _within_crop(rect, size, key, crop_rect):
    w, h = (rect.w, rect.h) if rect else size
    if rect is not None and not rect.fits(crop_rect.w, crop_rect.h):
        raise ConfigError(f"{key}: {rect} exceeds the {crop_rect.w}x{crop_rect.h} crop")
    if w > crop_rect.w or h > crop_rect.h:
        raise ConfigError(f"{key}: {w}x{h} exceeds the {crop_rect.w}x{crop_rect.h} crop")


def config_from_dict(doc: dict, base_dir=Path(".")) -> PipelineConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _KNOWN
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    base_dir = Path(base_dir)

    raw_inputs = doc.get("inputs")
    if not isinstance(raw_inputs, list) or not raw_inputs:
        raise ConfigError("inputs: need a non-empty list of {path, label}")
    inputs = []
    for n, item in enumerate(raw_inputs):
        key = f"inputs[{n}]"
        if isinstance(item, str):
            item = {"path": item}
        if not isinstance(item, dict) or "path" not in item or set(item) - {"path", "label"}:
            raise ConfigError(f"{key}: expected {{path, label}}")
        path = base_dir / item["path"]
        inputs.append(ScanInput(path, str(item.get("label", Path(item["path"]).stem))))

    if "crop" not in doc:
        raise ConfigError("crop: required")
    crop_rect, _ = _rect(doc["crop"], "crop")

    roi, roi_size = _rect(doc.get("roi", {}), "roi", size_only_ok=True, default_size=DEFAULT_ROI_SIZE)
    _within_crop(roi, roi_size, "roi", crop_rect)
    if roi is not None:
        roi_size = (roi.w, roi.h)

    control = None
    if "roi-control" in doc:
        c = doc["roi-control"]
        if not isinstance(c, dict) or "tissue" not in c or set(c) - {"tissue", "scaffold", "size"}:
            raise ConfigError("roi-control: expected {tissue, [scaffold], [size]}")
        tissue, _ = _rect(c["tissue"], "roi-control.tissue")
        _within_crop(tissue, None, "roi-control.tissue", crop_rect)
        scaffold = None
        size = CONTROL_ROI_SIZE
        if "scaffold" in c:
            scaffold, _ = _rect(c["scaffold"], "roi-control.scaffold")
            _within_crop(scaffold, None, "roi-control.scaffold", crop_rect)
        elif "size" in c:
            _, size = _rect(c["size"], "roi-control.size", size_only_ok=True, default_size=CONTROL_ROI_SIZE)
            _within_crop(None, size, "roi-control.size", crop_rect)
        control = ControlRois(tissue, scaffold, size)

    mode = _scalar(doc, "threshold-mode")
    m = re.fullmatch(r"otsu|fixed:(\d{1,3})", mode)
    if m is None or (m.group(1) and int(m.group(1)) > 255):
        raise ConfigError(f"threshold-mode: expected 'otsu' or 'fixed:<0-255>', got {mode!r}")
    threshold = int(m.group(1)) if m.group(1) else None

    source = _scalar(doc, "feature-source")
    if source not in ("raw", "filtered"):
        raise ConfigError(f"feature-source: expected 'raw' or 'filtered', got {source!r}")

    charts = doc.get("charts", [])
    if not isinstance(charts, list) or any(c not in CSV_HEADER[1:] for c in charts):
        raise ConfigError(f"charts: metrics must be among {list(CSV_HEADER[1:])}")

    try:
        seg = SegmentationSettings(
            mean_shift=MeanShiftParams(_scalar(doc, "spatial-radius"), _scalar(doc, "range-radius"),
                                       _scalar(doc, "max-iterations"), _scalar(doc, "epsilon")),
            threshold=threshold,
            morph_kernel=_scalar(doc, "morph-kernel"),
            morph_iterations=_scalar(doc, "morph-iterations"),
            canny=CannyParams(_scalar(doc, "canny-low"), _scalar(doc, "canny-high"),
                              _scalar(doc, "gaussian-kernel"), _scalar(doc, "gaussian-sigma"),
                              _scalar(doc, "sobel-aperture"), _scalar(doc, "l2-gradient")),
        )
        smoothing = SmoothingParams(_scalar(doc, "sg-window"), _scalar(doc, "sg-polyorder"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    if seg.morph_kernel < 1 or seg.morph_kernel % 2 == 0:
        raise ConfigError(f"morph-kernel: must be odd and positive, got {seg.morph_kernel}")
    if seg.morph_iterations < 1:
        raise ConfigError("morph-iterations: must be >= 1")
    distance, angle = _scalar(doc, "glcm-distance"), _scalar(doc, "glcm-angle")
    if distance < 1:
        raise ConfigError("glcm-distance: must be >= 1")
    if angle not in (0, 45, 90, 135):
        raise ConfigError("glcm-angle: must be 0, 45, 90 or 135")

    return PipelineConfig(
        inputs=inputs,
        crop=crop_rect,
        segmentation=seg,
        roi=roi,
        roi_size=roi_size,
        control=control,
        glcm_distance=distance,
        glcm_angle=angle,
        smoothing=smoothing,
        feature_source=source,
        output_dir=base_dir / _scalar(doc, "output-dir"),
        emit_intermediates=_scalar(doc, "emit-intermediates"),
        charts=tuple(charts),
    )


def parse_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON: {exc}") from None
    return config_from_dict(doc, path.parent)


@dataclass
class ScanError:
    label: str
    path: str
    message: str


@dataclass
class PipelineResult:
    rows: list[FeatureRow]
    errors: list[ScanError]
    scans: list[dict]
    control: dict | None = None

    @property
    def ok(self) -> bool:
        return not self.errors


def _slug(label):
    return re.sub(r"[^A-Za-z0-9]+", "_", label).strip("_") or "scan"


def _analyze_scan(config: PipelineConfig, scan: ScanInput, index: int, write_intermediates: bool):
    image = load_image(scan.path)
    window = crop(image, config.crop)
    seg = segment(window, config.segmentation)
    w, h = config.roi_size
    rect = config.roi or auto_roi(seg.mask, w, h)
    source = window if config.feature_source == "raw" else seg.filtered
    first, second = roi_features(crop(source, rect), config.glcm_distance, config.glcm_angle)
    row = FeatureRow.build(scan.label, seg.area, first, second)
    info = {
        "label": scan.label,
        "path": str(scan.path),
        "threshold": seg.threshold,
        "area_px": seg.area,
        "roi": rect.as_dict(),
        "mask_sha256": digest(seg.mask),
        "canny_input_sha256": seg.canny_input_digest,
        "contour_px": int((seg.contour == 255).sum()),
    }
    if write_intermediates:
        out = config.output_dir / "intermediates"
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{index:03d}_{_slug(scan.label)}"
        for name, arr in (("crop", window), ("filtered", seg.filtered), ("mask", seg.mask), ("contour", seg.contour)):
            save_image(arr, out / f"{stem}_{name}.pgm")
    return row, info, window, rect


def _control_report(config: PipelineConfig, window, main_rect: RoiRect) -> dict:
    c = config.control
    scaffold = c.scaffold or RoiRect(0, 0, *c.size).centered_in(main_rect)
    report = {}
    for name, rect in (("scaffold", scaffold), ("tissue", c.tissue)):
        pixels = crop(window, rect)
        first, second = roi_features(pixels, config.glcm_distance, config.glcm_angle)
        report[name] = {
            "roi": rect.as_dict(),
            "mean": first.mean, "sd": first.sd, "cv_pct": first.cv,
            "contrast": second.contrast, "entropy": second.entropy,
            "energy": second.energy, "idm": second.idm,
            "distribution": [round(float(v), 6) for v in pixel_distribution(pixels, config.smoothing)],
        }
    return report


def run_pipeline(config: PipelineConfig, *, emit_intermediates: bool | None = None) -> PipelineResult:
    """Analyze every scan in input order; a failing scan is recorded and skipped."""
    write = config.emit_intermediates if emit_intermediates is None else emit_intermediates
    rows, errors, scans = [], [], []
    control = None
    for index, scan in enumerate(config.inputs):
        try:
            row, info, window, rect = _analyze_scan(config, scan, index, write)
        except Exception as exc:  # per-scan isolation
            log.warning("scan %s failed: %s", scan.label, exc)
            errors.append(ScanError(scan.label, str(scan.path), f"{type(exc).__name__}: {exc}"))
            continue
        rows.append(row)
        scans.append(info)
        if config.control is not None and index == 0:
            try:
                control = _control_report(config, window, rect)
            except Exception as exc:
                errors.append(ScanError(scan.label, str(scan.path), f"control ROI: {type(exc).__name__}: {exc}"))
    return PipelineResult(rows, errors, scans, control)


def _fmt(v):
    return f"{v:.2f}"


def emit_csv(rows, path) -> None:
    """Write rows with the fixed header and two-decimal formatting."""
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([r.label, r.area] + [_fmt(v) for v in (r.mean, r.sd, r.cv, r.contrast,
                                                             r.entropy, r.energy, r.idm)])


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        out = []
        for rec in csv.DictReader(fh):
            row = {"time": rec["time"], "area_px": int(rec["area_px"])}
            row.update({k: float(rec[k]) for k in CSV_HEADER[2:]})
            out.append(row)
        return out


def emit_trend_chart(rows, metric: str, path, *, width=480, height=300) -> None:
    """Self-contained SVG line chart of one CSV column over the rows, in order."""
    if metric not in CSV_HEADER[1:]:
        raise ValueError(f"unknown metric {metric!r}; choose from {list(CSV_HEADER[1:])}")
    if not rows:
        raise ValueError("no rows to plot")
    values = [float(getattr(r, _CSV_FIELDS[metric])) for r in rows]
    left, right, top, bottom = 60, 20, 20, 50
    pw, ph = width - left - right, height - top - bottom
    lo, hi = min(values), max(values)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    n = len(values)

    def px(i):
        return left + (pw / 2 if n == 1 else pw * i / (n - 1))

    def py(v):
        return top + ph * (hi - v) / (hi - lo)

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(width), height=str(height),
                     viewBox=f"0 0 {width} {height}")
    ET.SubElement(svg, "rect", x="0", y="0", width=str(width), height=str(height), fill="white")
    axes = ET.SubElement(svg, "g", {"class": "axes", "stroke": "black"})
    ET.SubElement(axes, "line", x1=str(left), y1=str(top + ph), x2=str(left + pw), y2=str(top + ph))
    ET.SubElement(axes, "line", x1=str(left), y1=str(top), x2=str(left), y2=str(top + ph))
    for v in (lo, hi):
        t = ET.SubElement(svg, "text", {"x": str(left - 6), "y": _fmt(py(v) + 4),
                                        "text-anchor": "end", "font-size": "11"})
        t.text = _fmt(v)
    xl = ET.SubElement(svg, "text", {"class": "x-label", "x": _fmt(left + pw / 2), "y": str(height - 8),
                                     "text-anchor": "middle", "font-size": "12"})
    xl.text = "time"
    yl = ET.SubElement(svg, "text", {"class": "y-label", "x": "14", "y": _fmt(top + ph / 2), "font-size": "12",
                                     "text-anchor": "middle", "transform": f"rotate(-90 14 {_fmt(top + ph / 2)})"})
    yl.text = metric
    series = ET.SubElement(svg, "g", {"class": "series"})
    for i in range(n - 1):
        ET.SubElement(series, "line", {"class": "segment", "stroke": "steelblue", "stroke-width": "2",
                                       "x1": _fmt(px(i)), "y1": _fmt(py(values[i])),
                                       "x2": _fmt(px(i + 1)), "y2": _fmt(py(values[i + 1]))})
    for i, (r, v) in enumerate(zip(rows, values)):
        ET.SubElement(series, "circle", {"class": "point", "r": "4", "fill": "steelblue",
                                         "cx": _fmt(px(i)), "cy": _fmt(py(v))})
        lab = ET.SubElement(svg, "text", {"x": _fmt(px(i)), "y": str(top + ph + 16),
                                          "text-anchor": "middle", "font-size": "11"})
        lab.text = r.label
    ET.ElementTree(svg).write(path, encoding="utf-8", xml_declaration=True)


def write_reports(config: PipelineConfig, result: PipelineResult, charts=()) -> list[Path]:
    """Write CSV, JSON report, resolved config and any requested charts."""
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    written = []
    (out / "resolved_config.json").write_text(json.dumps(config.to_dict(), indent=2) + "\n")
    written.append(out / "resolved_config.json")
    if result.rows:
        emit_csv(result.rows, out / "features.csv")
        written.append(out / "features.csv")
        for metric in dict.fromkeys(tuple(config.charts) + tuple(charts)):
            emit_trend_chart(result.rows, metric, out / f"trend_{metric}.svg")
            written.append(out / f"trend_{metric}.svg")
    report = {
        "scans": result.scans,
        "errors": [e.__dict__ for e in result.errors],
        "control": result.control,
    }
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    written.append(out / "report.json")
    return written
