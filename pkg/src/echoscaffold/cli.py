"""Command line entry points: ``analyze`` and ``phantom``.

Exit codes: 0 on full success, 1 when at least one scan failed, 2 for a
bad config or spec file.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, fields
from pathlib import Path

from . import BACKEND, __version__
from .phantom import DegradationSeries, PhantomSpec, generate_series
from .pipeline import CSV_HEADER, ConfigError, parse_config, run_pipeline, write_reports
from .raster import save_image

_SERIES_KEYS = {"steps", "shrink", "mean_increment", "mean_schedule"}


def _cmd_analyze(args) -> int:
    try:
        config = parse_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.output_dir:
        config.output_dir = Path(args.output_dir)
    result = run_pipeline(config, emit_intermediates=args.emit_intermediates or None)
    written = write_reports(config, result, charts=args.chart or ())
    for path in written:
        print(path)
    for err in result.errors:
        print(f"scan failed [{err.label}] {err.path}: {err.message}", file=sys.stderr)
    return 0 if result.ok else 1


def load_phantom_spec(path) -> DegradationSeries:
    """Read a phantom spec; series keys (steps, shrink, ...) are optional."""
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ConfigError("phantom spec must be a JSON object")
    known = {f.name for f in fields(PhantomSpec)} | _SERIES_KEYS
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown phantom keys: {sorted(unknown)}")
    base = PhantomSpec(**{k: v for k, v in doc.items() if k not in _SERIES_KEYS})
    schedule = doc.get("mean_schedule")
    series = DegradationSeries(
        base,
        steps=doc.get("steps", 1),
        shrink=doc.get("shrink", 1.0),
        mean_increment=doc.get("mean_increment", 0.0),
        mean_schedule=tuple(schedule) if schedule is not None else None,
    )
    series.validate()
    base.validate()
    return series


def _cmd_phantom(args) -> int:
    try:
        series = load_phantom_spec(args.spec)
        frames = generate_series(series)
    except (ConfigError, OSError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"spec": asdict(series.base), "frames": []}
    manifest["spec"].update({"steps": series.steps, "shrink": series.shrink,
                             "mean_increment": series.mean_increment,
                             "mean_schedule": list(series.mean_schedule) if series.mean_schedule else None})
    for k, (image, mask, area) in enumerate(frames):
        spec = series.spec_at(k)
        save_image(image, out / f"phantom_{k:02d}.pgm")
        save_image(mask, out / f"mask_{k:02d}.pgm")
        manifest["frames"].append({
            "step": k, "image": f"phantom_{k:02d}.pgm", "mask": f"mask_{k:02d}.pgm",
            "true_area_px": area, "a": spec.a, "b": spec.b, "scaffold_mean": spec.scaffold_mean,
        })
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    # ready-made analyze config over the whole frame
    base = series.base
    analyze = {
        "inputs": [{"path": f["image"], "label": f"STEP {f['step']}"} for f in manifest["frames"]],
        "crop": {"x": 0, "y": 0, "w": base.width, "h": base.height},
        "output-dir": "report",
    }
    (out / "analyze.json").write_text(json.dumps(analyze, indent=2) + "\n")
    print(out / "manifest.json")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="echoscaffold", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="segment a scan series and write feature reports")
    a.add_argument("--config", required=True, help="pipeline JSON config")
    a.add_argument("--emit-intermediates", action="store_true",
                   help="also write crop, filtered, mask and contour PGMs per scan")
    a.add_argument("--chart", action="append", choices=CSV_HEADER[1:], metavar="METRIC",
                   help="write an SVG trend chart for METRIC (repeatable)")
    a.add_argument("--output-dir", help="override the config's output-dir")
    a.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("phantom", help="write synthetic speckle phantoms with ground truth")
    p.add_argument("--spec", required=True, help="phantom JSON spec")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_phantom)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
