"""Command-line entry points.

`uq-export-preds` runs a model hook (an importable `module:function`)
over a .npy data file for M passes and writes a UQB1 tensor.
`uq-corrupt` reads a directory of images, writes corrupted copies and
the paired OOD label file (0 = clean, 1 = corrupted).
`uq-export-labels` converts a CSV annotation table to UQL1.

Exit codes: 0 success, 1 data error (`uqexport-error: <message>` on
stderr), 2 usage error.
"""

import argparse
import importlib
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from .corrupt import CorruptionSpec, apply_corruptions
from .export import export_labels, export_predictions, read_annotation_csv
from .formats import ExportError, write_uql1

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}


def _resolve_hook(spec: str):
    if ":" not in spec:
        raise ExportError(f"model hook must be 'module:function', got {spec!r}")
    module_name, attr = spec.split(":", 1)
    try:
        module = importlib.import_module(module_name)
    except ImportError as exc:
        raise ExportError(f"cannot import {module_name}: {exc}") from exc
    if not hasattr(module, attr):
        raise ExportError(f"{module_name} has no attribute {attr!r}")
    return getattr(module, attr)


def _run(fn, args) -> int:
    try:
        return fn(args)
    except (ExportError, OSError) as exc:
        print(f"uqexport-error: {exc}", file=sys.stderr)
        return 1


def _cmd_export_preds(args) -> int:
    hook = _resolve_hook(args.model)
    data = np.load(args.data)
    tensor = export_predictions(hook, data, args.passes, args.out)
    m, n, c = tensor.shape
    print(f"wrote {args.out} (M={m}, N={n}, C={c})")
    return 0


def main_export_preds(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="uq-export-preds", description=__doc__)
    parser.add_argument("--model", required=True, help="model hook as module:function")
    parser.add_argument("--data", required=True, help=".npy input array passed to the hook")
    parser.add_argument("--passes", "-m", type=int, default=5)
    parser.add_argument("--out", required=True, help="output UQB1 path")
    return _run(_cmd_export_preds, parser.parse_args(argv))


def _load_grayscale_stack(image_dir: Path):
    paths = sorted(p for p in image_dir.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES)
    if not paths:
        raise ExportError(f"no images found in {image_dir}")
    arrays = []
    for p in paths:
        try:
            with Image.open(p) as img:
                arrays.append(np.asarray(img.convert("L")))
        except OSError as exc:
            raise ExportError(f"unreadable image {p}: {exc}") from exc
    shapes = {a.shape for a in arrays}
    if len(shapes) > 1:
        raise ExportError(f"images must share one resolution, found {sorted(shapes)}")
    return paths, np.stack(arrays)


def _cmd_corrupt(args) -> int:
    spec = CorruptionSpec(
        severity=args.severity, seed=args.seed, noise_std=args.noise_std,
        blur_length=args.blur_length, blur_angle_deg=args.blur_angle,
        vignette_strength=args.vignette_strength,
        occlusion_fraction=args.occlusion_fraction,
    )
    paths, stack = _load_grayscale_stack(Path(args.images))
    corrupted, _ = apply_corruptions(stack, spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = ["file,ood"]
    for p in paths:
        manifest.append(f"{p.name},0")
    for p, img in zip(paths, corrupted):
        name = f"{p.stem}_corrupt.png"
        Image.fromarray(img, mode="L").save(out / name)
        manifest.append(f"{name},1")
    labels = np.concatenate([np.zeros(len(paths), dtype=np.int8),
                             np.ones(len(paths), dtype=np.int8)])
    write_uql1(out / "ood_labels.uql1", labels)
    (out / "manifest.csv").write_text("\n".join(manifest) + "\n")
    print(f"wrote {len(paths)} corrupted images + ood_labels.uql1 to {out}")
    return 0


def main_corrupt(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="uq-corrupt", description=__doc__)
    parser.add_argument("--images", required=True, help="directory of clean grayscale images")
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--severity", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--noise-std", type=float, default=0.1)
    parser.add_argument("--blur-length", type=int, default=9)
    parser.add_argument("--blur-angle", type=float, default=0.0)
    parser.add_argument("--vignette-strength", type=float, default=0.6)
    parser.add_argument("--occlusion-fraction", type=float, default=0.15)
    return _run(_cmd_corrupt, parser.parse_args(argv))


def _cmd_export_labels(args) -> int:
    rows = read_annotation_csv(args.table)
    classes = [c.strip() for c in args.classes.split(",") if c.strip()]
    labels = export_labels(rows, classes, args.out)
    print(f"wrote {args.out} (N={labels.shape[0]}, C={labels.shape[1]})")
    return 0


def main_export_labels(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="uq-export-labels", description=__doc__)
    parser.add_argument("--table", required=True, help="CSV with class-name columns")
    parser.add_argument("--classes", required=True, help="comma-separated class list")
    parser.add_argument("--out", required=True, help="output UQL1 path")
    return _run(_cmd_export_labels, parser.parse_args(argv))
