"""Prediction, feature, and label export.

`export_predictions` runs a model hook M times over the data and stacks
the passes into one (M, N, C) tensor; stochastic elements of the model
(dropout, sampling) are the hook's business and are re-drawn each pass
via the pass index it receives. `export_labels` converts annotation
tables using the {-1, 0, 1} convention, with blanks mapping to 0.
"""

import csv

import numpy as np

from .formats import ExportError, write_uqb1, write_uqf1, write_uql1

# Annotation spellings accepted by export_labels, case-insensitive.
_LABEL_ALIASES = {
    "1": 1, "1.0": 1, "positive": 1, "pos": 1, "yes": 1,
    "0": 0, "0.0": 0, "negative": 0, "neg": 0, "no": 0, "": 0,
    "-1": -1, "-1.0": -1, "uncertain": -1, "u": -1,
}


def export_predictions(model_hook, data, passes: int, out_path) -> np.ndarray:
    """Run `model_hook(data, pass_index)` M times and write a UQB1 file.

    The hook must return an (N, C) array of per-class probabilities for
    the full dataset; all passes must agree on the shape. Returns the
    stacked (M, N, C) tensor for convenience.
    """
    if passes < 1:
        raise ExportError("passes must be >= 1")
    members = []
    for m in range(passes):
        out = np.asarray(model_hook(data, m), dtype=np.float64)
        if out.ndim != 2:
            raise ExportError(f"pass {m}: model output must be 2-d (N, C), got shape {out.shape}")
        if members and out.shape != members[0].shape:
            raise ExportError(
                f"pass {m}: shape {out.shape} differs from pass 0 shape {members[0].shape}")
        if not np.isfinite(out).all() or out.min() < 0.0 or out.max() > 1.0:
            raise ExportError(f"pass {m}: probabilities must be finite and in [0, 1]")
        members.append(out)
    tensor = np.stack(members)
    write_uqb1(out_path, tensor)
    return tensor


def export_features(feature_hook, data, out_path) -> np.ndarray:
    """Run `feature_hook(data)` once and write the (N, D) result as UQF1."""
    out = np.asarray(feature_hook(data), dtype=np.float64)
    if out.ndim != 2:
        raise ExportError(f"features must be 2-d (N, D), got shape {out.shape}")
    write_uqf1(out_path, out)
    return out


def map_annotation(value) -> int:
    """Map one annotation cell to {-1, 0, 1}; blanks count as negative."""
    if value is None:
        return 0
    key = str(value).strip().lower()
    if key not in _LABEL_ALIASES:
        raise ExportError(f"unmappable annotation value {value!r}")
    return _LABEL_ALIASES[key]


def export_labels(rows, class_list, out_path) -> np.ndarray:
    """Convert an annotation table (list of dicts) to a UQL1 file.

    Each row maps class name -> annotation; classes absent from a row
    are treated as blank (0). Returns the (N, C) int8 matrix.
    """
    rows = list(rows)
    if not rows:
        raise ExportError("annotation table is empty")
    if not class_list:
        raise ExportError("class list is empty")
    for row in rows:
        unknown = set(row) - set(class_list)
        if unknown:
            raise ExportError(f"unknown class names in table: {sorted(unknown)}")
    labels = np.array(
        [[map_annotation(row.get(c)) for c in class_list] for row in rows],
        dtype=np.int8,
    )
    write_uql1(out_path, labels)
    return labels


def read_annotation_csv(path) -> list[dict]:
    """Read a CSV with a header of class names into a list of row dicts."""
    with open(path, newline="") as f:
        return [dict(row) for row in csv.DictReader(f)]
