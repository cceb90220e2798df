"""Export bridge for the uncertainty evaluation engine."""

from .corrupt import TRANSFORMS, CorruptionSpec, apply_corruptions
from .export import (
    export_features,
    export_labels,
    export_predictions,
    map_annotation,
    read_annotation_csv,
)
from .formats import ExportError, write_uqb1, write_uqf1, write_uql1

__version__ = "0.1.0"

__all__ = [
    "CorruptionSpec",
    "ExportError",
    "TRANSFORMS",
    "apply_corruptions",
    "export_features",
    "export_labels",
    "export_predictions",
    "map_annotation",
    "read_annotation_csv",
    "write_uqb1",
    "write_uqf1",
    "write_uql1",
    "__version__",
]
