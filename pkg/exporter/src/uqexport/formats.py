"""Writers for the evaluation engine's binary file formats.

The exporter talks to the engine only through these files, so the byte
layouts are duplicated here rather than imported: little-endian, 4-byte
ASCII magic, fixed-width uint32 headers, C-order payloads.

UQB1 (member tensors): magic, M/N/C uint32, payload-kind byte (0 =
probabilities), M*N*C float32.
UQL1 (labels): magic, N/C uint32, N*C int8 in {-1, 0, 1}.
UQF1 (features): magic, N/D uint32, N*D float32.
"""

import struct

import numpy as np

KIND_PROBABILITIES = 0


class ExportError(ValueError):
    pass


def write_uqb1(path, values: np.ndarray) -> None:
    """Write an (M, N, C) probability tensor as a kind-0 UQB1 file."""
    v = np.ascontiguousarray(values, dtype=np.float32)
    if v.ndim != 3:
        raise ExportError(f"prediction tensor must be 3-d (M, N, C), got shape {v.shape}")
    if not np.isfinite(v).all():
        raise ExportError("prediction tensor contains non-finite values")
    if v.min() < 0.0 or v.max() > 1.0:
        raise ExportError("probabilities must lie in [0, 1]")
    m, n, c = v.shape
    with open(path, "wb") as f:
        f.write(b"UQB1")
        f.write(struct.pack("<IIIB", m, n, c, KIND_PROBABILITIES))
        f.write(v.tobytes())


def write_uql1(path, labels: np.ndarray) -> None:
    """Write an (N, C) label matrix with values in {-1, 0, 1}."""
    v = np.ascontiguousarray(labels, dtype=np.int8)
    if v.ndim == 1:
        v = v[:, None]
    if v.ndim != 2:
        raise ExportError(f"labels must be 1-d or 2-d, got shape {v.shape}")
    if not np.isin(v, (-1, 0, 1)).all():
        raise ExportError("labels must take values in {-1, 0, 1}")
    n, c = v.shape
    with open(path, "wb") as f:
        f.write(b"UQL1")
        f.write(struct.pack("<II", n, c))
        f.write(v.tobytes())


def write_uqf1(path, features: np.ndarray) -> None:
    """Write an (N, D) feature matrix as float32."""
    v = np.ascontiguousarray(features, dtype=np.float32)
    if v.ndim != 2:
        raise ExportError(f"features must be 2-d (N, D), got shape {v.shape}")
    if not np.isfinite(v).all():
        raise ExportError("features contain non-finite values")
    n, d = v.shape
    with open(path, "wb") as f:
        f.write(b"UQF1")
        f.write(struct.pack("<II", n, d))
        f.write(v.tobytes())
