"""Binary tensor file formats: UQB1, UQL1, UQF1, UQS1.

All formats are little-endian with a 4-byte ASCII magic and fixed-width
headers; payloads are float32 or int8 in C order. Loaders validate the
value domain before constructing any object and report byte offsets on
failure.

UQB1 (member tensors): magic, M/N/C uint32, payload-kind byte, M*N*C
float32. Kind 0 = probabilities, 1 = beta evidence (M=2: alpha, beta),
2 = heteroscedastic logits (M=2: mu, sigma).
UQL1 (labels): magic, N/C uint32, N*C int8 in {-1, 0, 1}.
UQF1 (features): magic, N/D uint32, N*D float32.
UQS1 (scores): magic, N/C uint32 (C=0 for per-sample), kind byte, float32.
"""

import struct

import numpy as np

from .decomposition import SCORE_KINDS, PredictionTensor, UncertaintyScores
from .ddu import FeatureMatrix
from .edl import BetaParams
from .hetnn import HetLogits
from .tasks import LabelTensor

KIND_PROBABILITIES = 0
KIND_BETA_PARAMS = 1
KIND_HET_LOGITS = 2

_UQB1_MAGIC = b"UQB1"
_UQL1_MAGIC = b"UQL1"
_UQF1_MAGIC = b"UQF1"
_UQS1_MAGIC = b"UQS1"


class FormatError(ValueError):
    """Malformed or out-of-domain file content; carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def _check_magic(data: bytes, magic: bytes, path: str) -> None:
    if len(data) < 4:
        raise FormatError(f"{path}: file shorter than the 4-byte magic", 0)
    if data[:4] != magic:
        raise FormatError(f"{path}: bad magic {data[:4]!r}, expected {magic!r}", 0)


def _payload(data: bytes, offset: int, count: int, dtype, path: str) -> np.ndarray:
    expected = offset + count * np.dtype(dtype).itemsize
    if len(data) != expected:
        raise FormatError(
            f"{path}: expected {expected} bytes, found {len(data)} (truncated or trailing data)",
            min(len(data), expected),
        )
    return np.frombuffer(data, dtype=dtype, count=count, offset=offset)


def _reject_nonfinite(values: np.ndarray, offset: int, path: str) -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        idx = int(np.flatnonzero(bad)[0])
        raise FormatError(f"{path}: non-finite value at flat index {idx}", offset + 4 * idx)


def write_uqb1(path, values: np.ndarray, kind: int = KIND_PROBABILITIES) -> None:
    """Write an (M, N, C) float tensor; values are stored as float32."""
    v = np.ascontiguousarray(values, dtype=np.float32)
    if v.ndim != 3:
        raise ValueError(f"UQB1 payload must be 3-d (M, N, C), got shape {v.shape}")
    if kind not in (KIND_PROBABILITIES, KIND_BETA_PARAMS, KIND_HET_LOGITS):
        raise ValueError(f"unknown payload kind {kind}")
    m, n, c = v.shape
    with open(path, "wb") as f:
        f.write(_UQB1_MAGIC)
        f.write(struct.pack("<IIIB", m, n, c, kind))
        f.write(v.tobytes())


def read_uqb1(path):
    """Load a UQB1 file into the domain object matching its kind byte."""
    path = str(path)
    with open(path, "rb") as f:
        data = f.read()
    _check_magic(data, _UQB1_MAGIC, path)
    if len(data) < 17:
        raise FormatError(f"{path}: truncated header", len(data))
    m, n, c, kind = struct.unpack_from("<IIIB", data, 4)
    if min(m, n, c) < 1:
        raise FormatError(f"{path}: M, N, C must all be >= 1, got {(m, n, c)}", 4)
    raw = _payload(data, 17, m * n * c, "<f4", path).astype(np.float64).reshape(m, n, c)
    _reject_nonfinite(raw, 17, path)
    if kind == KIND_PROBABILITIES:
        bad = (raw < 0.0) | (raw > 1.0)
        if bad.any():
            idx = int(np.flatnonzero(bad)[0])
            raise FormatError(
                f"{path}: probability {raw.ravel()[idx]} outside [0, 1] at flat index {idx}",
                17 + 4 * idx,
            )
        return PredictionTensor(raw)
    if kind == KIND_BETA_PARAMS:
        if m != 2:
            raise FormatError(f"{path}: beta-params payload requires M=2, got M={m}", 4)
        if raw.min() <= 0.0:
            idx = int(np.flatnonzero(raw.ravel() <= 0.0)[0])
            raise FormatError(f"{path}: non-positive evidence at flat index {idx}", 17 + 4 * idx)
        return BetaParams(alpha=raw[0], beta=raw[1])
    if kind == KIND_HET_LOGITS:
        if m != 2:
            raise FormatError(f"{path}: het-logits payload requires M=2, got M={m}", 4)
        if raw[1].min() < 0.0:
            idx = int(np.flatnonzero(raw[1].ravel() < 0.0)[0])
            raise FormatError(f"{path}: negative sigma at flat index {idx}", 17 + 4 * (n * c + idx))
        return HetLogits(mu=raw[0], sigma=raw[1])
    raise FormatError(f"{path}: unknown payload kind {kind}", 16)


def write_uql1(path, labels) -> None:
    v = labels.values if isinstance(labels, LabelTensor) else np.asarray(labels)
    v = np.ascontiguousarray(v, dtype=np.int8)
    if v.ndim == 1:
        v = v[:, None]
    n, c = v.shape
    with open(path, "wb") as f:
        f.write(_UQL1_MAGIC)
        f.write(struct.pack("<II", n, c))
        f.write(v.tobytes())


def read_uql1(path) -> LabelTensor:
    path = str(path)
    with open(path, "rb") as f:
        data = f.read()
    _check_magic(data, _UQL1_MAGIC, path)
    if len(data) < 12:
        raise FormatError(f"{path}: truncated header", len(data))
    n, c = struct.unpack_from("<II", data, 4)
    raw = _payload(data, 12, n * c, "<i1", path).reshape(n, c)
    bad = ~np.isin(raw, (-1, 0, 1))
    if bad.any():
        idx = int(np.flatnonzero(bad)[0])
        raise FormatError(f"{path}: label {raw.ravel()[idx]} outside {{-1, 0, 1}} at flat index {idx}", 12 + idx)
    return LabelTensor(raw)


def write_uqf1(path, features) -> None:
    v = features.values if isinstance(features, FeatureMatrix) else np.asarray(features)
    v = np.ascontiguousarray(v, dtype=np.float32)
    n, d = v.shape
    with open(path, "wb") as f:
        f.write(_UQF1_MAGIC)
        f.write(struct.pack("<II", n, d))
        f.write(v.tobytes())


def read_uqf1(path) -> FeatureMatrix:
    path = str(path)
    with open(path, "rb") as f:
        data = f.read()
    _check_magic(data, _UQF1_MAGIC, path)
    if len(data) < 12:
        raise FormatError(f"{path}: truncated header", len(data))
    n, d = struct.unpack_from("<II", data, 4)
    raw = _payload(data, 12, n * d, "<f4", path).astype(np.float64).reshape(n, d)
    _reject_nonfinite(raw, 12, path)
    return FeatureMatrix(raw)


def write_uqs1(path, scores: UncertaintyScores) -> None:
    v = np.ascontiguousarray(scores.values, dtype=np.float32)
    n = v.shape[0]
    c = v.shape[1] if v.ndim == 2 else 0
    with open(path, "wb") as f:
        f.write(_UQS1_MAGIC)
        f.write(struct.pack("<IIB", n, c, SCORE_KINDS.index(scores.kind)))
        f.write(v.tobytes())


def read_uqs1(path) -> UncertaintyScores:
    path = str(path)
    with open(path, "rb") as f:
        data = f.read()
    _check_magic(data, _UQS1_MAGIC, path)
    if len(data) < 13:
        raise FormatError(f"{path}: truncated header", len(data))
    n, c, kind_idx = struct.unpack_from("<IIB", data, 4)
    if kind_idx >= len(SCORE_KINDS):
        raise FormatError(f"{path}: unknown score-kind byte {kind_idx}", 12)
    count = n * max(c, 1)
    raw = _payload(data, 13, count, "<f4", path).astype(np.float64)
    _reject_nonfinite(raw, 13, path)
    if c > 0:
        raw = raw.reshape(n, c)
    return UncertaintyScores(raw, SCORE_KINDS[kind_idx])
