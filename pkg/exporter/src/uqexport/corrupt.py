"""Seeded image-corruption suite for building OOD evaluation sets.

Four transforms on grayscale images: gaussian noise, motion blur along a
line kernel, radial vignette, and rectangular mask occlusion. A single
severity scalar in [0, 1] scales every transform's parameters; severity
0 is a bit-exact identity. All randomness flows from one counter-based
Philox stream keyed by the seed, so output is deterministic.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .formats import ExportError

TRANSFORMS = ("gaussian_noise", "motion_blur", "vignette", "occlusion")


@dataclass(frozen=True)
class CorruptionSpec:
    severity: float = 1.0
    seed: int = 0
    noise_std: float = 0.1
    blur_length: int = 9
    blur_angle_deg: float = 0.0
    vignette_strength: float = 0.6
    occlusion_fraction: float = 0.15
    transforms: tuple = field(default=TRANSFORMS)

    def __post_init__(self):
        if not 0.0 <= self.severity <= 1.0:
            raise ExportError("severity must lie in [0, 1]")
        if self.noise_std < 0:
            raise ExportError("noise_std must be >= 0")
        if self.blur_length < 1:
            raise ExportError("blur_length must be >= 1")
        if not 0.0 <= self.vignette_strength <= 1.0:
            raise ExportError("vignette_strength must lie in [0, 1]")
        if not 0.0 <= self.occlusion_fraction <= 1.0:
            raise ExportError("occlusion_fraction must lie in [0, 1]")
        unknown = set(self.transforms) - set(TRANSFORMS)
        if unknown:
            raise ExportError(f"unknown transforms: {sorted(unknown)}")


def _line_kernel(length: int, angle_deg: float) -> np.ndarray:
    kernel = np.zeros((length, length))
    theta = math.radians(angle_deg)
    center = (length - 1) / 2.0
    for t in np.linspace(-center, center, 4 * length):
        r = int(round(center + t * math.sin(theta)))
        c = int(round(center + t * math.cos(theta)))
        kernel[r, c] = 1.0
    return kernel / kernel.sum()


def _gaussian_noise(img, spec, rng):
    return img + spec.severity * spec.noise_std * rng.standard_normal(img.shape)


def _motion_blur(img, spec, rng):
    length = int(round(1 + spec.severity * (spec.blur_length - 1)))
    if length <= 1:
        return img
    return ndimage.convolve(img, _line_kernel(length, spec.blur_angle_deg), mode="nearest")


def _vignette(img, spec, rng):
    h, w = img.shape
    rows = (np.arange(h) - (h - 1) / 2.0) / max((h - 1) / 2.0, 1)
    cols = (np.arange(w) - (w - 1) / 2.0) / max((w - 1) / 2.0, 1)
    r2 = rows[:, None] ** 2 + cols[None, :] ** 2
    return img * (1.0 - spec.severity * spec.vignette_strength * np.clip(r2 / 2.0, 0.0, 1.0))


def _occlusion(img, spec, rng):
    h, w = img.shape
    area = spec.severity * spec.occlusion_fraction
    if area <= 0:
        return img
    side = math.sqrt(area)
    bh = max(1, int(round(side * h)))
    bw = max(1, int(round(side * w)))
    top = int(rng.integers(0, h - bh + 1))
    left = int(rng.integers(0, w - bw + 1))
    out = img.copy()
    out[top:top + bh, left:left + bw] = 0.0
    return out


_TRANSFORM_FNS = {
    "gaussian_noise": _gaussian_noise,
    "motion_blur": _motion_blur,
    "vignette": _vignette,
    "occlusion": _occlusion,
}


def apply_corruptions(images: np.ndarray, spec: CorruptionSpec):
    """Corrupt a stack of grayscale images.

    images: (N, H, W), uint8 or float in [0, 1]. Returns (corrupted,
    ood_labels) where corrupted matches the input dtype and ood_labels
    is the (N,) int8 vector of ones marking every output as OOD (pair
    it with zeros for the clean set). Severity 0 returns a bit-identical
    copy.
    """
    images = np.asarray(images)
    if images.ndim != 3:
        raise ExportError(f"images must be a 3-d (N, H, W) stack, got shape {images.shape}")
    n = images.shape[0]
    ood_labels = np.ones(n, dtype=np.int8)
    if spec.severity == 0.0:
        return images.copy(), ood_labels

    as_uint8 = images.dtype == np.uint8
    stack = images.astype(np.float64) / 255.0 if as_uint8 else images.astype(np.float64)
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    out = np.empty_like(stack)
    for i in range(n):
        img = stack[i]
        for name in spec.transforms:
            img = _TRANSFORM_FNS[name](img, spec, rng)
        out[i] = np.clip(img, 0.0, 1.0)
    if as_uint8:
        out = np.round(out * 255.0).astype(np.uint8)
    return out, ood_labels
