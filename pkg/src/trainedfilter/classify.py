"""Diamond aperture extraction and ADRC-based pixel classification."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frame_io import as_plane

# |dx| + |dy| <= 2, scanned by row (dy) then column (dx)
APERTURE_OFFSETS: tuple[tuple[int, int], ...] = tuple(
    (dy, dx) for dy in range(-2, 3) for dx in range(-(2 - abs(dy)), 3 - abs(dy))
)
APERTURE_SIZE = len(APERTURE_OFFSETS)
CENTER_INDEX = APERTURE_OFFSETS.index((0, 0))
ADRC_BITS = APERTURE_SIZE

MODES = ("none", "std", "dr", "entropy")
DEFAULT_THRESHOLDS = {"none": 0.0, "std": 10.0, "dr": 32.0, "entropy": 2.0}


@dataclass(frozen=True)
class ClassifierSpec:
    complexity_mode: str = "std"
    threshold: float | None = None

    def __post_init__(self):
        if self.complexity_mode not in MODES:
            raise ValueError(f"unknown complexity mode {self.complexity_mode!r}")
        if self.threshold is None:
            object.__setattr__(self, "threshold", DEFAULT_THRESHOLDS[self.complexity_mode])
        if not self.threshold >= 0:
            raise ValueError(f"threshold must be >= 0, got {self.threshold}")

    @property
    def class_bits(self) -> int:
        return ADRC_BITS + (self.complexity_mode != "none")

    @property
    def num_classes(self) -> int:
        return 1 << self.class_bits


def aperture_stack(plane) -> np.ndarray:
    """All apertures of a plane as a float64 array of shape (H, W, 13)."""
    plane = as_plane(plane)
    h, w = plane.shape
    padded = np.pad(plane.astype(np.float64), 2, mode="edge")
    return np.stack(
        [padded[2 + dy:2 + dy + h, 2 + dx:2 + dx + w] for dy, dx in APERTURE_OFFSETS],
        axis=-1,
    )


def extract_aperture(plane, x: int, y: int) -> np.ndarray:
    plane = as_plane(plane)
    h, w = plane.shape
    if not (0 <= x < w and 0 <= y < h):
        raise IndexError(f"pixel ({x}, {y}) outside {w}x{h} plane")
    return np.array(
        [plane[min(max(y + dy, 0), h - 1), min(max(x + dx, 0), w - 1)]
         for dy, dx in APERTURE_OFFSETS],
        dtype=np.float64,
    )


def adrc_bits(apertures) -> np.ndarray:
    """1-bit ADRC: a sample maps to 1 only if strictly above the aperture mean.

    Accepts one aperture or any stack with the 13 samples on the last axis.
    """
    ap = np.asarray(apertures, dtype=np.float64)
    # v > sum/n rewritten as n*v > sum; exact for integer samples
    return ap * ap.shape[-1] > ap.sum(axis=-1, keepdims=True)


def local_entropy(apertures) -> np.ndarray:
    """Shannon entropy (bits) of the sample-value histogram of each aperture."""
    ap = np.asarray(apertures, dtype=np.float64)
    n = ap.shape[-1]
    counts = (ap[..., :, None] == ap[..., None, :]).sum(axis=-1)
    p = counts / n
    # each sample carries 1/n of its value's probability mass
    return -(np.log2(p) / n).sum(axis=-1)


def complexity_bit(apertures, spec: ClassifierSpec) -> np.ndarray:
    ap = np.asarray(apertures, dtype=np.float64)
    mode = spec.complexity_mode
    if mode == "dr":
        measure = ap.max(axis=-1) - ap.min(axis=-1)
    elif mode == "std":
        measure = ap.std(axis=-1)
    elif mode == "entropy":
        measure = local_entropy(ap)
    else:
        raise ValueError("complexity_bit needs a complexity mode other than 'none'")
    return measure >= spec.threshold


_BIT_WEIGHTS = (1 << np.arange(ADRC_BITS)).astype(np.int64)


def class_ids(apertures, spec: ClassifierSpec) -> np.ndarray:
    """Class index per aperture: ADRC bit k at bit k, complexity bit at bit 13."""
    ap = np.asarray(apertures, dtype=np.float64)
    if ap.shape[-1] != APERTURE_SIZE:
        raise ValueError(f"apertures must have {APERTURE_SIZE} samples, got {ap.shape[-1]}")
    ids = adrc_bits(ap).astype(np.int64) @ _BIT_WEIGHTS
    if spec.complexity_mode != "none":
        ids = ids | (complexity_bit(ap, spec).astype(np.int64) << ADRC_BITS)
    return ids


def classify(aperture, spec: ClassifierSpec) -> int:
    return int(class_ids(np.asarray(aperture, dtype=np.float64)[None, :], spec)[0])
