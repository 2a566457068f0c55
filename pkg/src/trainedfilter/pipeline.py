"""The three repair scenarios: each pairs a degradation with a weak enhancer."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .classify import ClassifierSpec
from .degrade import CompressionSpec, GaussianSpec, compress_blocky, downsample_2x, gaussian_blur
from .enhance import PeakingSpec, bilinear_upscale_2x, peaking_filter, smooth_artifacts
from .frame_io import FormatError, Yuv422Frame

KINDS = ("deblock", "deblur", "upscale")

# table-header names for each stage, per embodiment
STAGE_LABELS = {
    "deblock": {"degraded": "Blocky", "enhanced": "Gaussian Blur", "repaired": "Repair"},
    "deblur": {"degraded": "GB", "enhanced": "Sharpen", "repaired": "Repair"},
    "upscale": {"degraded": "DS", "enhanced": "Up scaling", "repaired": "Repair"},
}


@dataclass(frozen=True)
class Embodiment:
    kind: str = "deblock"
    compression: CompressionSpec = field(default_factory=CompressionSpec)
    gaussian: GaussianSpec = field(default_factory=GaussianSpec)
    peaking: PeakingSpec = field(default_factory=PeakingSpec)
    classifier: ClassifierSpec | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown embodiment {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.classifier is None:
            mode = "none" if self.kind == "upscale" else "std"
            object.__setattr__(self, "classifier", ClassifierSpec(mode))

    @property
    def changes_geometry(self) -> bool:
        return self.kind == "upscale"

    def degrade(self, plane: np.ndarray) -> np.ndarray:
        if self.kind == "deblock":
            return compress_blocky(plane, self.compression)
        if self.kind == "deblur":
            return gaussian_blur(plane, self.gaussian)
        return downsample_2x(plane)

    def enhance(self, plane: np.ndarray) -> np.ndarray:
        if self.kind == "deblock":
            return smooth_artifacts(plane, self.gaussian)
        if self.kind == "deblur":
            return peaking_filter(plane, self.peaking)
        return bilinear_upscale_2x(plane)

    def degrade_frame(self, frame):
        return map_frame(frame, self.degrade, downsample_2x if self.changes_geometry else None)

    def enhance_frame(self, frame):
        return map_frame(frame, self.enhance, bilinear_upscale_2x if self.changes_geometry else None)


def map_frame(frame, luma_op: Callable, chroma_op: Callable | None = None):
    """Apply ``luma_op`` to a plane or to the Y of a 4:2:2 frame.

    Chroma is passed through untouched unless ``chroma_op`` is given, which
    happens only for geometry-changing steps so the frame stays valid 4:2:2.
    """
    if not isinstance(frame, Yuv422Frame):
        return luma_op(frame)
    y = luma_op(frame.y)
    if chroma_op is None:
        if y.shape != frame.y.shape:
            raise FormatError("luma geometry changed but no chroma operation given")
        return frame.with_luma(y)
    if frame.u.shape[1] % 2 and chroma_op is downsample_2x:
        raise FormatError("down-sampling a 4:2:2 frame needs width divisible by 4")
    return Yuv422Frame(y, chroma_op(frame.u), chroma_op(frame.v))


def luma(frame) -> np.ndarray:
    return frame.y if isinstance(frame, Yuv422Frame) else frame
