"""Deliberately simple enhancement modules that the trained filter repairs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .degrade import GaussianSpec, convolve_separable
from .frame_io import as_plane, to_pixels


@dataclass(frozen=True)
class PeakingSpec:
    alpha: float = 0.2

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")

    def kernel(self) -> np.ndarray:
        a = float(self.alpha)
        return np.array([-a, 1.0 + 2.0 * a, -a])


def smooth_artifacts(plane, spec: GaussianSpec = GaussianSpec()) -> np.ndarray:
    """Gaussian smoothing used as a crude coding-artifact reducer."""
    plane = as_plane(plane)
    return to_pixels(convolve_separable(plane.astype(np.float64), spec.kernel()))


def peaking_values(plane, spec: PeakingSpec = PeakingSpec()) -> np.ndarray:
    """Unrounded peaking output (float64)."""
    plane = as_plane(plane)
    return convolve_separable(plane.astype(np.float64), spec.kernel())


def peaking_filter(plane, spec: PeakingSpec = PeakingSpec()) -> np.ndarray:
    return to_pixels(peaking_values(plane, spec))


def bilinear_upscale_2x(plane) -> np.ndarray:
    """2x bilinear up-scaling with the 0.75/0.25 block formulas.

    Each low-res cell (i, j) with its right, lower and diagonal neighbours
    D0..D3 (edge replicated) produces the output 2x2 block at (2i, 2j).
    """
    plane = as_plane(plane)
    lr = np.pad(plane.astype(np.float64), ((0, 1), (0, 1)), mode="edge")
    d0, d1 = lr[:-1, :-1], lr[:-1, 1:]
    d2, d3 = lr[1:, :-1], lr[1:, 1:]
    top_near = 0.75 * d0 + 0.25 * d1
    top_far = 0.25 * d0 + 0.75 * d1
    bot_near = 0.75 * d2 + 0.25 * d3
    bot_far = 0.25 * d2 + 0.75 * d3
    h, w = plane.shape
    out = np.empty((2 * h, 2 * w))
    out[0::2, 0::2] = top_near * 0.75 + bot_near * 0.25
    out[0::2, 1::2] = top_far * 0.75 + bot_far * 0.25
    out[1::2, 0::2] = top_near * 0.25 + bot_near * 0.75
    out[1::2, 1::2] = top_far * 0.25 + bot_far * 0.75
    return to_pixels(out)
