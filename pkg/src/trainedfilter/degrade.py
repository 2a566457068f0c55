"""Degradations that turn a target plane into a low-quality source."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frame_io import FormatError, as_plane, round_half_away, to_pixels

BLOCK = 8

# JPEG Annex K luminance quantization table.
LUMA_QTABLE = np.array([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
], dtype=np.int64)


@dataclass(frozen=True)
class CompressionSpec:
    quality: int = 20

    def __post_init__(self):
        if not 1 <= self.quality <= 100:
            raise ValueError(f"quality must be in [1, 100], got {self.quality}")


@dataclass(frozen=True)
class GaussianSpec:
    radius: int = 2
    sigma: float = 1.0

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    def kernel(self) -> np.ndarray:
        k = np.arange(-self.radius, self.radius + 1, dtype=np.float64)
        g = np.exp(-k * k / (2.0 * self.sigma ** 2))
        return g / g.sum()


def quant_table(quality: int) -> np.ndarray:
    """Annex K table scaled with the usual IJG quality convention."""
    scale = 5000 // quality if quality < 50 else 200 - 2 * quality
    return np.clip((LUMA_QTABLE * scale + 50) // 100, 1, 255)


def _dct_matrix(n: int = BLOCK) -> np.ndarray:
    k = np.arange(n)[:, None]
    x = np.arange(n)[None, :]
    m = np.cos((2 * x + 1) * k * np.pi / (2 * n)) * np.sqrt(2.0 / n)
    m[0] /= np.sqrt(2.0)
    return m


_DCT = _dct_matrix()


def compress_blocky(plane, spec: CompressionSpec = CompressionSpec()) -> np.ndarray:
    """Pixel-domain JPEG artifact simulation: 8x8 DCT, quantize, dequantize, IDCT.

    No entropy coding is involved; only the reconstruction error matters.
    """
    plane = as_plane(plane)
    h, w = plane.shape
    ph, pw = -h % BLOCK, -w % BLOCK
    padded = np.pad(plane, ((0, ph), (0, pw)), mode="edge").astype(np.float64) - 128.0
    H, W = padded.shape
    blocks = padded.reshape(H // BLOCK, BLOCK, W // BLOCK, BLOCK).transpose(0, 2, 1, 3)
    coeffs = _DCT @ blocks @ _DCT.T
    q = quant_table(spec.quality)
    coeffs = round_half_away(coeffs / q) * q
    recon = _DCT.T @ coeffs @ _DCT
    out = recon.transpose(0, 2, 1, 3).reshape(H, W)[:h, :w] + 128.0
    return to_pixels(out)


def convolve_separable(values: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Horizontal then vertical pass of a symmetric odd kernel, edge replication.

    Works on and returns float64; no rounding.
    """
    r = len(kernel) // 2
    h, w = values.shape
    padded = np.pad(values, ((0, 0), (r, r)), mode="edge")
    horiz = sum(kernel[i] * padded[:, i:i + w] for i in range(len(kernel)))
    padded = np.pad(horiz, ((r, r), (0, 0)), mode="edge")
    return sum(kernel[i] * padded[i:i + h, :] for i in range(len(kernel)))


def gaussian_blur(plane, spec: GaussianSpec = GaussianSpec()) -> np.ndarray:
    plane = as_plane(plane)
    return to_pixels(convolve_separable(plane.astype(np.float64), spec.kernel()))


def downsample_2x(plane) -> np.ndarray:
    """Average non-overlapping 2x2 blocks."""
    plane = as_plane(plane)
    h, w = plane.shape
    if h % 2 or w % 2:
        raise FormatError(f"downsampling needs even dimensions, got {w}x{h}")
    sums = plane.astype(np.int64).reshape(h // 2, 2, w // 2, 2).sum(axis=(1, 3))
    # sums are non-negative integers, so floor((s + 2) / 4) is round-half-up
    return ((sums + 2) // 4).astype(np.uint8)
