"""Full-reference quality metrics on luma planes: MSE, PSNR and mean SSIM."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .frame_io import FormatError, as_plane

PEAK = 255.0


@dataclass(frozen=True)
class SsimSpec:
    window: int = 8
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    c3: float | None = None

    def __post_init__(self):
        if self.window < 2:
            raise ValueError(f"window must be >= 2, got {self.window}")
        if not (self.k1 > 0 and self.k2 > 0 and self.dynamic_range > 0):
            raise ValueError("k1, k2 and dynamic_range must be positive")
        if not (self.alpha > 0 and self.beta > 0 and self.gamma > 0):
            raise ValueError("SSIM exponents must be positive")

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2

    @property
    def c3_value(self) -> float:
        return self.c2 / 2 if self.c3 is None else self.c3


@dataclass(frozen=True)
class QualityReport:
    mse: float
    psnr: float
    ssim: float


def _pair(ref, cand) -> tuple[np.ndarray, np.ndarray]:
    ref, cand = as_plane(ref), as_plane(cand)
    if ref.shape != cand.shape:
        raise FormatError(
            f"cannot compare planes of different size: {ref.shape} vs {cand.shape}"
        )
    return ref, cand


def mse(ref, cand) -> float:
    ref, cand = _pair(ref, cand)
    diff = ref.astype(np.int64) - cand.astype(np.int64)
    return float((diff * diff).sum() / diff.size)


def psnr(mse_value: float) -> float:
    if mse_value < 0:
        raise ValueError(f"MSE must be non-negative, got {mse_value}")
    if mse_value == 0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse_value)


def _window_sums(values: np.ndarray, n: int) -> np.ndarray:
    """Sum over every n x n window (stride 1) via an integral image."""
    s = np.zeros((values.shape[0] + 1, values.shape[1] + 1), dtype=np.int64)
    s[1:, 1:] = values.cumsum(axis=0).cumsum(axis=1)
    return s[n:, n:] - s[:-n, n:] - s[n:, :-n] + s[:-n, :-n]


def _signed_power(x: np.ndarray, p: float) -> np.ndarray:
    return x if p == 1 else np.sign(x) * np.abs(x) ** p


def ssim_map(ref, cand, spec: SsimSpec = SsimSpec()) -> np.ndarray:
    ref, cand = _pair(ref, cand)
    n = spec.window
    if ref.shape[0] < n or ref.shape[1] < n:
        raise FormatError(f"plane {ref.shape} is smaller than the {n}x{n} SSIM window")
    x = ref.astype(np.int64)
    y = cand.astype(np.int64)
    count = n * n
    # window sums of integer samples are exact in int64
    sx, sy = _window_sums(x, n), _window_sums(y, n)
    sxx, syy, sxy = _window_sums(x * x, n), _window_sums(y * y, n), _window_sums(x * y, n)
    mx, my = sx / count, sy / count
    vx = np.maximum((sxx - sx * sx / count) / (count - 1), 0.0)
    vy = np.maximum((syy - sy * sy / count) / (count - 1), 0.0)
    cov = (sxy - sx * sy / count) / (count - 1)
    dx, dy = np.sqrt(vx), np.sqrt(vy)
    c1, c2, c3 = spec.c1, spec.c2, spec.c3_value
    lum = (2 * mx * my + c1) / (mx * mx + my * my + c1)
    con = (2 * dx * dy + c2) / (vx + vy + c2)
    struct = (cov + c3) / (dx * dy + c3)
    return (_signed_power(lum, spec.alpha) * _signed_power(con, spec.beta)
            * _signed_power(struct, spec.gamma))


def ssim(ref, cand, spec: SsimSpec = SsimSpec()) -> float:
    """Mean SSIM over all sliding windows."""
    return float(ssim_map(ref, cand, spec).mean())


def evaluate(ref, cand, spec: SsimSpec = SsimSpec()) -> QualityReport:
    m = mse(ref, cand)
    return QualityReport(m, psnr(m), ssim(ref, cand, spec))
