"""Off-line training: per-class normal equations and their least-squares solution."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .classify import APERTURE_SIZE, CENTER_INDEX, ClassifierSpec, aperture_stack, class_ids
from .frame_io import FormatError, as_plane, atomic_write

DEFAULT_MIN_SAMPLES = 2 * APERTURE_SIZE
PIVOT_TOLERANCE = 1e-9

SOLVED, IDENTITY_FALLBACK = 0, 1

LUT_MAGIC = b"TFLT"
LUT_VERSION = 1
LUT_HEADER_SIZE = 8
LUT_ENTRY = np.dtype([("n", "<u8"), ("flag", "u1"), ("weights", "<f8", (APERTURE_SIZE,))])

_UPPER = np.triu_indices(APERTURE_SIZE)


@dataclass
class ClassAccumulator:
    ata: np.ndarray
    atb: np.ndarray
    n: int


class ClassAccumulators:
    """Normal-equation sums for every class of a classifier.

    ``ata[c] = sum(outer(ap, ap))``, ``atb[c] = sum(ap * target)`` and
    ``n[c]`` the number of training pairs that fell into class ``c``.
    """

    def __init__(self, class_bits: int):
        if class_bits < 1:
            raise ValueError(f"class_bits must be positive, got {class_bits}")
        self.class_bits = class_bits
        size = 1 << class_bits
        self.ata = np.zeros((size, APERTURE_SIZE, APERTURE_SIZE))
        self.atb = np.zeros((size, APERTURE_SIZE))
        self.n = np.zeros(size, dtype=np.int64)

    @property
    def num_classes(self) -> int:
        return 1 << self.class_bits

    def __getitem__(self, class_id: int) -> ClassAccumulator:
        return ClassAccumulator(self.ata[class_id], self.atb[class_id], int(self.n[class_id]))

    def _check_ids(self, ids: np.ndarray) -> None:
        if ids.size and (ids.min() < 0 or ids.max() >= self.num_classes):
            raise ValueError(f"class id out of range for {self.class_bits}-bit classes")

    def add(self, aperture, target: float, class_id: int) -> None:
        ap = np.asarray(aperture, dtype=np.float64)
        self._check_ids(np.array([class_id]))
        self.ata[class_id] += np.outer(ap, ap)
        self.atb[class_id] += ap * target
        self.n[class_id] += 1

    def add_batch(self, apertures, targets, ids) -> None:
        """Accumulate many pairs at once; equivalent to repeated :meth:`add`."""
        ap = np.asarray(apertures, dtype=np.float64).reshape(-1, APERTURE_SIZE)
        t = np.asarray(targets, dtype=np.float64).ravel()
        ids = np.asarray(ids, dtype=np.int64).ravel()
        if not (len(ap) == len(t) == len(ids)):
            raise ValueError("apertures, targets and ids must have the same length")
        self._check_ids(ids)
        size = self.num_classes
        upper = np.empty((size, len(_UPPER[0])))
        for m, (k, i) in enumerate(zip(*_UPPER)):
            upper[:, m] = np.bincount(ids, weights=ap[:, k] * ap[:, i], minlength=size)
        # mirror the upper triangle so ata stays exactly symmetric
        block = np.zeros((size, APERTURE_SIZE, APERTURE_SIZE))
        block[:, _UPPER[0], _UPPER[1]] = upper
        block[:, _UPPER[1], _UPPER[0]] = upper
        self.ata += block
        for k in range(APERTURE_SIZE):
            self.atb[:, k] += np.bincount(ids, weights=ap[:, k] * t, minlength=size)
        self.n += np.bincount(ids, minlength=size)

    def merge(self, other: "ClassAccumulators") -> "ClassAccumulators":
        if other.class_bits != self.class_bits:
            raise ValueError(
                f"cannot merge {self.class_bits}-bit and {other.class_bits}-bit accumulators"
            )
        out = ClassAccumulators(self.class_bits)
        out.ata = self.ata + other.ata
        out.atb = self.atb + other.atb
        out.n = self.n + other.n
        return out


def gauss_solve(a, b, tol: float = PIVOT_TOLERANCE):
    """Solve ``a @ x = b`` by Gaussian elimination with partial pivoting.

    ``a`` may be a batch of shape (..., n, n) with ``b`` of shape (..., n).
    Returns ``(x, ok)``; ``ok`` is False where some pivot fell below
    ``tol`` times the largest initial diagonal magnitude (x is then garbage).
    """
    a = np.array(a, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    batch_shape, n = a.shape[:-2], a.shape[-1]
    A = a.reshape(-1, n, n)
    B = b.reshape(-1, n)
    rows = np.arange(len(A))
    limit = tol * np.abs(np.diagonal(A, axis1=1, axis2=2)).max(axis=1, initial=0.0)
    ok = np.ones(len(A), dtype=bool)
    for k in range(n):
        p = k + np.argmax(np.abs(A[:, k:, k]), axis=1)
        A[rows, k], A[rows, p] = A[rows, p], A[rows, k].copy()
        B[rows, k], B[rows, p] = B[rows, p], B[rows, k].copy()
        piv = A[:, k, k]
        bad = ~(np.abs(piv) >= limit) | (piv == 0)
        ok &= ~bad
        piv = np.where(bad, 1.0, piv)
        f = A[:, k + 1:, k] / piv[:, None]
        A[:, k + 1:, k:] -= f[:, :, None] * A[:, None, k, k:]
        B[:, k + 1:] -= f * B[:, k, None]
    diag = np.diagonal(A, axis1=1, axis2=2)
    diag = np.where(ok[:, None], diag, 1.0)
    x = np.zeros_like(B)
    for k in range(n - 1, -1, -1):
        x[:, k] = (B[:, k] - (A[:, k, k + 1:] * x[:, k + 1:]).sum(axis=1)) / diag[:, k]
    return x.reshape(*batch_shape, n), ok.reshape(batch_shape)


def identity_weights() -> np.ndarray:
    w = np.zeros(APERTURE_SIZE)
    w[CENTER_INDEX] = 1.0
    return w


def solve_class(acc: ClassAccumulator, min_samples: int = DEFAULT_MIN_SAMPLES,
                ridge: float = 0.0) -> tuple[np.ndarray, int]:
    if acc.n < max(min_samples, 1):
        return identity_weights(), IDENTITY_FALLBACK
    a = acc.ata + ridge * np.eye(APERTURE_SIZE)
    w, ok = gauss_solve(a, acc.atb)
    if not ok:
        return identity_weights(), IDENTITY_FALLBACK
    return w, SOLVED


@dataclass
class CoefficientTable:
    """Trained LUT: 13 weights, sample count and solve flag per class id."""

    class_bits: int
    weights: np.ndarray
    counts: np.ndarray
    flags: np.ndarray

    @classmethod
    def identity(cls, class_bits: int) -> "CoefficientTable":
        size = 1 << class_bits
        return cls(
            class_bits,
            np.tile(identity_weights(), (size, 1)),
            np.zeros(size, dtype=np.uint64),
            np.full(size, IDENTITY_FALLBACK, dtype=np.uint8),
        )

    @property
    def num_classes(self) -> int:
        return 1 << self.class_bits

    def to_bytes(self) -> bytes:
        entries = np.zeros(self.num_classes, dtype=LUT_ENTRY)
        entries["n"] = self.counts
        entries["flag"] = self.flags
        entries["weights"] = self.weights
        # magic, version, aperture size, class bits, one reserved zero byte
        header = LUT_MAGIC + bytes([LUT_VERSION, APERTURE_SIZE, self.class_bits, 0])
        return header + entries.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "CoefficientTable":
        if len(data) < LUT_HEADER_SIZE or data[:4] != LUT_MAGIC:
            raise FormatError("not a TFLT coefficient table")
        version, size, class_bits = data[4], data[5], data[6]
        if version != LUT_VERSION:
            raise FormatError(f"unsupported TFLT version {version}")
        if size != APERTURE_SIZE:
            raise FormatError(f"unsupported aperture size {size}")
        if class_bits not in (13, 14):
            raise FormatError(f"unsupported class_bits {class_bits}")
        expected = lut_file_size(class_bits)
        if len(data) != expected:
            raise FormatError(f"TFLT table is {len(data)} bytes, expected {expected}")
        entries = np.frombuffer(data, dtype=LUT_ENTRY, offset=LUT_HEADER_SIZE)
        flags = entries["flag"].copy()
        if np.any(flags > IDENTITY_FALLBACK):
            raise FormatError("invalid entry flag in TFLT table")
        return cls(
            int(class_bits),
            entries["weights"].astype(np.float64),
            entries["n"].astype(np.uint64),
            flags,
        )

    def save(self, path) -> None:
        atomic_write(path, self.to_bytes())

    @classmethod
    def load(cls, path) -> "CoefficientTable":
        return cls.from_bytes(Path(path).read_bytes())


def lut_file_size(class_bits: int) -> int:
    return LUT_HEADER_SIZE + (1 << class_bits) * LUT_ENTRY.itemsize


def solve_table(accs: ClassAccumulators, min_samples: int = DEFAULT_MIN_SAMPLES,
                ridge: float = 0.0) -> CoefficientTable:
    """Solve every class; under-sampled or singular classes get identity weights."""
    table = CoefficientTable.identity(accs.class_bits)
    table.counts = accs.n.astype(np.uint64)
    todo = np.flatnonzero(accs.n >= max(min_samples, 1))
    if len(todo):
        a = accs.ata[todo] + ridge * np.eye(APERTURE_SIZE)
        w, ok = gauss_solve(a, accs.atb[todo])
        solved = todo[ok]
        table.weights[solved] = w[ok]
        table.flags[solved] = SOLVED
    return table


def accumulate_plane(accs: ClassAccumulators, processed, target, spec: ClassifierSpec) -> None:
    """Add every pixel of one (processed, target) plane pair to ``accs``."""
    processed, target = as_plane(processed), as_plane(target)
    if processed.shape != target.shape:
        raise FormatError(
            f"processed plane {processed.shape} and target plane {target.shape} differ"
        )
    if spec.class_bits != accs.class_bits:
        raise ValueError("classifier and accumulator class_bits differ")
    ap = aperture_stack(processed).reshape(-1, APERTURE_SIZE)
    accs.add_batch(ap, target.ravel(), class_ids(ap, spec))


def train(
    target_planes: Iterable,
    degraded_planes: Iterable,
    enhancer: Callable[[np.ndarray], np.ndarray],
    spec: ClassifierSpec,
    min_samples: int = DEFAULT_MIN_SAMPLES,
    ridge: float = 0.0,
) -> CoefficientTable:
    """Enhance each degraded plane, classify its apertures and fit per-class weights.

    Apertures come from the enhanced plane; targets from the co-located
    pixel of the matching target plane.
    """
    accs = ClassAccumulators(spec.class_bits)
    for target, degraded in zip(target_planes, degraded_planes, strict=True):
        accumulate_plane(accs, enhancer(degraded), target, spec)
    return solve_table(accs, min_samples, ridge)


def training_residual(table: CoefficientTable, processed, target, spec: ClassifierSpec) -> np.ndarray:
    """Per-class sum of squared errors of the filtered processed plane."""
    processed, target = as_plane(processed), as_plane(target)
    ap = aperture_stack(processed).reshape(-1, APERTURE_SIZE)
    ids = class_ids(ap, spec)
    err = target.ravel() - np.einsum("ij,ij->i", ap, table.weights[ids])
    return np.bincount(ids, weights=err * err, minlength=table.num_classes)
