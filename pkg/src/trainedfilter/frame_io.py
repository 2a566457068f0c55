"""Raw planar YUV 4:2:2 sequences and binary PGM images.

A luma plane is a 2-D ``uint8`` numpy array of shape ``(height, width)``.
Raw YUV files carry no header, so geometry must be supplied by the caller.
Each frame is stored planar: W*H luma bytes, then (W/2)*H bytes of U, then
(W/2)*H bytes of V.
"""
from __future__ import annotations

import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class FormatError(ValueError):
    """Malformed or unsupported file content / geometry."""


def round_half_away(values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    return np.copysign(np.floor(np.abs(values) + 0.5), values)


def to_pixels(values) -> np.ndarray:
    """Round half away from zero, clamp to [0, 255] and cast to uint8."""
    return np.clip(round_half_away(values), 0, 255).astype(np.uint8)


def as_plane(plane) -> np.ndarray:
    arr = np.asarray(plane)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise FormatError(f"expected a non-empty 2-D plane, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if np.any(arr < 0) or np.any(arr > 255) or np.any(arr != np.floor(arr)):
            raise FormatError("plane samples must be integers in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


@dataclass(frozen=True)
class Yuv422Frame:
    y: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        h, w = self.y.shape
        if w % 2:
            raise FormatError(f"4:2:2 frame width must be even, got {w}")
        for name, plane in (("u", self.u), ("v", self.v)):
            if plane.shape != (h, w // 2):
                raise FormatError(
                    f"{name} plane shape {plane.shape} does not match luma {self.y.shape}"
                )

    @property
    def width(self) -> int:
        return self.y.shape[1]

    @property
    def height(self) -> int:
        return self.y.shape[0]

    def with_luma(self, y: np.ndarray) -> "Yuv422Frame":
        """Same chroma, new luma of identical geometry."""
        return Yuv422Frame(as_plane(y), self.u, self.v)

    def __eq__(self, other):
        if not isinstance(other, Yuv422Frame):
            return NotImplemented
        return all(
            np.array_equal(a, b)
            for a, b in ((self.y, other.y), (self.u, other.u), (self.v, other.v))
        )

    __hash__ = None


def frame_bytes(width: int, height: int) -> int:
    return 2 * width * height


def read_sequence(path, width: int, height: int) -> list[Yuv422Frame]:
    if width <= 0 or height <= 0:
        raise FormatError(f"invalid geometry {width}x{height}")
    if width % 2:
        raise FormatError(f"4:2:2 width must be even, got {width}")
    data = Path(path).read_bytes()
    stride = frame_bytes(width, height)
    if len(data) == 0 or len(data) % stride:
        raise FormatError(
            f"{path}: size {len(data)} is not a positive multiple of the "
            f"{width}x{height} 4:2:2 frame size {stride}"
        )
    buf = np.frombuffer(data, dtype=np.uint8)
    luma, chroma = width * height, (width // 2) * height
    frames = []
    for start in range(0, len(data), stride):
        y = buf[start:start + luma].reshape(height, width)
        u = buf[start + luma:start + luma + chroma].reshape(height, width // 2)
        v = buf[start + luma + chroma:start + stride].reshape(height, width // 2)
        frames.append(Yuv422Frame(y.copy(), u.copy(), v.copy()))
    return frames


def atomic_write(path, payload: bytes) -> None:
    """Write to a sibling temp file and rename, so failures leave nothing behind."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sequence_to_bytes(frames: list[Yuv422Frame]) -> bytes:
    if not frames:
        raise FormatError("no frames to write")
    shape = frames[0].y.shape
    for f in frames[1:]:
        if f.y.shape != shape:
            raise FormatError(f"mixed frame geometry: {f.y.shape} vs {shape}")
    return b"".join(
        np.ascontiguousarray(p, dtype=np.uint8).tobytes()
        for f in frames
        for p in (f.y, f.u, f.v)
    )


def write_sequence(frames: list[Yuv422Frame], path) -> None:
    atomic_write(path, sequence_to_bytes(frames))


_PGM_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*([^\s#]+)")


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:2] != b"P5":
        kind = data[:2].decode("latin-1", "replace")
        raise FormatError(f"{path}: unsupported format {kind!r}, only binary P5 is read")
    pos, fields = 2, []
    for _ in range(3):
        m = _PGM_TOKEN.match(data, pos)
        if m is None or not m.group(1).isdigit():
            raise FormatError(f"{path}: malformed PGM header")
        fields.append(int(m.group(1)))
        pos = m.end()
    width, height, maxval = fields
    if maxval != 255:
        raise FormatError(f"{path}: unsupported depth, maxval {maxval} (only 255)")
    if width <= 0 or height <= 0:
        raise FormatError(f"{path}: invalid geometry {width}x{height}")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FormatError(f"{path}: malformed PGM header")
    pos += 1
    pixels = data[pos:pos + width * height]
    if len(pixels) != width * height:
        raise FormatError(f"{path}: truncated pixel data")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width).copy()


def pgm_bytes(plane) -> bytes:
    plane = as_plane(plane)
    h, w = plane.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(plane).tobytes()


def write_pgm(plane, path) -> None:
    atomic_write(path, pgm_bytes(plane))
