"""Raster value types and netpbm (PPM/PGM) serialization.

All rasters are immutable: the wrapped numpy buffer is marked read-only at
construction so images can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ParameterError

PathLike = Union[str, Path]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GrayImage:
    """Single-channel intensity raster, float64 values in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 2 or arr.size == 0:
            raise ParameterError("GrayImage requires a non-empty 2-D array")
        if not np.isfinite(arr).all():
            raise ParameterError("GrayImage intensities must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ParameterError("GrayImage intensities must lie in [0, 1]")
        object.__setattr__(self, "pixels", _freeze(arr))

    @property
    def rows(self) -> int:
        return self.pixels.shape[0]

    @property
    def cols(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class BinaryImage:
    """Single-channel {0, 1} mask, stored as uint8."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits)
        if arr.ndim != 2 or arr.size == 0:
            raise ParameterError("BinaryImage requires a non-empty 2-D array")
        arr = arr.astype(np.uint8, copy=True)
        if not np.isin(arr, (0, 1)).all():
            raise ParameterError("BinaryImage values must be 0 or 1")
        object.__setattr__(self, "bits", _freeze(arr))

    @property
    def rows(self) -> int:
        return self.bits.shape[0]

    @property
    def cols(self) -> int:
        return self.bits.shape[1]

    def count(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class RgbImage:
    """Three-channel raster, uint8, shape (rows, cols, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.size == 0:
            raise ParameterError("RgbImage requires a non-empty (rows, cols, 3) array")
        object.__setattr__(self, "pixels", _freeze(arr.astype(np.uint8)))

    @property
    def rows(self) -> int:
        return self.pixels.shape[0]

    @property
    def cols(self) -> int:
        return self.pixels.shape[1]


# --- netpbm parsing -------------------------------------------------------

def _read_tokens(data: bytes, count: int):
    """Yield `count` whitespace-separated header tokens, skipping # comments.

    Returns (tokens, offset_of_first_raster_byte).
    """
    tokens = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise ParameterError("truncated netpbm header")
        tokens.append(data[start:i])
    # single whitespace byte separates header from raster
    return tokens, i + 1


def _parse_netpbm(data: bytes, magic: bytes):
    tokens, offset = _read_tokens(data, 4)
    if tokens[0] != magic:
        raise ParameterError(f"expected {magic.decode()} file, got {tokens[0][:8]!r}")
    width, height, maxval = (int(t) for t in tokens[1:])
    if width <= 0 or height <= 0:
        raise ParameterError("netpbm dimensions must be positive")
    if maxval != 255:
        raise ParameterError("only maxval 255 netpbm rasters are supported")
    channels = 3 if magic == b"P6" else 1
    need = width * height * channels
    raster = data[offset : offset + need]
    if len(raster) != need:
        raise ParameterError("netpbm raster is truncated")
    arr = np.frombuffer(raster, dtype=np.uint8)
    if channels == 3:
        return arr.reshape(height, width, 3)
    return arr.reshape(height, width)


def decode_ppm(data: bytes) -> RgbImage:
    return RgbImage(_parse_netpbm(data, b"P6"))


def encode_ppm(img: RgbImage) -> bytes:
    header = f"P6\n{img.cols} {img.rows}\n255\n".encode()
    return header + img.pixels.tobytes()


def read_ppm(path: PathLike) -> RgbImage:
    return decode_ppm(Path(path).read_bytes())


def write_ppm(img: RgbImage, path: PathLike) -> None:
    Path(path).write_bytes(encode_ppm(img))


def decode_pgm(data: bytes) -> GrayImage:
    return GrayImage(_parse_netpbm(data, b"P5") / 255.0)


def encode_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.cols} {img.rows}\n255\n".encode()
    levels = np.clip(np.rint(img.pixels * 255.0), 0, 255).astype(np.uint8)
    return header + levels.tobytes()


def read_pgm(path: PathLike) -> GrayImage:
    return decode_pgm(Path(path).read_bytes())


def write_pgm(img: GrayImage, path: PathLike) -> None:
    Path(path).write_bytes(encode_pgm(img))


def decode_mask(data: bytes) -> BinaryImage:
    """Read a BinaryImage from a PGM restricted to values {0, 255}."""
    arr = _parse_netpbm(data, b"P5")
    if not np.isin(arr, (0, 255)).all():
        raise ParameterError("mask PGM must contain only values 0 and 255")
    return BinaryImage((arr == 255).astype(np.uint8))


def encode_mask(mask: BinaryImage) -> bytes:
    header = f"P5\n{mask.cols} {mask.rows}\n255\n".encode()
    return header + (mask.bits * np.uint8(255)).tobytes()


def read_mask(path: PathLike) -> BinaryImage:
    return decode_mask(Path(path).read_bytes())


def write_mask(mask: BinaryImage, path: PathLike) -> None:
    Path(path).write_bytes(encode_mask(mask))
