"""Probing patterns: shape rasterization, randomization, and scale pyramids.

A probing pattern is a high-contrast shape on a (default white) background,
shown on the call screen.  Matching is shape-based, so the canonical derived
artifact is the binary foreground mask; color only matters for contrast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ParameterError
from .images import BinaryImage, RgbImage, _freeze

SHAPES = ("diamond", "triangle", "circle", "cross", "square", "text")

RGB = tuple[int, int, int]

WHITE: RGB = (255, 255, 255)

#: Dark foreground colors, all with contrast >= 0.5 against white.
HIGH_CONTRAST_PALETTE: tuple[RGB, ...] = (
    (0, 0, 0),
    (128, 0, 0),
    (0, 100, 0),
    (0, 0, 128),
    (255, 0, 0),
    (0, 0, 255),
    (128, 0, 128),
    (64, 64, 64),
)


def iround(x: float) -> int:
    """Round half away from zero; rounding must not depend on parity."""
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def luma(color: Sequence[int]) -> float:
    r, g, b = color
    return 0.299 * r + 0.587 * g + 0.114 * b


def _check_rgb(color, name: str) -> RGB:
    color = tuple(int(c) for c in color)
    if len(color) != 3 or any(c < 0 or c > 255 for c in color):
        raise ParameterError(f"{name} must be an RGB triple of 0..255 values")
    return color


@dataclass(frozen=True)
class ProbingPattern:
    shape: str
    foreground: RGB = (0, 0, 0)
    background: RGB = WHITE
    physical_height_cm: float = 14.5
    text_payload: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ParameterError(f"unknown shape {self.shape!r}, expected one of {SHAPES}")
        object.__setattr__(self, "foreground", _check_rgb(self.foreground, "foreground"))
        object.__setattr__(self, "background", _check_rgb(self.background, "background"))
        if self.foreground == self.background:
            raise ParameterError("foreground and background colors must differ")
        if not self.physical_height_cm > 0:
            raise ParameterError("physical_height_cm must be positive")
        if self.shape == "text" and not self.text_payload:
            raise ParameterError("text patterns require a non-empty text_payload")
        if not (0 <= int(self.seed) < 2**64):
            raise ParameterError("seed must fit in 64 unsigned bits")

    def to_dict(self) -> dict:
        return {
            "shape": self.shape,
            "fg": list(self.foreground),
            "bg": list(self.background),
            "physical_height_cm": self.physical_height_cm,
            "seed": int(self.seed),
            "text": self.text_payload,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProbingPattern":
        try:
            return cls(
                shape=d["shape"],
                foreground=tuple(d.get("fg", (0, 0, 0))),
                background=tuple(d.get("bg", WHITE)),
                physical_height_cm=float(d.get("physical_height_cm", 14.5)),
                text_payload=d.get("text"),
                seed=int(d.get("seed", 0)),
            )
        except KeyError as exc:
            raise ParameterError(f"pattern descriptor missing key {exc}") from exc


@dataclass(frozen=True)
class PatternRaster:
    """Square RGB rendering of a pattern plus the two colors it was built from."""

    pixels: np.ndarray
    foreground: RGB
    background: RGB

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ParameterError("PatternRaster pixels must have shape (rows, cols, 3)")
        object.__setattr__(self, "pixels", _freeze(arr.astype(np.uint8)))
        object.__setattr__(self, "foreground", _check_rgb(self.foreground, "foreground"))
        object.__setattr__(self, "background", _check_rgb(self.background, "background"))
        bits = _nearest_color_bits(self.pixels, self.foreground, self.background)
        if not (bits.any() and (1 - bits).any()):
            raise ParameterError("raster must contain both foreground and background pixels")

    @property
    def width_px(self) -> int:
        return self.pixels.shape[1]

    @property
    def height_px(self) -> int:
        return self.pixels.shape[0]

    def to_rgb(self) -> RgbImage:
        return RgbImage(self.pixels)


# --- 5x7 bitmap font -------------------------------------------------------
# Used by the date/time countermeasure patterns; '#' marks a lit cell.

_GLYPHS = {
    "0": ".###.|#...#|#..##|#.#.#|##..#|#...#|.###.",
    "1": "..#..|.##..|..#..|..#..|..#..|..#..|.###.",
    "2": ".###.|#...#|....#|...#.|..#..|.#...|#####",
    "3": ".###.|#...#|....#|..##.|....#|#...#|.###.",
    "4": "...#.|..##.|.#.#.|#..#.|#####|...#.|...#.",
    "5": "#####|#....|####.|....#|....#|#...#|.###.",
    "6": "..##.|.#...|#....|####.|#...#|#...#|.###.",
    "7": "#####|....#|...#.|..#..|.#...|.#...|.#...",
    "8": ".###.|#...#|#...#|.###.|#...#|#...#|.###.",
    "9": ".###.|#...#|#...#|.####|....#|...#.|.##..",
    "A": ".###.|#...#|#...#|#####|#...#|#...#|#...#",
    "B": "####.|#...#|#...#|####.|#...#|#...#|####.",
    "C": ".###.|#...#|#....|#....|#....|#...#|.###.",
    "D": "####.|#...#|#...#|#...#|#...#|#...#|####.",
    "E": "#####|#....|#....|####.|#....|#....|#####",
    "F": "#####|#....|#....|####.|#....|#....|#....",
    "G": ".###.|#...#|#....|#.###|#...#|#...#|.####",
    "H": "#...#|#...#|#...#|#####|#...#|#...#|#...#",
    "I": ".###.|..#..|..#..|..#..|..#..|..#..|.###.",
    "J": "..###|...#.|...#.|...#.|...#.|#..#.|.##..",
    "K": "#...#|#..#.|#.#..|##...|#.#..|#..#.|#...#",
    "L": "#....|#....|#....|#....|#....|#....|#####",
    "M": "#...#|##.##|#.#.#|#.#.#|#...#|#...#|#...#",
    "N": "#...#|##..#|#.#.#|#..##|#...#|#...#|#...#",
    "O": ".###.|#...#|#...#|#...#|#...#|#...#|.###.",
    "P": "####.|#...#|#...#|####.|#....|#....|#....",
    "Q": ".###.|#...#|#...#|#...#|#.#.#|#..#.|.##.#",
    "R": "####.|#...#|#...#|####.|#.#..|#..#.|#...#",
    "S": ".####|#....|#....|.###.|....#|....#|####.",
    "T": "#####|..#..|..#..|..#..|..#..|..#..|..#..",
    "U": "#...#|#...#|#...#|#...#|#...#|#...#|.###.",
    "V": "#...#|#...#|#...#|#...#|#...#|.#.#.|..#..",
    "W": "#...#|#...#|#...#|#.#.#|#.#.#|##.##|#...#",
    "X": "#...#|#...#|.#.#.|..#..|.#.#.|#...#|#...#",
    "Y": "#...#|#...#|.#.#.|..#..|..#..|..#..|..#..",
    "Z": "#####|....#|...#.|..#..|.#...|#....|#####",
    "-": ".....|.....|.....|#####|.....|.....|.....",
    ":": ".....|..#..|..#..|.....|..#..|..#..|.....",
    ".": ".....|.....|.....|.....|.....|.##..|.##..",
    "/": "....#|...#.|...#.|..#..|.#...|.#...|#....",
    " ": ".....|.....|.....|.....|.....|.....|.....",
}
_UNKNOWN_GLYPH = "#####|#####|#####|#####|#####|#####|#####"


def _glyph_bits(ch: str) -> np.ndarray:
    rows = _GLYPHS.get(ch.upper(), _UNKNOWN_GLYPH).split("|")
    return np.array([[c == "#" for c in row] for row in rows], dtype=bool)


def _text_block(text: str) -> np.ndarray:
    cols = []
    for i, ch in enumerate(text):
        if i:
            cols.append(np.zeros((7, 1), dtype=bool))
        cols.append(_glyph_bits(ch))
    return np.concatenate(cols, axis=1)


# --- rasterization ---------------------------------------------------------

def _shape_span(size_px: int) -> int:
    """Foreground extent in pixels: ~80% of the side, parity-matched to the
    side so margins stay symmetric, never below 60% and never the full side."""
    span = iround(0.8 * size_px)
    if (size_px - span) % 2 == 1:
        if span - 1 >= math.ceil(0.6 * size_px):
            span -= 1
        else:
            span = min(span + 1, size_px - 1)
    return min(span, size_px - 1)


def _resample_bool(block: np.ndarray, out_rows: int, out_cols: int) -> np.ndarray:
    """Nearest-neighbor resample of a boolean grid (pixel-center sampling)."""
    src_r = np.minimum((np.arange(out_rows) + 0.5) * block.shape[0] / out_rows, block.shape[0] - 1).astype(int)
    src_c = np.minimum((np.arange(out_cols) + 0.5) * block.shape[1] / out_cols, block.shape[1] - 1).astype(int)
    return block[np.ix_(src_r, src_c)]


def shape_mask(p: ProbingPattern, size_px: int) -> BinaryImage:
    """Binary foreground mask of the pattern on a size_px x size_px grid."""
    if size_px < 4:
        raise ParameterError(f"size_px must be at least 4, got {size_px}")
    span = _shape_span(size_px)
    r = span / 2.0
    offset = (size_px - span) // 2
    center = offset + (span - 1) / 2.0
    d = np.arange(size_px) - center
    dx = d[np.newaxis, :]
    dy = d[:, np.newaxis]

    if p.shape == "diamond":
        fg = np.abs(dx) + np.abs(dy) <= r
    elif p.shape == "circle":
        fg = dx * dx + dy * dy <= r * r
    elif p.shape == "square":
        fg = np.maximum(np.abs(dx), np.abs(dy)) <= r
    elif p.shape == "cross":
        arm = max(r / 3.0, 1.0)
        fg = ((np.abs(dx) <= arm) & (np.abs(dy) <= r)) | ((np.abs(dy) <= arm) & (np.abs(dx) <= r))
    elif p.shape == "triangle":
        fg = (np.abs(dy) <= r) & (np.abs(dx) <= (dy + r) / 2.0)
    elif p.shape == "text":
        fg = np.zeros((size_px, size_px), dtype=bool)
        block = _text_block(p.text_payload)
        tw = span
        th = min(span, max(1, iround(span * block.shape[0] / block.shape[1])))
        sampled = _resample_bool(block, th, tw)
        if not sampled.any():
            sampled[th // 2, tw // 2] = True  # keep tiny rasters non-degenerate
        r0 = (size_px - th) // 2
        c0 = (size_px - tw) // 2
        fg[r0 : r0 + th, c0 : c0 + tw] = sampled
    else:  # pragma: no cover - guarded by ProbingPattern validation
        raise ParameterError(f"unknown shape {p.shape!r}")

    return BinaryImage(fg.astype(np.uint8))


def rasterize(p: ProbingPattern, size_px: int) -> PatternRaster:
    """Render the pattern as a centered square raster of side size_px."""
    mask = shape_mask(p, size_px)
    pixels = np.empty((size_px, size_px, 3), dtype=np.uint8)
    pixels[:] = p.background
    pixels[mask.bits.astype(bool)] = p.foreground
    return PatternRaster(pixels=pixels, foreground=p.foreground, background=p.background)


def _nearest_color_bits(pixels: np.ndarray, fg: RGB, bg: RGB) -> np.ndarray:
    lum = pixels[..., 0] * 0.299 + pixels[..., 1] * 0.587 + pixels[..., 2] * 0.114
    # ties go to foreground
    return (np.abs(lum - luma(fg)) <= np.abs(lum - luma(bg))).astype(np.uint8)


def binarize_pattern(r: PatternRaster) -> BinaryImage:
    """Classify each pixel to the nearer (in luma) of the raster's two colors."""
    return BinaryImage(_nearest_color_bits(r.pixels, r.foreground, r.background))


def global_contrast(p: ProbingPattern) -> float:
    """Absolute luma difference of the two colors, normalized to [0, 1]."""
    return abs(luma(p.foreground) - luma(p.background)) / 255.0


def random_pattern(
    seed: int,
    shapes: Optional[Sequence[str]] = None,
    colors: Optional[Sequence[RGB]] = None,
    text_payload: Optional[str] = None,
) -> ProbingPattern:
    """Draw a pattern uniformly over the allowed shapes and a high-contrast
    palette; deterministic for a given seed.

    Text is only eligible when a payload is supplied (there is nothing
    deterministic to render otherwise).
    """
    if shapes is not None and len(shapes) == 0:
        raise ParameterError("shape constraint set must be non-empty")
    if colors is not None and len(colors) == 0:
        raise ParameterError("color constraint set must be non-empty")

    pool = list(shapes) if shapes is not None else [s for s in SHAPES if s != "text"]
    for s in pool:
        if s not in SHAPES:
            raise ParameterError(f"unknown shape {s!r} in constraint set")
    if text_payload is None:
        if shapes is not None and "text" in pool:
            raise ParameterError("text shape requires a text_payload")
        pool = [s for s in pool if s != "text"]
    if not pool:
        raise ParameterError("no drawable shapes after applying constraints")

    palette = [_check_rgb(c, "color") for c in colors] if colors is not None else list(HIGH_CONTRAST_PALETTE)
    palette = [c for c in palette if abs(luma(c) - luma(WHITE)) / 255.0 >= 0.5]
    if not palette:
        raise ParameterError("no colors with contrast >= 0.5 against white in constraint set")

    rng = np.random.Generator(np.random.PCG64(int(seed)))
    shape = pool[int(rng.integers(len(pool)))]
    fg = palette[int(rng.integers(len(palette)))]
    return ProbingPattern(
        shape=shape,
        foreground=fg,
        background=WHITE,
        text_payload=text_payload if shape == "text" else None,
        seed=int(seed),
    )


def resample_mask(mask: BinaryImage, side_px: int) -> BinaryImage:
    """Nearest-neighbor resample of a binary mask to a square side_px grid."""
    if side_px < 1:
        raise ParameterError("side_px must be positive")
    return BinaryImage(_resample_bool(mask.bits.astype(bool), side_px, side_px).astype(np.uint8))


def multi_scale_templates(
    mask: BinaryImage,
    center_scale_px: float,
    range_factor: float = 1.5,
    steps: int = 7,
) -> list[BinaryImage]:
    """Resample `mask` to `steps` sides geometrically spaced over
    [center/range_factor, center*range_factor]; sides are clamped to >= 4 px
    and the middle element sits at the center scale."""
    if center_scale_px < 4:
        raise ParameterError(f"center_scale_px must be >= 4, got {center_scale_px}")
    if not range_factor > 1:
        raise ParameterError(f"range_factor must exceed 1, got {range_factor}")
    if steps < 3 or steps % 2 == 0:
        raise ParameterError(f"steps must be an odd integer >= 3, got {steps}")
    if mask.count() == 0:
        raise ParameterError("template mask has no foreground pixels")
    half = steps // 2
    sides = [max(4, iround(center_scale_px * range_factor ** (k / half))) for k in range(-half, half + 1)]
    return [resample_mask(mask, side) for side in sides]


def template_sides(center_scale_px: float, range_factor: float = 1.5, steps: int = 7) -> list[int]:
    """The side lengths multi_scale_templates would produce."""
    half = steps // 2
    return [max(4, iround(center_scale_px * range_factor ** (k / half))) for k in range(-half, half + 1)]
