"""Image kernels: grayscale, gradients, Otsu, Hough circles, and NCC matching.

All operations are pure functions over immutable images.  The sliding-window
NCC, Sobel, and Hough voting inner loops run on the selected kernel backend
(compiled extension or numpy fallback); everything here is glue, validation,
and deterministic tie-breaking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from ._backend import kernels
from .errors import DegenerateInputError, ParameterError
from .images import BinaryImage, GrayImage, RgbImage

AnyImage = Union[GrayImage, BinaryImage]
Matchable = Union[GrayImage, BinaryImage, np.ndarray]

OTSU_BINS = 256


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    radius: float
    votes: int = 0

    def __post_init__(self):
        if not self.radius > 0:
            raise ParameterError("circle radius must be positive")
        if self.votes < 0:
            raise ParameterError("circle votes must be nonnegative")


@dataclass(frozen=True)
class MatchResult:
    """Best template placement: (u, v) is the window's top-left (row, col)."""

    u: int
    v: int
    scale_index: int
    score: float

    def __post_init__(self):
        if self.u < 0 or self.v < 0:
            raise ParameterError("match offsets must be nonnegative")
        if abs(self.score) > 1.0 + 1e-9:
            raise ParameterError(f"NCC score out of range: {self.score}")


def _as_float(img) -> np.ndarray:
    if isinstance(img, GrayImage):
        return np.ascontiguousarray(img.pixels, dtype=np.float64)
    if isinstance(img, BinaryImage):
        return np.ascontiguousarray(img.bits, dtype=np.float64)
    if isinstance(img, np.ndarray) and img.ndim == 2:
        # NCC is affine-invariant, so raw float planes are accepted as-is
        return np.ascontiguousarray(img, dtype=np.float64)
    raise ParameterError(f"expected GrayImage, BinaryImage, or 2-D array, got {type(img).__name__}")


def _dims(img) -> tuple[int, int]:
    if isinstance(img, np.ndarray):
        return img.shape[0], img.shape[1]
    return img.rows, img.cols


def to_gray(rgb) -> GrayImage:
    """Luma conversion (0.299, 0.587, 0.114), scaled to [0, 1]."""
    pixels = getattr(rgb, "pixels", rgb)
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.size == 0:
        raise ParameterError("to_gray expects a non-empty (rows, cols, 3) raster")
    lum = arr[..., 0] * 0.299 + arr[..., 1] * 0.587 + arr[..., 2] * 0.114
    return GrayImage(np.clip(lum / 255.0, 0.0, 1.0))


def gradient_magnitude(img: GrayImage) -> GrayImage:
    """3x3 Sobel magnitude, edge-replicated borders, normalized by its max."""
    if img.rows < 3 or img.cols < 3:
        raise ParameterError("gradient_magnitude requires at least a 3x3 image")
    mag = np.asarray(kernels.sobel_magnitude(_as_float(img)))
    peak = mag.max()
    if peak > 0.0:
        mag = mag / peak
    return GrayImage(mag)


def otsu_threshold(img: GrayImage) -> float:
    """Threshold in (0,1) maximizing between-class variance on a 256-bin
    histogram; ties break toward the smallest threshold."""
    return otsu_threshold_of(img.pixels.ravel())


def otsu_threshold_of(values: np.ndarray) -> float:
    """Otsu over a flat array of intensities in [0, 1]."""
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ParameterError("otsu_threshold needs a non-empty sample")
    bins = np.minimum((values * OTSU_BINS).astype(np.int64), OTSU_BINS - 1)
    hist = np.bincount(bins, minlength=OTSU_BINS).astype(np.float64)
    if np.count_nonzero(hist) < 2:
        raise DegenerateInputError("image has fewer than two distinct intensity levels")
    total = hist.sum()
    centers = np.arange(OTSU_BINS, dtype=np.float64)
    weight0 = np.cumsum(hist)[:-1]                  # mass below candidate k = 1..255
    mass0 = np.cumsum(hist * centers)[:-1]
    weight1 = total - weight0
    mass_total = float((hist * centers).sum())
    valid = (weight0 > 0) & (weight1 > 0)
    between = np.zeros(OTSU_BINS - 1)
    mu0 = np.divide(mass0, weight0, out=np.zeros_like(mass0), where=valid)
    mu1 = np.divide(mass_total - mass0, weight1, out=np.zeros_like(mass0), where=valid)
    between[valid] = weight0[valid] * weight1[valid] * (mu0[valid] - mu1[valid]) ** 2
    k = int(np.argmax(between)) + 1                 # argmax returns the first (smallest) tie
    return k / OTSU_BINS


def binarize(img: GrayImage, t: float) -> BinaryImage:
    """Pixels >= t map to 1."""
    if not (0.0 < t < 1.0):
        raise ParameterError(f"threshold must lie strictly inside (0,1), got {t}")
    return BinaryImage((img.pixels >= t).astype(np.uint8))


# --- Hough circle transform -------------------------------------------------

def circle_offsets(radius: int) -> np.ndarray:
    """Distinct integer (dy, dx) displacements covering a circle perimeter."""
    n = max(8, int(math.ceil(2.0 * math.pi * radius)))
    theta = 2.0 * math.pi * np.arange(n) / n
    dy = np.floor(radius * np.sin(theta) + 0.5).astype(np.int64)
    dx = np.floor(radius * np.cos(theta) + 0.5).astype(np.int64)
    return np.unique(np.stack([dy, dx], axis=1), axis=0)


def circle_perimeter_count(radius: float) -> int:
    """Number of accumulator cells a full rim at this radius can vote from."""
    return int(circle_offsets(int(round(radius))).shape[0])


def hough_circles(
    edges: GrayImage,
    edge_cut: float,
    r_min: float,
    r_max: float,
    top_k: int = 3,
) -> list[Circle]:
    """Vote edge pixels (intensity >= edge_cut) along circle perimeters over
    an integer (cx, cy, r) accumulator; return up to top_k peaks with
    non-maximum suppression at half-radius center distance.

    Ties prefer the smaller radius, then the top-left center.
    """
    if not (0.0 < edge_cut < 1.0):
        raise ParameterError("edge_cut must lie in (0,1)")
    if not (0.0 < r_min < r_max < min(edges.rows, edges.cols)):
        raise ParameterError(f"invalid radius range [{r_min}, {r_max}] for {edges.rows}x{edges.cols} image")
    if top_k < 1:
        raise ParameterError("top_k must be positive")
    r_lo = max(1, int(math.ceil(r_min)))
    r_hi = int(math.floor(r_max))
    if r_hi < r_lo:
        raise ParameterError(f"radius range [{r_min}, {r_max}] contains no integer radius")

    edge_rows, edge_cols = np.nonzero(edges.pixels >= edge_cut)
    if edge_rows.size == 0:
        return []
    edge_rows = np.ascontiguousarray(edge_rows, dtype=np.int64)
    edge_cols = np.ascontiguousarray(edge_cols, dtype=np.int64)

    radii = list(range(r_lo, r_hi + 1))
    acc = np.stack(
        [
            np.asarray(
                kernels.hough_accumulate(
                    edge_rows,
                    edge_cols,
                    np.ascontiguousarray(circle_offsets(r), dtype=np.int64),
                    edges.rows,
                    edges.cols,
                )
            )
            for r in radii
        ]
    )

    found: list[Circle] = []
    yy, xx = np.mgrid[0 : edges.rows, 0 : edges.cols]
    while len(found) < top_k:
        flat = int(np.argmax(acc))
        votes = int(acc.ravel()[flat])
        if votes <= 0:
            break
        ri, cy, cx = np.unravel_index(flat, acc.shape)
        circle = Circle(cx=float(cx), cy=float(cy), radius=float(radii[ri]), votes=votes)
        found.append(circle)
        near = (yy - cy) ** 2 + (xx - cx) ** 2 < (circle.radius / 2.0) ** 2
        acc[:, near] = 0
    return found


# --- normalized cross-correlation -------------------------------------------

def ncc_score(image: Matchable, template: Matchable, u: int, v: int) -> float:
    """NCC of the template against the window whose top-left is (u, v);
    zero-variance windows or templates score 0 by convention."""
    img = _as_float(image)
    tpl = _as_float(template)
    h, w = tpl.shape
    if h > img.shape[0] or w > img.shape[1]:
        raise ParameterError("template does not fit inside the image")
    if not (0 <= u <= img.shape[0] - h and 0 <= v <= img.shape[1] - w):
        raise ParameterError(f"offset ({u}, {v}) places the template outside the image")
    window = img[u : u + h, v : v + w]
    wc = window - window.mean()
    tc = tpl - tpl.mean()
    denom = math.sqrt(float((wc * wc).sum()) * float((tc * tc).sum()))
    if denom <= 0.0:
        return 0.0
    return float((wc * tc).sum()) / denom


def ncc_score_map(image: Matchable, template: Matchable) -> np.ndarray:
    """NCC scores for every valid placement, shape (H-h+1, W-w+1)."""
    img = _as_float(image)
    tpl = _as_float(template)
    if tpl.shape[0] > img.shape[0] or tpl.shape[1] > img.shape[1]:
        raise ParameterError("template does not fit inside the image")
    tc = np.ascontiguousarray(tpl - tpl.mean())
    t_var = float((tc * tc).sum())
    return np.asarray(kernels.ncc_map(img, tc, t_var))


def _argmax_v_then_u(score_map: np.ndarray) -> tuple[int, int]:
    # first maximum scanning columns before rows = smallest v, then u
    flat = int(np.argmax(score_map.T))
    v, u = np.unravel_index(flat, score_map.T.shape)
    return int(u), int(v)


def ncc_match(image: Matchable, template: Matchable) -> MatchResult:
    """Placement with the highest NCC score; ties break toward the smallest
    column offset, then the smallest row offset."""
    score_map = ncc_score_map(image, template)
    u, v = _argmax_v_then_u(score_map)
    return MatchResult(u=u, v=v, scale_index=0, score=float(score_map[u, v]))


def multi_scale_match(image: Matchable, templates: Sequence[Matchable]) -> MatchResult:
    """Best ncc_match across a template pyramid; scale_index records the
    winning template.  Templates larger than the image are skipped; score
    ties keep the smallest scale_index."""
    if len(templates) == 0:
        raise ParameterError("template list is empty")
    rows, cols = _dims(image)
    best: MatchResult | None = None
    for index, tpl in enumerate(templates):
        t_rows, t_cols = _dims(tpl)
        if t_rows > rows or t_cols > cols:
            continue
        result = ncc_match(image, tpl)
        if best is None or result.score > best.score:
            best = MatchResult(u=result.u, v=result.v, scale_index=index, score=result.score)
    if best is None:
        raise ParameterError("every template is larger than the image")
    return best
