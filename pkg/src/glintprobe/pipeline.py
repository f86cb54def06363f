"""End-to-end frame verification.

Frame + landmarks -> per-eye iris segmentation -> Otsu reflection mask ->
multi-scale NCC match against the expected probe templates -> verdict.
Landmark detection itself is pluggable: anything callable as
`provider(frame) -> EyeLandmarks | None` works (the simulator supplies ground
truth; deployments plug in a real face detector).
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import imageops
from .errors import (
    EmptyReflectionError,
    GlintProbeError,
    NoFaceError,
    NoIrisError,
    ParameterError,
)
from .geometry import DEFAULT_GEOMETRY, ImagingGeometry, reflection_pixel_extent
from .images import BinaryImage, GrayImage, RgbImage
from .imageops import Circle, MatchResult
from .patterns import ProbingPattern, binarize_pattern, multi_scale_templates, rasterize

AUTHENTIC = "Authentic"
SUSPECTED_DEEPFAKE = "SuspectedDeepFake"
INCONCLUSIVE = "Inconclusive"

#: Factor by which each side of the landmark eye box is grown before cropping.
EYE_BOX_EXPANSION = 0.2

#: Top Hough peak must collect at least this fraction of the rim's cells.
IRIS_VOTE_FLOOR = 0.25


@dataclass(frozen=True)
class EyeMark:
    """One eye's landmarks; coordinates are (x, y) = (col, row), boxes are
    (x0, y0, x1, y1) with exclusive maxima."""

    label: str
    inner: tuple[int, int]
    outer: tuple[int, int]
    box: tuple[int, int, int, int]

    def __post_init__(self):
        if self.label not in ("left", "right"):
            raise ParameterError(f"eye label must be left or right, got {self.label!r}")
        x0, y0, x1, y1 = self.box
        if not (x0 < x1 and y0 < y1):
            raise ParameterError(f"degenerate eye box {self.box}")
        for x, y in (self.inner, self.outer):
            if not (x0 <= x < x1 and y0 <= y < y1):
                raise ParameterError(f"corner ({x}, {y}) outside eye box {self.box}")


@dataclass(frozen=True)
class EyeLandmarks:
    eyes: tuple[EyeMark, ...]

    def __post_init__(self):
        if len(self.eyes) > 2:
            raise ParameterError("at most two eyes per face")


LandmarkProvider = Callable[[RgbImage], Optional[EyeLandmarks]]


class StaticLandmarks:
    """Provider that always reports the same landmarks (simulator truth,
    or landmarks loaded from a sidecar file)."""

    def __init__(self, landmarks: Optional[EyeLandmarks]):
        self._landmarks = landmarks

    def __call__(self, frame: RgbImage) -> Optional[EyeLandmarks]:
        return self._landmarks


def landmarks_from_dict(d: dict) -> EyeLandmarks:
    try:
        eyes = tuple(
            EyeMark(
                label=e["label"],
                inner=tuple(int(v) for v in e["inner"]),
                outer=tuple(int(v) for v in e["outer"]),
                box=tuple(int(v) for v in e["box"]),
            )
            for e in d["eyes"]
        )
    except KeyError as exc:
        raise ParameterError(f"landmarks JSON missing key {exc}") from exc
    return EyeLandmarks(eyes=eyes)


def landmarks_to_dict(lm: EyeLandmarks) -> dict:
    return {
        "eyes": [
            {"label": e.label, "inner": list(e.inner), "outer": list(e.outer), "box": list(e.box)}
            for e in lm.eyes
        ]
    }


@dataclass(frozen=True)
class PipelineConfig:
    geometry: ImagingGeometry = DEFAULT_GEOMETRY
    range_factor: float = 1.5
    scale_steps: int = 7
    ncc_threshold: float = 0.5
    edge_cut: float = 0.3
    iris_band: tuple[float, float] = (0.15, 0.45)
    eye_rule: str = "max"
    template_base_px: int = 64
    gray_match: bool = False
    min_crop_px: int = 16

    def __post_init__(self):
        if not (0.0 < self.ncc_threshold < 1.0):
            raise ParameterError("ncc_threshold must lie in (0,1)")
        if not (0.0 < self.edge_cut < 1.0):
            raise ParameterError("edge_cut must lie in (0,1)")
        lo, hi = self.iris_band
        if not (0.0 < lo < hi < 1.0):
            raise ParameterError(f"invalid iris radius band {self.iris_band}")
        if self.eye_rule != "max":
            raise ParameterError(f"unsupported eye combination rule {self.eye_rule!r}")
        if self.scale_steps < 3 or self.scale_steps % 2 == 0:
            raise ParameterError("scale_steps must be an odd integer >= 3")
        if not self.range_factor > 1:
            raise ParameterError("range_factor must exceed 1")
        if self.template_base_px < 4:
            raise ParameterError("template_base_px must be >= 4")

    def to_dict(self) -> dict:
        return {
            "geometry": self.geometry.to_dict(),
            "range_factor": self.range_factor,
            "scale_steps": self.scale_steps,
            "ncc_threshold": self.ncc_threshold,
            "edge_cut": self.edge_cut,
            "iris_band": list(self.iris_band),
            "eye_rule": self.eye_rule,
            "template_base_px": self.template_base_px,
            "gray_match": self.gray_match,
            "min_crop_px": self.min_crop_px,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        base = cls()
        geometry = ImagingGeometry.from_dict(d["geometry"]) if "geometry" in d else base.geometry
        band = tuple(d.get("iris_band", base.iris_band))
        return cls(
            geometry=geometry,
            range_factor=float(d.get("range_factor", base.range_factor)),
            scale_steps=int(d.get("scale_steps", base.scale_steps)),
            ncc_threshold=float(d.get("ncc_threshold", base.ncc_threshold)),
            edge_cut=float(d.get("edge_cut", base.edge_cut)),
            iris_band=(float(band[0]), float(band[1])),
            eye_rule=d.get("eye_rule", base.eye_rule),
            template_base_px=int(d.get("template_base_px", base.template_base_px)),
            gray_match=bool(d.get("gray_match", base.gray_match)),
            min_crop_px=int(d.get("min_crop_px", base.min_crop_px)),
        )


@dataclass(frozen=True)
class EyeCrop:
    label: str
    gray: GrayImage
    origin: tuple[int, int]  # (row, col) of the crop inside the frame


@dataclass(frozen=True)
class IrisRegion:
    label: str
    crop: GrayImage
    iris: Circle  # in crop coordinates

    def __post_init__(self):
        c = self.iris
        if not (
            c.cx - c.radius >= -0.5
            and c.cy - c.radius >= -0.5
            and c.cx + c.radius <= self.crop.cols - 0.5
            and c.cy + c.radius <= self.crop.rows - 0.5
        ):
            raise ParameterError("iris circle must lie fully inside the crop")


@dataclass(frozen=True)
class EyeOutcome:
    label: str
    match: Optional[MatchResult] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class ProbeVerdict:
    decision: str
    best_score: Optional[float]
    threshold: float
    eyes: tuple[EyeOutcome, ...] = field(default_factory=tuple)
    failure_reason: Optional[str] = None

    def to_dict(self) -> dict:
        eyes = []
        for e in self.eyes:
            if e.match is not None:
                eyes.append(
                    {
                        "label": e.label,
                        "u": e.match.u,
                        "v": e.match.v,
                        "scale_index": e.match.scale_index,
                        "score": e.match.score,
                    }
                )
            else:
                eyes.append({"label": e.label, "error": e.error})
        out = {
            "decision": self.decision,
            "best_score": self.best_score,
            "threshold": self.threshold,
            "eyes": eyes,
        }
        if self.failure_reason is not None:
            out["failure_reason"] = self.failure_reason
        return out


def decide(best_score: Optional[float], threshold: float) -> str:
    """Three-way decision; None means no eye could be analyzed."""
    if best_score is None:
        return INCONCLUSIVE
    return AUTHENTIC if best_score >= threshold else SUSPECTED_DEEPFAKE


def locate_eyes(frame: RgbImage, provider: LandmarkProvider) -> list[EyeCrop]:
    """Crop one grayscale patch per detected eye, each landmark box grown by
    20% per side and clipped to the frame."""
    landmarks = provider(frame)
    if landmarks is None or not landmarks.eyes:
        raise NoFaceError("landmark provider found no face")
    gray = imageops.to_gray(frame)
    crops = []
    for eye in landmarks.eyes:
        x0, y0, x1, y1 = eye.box
        mx = (x1 - x0) * EYE_BOX_EXPANSION
        my = (y1 - y0) * EYE_BOX_EXPANSION
        c0 = max(0, int(math.floor(x0 - mx)))
        r0 = max(0, int(math.floor(y0 - my)))
        c1 = min(frame.cols, int(math.ceil(x1 + mx)))
        r1 = min(frame.rows, int(math.ceil(y1 + my)))
        if r1 <= r0 or c1 <= c0:
            continue
        crops.append(EyeCrop(label=eye.label, gray=GrayImage(gray.pixels[r0:r1, c0:c1]), origin=(r0, c0)))
    if not crops:
        raise NoFaceError("no eye box overlaps the frame")
    return crops


def segment_iris(crop: GrayImage, cfg: PipelineConfig) -> IrisRegion:
    """Find the iris rim circle in an eye crop via Sobel + Hough.

    The radius band is cfg.iris_band expressed as a fraction of the crop's
    height.  Fails when the best circle's votes fall below IRIS_VOTE_FLOOR of
    its rim cell count.
    """
    if crop.rows < cfg.min_crop_px or crop.cols < cfg.min_crop_px:
        raise ParameterError(f"eye crop must be at least {cfg.min_crop_px}px on each side")
    edges = imageops.gradient_magnitude(crop)
    r_min = cfg.iris_band[0] * crop.rows
    r_max = min(cfg.iris_band[1] * crop.rows, min(crop.rows, crop.cols) - 1)
    candidates = imageops.hough_circles(edges, cfg.edge_cut, r_min, r_max, top_k=4)
    for circle in candidates:
        floor = IRIS_VOTE_FLOOR * imageops.circle_perimeter_count(circle.radius)
        if circle.votes < floor:
            break  # candidates are vote-ordered; the rest are weaker
        try:
            return IrisRegion(label="", crop=crop, iris=circle)
        except ParameterError:
            continue  # circle sticks out of the crop; try the next peak
    raise NoIrisError("no circle above the vote floor")


#: The disk interior is eroded by this fraction of the radius (at least 2 px)
#: before Otsu, keeping blur-smeared sclera at the rim and +-1 px segmentation
#: error out of the histogram.
IRIS_RIM_MARGIN = 0.15


def extract_reflection(region: IrisRegion) -> BinaryImage:
    """Otsu-binarize the iris disk interior; pixels outside the disk are 0
    and excluded from the histogram.  The bright class maps to 1."""
    crop = region.crop.pixels
    c = region.iris
    r_eff = c.radius - max(2.0, IRIS_RIM_MARGIN * c.radius)
    yy, xx = np.mgrid[0 : crop.shape[0], 0 : crop.shape[1]]
    inside = (yy - c.cy) ** 2 + (xx - c.cx) ** 2 <= r_eff**2
    interior = crop[inside]
    if interior.size == 0:
        raise EmptyReflectionError("iris interior is empty after rim erosion")
    try:
        t = imageops.otsu_threshold_of(interior)
    except GlintProbeError as exc:
        raise EmptyReflectionError(f"iris interior carries no signal: {exc}") from exc
    mask = np.zeros(crop.shape, dtype=np.uint8)
    mask[inside] = (interior >= t).astype(np.uint8)
    return BinaryImage(mask)


def pattern_templates(pattern: ProbingPattern, cfg: PipelineConfig) -> list[BinaryImage]:
    """Multi-scale template pyramid centered on the geometry-predicted
    reflection extent."""
    base = binarize_pattern(rasterize(pattern, cfg.template_base_px))
    center = reflection_pixel_extent(cfg.geometry)
    return multi_scale_templates(base, center, cfg.range_factor, cfg.scale_steps)


def _analyze_eye(
    crop: EyeCrop, templates: Sequence[BinaryImage], cfg: PipelineConfig
) -> MatchResult:
    region = segment_iris(crop.gray, cfg)
    if cfg.gray_match:
        target = crop.gray
    else:
        target = extract_reflection(region)
    return imageops.multi_scale_match(target, templates)


def verify_frame(
    frame: RgbImage,
    pattern: ProbingPattern,
    cfg: PipelineConfig,
    provider: LandmarkProvider,
) -> ProbeVerdict:
    """Verify a single frame; eyes that fail any stage are recorded with the
    error and skipped, and the decision uses the best surviving score."""
    templates = pattern_templates(pattern, cfg)
    try:
        crops = locate_eyes(frame, provider)
    except NoFaceError as exc:
        return ProbeVerdict(
            decision=INCONCLUSIVE,
            best_score=None,
            threshold=cfg.ncc_threshold,
            eyes=(),
            failure_reason=f"NoFace: {exc}",
        )
    outcomes = []
    for crop in crops:
        try:
            match = _analyze_eye(crop, templates, cfg)
            outcomes.append(EyeOutcome(label=crop.label, match=match))
        except GlintProbeError as exc:
            outcomes.append(EyeOutcome(label=crop.label, error=f"{type(exc).__name__}: {exc}"))
    scores = [o.match.score for o in outcomes if o.match is not None]
    if not scores:
        reasons = "; ".join(f"{o.label}: {o.error}" for o in outcomes)
        return ProbeVerdict(
            decision=INCONCLUSIVE,
            best_score=None,
            threshold=cfg.ncc_threshold,
            eyes=tuple(outcomes),
            failure_reason=reasons or "no analyzable eyes",
        )
    best = max(scores)
    return ProbeVerdict(
        decision=decide(best, cfg.ncc_threshold),
        best_score=best,
        threshold=cfg.ncc_threshold,
        eyes=tuple(outcomes),
    )


def aggregate_verdicts(verdicts: Sequence[ProbeVerdict], threshold: float) -> ProbeVerdict:
    """Median-of-frames aggregation; Inconclusive frames are ignored unless
    every frame is Inconclusive."""
    if not verdicts:
        raise ParameterError("need at least one verdict to aggregate")
    scores = [v.best_score for v in verdicts if v.best_score is not None]
    if not scores:
        return ProbeVerdict(
            decision=INCONCLUSIVE,
            best_score=None,
            threshold=threshold,
            eyes=(),
            failure_reason="all frames inconclusive",
        )
    best = float(statistics.median(scores))
    return ProbeVerdict(decision=decide(best, threshold), best_score=best, threshold=threshold, eyes=())


def verify_sequence(
    frames: Sequence[RgbImage],
    pattern: ProbingPattern,
    cfg: PipelineConfig,
    provider: LandmarkProvider,
) -> ProbeVerdict:
    """Verify a frame sequence; the aggregate score is the median of the
    per-frame best scores over non-Inconclusive frames."""
    if len(frames) == 0:
        raise ParameterError("frame sequence is empty")
    if len(frames) == 1:
        return verify_frame(frames[0], pattern, cfg, provider)
    verdicts = [verify_frame(f, pattern, cfg, provider) for f in frames]
    return aggregate_verdicts(verdicts, cfg.ncc_threshold)
