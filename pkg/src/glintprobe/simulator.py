"""Deterministic synthetic video-call scenes for testing and calibration.

Renders a stylized 640x480 face with two eyes whose iris geometry follows the
imaging model.  In real mode the probing pattern's binarized shape is stamped
as a bright corneal reflection inside each iris; in deepfake mode only small
generic specular glints appear (synthesized faces show eye highlights, never
the probe).  Ambient light is a brightness lift, compression is approximated
by box blur plus Gaussian noise.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import GeometryTooSmallError, GlintProbeError, ParameterError
from .geometry import DEFAULT_GEOMETRY, ImagingGeometry, reflection_pixel_extent
from .images import RgbImage
from .imageops import Circle
from .patterns import (
    ProbingPattern,
    binarize_pattern,
    global_contrast,
    iround,
    rasterize,
    resample_mask,
)
from .pipeline import (
    EyeLandmarks,
    EyeMark,
    PipelineConfig,
    ProbeVerdict,
    StaticLandmarks,
    verify_frame,
)

FRAME_ROWS = 480
FRAME_COLS = 640

#: Visible iris and pupil radii (cm); coupled to pixel sizes via the imaging
#: model so the rendered iris scales with the configured geometry.
IRIS_RADIUS_CM = 0.65
PUPIL_RADIUS_CM = 0.30

# scene luma levels [0,1]
_BACKDROP = (44, 44, 56)
_SKIN = (176, 138, 116)
_SCLERA = (228, 222, 216)
_IRIS = (48, 34, 24)  # luma ~0.145; dark iris keeps the pupil edge subtle
_PUPIL = (30, 24, 20)  # luma ~0.099
_IRIS_LUMA = (0.299 * _IRIS[0] + 0.587 * _IRIS[1] + 0.114 * _IRIS[2]) / 255.0
_REFLECTION_LUMA = 0.93
_GLINT_LUMA = 0.95

_EYE_CENTERS = {"left": (210, 250), "right": (210, 390)}  # (row, col)
_EYE_HALF_WIDTH = 39
_EYE_HALF_HEIGHT = 21

AMBIENT_STEP = 0.06


@dataclass(frozen=True)
class SceneParams:
    geometry: ImagingGeometry = DEFAULT_GEOMETRY
    pattern: ProbingPattern = ProbingPattern("diamond")
    ambient_level: int = 0
    noise_sigma: float = 0.02
    blur_radius_px: float = 1.0
    deepfake: bool = False
    gaze_offset_px: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.ambient_level not in range(6):
            raise ParameterError("ambient_level must be an integer in 0..5")
        if not (0.0 <= self.noise_sigma < 0.5):
            raise ParameterError("noise_sigma must lie in [0, 0.5)")
        if self.blur_radius_px < 0:
            raise ParameterError("blur_radius_px must be nonnegative")
        if abs(self.gaze_offset_px) > 4:
            raise ParameterError("gaze_offset_px must lie in [-4, 4]")
        if not (0 <= int(self.seed) < 2**64):
            raise ParameterError("seed must fit in 64 unsigned bits")


def scene_params_to_dict(p: SceneParams) -> dict:
    return {
        "geometry": p.geometry.to_dict(),
        "pattern": p.pattern.to_dict(),
        "ambient_level": p.ambient_level,
        "noise_sigma": p.noise_sigma,
        "blur_radius_px": p.blur_radius_px,
        "deepfake": p.deepfake,
        "gaze_offset_px": p.gaze_offset_px,
        "seed": int(p.seed),
    }


def scene_params_from_dict(d: dict) -> SceneParams:
    base = SceneParams()
    return SceneParams(
        geometry=ImagingGeometry.from_dict(d["geometry"]) if "geometry" in d else base.geometry,
        pattern=ProbingPattern.from_dict(d["pattern"]) if "pattern" in d else base.pattern,
        ambient_level=int(d.get("ambient_level", base.ambient_level)),
        noise_sigma=float(d.get("noise_sigma", base.noise_sigma)),
        blur_radius_px=float(d.get("blur_radius_px", base.blur_radius_px)),
        deepfake=bool(d.get("deepfake", base.deepfake)),
        gaze_offset_px=int(d.get("gaze_offset_px", base.gaze_offset_px)),
        seed=int(d.get("seed", base.seed)),
    )


@dataclass(frozen=True)
class SceneTruth:
    landmarks: EyeLandmarks
    irises: dict  # label -> Circle in frame coordinates
    reflections: dict  # label -> (x0, y0, x1, y1) tight bbox; empty when deepfake


@dataclass(frozen=True)
class SimFrame:
    frame: RgbImage
    truth: SceneTruth
    params: SceneParams

    def provider(self) -> StaticLandmarks:
        return StaticLandmarks(self.truth.landmarks)


def truth_to_dict(truth: SceneTruth, params: SceneParams) -> dict:
    from .pipeline import landmarks_to_dict

    return {
        "landmarks": landmarks_to_dict(truth.landmarks),
        "irises": {
            label: {"cx": c.cx, "cy": c.cy, "radius": c.radius} for label, c in truth.irises.items()
        },
        "reflections": {label: list(box) for label, box in truth.reflections.items()},
        "seed": int(params.seed),
        "deepfake": params.deepfake,
    }


def pixels_per_cm(g: ImagingGeometry) -> float:
    """Sensor pixels per centimeter of an object at the subject's distance."""
    return g.focal_length_cm * g.sensor_rows / ((g.eye_distance_cm - g.focal_length_cm) * g.sensor_height_cm)


def _box_blur2d(ch: np.ndarray, half: int) -> np.ndarray:
    """Separable box mean with edge replication on a 2-D channel."""
    n = 2 * half + 1
    for axis in (0, 1):
        pad = [(0, 0), (0, 0)]
        pad[axis] = (half, half)
        p = np.pad(ch, pad, mode="edge")
        c = np.cumsum(p, axis=axis)
        zero_shape = list(c.shape)
        zero_shape[axis] = 1
        c = np.concatenate([np.zeros(zero_shape), c], axis=axis)
        lead = [slice(None), slice(None)]
        trail = [slice(None), slice(None)]
        lead[axis] = slice(n, None)
        trail[axis] = slice(0, -n)
        ch = (c[tuple(lead)] - c[tuple(trail)]) / n
    return ch


def _fill_ellipse(img: np.ndarray, cy: int, cx: int, ry: float, rx: float, color) -> None:
    r0, r1 = max(0, int(cy - ry)), min(img.shape[0], int(cy + ry) + 1)
    c0, c1 = max(0, int(cx - rx)), min(img.shape[1], int(cx + rx) + 1)
    dy = (np.arange(r0, r1) - cy)[:, np.newaxis] / ry
    dx = (np.arange(c0, c1) - cx)[np.newaxis, :] / rx
    mask = dy * dy + dx * dx <= 1.0
    img[r0:r1, c0:c1][mask] = np.asarray(color, dtype=np.float64) / 255.0


def render_scene(p: SceneParams) -> SimFrame:
    """Render one frame plus ground truth; bitwise-deterministic per seed."""
    scale = pixels_per_cm(p.geometry)
    iris_r = iround(IRIS_RADIUS_CM * scale)
    pupil_r = max(2, iround(PUPIL_RADIUS_CM * scale))
    side = iround(reflection_pixel_extent(p.geometry))
    if side < 4:
        raise GeometryTooSmallError(
            f"predicted reflection side {side}px is below the 4px resolvability floor"
        )
    if iris_r < 6:
        raise GeometryTooSmallError(f"rendered iris radius {iris_r}px cannot host a reflection")

    rng = np.random.Generator(np.random.PCG64(int(p.seed)))
    img = np.empty((FRAME_ROWS, FRAME_COLS, 3), dtype=np.float64)
    img[:] = np.asarray(_BACKDROP, dtype=np.float64) / 255.0

    _fill_ellipse(img, 250, 320, 175.0, 135.0, _SKIN)

    stamp = None
    if not p.deepfake:
        base = binarize_pattern(rasterize(p.pattern, 64))
        stamp = resample_mask(base, side).bits.astype(bool)
        stamp_luma = _IRIS_LUMA + global_contrast(p.pattern) * (_REFLECTION_LUMA - _IRIS_LUMA)

    marks = []
    irises = {}
    reflections = {}
    glints = []
    for label, (ecy, ecx) in _EYE_CENTERS.items():
        _fill_ellipse(img, ecy, ecx, _EYE_HALF_HEIGHT, _EYE_HALF_WIDTH, _SCLERA)
        _fill_ellipse(img, ecy, ecx, iris_r, iris_r, _IRIS)
        _fill_ellipse(img, ecy, ecx, pupil_r, pupil_r, _PUPIL)
        irises[label] = Circle(cx=float(ecx), cy=float(ecy), radius=float(iris_r), votes=0)

        if stamp is not None:
            r0 = ecy - side // 2 + p.gaze_offset_px
            c0 = ecx - side // 2 + p.gaze_offset_px
            srows, scols = np.nonzero(stamp)
            frows = srows + r0
            fcols = scols + c0
            ok = ((frows - ecy) ** 2 + (fcols - ecx) ** 2) <= iris_r**2
            frows, fcols = frows[ok], fcols[ok]
            if frows.size:
                img[frows, fcols] = stamp_luma
                reflections[label] = (
                    int(fcols.min()),
                    int(frows.min()),
                    int(fcols.max()) + 1,
                    int(frows.max()) + 1,
                )

        # generic specular glints: real and synthesized eyes alike carry small
        # highlights; kept >= 12 px apart so they never pool in one window
        first: Optional[tuple[int, int]] = None
        for _ in range(2):
            for _attempt in range(64):
                ang = rng.uniform(0.0, 2.0 * np.pi)
                rad = np.sqrt(rng.uniform()) * (iris_r - 3)
                gy = ecy + int(round(rad * np.sin(ang)))
                gx = ecx + int(round(rad * np.cos(ang)))
                if first is None:
                    break
                if (gy - first[0]) ** 2 + (gx - first[1]) ** 2 >= 12**2:
                    break
            else:
                gy = ecy
                gx = ecx + (iris_r - 4) if first[1] <= ecx else ecx - (iris_r - 4)
            glints.append((gy, gx))
            if first is None:
                first = (gy, gx)

        x0, y0 = ecx - _EYE_HALF_WIDTH, ecy - _EYE_HALF_HEIGHT
        x1, y1 = ecx + _EYE_HALF_WIDTH + 1, ecy + _EYE_HALF_HEIGHT + 1
        inner_x = x1 - 1 if label == "left" else x0
        outer_x = x0 if label == "left" else x1 - 1
        marks.append(
            EyeMark(
                label=label,
                inner=(inner_x, ecy),
                outer=(outer_x, ecy),
                box=(x0, y0, x1, y1),
            )
        )

    if p.ambient_level:
        img += p.ambient_level * AMBIENT_STEP
    half = iround(p.blur_radius_px)
    if half > 0:
        img = np.stack([_box_blur2d(np.ascontiguousarray(img[..., k]), half) for k in range(3)], axis=-1)
    # saturated speculars punch through compression softening: stamp after blur
    for gy, gx in glints:
        img[gy : gy + 2, gx : gx + 2] = _GLINT_LUMA
    if p.noise_sigma > 0:
        img += rng.normal(0.0, p.noise_sigma, (FRAME_ROWS, FRAME_COLS))[:, :, np.newaxis]
    frame = RgbImage(np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8))

    truth = SceneTruth(landmarks=EyeLandmarks(eyes=tuple(marks)), irises=irises, reflections=reflections)
    return SimFrame(frame=frame, truth=truth, params=p)


def scene_config(p: SceneParams, ncc_threshold: float = 0.5) -> PipelineConfig:
    """Pipeline configuration matched to a scene's geometry."""
    return PipelineConfig(geometry=p.geometry, ncc_threshold=ncc_threshold)


# --- sweeps ------------------------------------------------------------------

#: Axis application order; also the column order of sweep CSVs.
SWEEP_AXES = (
    "shape",
    "contrast",
    "ambient_level",
    "noise_sigma",
    "blur_radius_px",
    "deepfake",
    "gaze_offset_px",
)

CSV_COLUMNS = SWEEP_AXES + ("seed", "best_score", "decision", "error")


@dataclass(frozen=True)
class SweepRow:
    shape: str
    contrast: float
    ambient_level: int
    noise_sigma: float
    blur_radius_px: float
    deepfake: bool
    gaze_offset_px: int
    seed: int
    best_score: Optional[float]
    decision: str
    error: str = ""


def default_eye_landmarks() -> EyeLandmarks:
    """The standard scene's eye landmarks; also the service's demo-mode crop
    boxes for frames captured without a landmark detector."""
    marks = []
    for label, (ecy, ecx) in _EYE_CENTERS.items():
        x0, y0 = ecx - _EYE_HALF_WIDTH, ecy - _EYE_HALF_HEIGHT
        x1, y1 = ecx + _EYE_HALF_WIDTH + 1, ecy + _EYE_HALF_HEIGHT + 1
        inner_x = x1 - 1 if label == "left" else x0
        outer_x = x0 if label == "left" else x1 - 1
        marks.append(EyeMark(label=label, inner=(inner_x, ecy), outer=(outer_x, ecy), box=(x0, y0, x1, y1)))
    return EyeLandmarks(eyes=tuple(marks))


def _apply_axis(params: SceneParams, key: str, value) -> SceneParams:
    if key == "shape":
        if value == params.pattern.shape:
            return params
        return replace(params, pattern=replace(params.pattern, shape=value, text_payload=None))
    if key == "contrast":
        level = iround(255.0 * (1.0 - float(value)))
        return replace(params, pattern=replace(params.pattern, foreground=(level, level, level)))
    if key == "ambient_level":
        return replace(params, ambient_level=int(value))
    if key == "noise_sigma":
        return replace(params, noise_sigma=float(value))
    if key == "blur_radius_px":
        return replace(params, blur_radius_px=float(value))
    if key == "deepfake":
        return replace(params, deepfake=bool(value))
    if key == "gaze_offset_px":
        return replace(params, gaze_offset_px=int(value))
    raise ParameterError(f"unknown sweep axis {key!r}")


def params_from_row(base: SceneParams, row: "SweepRow") -> SceneParams:
    """Reconstruct the render-relevant SceneParams of a sweep row."""
    params = base
    for key in SWEEP_AXES:
        params = _apply_axis(params, key, getattr(row, key))
    return replace(params, seed=row.seed)


def sweep(
    base: SceneParams,
    axes: dict[str, Sequence],
    frames_per_cell: int,
    base_seed: int = 0,
    ncc_threshold: float = 0.5,
) -> list[SweepRow]:
    """Render and verify frames over the Cartesian product of the axis
    values; one row per frame, grid order fixed by SWEEP_AXES."""
    if frames_per_cell < 1:
        raise ParameterError("frames_per_cell must be at least 1")
    for key, values in axes.items():
        if key not in SWEEP_AXES:
            raise ParameterError(f"unknown sweep axis {key!r}")
        if len(values) == 0:
            raise ParameterError(f"sweep axis {key!r} has no values")
    keys = [k for k in SWEEP_AXES if k in axes]
    rows: list[SweepRow] = []
    for combo in itertools.product(*(axes[k] for k in keys)):
        cell = base
        for key, value in zip(keys, combo):
            cell = _apply_axis(cell, key, value)
        cfg = scene_config(cell, ncc_threshold)
        for frame_index in range(frames_per_cell):
            # seeds are shared across cells: axis comparisons are paired on
            # identical scenes, which keeps trend estimates tight
            seed = int(base_seed) + frame_index
            params = replace(cell, seed=seed)
            best_score: Optional[float] = None
            try:
                sim = render_scene(params)
                verdict = verify_frame(sim.frame, params.pattern, cfg, sim.provider())
                best_score = verdict.best_score
                decision = verdict.decision
                error = verdict.failure_reason or ""
            except GlintProbeError as exc:
                decision = "Error"
                error = f"{type(exc).__name__}: {exc}"
            rows.append(
                SweepRow(
                    shape=params.pattern.shape,
                    contrast=global_contrast(params.pattern),
                    ambient_level=params.ambient_level,
                    noise_sigma=params.noise_sigma,
                    blur_radius_px=params.blur_radius_px,
                    deepfake=params.deepfake,
                    gaze_offset_px=params.gaze_offset_px,
                    seed=seed,
                    best_score=best_score,
                    decision=decision,
                    error=error,
                )
            )
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.shape,
                    repr(row.contrast),
                    row.ambient_level,
                    repr(row.noise_sigma),
                    repr(row.blur_radius_px),
                    row.deepfake,
                    row.gaze_offset_px,
                    row.seed,
                    "" if row.best_score is None else repr(row.best_score),
                    row.decision,
                    row.error,
                ]
            )


def read_sweep_csv(path) -> list[SweepRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(CSV_COLUMNS) - set(reader.fieldnames):
            raise ParameterError("sweep CSV is missing expected columns")
        for rec in reader:
            rows.append(
                SweepRow(
                    shape=rec["shape"],
                    contrast=float(rec["contrast"]),
                    ambient_level=int(rec["ambient_level"]),
                    noise_sigma=float(rec["noise_sigma"]),
                    blur_radius_px=float(rec["blur_radius_px"]),
                    deepfake=rec["deepfake"] == "True",
                    gaze_offset_px=int(rec["gaze_offset_px"]),
                    seed=int(rec["seed"]),
                    best_score=float(rec["best_score"]) if rec["best_score"] else None,
                    decision=rec["decision"],
                    error=rec["error"],
                )
            )
    return rows


def calibrate_threshold(rows: Sequence[SweepRow]) -> float:
    """Threshold maximizing Youden's J (TPR - FPR) over the observed scores;
    ties break toward the larger threshold."""
    real = sorted(r.best_score for r in rows if not r.deepfake and r.best_score is not None)
    fake = sorted(r.best_score for r in rows if r.deepfake and r.best_score is not None)
    if not real or not fake:
        raise ParameterError("calibration needs scores from both real and deepfake rows")
    candidates = sorted(set(real) | set(fake))
    n_real = len(real)
    n_fake = len(fake)
    best_t = candidates[0]
    best_j = -2.0
    for t in candidates:
        tpr = sum(1 for s in real if s >= t) / n_real
        fpr = sum(1 for s in fake if s >= t) / n_fake
        j = tpr - fpr
        if j >= best_j:  # >= keeps the larger threshold on ties
            best_j = j
            best_t = t
    return float(best_t)
