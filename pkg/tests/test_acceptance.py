"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line.  Heavy sweeps are shared via module-scoped fixtures.

Run with `pytest tests/test_acceptance.py -v -s` to see the report lines.
"""

import json
import statistics
import time

import numpy as np
import pytest

from glintprobe import imageops as ops
from glintprobe.cli import main as cli_main
from glintprobe.geometry import DEFAULT_GEOMETRY, reflection_pixel_area
from glintprobe.images import GrayImage
from glintprobe.pipeline import verify_frame
from glintprobe.simulator import (
    SceneParams,
    calibrate_threshold,
    render_scene,
    scene_config,
    sweep,
)

from oracles import exhaustive_otsu, naive_ncc_map, render_ring

SEPARATION_FRAMES = 200
TREND_FRAMES = 50


def report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} - {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def separation_rows():
    return sweep(
        SceneParams(),
        {"deepfake": [False, True]},
        frames_per_cell=SEPARATION_FRAMES,
        base_seed=20_240_501,
    )


@pytest.fixture(scope="module")
def contrast_rows():
    return sweep(
        SceneParams(),
        {"contrast": [0.25, 0.5, 0.75, 1.0]},
        frames_per_cell=TREND_FRAMES,
        base_seed=20_240_502,
    )


@pytest.fixture(scope="module")
def ambient_rows():
    return sweep(
        SceneParams(),
        {"contrast": [1.0], "ambient_level": [0, 1, 2, 3, 4, 5]},
        frames_per_cell=TREND_FRAMES,
        base_seed=20_240_503,
    )


@pytest.fixture(scope="module")
def calibrated_threshold(separation_rows, ambient_rows):
    # calibrate across the full labeled envelope: default-parameter real/fake
    # frames plus the real frames of the illumination sweep
    return calibrate_threshold(list(separation_rows) + list(ambient_rows))


def test_geometry_worked_example():
    area = reflection_pixel_area(DEFAULT_GEOMETRY)
    expected = (14.5 * 1.25 * 0.5 * 720 / (0.45 * 30.0 * 29.5)) ** 2
    ok = abs(area - expected) <= 0.01 and abs(area - 268.44) <= 0.01 and 230 <= area <= 295
    report("geometry worked example", ok, f"area={area:.5f} px^2 (expect 268.44 +- 0.01, within [230, 295])")


def test_ncc_oracle_equivalence():
    rng = np.random.default_rng(1001)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        rows = int(rng.integers(24, 65))
        cols = int(rng.integers(24, 65))
        th = int(rng.integers(4, 17))
        tw = int(rng.integers(4, 17))
        img = rng.random((rows, cols))
        tpl = rng.random((th, tw))
        got = ops.ncc_score_map(GrayImage(img), GrayImage(tpl))
        want = naive_ncc_map(img, tpl)
        worst = max(worst, float(np.abs(got - want).max()))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 10.0
    report("NCC oracle equivalence", ok, f"max |err| = {worst:.2e} over 200 pairs in {elapsed:.1f}s")


def test_ncc_affine_invariance():
    rng = np.random.default_rng(1002)
    worst = 0.0
    moved = 0
    for _ in range(100):
        img = rng.random((int(rng.integers(20, 49)), int(rng.integers(20, 49))))
        tpl = rng.random((int(rng.integers(4, 13)), int(rng.integers(4, 13))))
        a = float(rng.uniform(0.1, 10.0))
        b = float(rng.uniform(-0.5, 0.5))
        base = ops.ncc_match(img, tpl)
        scaled = ops.ncc_match(a * img + b, tpl)
        if (scaled.u, scaled.v) != (base.u, base.v):
            moved += 1
        worst = max(worst, abs(scaled.score - base.score))
    ok = moved == 0 and worst <= 1e-9
    report("NCC affine invariance", ok, f"location moves={moved}, max score delta={worst:.2e}")


def test_otsu_oracle_equivalence():
    rng = np.random.default_rng(1003)
    mismatches = 0
    for _ in range(100):
        img = rng.random((int(rng.integers(8, 25)), int(rng.integers(8, 25))))
        if ops.otsu_threshold(GrayImage(img)) != exhaustive_otsu(img):
            mismatches += 1
    splits_ok = True
    for _ in range(50):
        lo, hi = sorted(rng.uniform(0.02, 0.98, size=2))
        if hi - lo < 0.05:
            continue
        labels = rng.integers(0, 2, (12, 12))
        img = np.where(labels == 1, hi, lo)
        t = ops.otsu_threshold(GrayImage(img))
        if not (lo < t <= hi):
            splits_ok = False
        if not np.array_equal(ops.binarize(GrayImage(img), t).bits, labels):
            splits_ok = False
    ok = mismatches == 0 and splits_ok
    report("Otsu oracle equivalence", ok, f"mismatches={mismatches}/100, bimodal splits ok={splits_ok}")


def test_hough_recovery():
    rng = np.random.default_rng(1004)
    failures = 0
    for _ in range(50):
        radius = int(rng.integers(6, 21))
        cy = int(rng.integers(radius + 2, 64 - radius - 2))
        cx = int(rng.integers(radius + 2, 64 - radius - 2))
        edges = GrayImage(render_ring(64, 64, cy, cx, radius))
        circles = ops.hough_circles(edges, 0.5, 4, 24, top_k=1)
        if not circles:
            failures += 1
            continue
        top = circles[0]
        if abs(top.cx - cx) > 1 or abs(top.cy - cy) > 1 or abs(top.radius - radius) > 1:
            failures += 1
    report("Hough circle recovery", failures == 0, f"{50 - failures}/50 recovered within 1 px")


def test_real_deepfake_separation(separation_rows, calibrated_threshold):
    start_scores = [r.best_score for r in separation_rows]
    assert all(s is not None for s in start_scores), "every frame must be scored"
    real = [r.best_score for r in separation_rows if not r.deepfake]
    fake = [r.best_score for r in separation_rows if r.deepfake]
    assert len(real) == SEPARATION_FRAMES and len(fake) == SEPARATION_FRAMES
    t = calibrated_threshold
    correct = sum(1 for s in real if s >= t) + sum(1 for s in fake if s < t)
    accuracy = correct / (len(real) + len(fake))
    fake_mean = statistics.mean(fake)
    ok = accuracy == 1.0 and fake_mean <= 0.3
    report(
        "real/deepfake separation",
        ok,
        f"threshold={t:.4f}, accuracy={accuracy:.4f}, fake mean={fake_mean:.4f} "
        f"(real min={min(real):.4f}, fake max={max(fake):.4f})",
    )


def test_contrast_monotonicity(contrast_rows):
    levels = sorted({r.contrast for r in contrast_rows})
    assert len(levels) == 4
    means = []
    for level in levels:
        scores = [r.best_score for r in contrast_rows if r.contrast == level and r.best_score is not None]
        assert len(scores) == TREND_FRAMES
        means.append(statistics.mean(scores))
    ok = all(a <= b for a, b in zip(means, means[1:]))
    report(
        "contrast monotonicity",
        ok,
        "mean scores " + " -> ".join(f"{m:.4f}" for m in means) + f" at contrasts {levels}",
    )


def test_illumination_robustness(ambient_rows, calibrated_threshold):
    means = []
    all_correct = True
    for level in range(6):
        scores = [r.best_score for r in ambient_rows if r.ambient_level == level]
        assert len(scores) == TREND_FRAMES and all(s is not None for s in scores)
        means.append(statistics.mean(scores))
        if any(s < calibrated_threshold for s in scores):
            all_correct = False
    spread = max(means) - min(means)
    ok = spread <= 0.15 and all_correct
    report(
        "illumination robustness",
        ok,
        f"mean spread={spread:.4f} (<= 0.15), all levels classified correctly={all_correct}",
    )


def test_throughput():
    params = SceneParams(seed=424242)
    sim = render_scene(params)
    cfg = scene_config(params)
    timings = []
    for _ in range(7):
        start = time.perf_counter()
        verdict = verify_frame(sim.frame, params.pattern, cfg, sim.provider())
        timings.append(time.perf_counter() - start)
    assert verdict.decision == "Authentic"
    median_ms = 1e3 * statistics.median(timings)
    ok = median_ms < 250.0
    report("throughput", ok, f"verify_frame median {median_ms:.1f} ms on 640x480 (< 250 ms)")


def test_chain_determinism(tmp_path):
    sweep_cfg = tmp_path / "sweep.json"
    sweep_cfg.write_text(
        json.dumps(
            {
                "base": {"noise_sigma": 0.02, "blur_radius_px": 1.0},
                "axes": {"deepfake": [False, True]},
                "frames_per_cell": 2,
                "base_seed": 31337,
            }
        )
    )
    blobs = []
    for tag in ("a", "b"):
        d = tmp_path / tag
        d.mkdir()
        assert cli_main(["simulate", "--config", str(sweep_cfg), "--out", str(d / "rows.csv"),
                         "--dump-frames", str(d / "frames")]) == 0
        assert cli_main(["calibrate", "--csv", str(d / "rows.csv"),
                         "--write-config", str(d / "cfg.json")]) == 0
        assert cli_main(["pattern", "--shape", "diamond", "--size", "64",
                         "--out", str(d / "p.ppm"), "--descriptor", str(d / "p.json")]) == 0
        import io
        from contextlib import redirect_stdout

        buf = io.StringIO()
        with redirect_stdout(buf):
            code = cli_main([
                "analyze",
                "--frame", str(d / "frames" / "frame_00000.ppm"),
                "--pattern", str(d / "p.json"),
                "--landmarks-from-truth", str(d / "frames" / "frame_00000.truth.json"),
                "--config", str(d / "cfg.json"),
            ])
        assert code == 0
        blobs.append(
            (d / "rows.csv").read_bytes()
            + (d / "cfg.json").read_bytes()
            + (d / "frames" / "frame_00000.ppm").read_bytes()
            + buf.getvalue().encode()
        )
    ok = blobs[0] == blobs[1]
    report("chain determinism", ok, f"simulate->calibrate->analyze artifacts byte-identical: {ok}")
