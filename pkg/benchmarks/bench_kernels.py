#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the three hot inner loops on pipeline-realistic sizes, plus the
end-to-end verify_frame path on each backend.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import os
import statistics
import subprocess
import sys
import time

import numpy as np

import glintprobe._kernels_py as kpy
from glintprobe import imageops as ops

try:
    import glintprobe._kernels_cy as kcy
except ImportError:
    kcy = None


def timeit(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def bench_backends(repeats):
    rng = np.random.default_rng(0)

    # NCC map: one eye crop against a mid-pyramid template
    crop = rng.random((58, 110))
    tpl = rng.random((16, 16))
    tc = np.ascontiguousarray(tpl - tpl.mean())
    tv = float((tc * tc).sum())

    # Sobel on the same crop
    # Hough: a realistic edge population over the iris radius band
    ey, ex = np.nonzero(rng.random((58, 110)) > 0.9)
    ey = np.ascontiguousarray(ey, dtype=np.int64)
    ex = np.ascontiguousarray(ex, dtype=np.int64)
    offset_sets = [np.ascontiguousarray(ops.circle_offsets(r), dtype=np.int64) for r in range(9, 27)]

    def hough(mod):
        for offs in offset_sets:
            mod.hough_accumulate(ey, ex, offs, 58, 110)

    cases = [
        ("ncc_map 110x58 / 16x16", lambda mod: mod.ncc_map(crop, tc, tv)),
        ("sobel 110x58", lambda mod: mod.sobel_magnitude(crop)),
        ("hough 18 radii", hough),
    ]

    backends = [("python", kpy)]
    if kcy is not None:
        backends.insert(0, ("compiled", kcy))

    print(f"{'kernel':<28}", *(f"{name:>12}" for name, _ in backends), f"{'speedup':>10}")
    for label, fn in cases:
        medians = []
        for _, mod in backends:
            medians.append(timeit(lambda m=mod: fn(m), repeats) * 1e3)
        speedup = medians[-1] / medians[0] if len(medians) == 2 else float("nan")
        print(f"{label:<28}", *(f"{m:>10.3f}ms" for m in medians), f"{speedup:>9.1f}x")


def bench_verify(repeats):
    print(f"\n{'end-to-end verify_frame':<28}", end="")
    for backend in ("compiled", "python"):
        if backend == "compiled" and kcy is None:
            continue
        code = (
            "import time, statistics\n"
            "from glintprobe.simulator import SceneParams, render_scene, scene_config\n"
            "from glintprobe.pipeline import verify_frame\n"
            "p = SceneParams(seed=1); sim = render_scene(p); cfg = scene_config(p)\n"
            "verify_frame(sim.frame, p.pattern, cfg, sim.provider())\n"
            "ts = []\n"
            f"for _ in range({repeats}):\n"
            "    t0 = time.perf_counter()\n"
            "    verify_frame(sim.frame, p.pattern, cfg, sim.provider())\n"
            "    ts.append(time.perf_counter() - t0)\n"
            "print(f'{1e3 * statistics.median(ts):.1f}')\n"
        )
        env = {**os.environ, "GLINTPROBE_KERNELS": backend}
        out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
        print(f"  {backend}: {out.stdout.strip()}ms", end="")
    print()


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=15)
    args = parser.parse_args()
    if kcy is None:
        print("note: compiled extension not importable; timing the fallback only", file=sys.stderr)
    bench_backends(args.repeats)
    bench_verify(max(5, args.repeats // 2))


if __name__ == "__main__":
    main()
