"""Command-line interface.

Subcommands: pattern (generate probe rasters), analyze (verify frames),
simulate (render + verify sweeps), calibrate (fit the decision threshold),
serve (run the HTTP service).

analyze exit codes: 0 Authentic, 2 SuspectedDeepFake, 3 Inconclusive,
1 operational error.  Stdout carries machine-parseable JSON/CSV only;
diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import GlintProbeError, ParameterError
from .images import RgbImage, encode_mask, read_pgm, read_ppm, write_ppm
from .patterns import ProbingPattern, binarize_pattern, random_pattern, rasterize
from .pipeline import (
    AUTHENTIC,
    INCONCLUSIVE,
    SUSPECTED_DEEPFAKE,
    PipelineConfig,
    StaticLandmarks,
    aggregate_verdicts,
    landmarks_from_dict,
    verify_frame,
    verify_sequence,
)
from .simulator import (
    calibrate_threshold,
    params_from_row,
    read_sweep_csv,
    render_scene,
    scene_params_from_dict,
    sweep,
    truth_to_dict,
    write_sweep_csv,
)

EXIT_CODES = {AUTHENTIC: 0, SUSPECTED_DEEPFAKE: 2, INCONCLUSIVE: 3}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_color(text: str) -> tuple[int, int, int]:
    text = text.strip()
    if text.startswith("#"):
        if len(text) != 7:
            raise ParameterError(f"expected #rrggbb, got {text!r}")
        return tuple(int(text[i : i + 2], 16) for i in (1, 3, 5))
    parts = text.split(",")
    if len(parts) != 3:
        raise ParameterError(f"expected #rrggbb or r,g,b, got {text!r}")
    return tuple(int(p) for p in parts)


def _load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_dict(_load_json(args.config)) if args.config else PipelineConfig()
    if getattr(args, "threshold", None) is not None:
        cfg = PipelineConfig.from_dict({**cfg.to_dict(), "ncc_threshold": args.threshold})
    return cfg


def cmd_pattern(args) -> int:
    if args.random:
        shapes = args.shapes.split(",") if args.shapes else None
        pattern = random_pattern(args.seed, shapes=shapes, text_payload=args.text)
    else:
        if not args.shape:
            raise ParameterError("either --shape or --random is required")
        pattern = ProbingPattern(
            shape=args.shape,
            foreground=_parse_color(args.fg),
            background=_parse_color(args.bg),
            physical_height_cm=args.height_cm,
            text_payload=args.text,
            seed=args.seed,
        )
    raster = rasterize(pattern, args.size)
    write_ppm(raster.to_rgb(), args.out)
    if args.mask:
        Path(args.mask).write_bytes(encode_mask(binarize_pattern(raster)))
    descriptor = pattern.to_dict()
    if args.descriptor:
        Path(args.descriptor).write_text(json.dumps(descriptor, indent=2) + "\n")
    print(json.dumps(descriptor))
    return 0


def _landmark_providers(args, n_frames: int):
    if args.landmarks_from_truth:
        paths = args.landmarks_from_truth
        key = "landmarks"
    else:
        paths = args.landmarks
        key = None
    if len(paths) == 1:
        paths = paths * n_frames
    if len(paths) != n_frames:
        raise ParameterError(f"got {len(paths)} landmark files for {n_frames} frames")
    providers = []
    for path in paths:
        doc = _load_json(path)
        providers.append(StaticLandmarks(landmarks_from_dict(doc[key] if key else doc)))
    return providers


def _read_frame(path) -> RgbImage:
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"P5":  # grayscale frames are accepted and expanded
        gray = read_pgm(path)
        levels = np.clip(np.rint(gray.pixels * 255.0), 0, 255).astype(np.uint8)
        return RgbImage(np.repeat(levels[:, :, np.newaxis], 3, axis=2))
    return read_ppm(path)


def cmd_analyze(args) -> int:
    if not args.landmarks and not args.landmarks_from_truth:
        raise ParameterError("one of --landmarks or --landmarks-from-truth is required")
    pattern = ProbingPattern.from_dict(_load_json(args.pattern))
    cfg = _load_config(args)
    frames = [_read_frame(p) for p in args.frame]
    providers = _landmark_providers(args, len(frames))

    if len(frames) == 1:
        verdict = verify_sequence(frames, pattern, cfg, providers[0])
    else:
        # frames carry per-frame landmarks; aggregate per-frame verdicts
        verdicts = [verify_frame(f, pattern, cfg, pr) for f, pr in zip(frames, providers)]
        verdict = aggregate_verdicts(verdicts, cfg.ncc_threshold)
    print(json.dumps(verdict.to_dict()))
    return EXIT_CODES[verdict.decision]


def cmd_simulate(args) -> int:
    doc = _load_json(args.config)
    base = scene_params_from_dict(doc.get("base", {}))
    axes = doc.get("axes", {})
    frames_per_cell = args.frames_per_cell if args.frames_per_cell is not None else int(doc.get("frames_per_cell", 5))
    if frames_per_cell < 1:
        raise ParameterError("--frames-per-cell must be at least 1")
    base_seed = args.base_seed if args.base_seed is not None else int(doc.get("base_seed", 0))
    threshold = float(doc.get("ncc_threshold", 0.5))
    rows = sweep(base, axes, frames_per_cell, base_seed=base_seed, ncc_threshold=threshold)
    write_sweep_csv(rows, args.out)
    if args.dump_frames:
        dump_dir = Path(args.dump_frames)
        dump_dir.mkdir(parents=True, exist_ok=True)
        for i, row in enumerate(rows):
            sim = render_scene(params_from_row(base, row))
            write_ppm(sim.frame, dump_dir / f"frame_{i:05d}.ppm")
            (dump_dir / f"frame_{i:05d}.truth.json").write_text(
                json.dumps(truth_to_dict(sim.truth, sim.params), indent=2) + "\n"
            )
    summary: dict[str, dict] = {}
    for row in rows:
        cell = f"shape={row.shape} contrast={row.contrast} ambient={row.ambient_level} deepfake={row.deepfake}"
        agg = summary.setdefault(cell, {"n": 0, "sum": 0.0, "scored": 0})
        agg["n"] += 1
        if row.best_score is not None:
            agg["sum"] += row.best_score
            agg["scored"] += 1
    report = {
        cell: {"frames": agg["n"], "mean_best_score": (agg["sum"] / agg["scored"]) if agg["scored"] else None}
        for cell, agg in summary.items()
    }
    print(json.dumps(report))
    return 0


def cmd_calibrate(args) -> int:
    rows = read_sweep_csv(args.csv)
    threshold = calibrate_threshold(rows)
    if args.write_config:
        path = Path(args.write_config)
        cfg = PipelineConfig.from_dict(_load_json(path)) if path.exists() else PipelineConfig()
        doc = cfg.to_dict()
        # observed scores may sit exactly at 1.0; configs need an open interval
        doc["ncc_threshold"] = min(max(threshold, 1e-9), math.nextafter(1.0, 0.0))
        path.write_text(json.dumps(doc, indent=2) + "\n")
    print(json.dumps(threshold))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    cfg = _load_config(args)
    app = create_app(default_config=cfg, audit_path=args.audit)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="glintprobe", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pattern", help="generate a probing pattern raster + descriptor")
    p.add_argument("--shape", choices=("diamond", "triangle", "circle", "cross", "square", "text"))
    p.add_argument("--random", action="store_true", help="draw shape/color from the seed")
    p.add_argument("--shapes", help="comma-separated shape pool for --random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fg", default="#000000")
    p.add_argument("--bg", default="#ffffff")
    p.add_argument("--height-cm", type=float, default=14.5)
    p.add_argument("--text", help="payload for shape=text")
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--out", required=True, help="output raster (PPM P6)")
    p.add_argument("--mask", help="optional binarized mask output (PGM P5)")
    p.add_argument("--descriptor", help="optional descriptor JSON output")
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("analyze", help="verify frame(s) against a pattern")
    p.add_argument("--frame", action="append", required=True, help="frame PPM; repeat for a sequence")
    p.add_argument("--pattern", required=True, help="pattern descriptor JSON")
    p.add_argument("--landmarks", action="append", default=[], help="landmarks JSON ({'eyes': [...]})")
    p.add_argument(
        "--landmarks-from-truth",
        action="append",
        default=[],
        help="simulator truth sidecar JSON (uses its 'landmarks' field)",
    )
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--threshold", type=float, help="override ncc_threshold")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="run a rendering sweep, write CSV")
    p.add_argument("--config", required=True, help="sweep config JSON ({'base': ..., 'axes': ...})")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--frames-per-cell", type=int)
    p.add_argument("--base-seed", type=int)
    p.add_argument("--dump-frames", help="directory for per-frame PPM + truth JSON")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="fit the decision threshold from a sweep CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--write-config", help="write/update a pipeline config JSON with the threshold")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("serve", help="start the probe session HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--audit", help="JSONL audit log path")
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--threshold", type=float, help="override ncc_threshold")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except GlintProbeError as exc:
        print(f"glintprobe: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"glintprobe: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
