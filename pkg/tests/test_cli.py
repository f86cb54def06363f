import json
from pathlib import Path

import pytest

from glintprobe.cli import main
from glintprobe.images import read_ppm
from glintprobe.patterns import ProbingPattern, binarize_pattern, rasterize


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="module")
def sweep_config(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "sweep.json"
    path.write_text(
        json.dumps(
            {
                "base": {"noise_sigma": 0.02, "blur_radius_px": 1.0},
                "axes": {"deepfake": [False, True]},
                "frames_per_cell": 2,
                "base_seed": 99,
            }
        )
    )
    return path


@pytest.fixture(scope="module")
def workspace(tmp_path_factory, sweep_config):
    """simulate + calibrate + pattern artifacts shared by the analyze tests."""
    ws = tmp_path_factory.mktemp("ws")
    import glintprobe.cli as cli

    assert cli.main(["pattern", "--shape", "diamond", "--size", "256",
                     "--out", str(ws / "d.ppm"), "--descriptor", str(ws / "d.json")]) == 0
    assert cli.main(["simulate", "--config", str(sweep_config), "--out", str(ws / "rows.csv"),
                     "--dump-frames", str(ws / "frames")]) == 0
    assert cli.main(["calibrate", "--csv", str(ws / "rows.csv"),
                     "--write-config", str(ws / "pipeline.json")]) == 0
    return ws


class TestPattern:
    def test_writes_valid_ppm(self, capsys, tmp_path):
        out = tmp_path / "p.ppm"
        code, stdout, _ = run(capsys, "pattern", "--shape", "diamond", "--size", "256", "--out", str(out))
        assert code == 0
        img = read_ppm(out)
        assert (img.rows, img.cols) == (256, 256)
        descriptor = json.loads(stdout)
        assert descriptor["shape"] == "diamond"

    def test_random_is_deterministic(self, capsys, tmp_path):
        outs = []
        for name in ("a.ppm", "b.ppm"):
            out = tmp_path / name
            code, stdout, _ = run(capsys, "pattern", "--random", "--seed", "7", "--out", str(out))
            assert code == 0
            outs.append((out.read_bytes(), stdout))
        assert outs[0] == outs[1]

    def test_text_pattern_renders_payload_mask(self, capsys, tmp_path):
        out = tmp_path / "t.ppm"
        code, stdout, _ = run(
            capsys, "pattern", "--shape", "text", "--text", "2024-05-01 10:00",
            "--size", "256", "--out", str(out),
        )
        assert code == 0
        raster = read_ppm(out)
        expected = rasterize(ProbingPattern("text", text_payload="2024-05-01 10:00"), 256)
        assert raster.pixels.tobytes() == expected.pixels.tobytes()
        assert 0 < binarize_pattern(expected).count() < 256 * 256

    def test_bad_flags_exit_one(self, capsys, tmp_path):
        code, _, err = run(capsys, "pattern", "--out", str(tmp_path / "x.ppm"))
        assert code == 1
        code = main(["pattern", "--shape", "nope", "--out", str(tmp_path / "x.ppm")])
        assert code == 1


class TestAnalyze:
    def test_real_frame_exit_zero(self, capsys, workspace):
        code, stdout, _ = run(
            capsys, "analyze",
            "--frame", str(workspace / "frames" / "frame_00000.ppm"),
            "--pattern", str(workspace / "d.json"),
            "--landmarks-from-truth", str(workspace / "frames" / "frame_00000.truth.json"),
            "--config", str(workspace / "pipeline.json"),
        )
        assert code == 0
        verdict = json.loads(stdout)
        assert verdict["decision"] == "Authentic"
        assert verdict["best_score"] >= 0.6

    def test_fake_frame_exit_two(self, capsys, workspace):
        code, stdout, _ = run(
            capsys, "analyze",
            "--frame", str(workspace / "frames" / "frame_00002.ppm"),
            "--pattern", str(workspace / "d.json"),
            "--landmarks-from-truth", str(workspace / "frames" / "frame_00002.truth.json"),
            "--config", str(workspace / "pipeline.json"),
        )
        assert code == 2
        assert json.loads(stdout)["decision"] == "SuspectedDeepFake"

    def test_sequence_aggregates(self, capsys, workspace):
        code, stdout, _ = run(
            capsys, "analyze",
            "--frame", str(workspace / "frames" / "frame_00000.ppm"),
            "--frame", str(workspace / "frames" / "frame_00001.ppm"),
            "--pattern", str(workspace / "d.json"),
            "--landmarks-from-truth", str(workspace / "frames" / "frame_00000.truth.json"),
            "--landmarks-from-truth", str(workspace / "frames" / "frame_00001.truth.json"),
            "--config", str(workspace / "pipeline.json"),
        )
        assert code == 0

    def test_missing_file_exit_one(self, capsys, workspace):
        code, _, err = run(
            capsys, "analyze",
            "--frame", str(workspace / "nope.ppm"),
            "--pattern", str(workspace / "d.json"),
            "--landmarks-from-truth", str(workspace / "frames" / "frame_00000.truth.json"),
        )
        assert code == 1
        assert err


class TestSimulate:
    def test_row_count_and_summary(self, capsys, sweep_config, tmp_path):
        out = tmp_path / "rows.csv"
        code, stdout, _ = run(capsys, "simulate", "--config", str(sweep_config), "--out", str(out))
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 1 + 2 * 2  # header + cells * frames
        summary = json.loads(stdout)
        real_cells = [v for k, v in summary.items() if "deepfake=False" in k]
        fake_cells = [v for k, v in summary.items() if "deepfake=True" in k]
        assert real_cells[0]["mean_best_score"] > fake_cells[0]["mean_best_score"]

    def test_zero_frames_per_cell_exit_one(self, capsys, sweep_config, tmp_path):
        code, _, err = run(
            capsys, "simulate", "--config", str(sweep_config),
            "--out", str(tmp_path / "x.csv"), "--frames-per-cell", "0",
        )
        assert code == 1


class TestCalibrate:
    def test_threshold_printed(self, capsys, workspace):
        code, stdout, _ = run(capsys, "calibrate", "--csv", str(workspace / "rows.csv"))
        assert code == 0
        t = json.loads(stdout)
        assert 0.25 < t <= 1.0

    def test_config_written_with_valid_threshold(self, workspace):
        doc = json.loads((workspace / "pipeline.json").read_text())
        assert 0.0 < doc["ncc_threshold"] < 1.0

    def test_single_class_exit_one(self, capsys, workspace, tmp_path):
        rows = (workspace / "rows.csv").read_text().splitlines()
        single = [rows[0]] + [r for r in rows[1:] if ",False," in r]
        path = tmp_path / "single.csv"
        path.write_text("\n".join(single) + "\n")
        code, _, err = run(capsys, "calibrate", "--csv", str(path))
        assert code == 1

    def test_empty_csv_exit_one(self, capsys, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        code, _, _ = run(capsys, "calibrate", "--csv", str(path))
        assert code == 1


class TestDeterminism:
    def test_pipeline_chain_is_byte_identical(self, capsys, sweep_config, tmp_path):
        artifacts = []
        for tag in ("one", "two"):
            d = tmp_path / tag
            d.mkdir()
            assert main(["simulate", "--config", str(sweep_config), "--out", str(d / "rows.csv")]) == 0
            assert main(["calibrate", "--csv", str(d / "rows.csv"), "--write-config", str(d / "cfg.json")]) == 0
            capsys.readouterr()
            artifacts.append((d / "rows.csv").read_bytes() + (d / "cfg.json").read_bytes())
        assert artifacts[0] == artifacts[1]


class TestPgmFrames:
    def test_grayscale_frame_accepted(self, capsys, workspace, tmp_path):
        from glintprobe.images import read_ppm, write_pgm
        from glintprobe import imageops as ops

        frame = read_ppm(workspace / "frames" / "frame_00000.ppm")
        pgm = tmp_path / "frame.pgm"
        write_pgm(ops.to_gray(frame), pgm)
        code, stdout, _ = run(
            capsys, "analyze",
            "--frame", str(pgm),
            "--pattern", str(workspace / "d.json"),
            "--landmarks-from-truth", str(workspace / "frames" / "frame_00000.truth.json"),
        )
        assert code == 0
        assert json.loads(stdout)["decision"] == "Authentic"
