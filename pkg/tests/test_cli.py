import json
from pathlib import Path

import pytest

from mmchar.cli import main


def run(args):
    return main([str(a) for a in args])


def read_bytes(root):
    return {p.name: p.read_bytes() for p in sorted(Path(root).iterdir())
            if p.is_file()}


def small_synth(out, seed=7, positions=3, snapshots=120, antennas=8):
    return run(["--seed", seed, "--out", out, "synth", "--model", "iid",
                "--antennas", antennas, "--snapshots", snapshots,
                "--freqs", "2", "--positions", positions])


ANALYZE_FLAGS = ["analyze", "--model", "iid", "--antennas", "8",
                 "--window-length", "60", "--antenna-counts", "1,4,8",
                 "--node-counts", "2,5", "--trials", "200"]


class TestSynth:
    def test_writes_requested_positions(self, tmp_path):
        out = tmp_path / "ds"
        assert small_synth(out) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["positions"]) == 3
        assert (out / "pos000.cf64").exists()

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert small_synth(a) == 0
        assert small_synth(b) == 0
        assert read_bytes(a) == read_bytes(b)

    def test_zero_antennas_exits_2(self, tmp_path):
        code = run(["--out", tmp_path / "ds", "synth", "--model", "iid",
                    "--antennas", 0])
        assert code == 2

    def test_ura_geometry(self, tmp_path):
        out = tmp_path / "ds"
        assert run(["--out", out, "synth", "--model", "iid", "--antennas", "8",
                    "--snapshots", "10", "--positions", "1",
                    "--array", "ura", "--rows", "4"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["array"]["kind"] == "ura"
        assert manifest["array"]["rows"] == 4


class TestAnalyze:
    def test_outputs_and_headers(self, tmp_path):
        out = tmp_path / "res"
        assert run(["--seed", 3, "--out", out] + ANALYZE_FLAGS) == 0
        csv_text = (out / "hardening_std.csv").read_text()
        assert csv_text.splitlines()[0] == "x,mean,stderr,trials"
        for name in ["hardening_db.csv", "correlation_delta.csv",
                     "correlation_delta_sq.csv", "condition_mean.csv",
                     "condition_cdf_K2.csv", "eigen_values_db.csv",
                     "summary.json"]:
            assert (out / name).exists(), name

    def test_unknown_experiment_exits_2(self, tmp_path):
        code = run(["--out", tmp_path / "res", "analyze", "--model", "iid",
                    "--experiments", "nonsense"])
        assert code == 2

    def test_no_source_exits_2(self, tmp_path):
        assert run(["--out", tmp_path / "res", "analyze"]) == 2

    def test_rerun_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(["--seed", 5, "--out", a] + ANALYZE_FLAGS) == 0
        assert run(["--seed", 5, "--out", b] + ANALYZE_FLAGS) == 0
        assert read_bytes(a) == read_bytes(b)

    def test_dataset_source(self, tmp_path):
        ds_dir = tmp_path / "ds"
        assert small_synth(ds_dir, snapshots=400, positions=4) == 0
        out = tmp_path / "res"
        assert run(["--seed", 2, "--out", out, "analyze", "--dataset", ds_dir,
                    "--experiments", "hardening,correlation",
                    "--window-length", "100", "--antenna-counts", "1,8",
                    "--trials", "200"]) == 0
        assert (out / "hardening_db.csv").exists()

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "source": {"model": {"kind": "iid", "antennas": 4,
                                 "snapshots": 100, "freqs": 1}},
            "experiments": ["correlation"],
            "antenna_counts": [1, 4],
            "correlation": {"trials": 100},
        }))
        out = tmp_path / "res"
        assert run(["--seed", 1, "--out", out, "--config", cfg, "analyze"]) == 0
        assert (out / "correlation_delta.csv").exists()
        assert not (out / "condition_mean.csv").exists()


class TestValidate:
    def test_valid_dataset(self, tmp_path, capsys):
        ds_dir = tmp_path / "ds"
        assert small_synth(ds_dir) == 0
        assert run(["validate", ds_dir]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 3

    def test_truncated_binary(self, tmp_path, capsys):
        ds_dir = tmp_path / "ds"
        assert small_synth(ds_dir) == 0
        target = ds_dir / "pos001.cf64"
        target.write_bytes(target.read_bytes()[:-8])
        assert run(["validate", ds_dir]) == 1
        assert "pos001" in capsys.readouterr().out

    def test_inconsistent_geometry(self, tmp_path):
        ds_dir = tmp_path / "ds"
        assert small_synth(ds_dir) == 0
        obj = json.loads((ds_dir / "manifest.json").read_text())
        obj["array"]["cols"] = 4  # rows*cols no longer matches the files
        (ds_dir / "manifest.json").write_text(json.dumps(obj))
        assert run(["validate", ds_dir]) == 1

    def test_missing_path(self, tmp_path):
        assert run(["validate", tmp_path / "nope"]) == 2


class TestSchedule:
    def test_writes_groups_json(self, tmp_path):
        out = tmp_path / "res"
        code = run(["--seed", 4, "--out", out, "schedule", "--model", "iid",
                    "--antennas", "8", "--window-length", "50",
                    "--positions", "4", "--group-size", "2"])
        assert code == 0
        payload = json.loads((out / "schedule.json").read_text())
        members = [pid for g in payload["groups"] for pid in g["members"]]
        assert sorted(members) == [f"node{i:03d}" for i in range(4)]
        for g in payload["groups"]:
            assert 0.0 <= g["min_pairwise_chordal"] <= 2 * payload["p"]


class TestReport:
    def test_renders_figures(self, tmp_path):
        out = tmp_path / "res"
        assert run(["--seed", 3, "--out", out] + ANALYZE_FLAGS) == 0
        assert run(["--out", out, "report"]) == 0
        pngs = list(out.glob("*.png"))
        assert (out / "hardening_db.png") in pngs
        assert (out / "condition_cdf.png") in pngs

    def test_missing_dir_exits_2(self, tmp_path):
        assert run(["--out", tmp_path / "nope", "report"]) == 2


class TestThreads:
    def test_thread_count_does_not_change_results(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(["--seed", 6, "--threads", 1, "--out", a] + ANALYZE_FLAGS) == 0
        assert run(["--seed", 6, "--threads", 8, "--out", b] + ANALYZE_FLAGS) == 0
        assert read_bytes(a) == read_bytes(b)
