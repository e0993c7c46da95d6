import json
import os

import pytest

from bridgelab.cli import main, run_figures_preset
from bridgelab.reporting import read_csv


def run(args):
    return main([str(a) for a in args])


class TestFiguresPreset:
    def test_figure1_artifacts(self, tmp_path):
        assert run(["figures", "--which", "figure1", "--out", tmp_path, "--seed", "0"]) == 0
        for beta in (0.8, 2.0):
            header, rows, _ = read_csv(tmp_path / f"figure1_beta_{beta}.csv")
            assert header == ["t", "x"]
            assert rows[0] == (0.0, 0.0)
            assert rows[1][0] - rows[0][0] == pytest.approx(0.01, abs=1e-15)
        report = json.loads((tmp_path / "figure1_report.json").read_text())
        assert all(report["pass_flags"].values())

    def test_figure2_step_and_families(self, tmp_path):
        assert run(["figures", "--which", "figure2", "--out", tmp_path]) == 0
        for beta in (0.5, 1.5):
            _, rows, _ = read_csv(tmp_path / f"figure2_beta_{beta}.csv")
            assert rows[1][0] - rows[0][0] == pytest.approx(0.005, abs=1e-15)

    def test_rerun_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run_figures_preset("figure1", seed=3, outputs=a)
        run_figures_preset("figure1", seed=3, outputs=b)
        for beta in (0.8, 2.0):
            name = f"figure1_beta_{beta}.csv"
            assert (a / name).read_bytes() == (b / name).read_bytes()


class TestSimulateCommand:
    def test_single_path_with_increments(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("drift.family = power\ndrift.beta = 0.8\nT = 1\nh = 0.01\n")
        assert run(["simulate", "--config", cfg, "--out", tmp_path]) == 0
        header, rows, _ = read_csv(tmp_path / "path_0000.csv")
        assert header == ["t", "x", "dw"]
        assert rows[0][1] == 0.0
        assert (tmp_path / "simulate_report.json").exists()

    def test_threads_do_not_change_artifacts(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text(
            "drift.family = power\ndrift.beta = 0.8\nT = 2\nh = 0.01\nn_paths = 150\nscheme = exact\n"
        )
        out1, out2 = tmp_path / "t1", tmp_path / "t2"
        assert run(["simulate", "--config", cfg, "--out", out1, "--threads", 1]) == 0
        assert run(["simulate", "--config", cfg, "--out", out2, "--threads", 3]) == 0
        assert (out1 / "terminal_stats.csv").read_bytes() == (out2 / "terminal_stats.csv").read_bytes()
        assert (out1 / "path_0000.csv").read_bytes() == (out2 / "path_0000.csv").read_bytes()


class TestLawCommand:
    def test_covariance_artifact_and_sandwich(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("drift.family = power\ndrift.beta = 1\nlaw.times = 1,2,3\n")
        assert run(["law", "--config", cfg, "--out", tmp_path]) == 0
        header, rows, _ = read_csv(tmp_path / "covariance.csv")
        assert header == ["s", "t", "cov"]
        assert len(rows) == 9
        report = json.loads((tmp_path / "law_report.json").read_text())
        assert report["pass_flags"]["det_sandwich"]
        assert report["metrics"]["det_conditioning"] == pytest.approx(
            report["metrics"]["det_lu"], rel=1e-8
        )


class TestLocaltimeCommand:
    def test_three_estimator_artifacts(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text(
            "drift.family = power\ndrift.beta = 0.8\nT = 1\nh = 0.001\n"
            "localtime.eps_ladder = 0.01,0.001\nlocaltime.x = 0\n"
        )
        assert run(["localtime", "--config", cfg, "--out", tmp_path]) == 0
        names = sorted(os.listdir(tmp_path))
        assert "localtime_binned.csv" in names
        assert "localtime_tanaka.csv" in names
        kernel_files = [n for n in names if n.startswith("localtime_kernel_")]
        assert len(kernel_files) == 2
        _, _, preamble = read_csv(tmp_path / "localtime_binned.csv")
        assert "estimator=binned" in preamble[0]


class TestHolderCommand:
    def test_profiles_emitted(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text(
            "drift.family = power\ndrift.beta = 0.8\nT = 1\nh = 0.0009765625\nn_paths = 4\n"
        )
        assert run(["holder", "--config", cfg, "--out", tmp_path]) == 0
        header, rows, _ = read_csv(tmp_path / "holder_time_profile.csv")
        assert header == ["scale", "sup_increment"]
        assert len(rows) >= 3
        report = json.loads((tmp_path / "holder_report.json").read_text())
        assert "time_slope" in report["metrics"]
        assert "space_slope" in report["metrics"]


class TestVerifyCommand:
    def test_subset_run_exits_zero(self, tmp_path, capsys):
        assert run(["verify", "--out", tmp_path, "--checks", "laplace_asymptotic"]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out
        report = json.loads((tmp_path / "verify_report.json").read_text())
        assert report["metrics"]["laplace_ratio_beta2_t10"] == pytest.approx(0.5, rel=0.05)

    def test_bad_config_exits_two(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("h = 0\n")
        assert run(["verify", "--config", cfg]) == 2


class TestEnvironmentDefaults:
    def test_output_env_var(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BRIDGELAB_OUT", str(tmp_path / "envout"))
        assert run(["figures", "--which", "figure1"]) == 0
        assert (tmp_path / "envout" / "figure1_report.json").exists()
