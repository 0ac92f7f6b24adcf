import numpy as np
import pytest

from trendband.cli import main
from trendband.dgp import read_series


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestSimulate:
    def test_stdout_csv(self, capsys):
        code, out, _ = run_cli(capsys, "simulate", "--preset", "stationary",
                               "--phi", "0.3", "--n", "25", "--seed", "3")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "t,x,m"
        assert len(lines) == 26
        assert lines[1].startswith("1,")

    def test_file_output_and_determinism(self, tmp_path, capsys):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (p1, p2):
            code, _, _ = run_cli(capsys, "simulate", "--n", "40", "--seed", "7",
                                 "-o", str(p))
            assert code == 0
        assert p1.read_bytes() == p2.read_bytes()

    def test_overrides(self, tmp_path, capsys):
        p = tmp_path / "t.csv"
        code, _, _ = run_cli(capsys, "simulate", "--preset", "trend_seasonal",
                             "--slope", "0.005", "--n", "30", "-o", str(p))
        assert code == 0
        xs = read_series(p)
        assert len(xs) == 30


class TestBand:
    def test_band_from_file(self, tmp_path, capsys):
        series = tmp_path / "series.txt"
        rng = np.random.default_rng(0)
        series.write_text("\n".join(repr(float(v)) for v in rng.standard_normal(300)))
        out_path = tmp_path / "bands.csv"
        code, _, _ = run_cli(capsys, "band", "--input", str(series),
                             "--nu", "15", "--t0", "40", "--t1", "80",
                             "--b1", "6", "--b2", "14", "-o", str(out_path))
        assert code == 0
        lines = out_path.read_text().splitlines()
        assert lines[0] == "t,level,lo,hi"
        assert len(lines) == 301
        # no band during burn-in and calibration, bands afterwards
        row_80 = lines[80].split(",")
        assert row_80[2] == "" and row_80[3] == ""
        row_last = lines[300].split(",")
        assert float(row_last[2]) < float(row_last[1]) < float(row_last[3])

    def test_band_ws_method(self, tmp_path, capsys):
        series = tmp_path / "series.txt"
        rng = np.random.default_rng(1)
        series.write_text("\n".join(repr(float(v)) for v in rng.standard_normal(200)))
        out_path = tmp_path / "bands.csv"
        code, _, _ = run_cli(capsys, "band", "--input", str(series),
                             "--method", "ws", "--eta", "0.2", "--t0", "30",
                             "--t1", "60", "-o", str(out_path))
        assert code == 0
        lines = out_path.read_text().splitlines()
        assert len(lines) == 201

    def test_bad_series_is_diagnosed(self, tmp_path, capsys):
        series = tmp_path / "bad.txt"
        series.write_text("1.0\nnope\n")
        code, _, err = run_cli(capsys, "band", "--input", str(series))
        assert code == 2
        assert "error:" in err

    def test_conflicting_smoothing_flags(self, tmp_path, capsys):
        series = tmp_path / "s.txt"
        series.write_text("\n".join(["1.0"] * 50))
        code, _, err = run_cli(capsys, "band", "--input", str(series),
                               "--eta", "0.2", "--nu", "30",
                               "--t0", "5", "--t1", "10")
        assert code == 2 and "not both" in err


class TestRun:
    CONFIG = """
[dgp]
preset = stationary
phi = 0.3

[engine]
alpha = 0.1
nu = 12
t0 = 50
t1 = 100
t2 = 400
b1 = 4
b2 = 16

[run]
methods = ours
replications = 2
seed = 11
"""

    def test_full_run(self, tmp_path, capsys):
        cfg = tmp_path / "exp.ini"
        cfg.write_text(self.CONFIG)
        out_dir = tmp_path / "results"
        code, out, _ = run_cli(capsys, "run", "--config", str(cfg),
                               "-o", str(out_dir))
        assert code == 0
        assert (out_dir / "metrics.csv").exists()
        assert (out_dir / "power.csv").exists()
        assert "coverage=" in out

    def test_set_override(self, tmp_path, capsys):
        cfg = tmp_path / "exp.ini"
        cfg.write_text(self.CONFIG)
        out_dir = tmp_path / "results"
        code, out, _ = run_cli(capsys, "run", "--config", str(cfg),
                               "-o", str(out_dir), "--set", "run.replications=3")
        assert code == 0
        text = (out_dir / "metrics.csv").read_text()
        assert text.splitlines()[2].endswith(",3")

    def test_missing_output_dir_is_error(self, tmp_path, capsys):
        cfg = tmp_path / "exp.ini"
        cfg.write_text(self.CONFIG)
        code, _, err = run_cli(capsys, "run", "--config", str(cfg))
        assert code == 2 and "output" in err

    def test_unknown_key_diagnosed(self, tmp_path, capsys):
        cfg = tmp_path / "exp.ini"
        cfg.write_text(self.CONFIG + "\nnope = 1\n")
        code, _, err = run_cli(capsys, "run", "--config", str(cfg),
                               "-o", str(tmp_path / "r"))
        assert code == 2 and "unknown key" in err


class TestSelftest:
    def test_selftest_passes(self, capsys):
        code, out, _ = run_cli(capsys, "selftest")
        assert code == 0
        assert "[PASS]" in out and "[FAIL]" not in out
