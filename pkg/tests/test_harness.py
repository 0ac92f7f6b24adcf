import numpy as np
import pytest

from trendband.harness import (
    ConfigError,
    ExperimentConfig,
    brown_params_from_nu,
    coverage_stderr,
    jump_transform,
    parse_config,
    power_curve,
    run_experiment,
    uniform_coverage,
    write_metrics_csv,
    write_power_csv,
)
from trendband.smoothers import effective_sample_size


def tiny_config(**overrides):
    kw = dict(preset="stationary", phis=(0.3,), nus=(15.0,), methods=("ours",),
              t0=60, t1=120, t2=420, b1=6, b2=24, replications=4, seed=5)
    kw.update(overrides)
    return ExperimentConfig(**kw)


class TestMetricsHelpers:
    def test_uniform_coverage_counting(self):
        assert uniform_coverage([False, False]) == 1.0
        assert uniform_coverage([True, True]) == 0.0
        assert uniform_coverage([True, False, False, False]) == 0.75
        with pytest.raises(ValueError):
            uniform_coverage([])

    def test_stderr_binomial(self):
        assert coverage_stderr(0.9, 150) == pytest.approx(np.sqrt(0.9 * 0.1 / 150))
        assert coverage_stderr(1.0, 10) == 0.0

    def test_power_curve_counts(self):
        frac = power_curve([None, None, None], start=10, end=14)
        assert frac.tolist() == [0.0, 0.0, 0.0, 0.0]
        frac = power_curve([11, 11], start=10, end=13)
        assert frac.tolist() == [1.0, 1.0, 1.0]
        frac = power_curve([12, None, 14, 13], start=10, end=14)
        assert frac.tolist() == [0.0, 0.25, 0.5, 0.75]
        assert (np.diff(frac) >= 0).all()


class TestJumpTransform:
    def test_constant_series(self):
        assert not jump_transform(np.full(10, 3.3), 2).any()

    def test_linear_series(self):
        y = jump_transform(np.arange(10.0), 3)
        np.testing.assert_array_equal(y, np.full(7, 3.0))

    def test_step_series(self):
        x = np.zeros(20)
        x[12:] = 5.0
        y = jump_transform(x, 4)
        # differences x_t - x_{t-4} equal 5 exactly while the step is inside
        # the window; y[i] corresponds to t = i + 4 (0-based offset)
        np.testing.assert_array_equal(y[8:12], np.full(4, 5.0))
        assert not y[:8].any() and not y[12:].any()

    def test_domain(self):
        with pytest.raises(ValueError):
            jump_transform(np.zeros(5), 0)
        with pytest.raises(ValueError):
            jump_transform(np.zeros(5), 5)


class TestBrownFromNu:
    def test_inverts_effective_sample_size(self):
        for nu in (10.0, 40.0, 120.0):
            params = brown_params_from_nu(nu)
            assert effective_sample_size(params) == pytest.approx(nu, rel=1e-6)


class TestRunExperiment:
    def test_deterministic_across_workers(self):
        cfg = tiny_config(methods=("ours", "ws"))
        a = run_experiment(cfg, workers=1)
        b = run_experiment(cfg, workers=2)
        assert a.metrics == b.metrics
        assert a.power == b.power

    def test_noise_free_covers_exactly(self):
        cfg = tiny_config(dgp_overrides={"sigma": 0.0}, replications=2)
        res = run_experiment(cfg, workers=1)
        assert res.metrics[0].uniform_coverage == 1.0

    def test_rows_per_combination(self):
        cfg = tiny_config(phis=(0.3, 0.6), nus=(10.0, 15.0), methods=("ours", "ws"),
                          replications=2)
        res = run_experiment(cfg, workers=1)
        assert len(res.metrics) == 8
        keys = {(r.method, r.phi, r.nu) for r in res.metrics}
        assert len(keys) == 8
        assert all(r.replications == 2 for r in res.metrics)

    def test_power_grid_alignment(self):
        cfg = tiny_config(replications=2)
        res = run_experiment(cfg, workers=1)
        ts = [p.t for p in res.power]
        assert ts[0] == cfg.t1 + 1 and ts[-1] == cfg.t2
        fractions = [p.fraction for p in res.power]
        assert all(0.0 <= f <= 1.0 for f in fractions)

    def test_power_start_override(self):
        cfg = tiny_config(replications=2, power_start=200)
        res = run_experiment(cfg, workers=1)
        assert res.power[0].t == 201


class TestCsvEmission:
    def test_metrics_roundtrippable(self, tmp_path):
        cfg = tiny_config(replications=2)
        res = run_experiment(cfg, workers=1)
        path = tmp_path / "metrics.csv"
        write_metrics_csv(path, res.metrics)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# schema: trendband-metrics-1")
        header = lines[1].split(",")
        assert header == ["method", "dgp", "phi", "nu", "uniform_coverage",
                          "avg_width", "mc_stderr", "replications"]
        assert len(lines) == 2 + len(res.metrics)

    def test_byte_identical_reruns(self, tmp_path):
        cfg = tiny_config(replications=3, methods=("ours", "iid"))
        for name, workers in (("a", 1), ("b", 2)):
            res = run_experiment(cfg, workers=workers)
            write_metrics_csv(tmp_path / f"m_{name}.csv", res.metrics)
            write_power_csv(tmp_path / f"p_{name}.csv", res.power)
        assert (tmp_path / "m_a.csv").read_bytes() == (tmp_path / "m_b.csv").read_bytes()
        assert (tmp_path / "p_a.csv").read_bytes() == (tmp_path / "p_b.csv").read_bytes()


class TestTrendInflatesBootstrapScale:
    def test_sigma_star_ordering(self):
        # with a trend, the bootstrap scale picks up the smoothing bias, so
        # it should exceed the scale seen on the detrended series
        from trendband.dgp import preset, simulate
        from trendband.engine import Engine, EngineConfig
        from trendband.smoothers import SmootherParams

        up, down = [], []
        for rep in range(5):
            sim = simulate(preset("trend_seasonal", ar=0.3, slope=2e-3), 1500,
                           seed=(9, rep))
            cfg = EngineConfig(SmootherParams.from_nu(100.0), alpha=0.1, t0=200,
                               t1=400, t2=1500, b1=20, b2=20, seed=(1, rep))
            trace = Engine(cfg, warmup=sim.x[:200]).run(sim.x[200:])
            up.append(trace.sigma_star[-500:].mean())
            detrended = sim.x - sim.m
            trace2 = Engine(cfg, warmup=detrended[:200]).run(detrended[200:])
            down.append(trace2.sigma_star[-500:].mean())
        assert np.mean(up) > np.mean(down)


class TestConfigParsing:
    GOOD = """
[dgp]
preset = stationary
phi = 0.3, 0.6

[engine]
alpha = 0.1
nu = 10, 20
t0 = 50
t1 = 100
t2 = 400
b1 = 4
b2 = 16

[run]
methods = ours, ws
replications = 3
seed = 9
output = results
"""

    def test_good_config(self):
        cfg, out_dir = parse_config(self.GOOD)
        assert cfg.phis == (0.3, 0.6)
        assert cfg.nus == (10.0, 20.0)
        assert cfg.methods == ("ours", "ws")
        assert cfg.replications == 3 and cfg.seed == 9
        assert out_dir == "results"

    def test_unknown_key_rejected(self):
        # trailing key lands in the last section of the file
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(self.GOOD + "\nbogus = 1\n")

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="unknown config section"):
            parse_config(self.GOOD + "\n[plotting]\ncolor = red\n")

    def test_unknown_method_rejected(self):
        with pytest.raises(ConfigError):
            parse_config(self.GOOD.replace("ours, ws", "ours, bogus"))

    def test_eta_grid_maps_to_nu(self):
        text = self.GOOD.replace("nu = 10, 20", "eta = 0.5")
        cfg, _ = parse_config(text)
        assert cfg.nus == pytest.approx((3.0,))

    def test_nu_and_eta_conflict(self):
        text = self.GOOD.replace("nu = 10, 20", "nu = 10\neta = 0.5")
        with pytest.raises(ConfigError, match="not both"):
            parse_config(text)

    def test_overrides(self):
        cfg, _ = parse_config(self.GOOD, overrides=["run.replications=5",
                                                    "dgp.phi=0.5"])
        assert cfg.replications == 5
        assert cfg.phis == (0.5,)

    def test_bad_override_shape(self):
        with pytest.raises(ConfigError):
            parse_config(self.GOOD, overrides=["replications=5"])
