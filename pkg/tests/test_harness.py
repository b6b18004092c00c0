"""Harness behavior: run records, result files, experiments, sweeps."""

import csv
import json
import os
from dataclasses import replace

import numpy as np
import pytest

from oua import __version__
from oua.dynamics import Hyperparams
from oua.errors import ConfigError, IntegrationError
from oua.harness import (
    RunRecord,
    SweepResult,
    _worker_count,
    default_sweep_values,
    experiment,
    frozen_mean_config,
    mse,
    pearson,
    prepare_weather_data,
    run,
    run_filename,
    run_many,
    sweep,
    weather_experiment,
    write_manifest,
    write_run_csv,
    write_summary_csv,
    write_sweep_csv,
)
from oua.presets import preset
from oua.sde import TimeGrid


def small_fig2(t_end=5.0, seeds=(0, 1)):
    cfg = preset("fig2")
    return replace(cfg, grid=TimeGrid(0.0, t_end, 0.05), seeds=seeds)


def fake_record(mode="learn", seed=0, n_params=1, metrics=None):
    labels = [f"theta{i}" for i in range(n_params)]
    labels += [f"mu{i}" for i in range(n_params)]
    labels += ["rbar", "G"]
    table = np.arange(3.0 * (1 + len(labels))).reshape(3, 1 + len(labels))
    return RunRecord("tracking", mode, seed, labels, table, 0.5, metrics or {})


class TestRunRecord:
    def test_times_is_first_column(self):
        rec = fake_record()
        assert np.array_equal(rec.times, rec.table[:, 0])

    def test_column_lookup(self):
        rec = fake_record()
        assert np.array_equal(rec.column("rbar"), rec.table[:, 3])
        with pytest.raises(KeyError, match="no column 'z9'"):
            rec.column("z9")

    def test_columns_requires_digit_suffix(self):
        # "mu_sigma" starts with "mu" but must not count as a mu component.
        labels = ["theta0", "mu0", "rbar", "G", "sigma", "mu_sigma"]
        table = np.arange(14.0).reshape(2, 7)
        rec = RunRecord("meta", "learn", 0, labels, table, 0.0)
        mu = rec.columns("mu")
        assert mu.shape == (2, 1)
        assert np.array_equal(mu[:, 0], rec.column("mu0"))

    def test_summary_views(self):
        rec = fake_record(n_params=2)
        assert rec.G_T == rec.column("G")[-1]
        assert np.array_equal(rec.mu_T, rec.table[-1, 3:5])
        mu = rec.mu_T
        mu[0] = 99.0
        assert rec.table[-1, 3] != 99.0


class TestRunGuards:
    def test_nonfinite_output_names_task_step_component(self):
        cfg = small_fig2(t_end=50.0)
        cfg = replace(cfg, hp=Hyperparams(lam=1.0, eta=500.0, rho=1.0, sigma=np.array([0.3])))
        with pytest.raises(IntegrationError, match="tracking") as excinfo:
            run(cfg, 0)
        err = excinfo.value
        assert isinstance(err.step, int) and err.step > 0
        assert err.component in ("theta0", "mu0", "rbar", "G", "delta")
        assert "step=" in str(err) and "component=" in str(err)

    def test_unknown_mode(self):
        with pytest.raises(ConfigError, match="unknown mode"):
            run(small_fig2(), 0, mode="bogus")

    def test_fixed_sigma_needs_meta(self):
        with pytest.raises(ConfigError, match="meta"):
            run(small_fig2(), 0, mode="fixed_sigma")

    def test_weather_needs_prepared_data(self):
        with pytest.raises(ValueError, match="prepared"):
            run(preset("fig6"), 0)


class TestModes:
    def test_baseline_pins_parameters(self):
        cfg = small_fig2()
        rec = run(cfg, 0, mode="baseline")
        # eta = 0 and sigma = 0 with mu0 = theta0: both stay put exactly.
        assert np.all(rec.column("theta0") == cfg.theta0[0])
        assert np.all(rec.column("mu0") == cfg.theta0[0])
        assert rec.G_T < 0.0

    def test_frozen_mean_pins_at_given_mean(self):
        cfg = small_fig2()
        frozen = frozen_mean_config(cfg, np.array([0.7]))
        rec = run(frozen, 3)
        assert np.all(rec.column("theta0") == 0.7)
        assert np.all(rec.column("mu0") == 0.7)
        assert frozen.hp.eta == 0.0
        assert np.all(frozen.hp.sigma == 0.0)

    def test_learn_differs_from_baseline(self):
        cfg = small_fig2()
        learn = run(cfg, 0)
        base = run(cfg, 0, mode="baseline")
        assert learn.G_T != base.G_T
        assert np.ptp(learn.column("theta0")) > 0.0


class TestResultFiles:
    def test_run_filename(self):
        assert run_filename("fig2", "learn", 3) == "run_fig2_3.csv"
        assert run_filename("fig2", "baseline", 3) == "run_fig2_baseline_3.csv"
        assert run_filename("fig5", "frozen_mean", 11) == "run_fig5_frozen_mean_11.csv"

    def test_run_csv_round_trip_exact(self, tmp_path):
        rec = run(small_fig2(), 0)
        path = tmp_path / "run.csv"
        write_run_csv(rec, path)
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        assert header == ["t"] + rec.labels
        back = np.loadtxt(path, delimiter=",", skiprows=1)
        # %.17g round-trips float64.
        assert np.array_equal(back, rec.table)

    def test_summary_header_order_and_padding(self, tmp_path):
        wide = fake_record(mode="learn", seed=0, n_params=2, metrics={"mse": 1.5})
        narrow = fake_record(mode="baseline", seed=1, n_params=1)
        path = tmp_path / "summary.csv"
        write_summary_csv([wide, narrow], path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["mode", "seed", "G_T", "wall_time", "mu_0", "mu_1", "mse"]
        assert rows[1][0] == "learn" and rows[2][0] == "baseline"
        # The 1-parameter run leaves mu_1 and the missing metric empty.
        assert rows[2][5] == "" and rows[2][6] == ""
        assert float(rows[1][6]) == 1.5

    def test_summary_needs_records(self, tmp_path):
        with pytest.raises(ValueError):
            write_summary_csv([], tmp_path / "summary.csv")

    def test_manifest_contents(self, tmp_path):
        cfg = small_fig2()
        write_manifest(cfg, tmp_path, ["b.csv", "a.csv"], extra={"variant": "zca"})
        with open(tmp_path / "manifest.json") as fh:
            manifest = json.load(fh)
        assert manifest["version"] == __version__
        assert manifest["files"] == ["a.csv", "b.csv"]
        assert manifest["variant"] == "zca"
        echo = manifest["config"]
        assert echo["task"] == "tracking"
        assert echo["grid"]["t_end"] == 5.0
        assert echo["hyperparams"]["sigma"] == [0.3]
        # No switch configured: the sentinel must still serialize.
        assert echo["t_switch"] == "inf"
        json.dumps(manifest)


class TestExperiment:
    def test_layout_and_frozen_pairing(self, tmp_path):
        cfg = small_fig2(seeds=(0, 1))
        records = experiment(cfg, tmp_path, frozen_mean=True)
        names = sorted(os.listdir(tmp_path))
        expected = sorted(
            [run_filename("fig2", m, s) for m in ("learn", "baseline", "frozen_mean") for s in (0, 1)]
            + ["summary.csv", "manifest.json"]
        )
        assert names == expected

        by_mode = {}
        for r in records:
            by_mode.setdefault(r.mode, {})[r.seed] = r
        # Each frozen run pins its own seed's learned mean, not a pooled one.
        for s in (0, 1):
            mu_T = by_mode["learn"][s].mu_T
            frozen = by_mode["frozen_mean"][s]
            assert np.all(frozen.column("theta0") == mu_T[0])
        assert by_mode["learn"][0].mu_T[0] != by_mode["learn"][1].mu_T[0]

    def test_run_many_keeps_submission_order(self):
        cfg = small_fig2(t_end=2.0)
        records = run_many(cfg, seeds=(5, 1, 3))
        assert [r.seed for r in records] == [5, 1, 3]

    def test_run_many_defaults_to_config_seeds(self):
        cfg = small_fig2(t_end=2.0, seeds=(2, 7))
        records = run_many(cfg)
        assert [r.seed for r in records] == [2, 7]


class TestSweep:
    def test_default_values_span_two_decades(self):
        values = default_sweep_values(1.0)
        assert values.shape == (12,)
        assert values[0] == pytest.approx(0.1) and values[-1] == pytest.approx(10.0)
        assert np.all(np.diff(values) > 0)

    def test_values_reversed_reverses_results_bitwise(self):
        cfg = small_fig2(t_end=3.0)
        fwd = sweep(cfg, "sigma", values=[0.1, 0.2, 0.4])
        rev = sweep(cfg, "sigma", values=[0.4, 0.2, 0.1])
        assert np.array_equal(fwd.g_matrix, rev.g_matrix[::-1])

    def test_reference_is_seed_mean_baseline(self):
        cfg = small_fig2(t_end=3.0)
        result = sweep(cfg, "eta", values=[0.5, 1.0])
        baselines = run_many(cfg, "baseline")
        assert result.reference == np.mean([r.G_T for r in baselines])

    def test_lambda_alias(self):
        cfg = small_fig2(t_end=2.0, seeds=(0,))
        result = sweep(cfg, "lambda", values=[0.5, 1.0])
        assert result.param == "lam"

    def test_unknown_param(self):
        with pytest.raises(ConfigError, match="cannot sweep"):
            sweep(small_fig2(), "gamma", values=[1.0])

    def test_empty_values(self):
        with pytest.raises(ConfigError, match="non-empty"):
            sweep(small_fig2(), "eta", values=[])

    def test_spread_properties(self):
        result = SweepResult(
            param="eta",
            values=np.array([1.0, 2.0]),
            g_matrix=np.array([[1.0, 3.0], [-2.0, 0.0]]),
            seeds=(0, 1),
            reference=-5.0,
        )
        assert np.array_equal(result.mean, [2.0, -1.0])
        assert np.array_equal(result.lo, [1.0, -2.0])
        assert np.array_equal(result.hi, [3.0, 0.0])

    def test_sweep_csv_files(self, tmp_path):
        cfg = small_fig2(t_end=2.0, seeds=(0, 1))
        result = sweep(cfg, "sigma", values=[0.1, 0.3])
        names = write_sweep_csv(result, tmp_path)
        assert names == ["sweep_sigma.csv", "sweep_summary_sigma.csv"]
        rows = np.loadtxt(tmp_path / "sweep_sigma.csv", delimiter=",", skiprows=1)
        assert rows.shape == (4, 3)
        assert np.array_equal(rows[:, 2].reshape(2, 2), result.g_matrix)
        with open(tmp_path / "sweep_summary_sigma.csv") as fh:
            header = fh.readline().strip()
        assert header == "value,mean_G,min_G,max_G,reference"
        summary = np.loadtxt(tmp_path / "sweep_summary_sigma.csv", delimiter=",", skiprows=1)
        assert np.array_equal(summary[:, 1], result.mean)
        assert np.all(summary[:, 4] == result.reference)


class TestMetrics:
    def test_pearson_perfect(self):
        a = np.array([1.0, 2.0, 3.0])
        assert pearson(a, 2 * a + 1) == 1.0
        assert pearson(a, -a) == -1.0

    def test_pearson_reference_value(self):
        a = np.array([1.0, 2.0, 3.0, 4.0])
        b = np.array([1.0, 3.0, 2.0, 4.0])
        assert pearson(a, b) == 0.8

    def test_pearson_rejects_degenerate_input(self):
        with pytest.raises(ValueError, match="constant"):
            pearson(np.ones(5), np.arange(5.0))
        with pytest.raises(ValueError):
            pearson(np.array([1.0]), np.array([2.0]))
        with pytest.raises(ValueError):
            pearson(np.arange(3.0), np.arange(4.0))

    def test_mse_reference_value(self):
        assert mse(np.array([1.0, 3.0]), np.array([2.0, 5.0])) == 2.5
        assert mse(np.zeros(4), np.zeros(4)) == 0.0

    def test_mse_shape_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            mse(np.zeros(3), np.zeros(2))


@pytest.fixture(scope="module")
def weather_results(tmp_path_factory):
    out = tmp_path_factory.mktemp("weather_results")
    cfg = preset("fig6")
    cfg = replace(cfg, weather=replace(cfg.weather, synthetic_rows=400))
    records = weather_experiment(cfg, out)
    return cfg, out, records


class TestWeatherExperiment:
    def test_file_layout(self, weather_results):
        cfg, out, _ = weather_results
        corpus = f"synthetic_weather_400_{cfg.weather.synthetic_seed}.csv"
        names = set(os.listdir(out))
        assert {
            "run_fig6_zca_0.csv",
            "run_fig6_zca_baseline_0.csv",
            "run_fig6_zca_frozen_mean_0.csv",
            "predictions_zca.csv",
            "summary_zca.csv",
            "manifest.json",
            corpus,
        } <= names

    def test_manifest_variant(self, weather_results):
        _, out, _ = weather_results
        with open(os.path.join(out, "manifest.json")) as fh:
            manifest = json.load(fh)
        assert manifest["variant"] == "zca"
        assert manifest["config"]["weather"]["synthetic_rows"] == 400

    def test_grid_follows_training_split(self, weather_results):
        # 400 hourly rows - 24 target horizon = 376 usable, 80% -> 300
        # training rows, so the run spans t = 0 .. 299.
        _, _, records = weather_results
        assert records[0].times[-1] == 299.0

    def test_metrics_attached_to_every_run(self, weather_results):
        _, _, records = weather_results
        assert len(records) == 3
        for rec in records:
            assert set(rec.metrics) == {"pearson", "mse"} | {f"coef_{i}" for i in range(6)}
            assert -1.0 <= rec.metrics["pearson"] <= 1.0

    def test_predictions_cover_test_split(self, weather_results):
        _, out, _ = weather_results
        table = np.loadtxt(os.path.join(out, "predictions_zca.csv"), delimiter=",", skiprows=1)
        assert table.shape == (76, 2)

    def test_corpus_synthesized_once(self, weather_results):
        cfg, out, _ = weather_results
        path = os.path.join(out, f"synthetic_weather_400_{cfg.weather.synthetic_seed}.csv")
        before = os.path.getmtime(path)
        prepare_weather_data(cfg, out)
        assert os.path.getmtime(path) == before

    def test_missing_weather_params(self):
        cfg = replace(preset("fig6"), weather=None)
        with pytest.raises(ConfigError, match="weather"):
            prepare_weather_data(cfg)


class TestWorkerCount:
    def test_env_wins(self, monkeypatch):
        monkeypatch.setenv("OUA_THREADS", "3")
        assert _worker_count(64) == 3

    def test_env_floor_is_one(self, monkeypatch):
        monkeypatch.setenv("OUA_THREADS", "0")
        assert _worker_count(64) == 1

    def test_default_bounded_by_jobs(self, monkeypatch):
        monkeypatch.delenv("OUA_THREADS", raising=False)
        assert _worker_count(2) <= 2
        assert 1 <= _worker_count(64) <= 8
