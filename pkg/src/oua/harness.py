"""Experiment orchestration: seeded runs, baselines, sweeps, metrics, IO.

A run is a deterministic function of (config, seed, mode): all noise is
drawn up front from one seeded generator per run, then handed to the
task's kernel. Runs across seeds execute on a thread pool (the compiled
kernels drop the GIL), and results are collected in submission order, so
output never depends on thread count.

Results directory layout, consumed by external tooling:
  run_<label>_<seed>.csv   one per run; columns: t, then the stacked state
                           (see kernel docstrings), then delta
  summary.csv              one row per run: mode, seed, G_T, wall_time,
                           final mu components, task metrics
  manifest.json            full config echo, package version, timestamp
  sweep_<param>.csv        sweep rows: value, seed, G_T
  sweep_summary_<param>.csv  per value: mean, min, max of G_T, reference
  predictions_<mode>.csv   forecasting task only: y_true, y_pred per test row
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .dynamics import SIGMA_FLOOR, Hyperparams, MetaState
from .errors import ConfigError, IntegrationError
from .interpolate import SampledSignal
from .sde import TimeGrid, WienerSource
from .weather import PreparedWeather, prepare_weather, project_back, synthesize_weather_csv

TASKS = ("tracking", "ctrnn", "sdi", "meta", "weather")
MODES = ("learn", "baseline", "frozen_mean", "fixed_sigma")
DEFAULT_SEEDS = tuple(range(15))


@dataclass(frozen=True)
class SdiParams:
    gamma: float
    alpha: float
    beta: float


@dataclass(frozen=True)
class MetaParams:
    lam_sigma: float
    eta_sigma: float
    sigma0: float
    mu_sigma0: float
    meta_diffusion: float
    sigma_floor: float = SIGMA_FLOOR


@dataclass(frozen=True)
class WeatherParams:
    """Data source and preprocessing switches for the forecasting task.

    ``path`` may be None when ``synthetic_rows`` is set, in which case a
    synthetic corpus is generated (cached next to the results) instead of
    reading a real export.
    """

    path: str | None = None
    zca: bool = True
    train_fraction: float = 0.8
    horizon: int = 24
    synthetic_rows: int | None = None
    synthetic_seed: int = 9001


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; presets in :mod:`oua.presets` build these."""

    task: str
    model: str
    grid: TimeGrid
    hp: Hyperparams
    theta0: np.ndarray
    mu0: np.ndarray
    rbar0: float
    theta_star: np.ndarray | None = None
    theta_star_2: np.ndarray | None = None
    t_switch: float = np.inf
    z0: float = 0.0
    theta0_scale: float | None = None
    meta: MetaParams | None = None
    sdi: SdiParams | None = None
    weather: WeatherParams | None = None
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    record_stride: int = 1
    label: str = ""

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError([f"unknown task {self.task!r}; choices: {TASKS}"])
        if len(self.seeds) == 0:
            raise ConfigError(["seed list must be non-empty"])
        object.__setattr__(self, "theta0", np.atleast_1d(np.asarray(self.theta0, dtype=float)))
        object.__setattr__(self, "mu0", np.atleast_1d(np.asarray(self.mu0, dtype=float)))
        if self.theta_star is not None:
            object.__setattr__(
                self, "theta_star", np.atleast_1d(np.asarray(self.theta_star, dtype=float))
            )
        if self.theta_star_2 is not None:
            object.__setattr__(
                self, "theta_star_2", np.atleast_1d(np.asarray(self.theta_star_2, dtype=float))
            )

    @property
    def n(self) -> int:
        return self.hp.n


@dataclass
class RunRecord:
    """One run's recorded trajectory plus its summary facts.

    ``table`` column 0 is time; remaining columns are named by ``labels``.
    Summaries (G_T, mu_T) are views into the table, so they always agree
    with the trajectory.
    """

    task: str
    mode: str
    seed: int
    labels: list[str]
    table: np.ndarray
    wall_time: float
    metrics: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.table[:, 0]

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.labels.index(name)
        except ValueError:
            raise KeyError(f"no column {name!r}; have {self.labels}")
        return self.table[:, 1 + j]

    def columns(self, prefix: str) -> np.ndarray:
        """Columns named ``<prefix><index>``; plain prefix matching would
        also catch mu_sigma when asking for mu."""
        idx = [
            1 + j
            for j, name in enumerate(self.labels)
            if name.startswith(prefix) and name[len(prefix) :].isdigit()
        ]
        return self.table[:, idx]

    @property
    def G_T(self) -> float:
        return float(self.column("G")[-1])

    @property
    def mu_T(self) -> np.ndarray:
        return self.columns("mu")[-1].copy()


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Product-moment correlation, two-pass definitional form."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.shape[0] < 2:
        raise ValueError("pearson needs two equal-length series of at least 2 points")
    da = a - a.mean()
    db = b - b.mean()
    denom = np.sqrt((da * da).sum() * (db * db).sum())
    if denom == 0.0:
        raise ValueError("pearson undefined for a constant series")
    return float((da * db).sum() / denom)


def mse(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float((d * d).mean())


def _mode_adjusted(config: ExperimentConfig, mode: str) -> ExperimentConfig:
    """Translate an evaluation mode into plain config surgery."""
    if mode == "learn":
        return config
    if mode == "baseline":
        # Parameters pinned to theta0: no exploration noise, no adaptation.
        hp = Hyperparams(lam=config.hp.lam, eta=0.0, rho=config.hp.rho, sigma=np.zeros(config.n))
        updates = dict(hp=hp, mu0=config.theta0.copy(), meta=None)
        if config.task == "meta":
            # With sigma pinned at zero the adaptive-noise state is inert.
            updates.update(task="tracking", model="tanh")
        return replace(config, **updates)
    if mode == "fixed_sigma":
        if config.meta is None:
            raise ConfigError(["fixed_sigma mode needs meta settings for sigma0"])
        hp = Hyperparams(
            lam=config.hp.lam,
            eta=config.hp.eta,
            rho=config.hp.rho,
            sigma=np.full(config.n, config.meta.sigma0),
        )
        return replace(config, hp=hp, meta=None, task="tracking", model="tanh")
    raise ConfigError([f"unknown mode {mode!r}; choices: {MODES}"])


def frozen_mean_config(config: ExperimentConfig, mu_T: np.ndarray) -> ExperimentConfig:
    """Deployment-style evaluation: parameters pinned at the learned mean."""
    hp = Hyperparams(lam=config.hp.lam, eta=0.0, rho=config.hp.rho, sigma=np.zeros(config.n))
    mu_T = np.asarray(mu_T, dtype=float)
    updates = dict(hp=hp, theta0=mu_T.copy(), mu0=mu_T.copy(), meta=None, theta0_scale=None)
    if config.task == "meta":
        updates.update(task="tracking", model="tanh")
    return replace(config, **updates)


def _draw_theta0(config: ExperimentConfig, noise: WienerSource) -> np.ndarray:
    if config.theta0_scale is None:
        return config.theta0.copy()
    return config.theta0 + config.theta0_scale * noise.standard_normal(config.n)


_MODEL_KINDS = {"tanh": kernels.MODEL_TANH, "linear": kernels.MODEL_LINEAR}


def run(
    config: ExperimentConfig,
    seed: int,
    mode: str = "learn",
    prepared: PreparedWeather | None = None,
) -> RunRecord:
    """Integrate one seeded run of ``config`` under ``mode``.

    The forecasting task takes its data through ``prepared`` so the
    pipeline runs once per experiment, not once per seed.
    """
    cfg = _mode_adjusted(config, mode)
    grid = cfg.grid
    n_steps = grid.n_steps
    stride = cfg.record_stride
    rows = kernels.n_records(n_steps, stride)
    start = time.perf_counter()

    if cfg.task == "weather":
        if prepared is None:
            raise ValueError("weather runs need prepared data")
        record = _run_weather(cfg, seed, prepared, rows)
    elif cfg.task == "tracking":
        record = _run_tracking(cfg, seed, rows)
    elif cfg.task == "ctrnn":
        record = _run_ctrnn(cfg, seed, rows)
    elif cfg.task == "sdi":
        record = _run_sdi(cfg, seed, rows)
    elif cfg.task == "meta":
        record = _run_meta(cfg, seed, rows)
    else:
        raise ConfigError([f"unknown task {cfg.task!r}"])

    table = record.table
    if not np.all(np.isfinite(table)):
        bad_row, bad_col = np.argwhere(~np.isfinite(table))[0]
        name = (["t"] + record.labels)[bad_col]
        raise IntegrationError(
            f"non-finite value in run output (task {cfg.task}, seed {seed})",
            step=int(bad_row),
            component=name,
        )
    record.task = config.task
    record.mode = mode
    record.seed = seed
    record.wall_time = time.perf_counter() - start
    return record


def _theta_mu_labels(n: int) -> list[str]:
    return [f"theta{i}" for i in range(n)] + [f"mu{i}" for i in range(n)]


def _run_tracking(cfg: ExperimentConfig, seed: int, rows: int) -> RunRecord:
    n = cfg.n
    if cfg.theta_star is None:
        raise ConfigError(["tracking task needs theta_star"])
    ts1 = cfg.theta_star
    ts2 = cfg.theta_star_2 if cfg.theta_star_2 is not None else cfg.theta_star
    noise = WienerSource(seed, n)
    theta0 = _draw_theta0(cfg, noise)
    mu0 = theta0.copy() if cfg.theta0_scale is not None else cfg.mu0.copy()
    dW = noise.increments(cfg.grid.n_steps, cfg.grid.dt)
    out = np.empty((rows, 2 * n + 4))
    kernels.supervised_kernel(
        cfg.grid.t0,
        cfg.grid.dt,
        cfg.grid.n_steps,
        cfg.record_stride,
        theta0,
        mu0,
        cfg.rbar0,
        0.0,
        cfg.hp.lam,
        cfg.hp.eta,
        cfg.hp.rho,
        cfg.hp.sigma,
        _MODEL_KINDS[cfg.model],
        ts1,
        ts2,
        cfg.t_switch,
        dW,
        out,
    )
    labels = _theta_mu_labels(n) + ["rbar", "G", "delta"]
    return RunRecord(cfg.task, "learn", seed, labels, out, 0.0)


def _run_ctrnn(cfg: ExperimentConfig, seed: int, rows: int) -> RunRecord:
    if cfg.theta_star is None:
        raise ConfigError(["ctrnn task needs theta_star"])
    grid = cfg.grid
    ystar = np.empty(grid.n_steps + 1)
    kernels.ctrnn_target_kernel(grid.t0, grid.dt, grid.n_steps, cfg.theta_star, ystar)
    noise = WienerSource(seed, 3)
    dW = noise.increments(grid.n_steps, grid.dt)
    out = np.empty((rows, 11))
    kernels.ctrnn_kernel(
        grid.t0,
        grid.dt,
        grid.n_steps,
        cfg.record_stride,
        cfg.z0,
        cfg.theta0.copy(),
        cfg.mu0.copy(),
        cfg.rbar0,
        0.0,
        cfg.hp.lam,
        cfg.hp.eta,
        cfg.hp.rho,
        cfg.hp.sigma,
        ystar,
        dW,
        out,
    )
    labels = ["z0"] + _theta_mu_labels(3) + ["rbar", "G", "delta"]
    return RunRecord(cfg.task, "learn", seed, labels, out, 0.0)


def _run_sdi(cfg: ExperimentConfig, seed: int, rows: int) -> RunRecord:
    if cfg.sdi is None:
        raise ConfigError(["sdi task needs sdi parameters"])
    grid = cfg.grid
    noise = WienerSource(seed, 3)
    dW = noise.increments(grid.n_steps, grid.dt)
    eps = noise.standard_normal((grid.n_steps, 2))
    out = np.empty((rows, 10))
    kernels.sdi_kernel(
        grid.t0,
        grid.dt,
        grid.n_steps,
        cfg.record_stride,
        np.zeros(2),
        cfg.theta0.copy(),
        cfg.mu0.copy(),
        cfg.rbar0,
        0.0,
        cfg.hp.lam,
        cfg.hp.eta,
        cfg.hp.rho,
        cfg.hp.sigma,
        cfg.sdi.gamma,
        cfg.sdi.alpha,
        cfg.sdi.beta,
        dW,
        eps,
        out,
    )
    labels = ["s0", "s1"] + _theta_mu_labels(2) + ["rbar", "G", "delta"]
    return RunRecord(cfg.task, "learn", seed, labels, out, 0.0)


def _run_meta(cfg: ExperimentConfig, seed: int, rows: int) -> RunRecord:
    if cfg.meta is None or cfg.theta_star is None:
        raise ConfigError(["meta task needs meta parameters and theta_star"])
    grid = cfg.grid
    noise = WienerSource(seed, 2)
    dW = noise.increments(grid.n_steps, grid.dt)
    ts2 = cfg.theta_star_2 if cfg.theta_star_2 is not None else cfg.theta_star
    out = np.empty((rows, 8))
    kernels.meta_kernel(
        grid.t0,
        grid.dt,
        grid.n_steps,
        cfg.record_stride,
        float(cfg.theta0[0]),
        float(cfg.mu0[0]),
        cfg.rbar0,
        0.0,
        cfg.hp.lam,
        cfg.hp.eta,
        cfg.hp.rho,
        cfg.meta.sigma0,
        cfg.meta.mu_sigma0,
        cfg.meta.lam_sigma,
        cfg.meta.eta_sigma,
        cfg.meta.meta_diffusion,
        cfg.meta.sigma_floor,
        float(cfg.theta_star[0]),
        float(ts2[0]),
        cfg.t_switch,
        dW,
        out,
    )
    labels = ["theta0", "mu0", "rbar", "G", "sigma", "mu_sigma", "delta"]
    return RunRecord(cfg.task, "learn", seed, labels, out, 0.0)


def weather_signals(
    prepared: PreparedWeather, zca: bool
) -> tuple[SampledSignal, SampledSignal]:
    """Training features and target as hourly-knot signals (t = row index)."""
    table = prepared.train_whitened if zca else prepared.train
    times = np.arange(table.n_rows, dtype=float)
    return (
        SampledSignal(times, table.features),
        SampledSignal(times, prepared.train.target),
    )


def weather_grid(prepared: PreparedWeather, dt: float) -> TimeGrid:
    return TimeGrid(t0=0.0, t_end=float(prepared.train.n_rows - 1), dt=dt)


def _run_weather(
    cfg: ExperimentConfig, seed: int, prepared: PreparedWeather, rows: int
) -> RunRecord:
    if cfg.weather is None:
        raise ConfigError(["weather task needs weather parameters"])
    grid = cfg.grid
    features, target = weather_signals(prepared, cfg.weather.zca)
    noise = WienerSource(seed, cfg.n)
    theta0 = _draw_theta0(cfg, noise)
    mu0 = theta0.copy() if cfg.theta0_scale is not None else cfg.mu0.copy()
    dW = noise.increments(grid.n_steps, grid.dt)
    out = np.empty((rows, 2 * cfg.n + 4))
    kernels.weather_kernel(
        grid.t0,
        grid.dt,
        grid.n_steps,
        cfg.record_stride,
        theta0,
        mu0,
        cfg.rbar0,
        0.0,
        cfg.hp.lam,
        cfg.hp.eta,
        cfg.hp.rho,
        cfg.hp.sigma,
        features.times[0],
        1.0,
        features.values,
        features.slopes(),
        target.values[:, 0],
        target.slopes()[:, 0],
        dW,
        out,
    )
    labels = _theta_mu_labels(cfg.n) + ["rbar", "G", "delta"]
    return RunRecord(cfg.task, "learn", seed, labels, out, 0.0)


def _worker_count(n_jobs: int) -> int:
    env = os.environ.get("OUA_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1, n_jobs))


def run_many(
    config: ExperimentConfig,
    mode: str = "learn",
    seeds: tuple[int, ...] | None = None,
    prepared: PreparedWeather | None = None,
) -> list[RunRecord]:
    """All seeds of one mode, in parallel, collected in seed order."""
    seeds = config.seeds if seeds is None else tuple(seeds)
    with ThreadPoolExecutor(max_workers=_worker_count(len(seeds))) as pool:
        futures = [pool.submit(run, config, s, mode, prepared) for s in seeds]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# results directory writers


def write_run_csv(record: RunRecord, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("t," + ",".join(record.labels) + "\n")
        for row in record.table:
            fh.write(",".join("%.17g" % v for v in row))
            fh.write("\n")


def run_filename(label: str, mode: str, seed: int) -> str:
    tag = label if mode == "learn" else f"{label}_{mode}"
    return f"run_{tag}_{seed}.csv"


def write_summary_csv(records: list[RunRecord], path) -> None:
    """One row per run: mode, seed, G_T, wall_time, final mu, metrics."""
    if not records:
        raise ValueError("no records to summarize")
    n = max(r.columns("mu").shape[1] for r in records)
    metric_keys = sorted({k for r in records for k in r.metrics})
    header = ["mode", "seed", "G_T", "wall_time"]
    header += [f"mu_{i}" for i in range(n)]
    header += metric_keys
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for r in records:
            mu = r.mu_T
            row = [r.mode, str(r.seed), "%.17g" % r.G_T, "%.6f" % r.wall_time]
            row += ["%.17g" % v for v in mu] + [""] * (n - len(mu))
            row += ["%.17g" % r.metrics[k] if k in r.metrics else "" for k in metric_keys]
            fh.write(",".join(row) + "\n")


def _config_echo(config: ExperimentConfig) -> dict:
    def clean(v):
        if isinstance(v, np.ndarray):
            return v.tolist()
        if isinstance(v, (np.floating, np.integer)):
            return v.item()
        if isinstance(v, float) and np.isinf(v):
            return "inf"
        return v

    echo = {
        "task": config.task,
        "model": config.model,
        "label": config.label,
        "grid": {"t0": config.grid.t0, "t_end": config.grid.t_end, "dt": config.grid.dt},
        "hyperparams": {
            "lam": config.hp.lam,
            "eta": config.hp.eta,
            "rho": config.hp.rho,
            "sigma": config.hp.sigma.tolist(),
        },
        "initial": {
            "theta0": config.theta0.tolist(),
            "mu0": config.mu0.tolist(),
            "rbar0": config.rbar0,
            "z0": config.z0,
            "theta0_scale": clean(config.theta0_scale),
        },
        "seeds": list(config.seeds),
        "record_stride": config.record_stride,
        "t_switch": clean(config.t_switch),
    }
    if config.theta_star is not None:
        echo["theta_star"] = config.theta_star.tolist()
    if config.theta_star_2 is not None:
        echo["theta_star_2"] = config.theta_star_2.tolist()
    if config.meta is not None:
        echo["meta"] = {
            "lam_sigma": config.meta.lam_sigma,
            "eta_sigma": config.meta.eta_sigma,
            "sigma0": config.meta.sigma0,
            "mu_sigma0": config.meta.mu_sigma0,
            "meta_diffusion": config.meta.meta_diffusion,
            "sigma_floor": config.meta.sigma_floor,
        }
    if config.sdi is not None:
        echo["sdi"] = {
            "gamma": config.sdi.gamma,
            "alpha": config.sdi.alpha,
            "beta": config.sdi.beta,
        }
    if config.weather is not None:
        echo["weather"] = {
            "path": config.weather.path,
            "zca": config.weather.zca,
            "train_fraction": config.weather.train_fraction,
            "horizon": config.weather.horizon,
            "synthetic_rows": config.weather.synthetic_rows,
            "synthetic_seed": config.weather.synthetic_seed,
        }
    return echo


def write_manifest(config: ExperimentConfig, out_dir, files: list[str], extra: dict | None = None) -> None:
    from . import __version__

    manifest = {
        "config": _config_echo(config),
        "version": __version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "files": sorted(files),
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)


def experiment(
    config: ExperimentConfig,
    out_dir,
    modes: tuple[str, ...] = ("learn", "baseline"),
    frozen_mean: bool = False,
) -> list[RunRecord]:
    """Run every (mode, seed) pair and write the results directory."""
    os.makedirs(out_dir, exist_ok=True)
    label = config.label or config.task
    records: list[RunRecord] = []
    for mode in modes:
        records.extend(run_many(config, mode))
    if frozen_mean:
        # Paired evaluation: each seed's frozen run pins that seed's own
        # learned mean.
        learn_records = [r for r in records if r.mode == "learn"]
        for lr in learn_records:
            fr = run(frozen_mean_config(config, lr.mu_T), lr.seed)
            fr.mode = "frozen_mean"
            records.append(fr)

    files = []
    for r in records:
        name = run_filename(label, r.mode, r.seed)
        write_run_csv(r, os.path.join(out_dir, name))
        files.append(name)
    write_summary_csv(records, os.path.join(out_dir, "summary.csv"))
    files.append("summary.csv")
    write_manifest(config, out_dir, files)
    return records


# ---------------------------------------------------------------------------
# forecasting experiment


def prepare_weather_data(config: ExperimentConfig, out_dir=None) -> PreparedWeather:
    """Resolve the configured data source, synthesizing a corpus if asked."""
    wp = config.weather
    if wp is None:
        raise ConfigError(["weather task needs weather parameters"])
    path = wp.path
    if path is None:
        if wp.synthetic_rows is None:
            raise ConfigError(["weather.path or weather.synthetic_rows must be set"])
        base = out_dir if out_dir is not None else "."
        os.makedirs(base, exist_ok=True)
        path = os.path.join(base, f"synthetic_weather_{wp.synthetic_rows}_{wp.synthetic_seed}.csv")
        if not os.path.exists(path):
            synthesize_weather_csv(path, n_rows=wp.synthetic_rows, seed=wp.synthetic_seed)
    return prepare_weather(path, train_fraction=wp.train_fraction, horizon=wp.horizon)


def evaluate_weather(
    record: RunRecord, prepared: PreparedWeather, zca: bool
) -> dict[str, float]:
    """Test-split metrics and original-space coefficients for one run."""
    mu_T = record.mu_T
    test = prepared.test_whitened if zca else prepared.test
    y_pred = test.features @ mu_T
    y_true = prepared.test.target
    coef = project_back(mu_T, prepared.transform) if zca else mu_T
    metrics = {"pearson": pearson(y_true, y_pred), "mse": mse(y_true, y_pred)}
    for i, c in enumerate(coef):
        metrics[f"coef_{i}"] = float(c)
    return metrics


def weather_experiment(config: ExperimentConfig, out_dir) -> list[RunRecord]:
    """Learning, baseline, and frozen-mean runs for one preprocessing
    variant, with test metrics and prediction exports."""
    os.makedirs(out_dir, exist_ok=True)
    wp = config.weather
    prepared = prepare_weather_data(config, out_dir)
    # One pass over the training rows; the configured grid only supplies
    # the step size, the data supplies the horizon.
    config = replace(config, grid=weather_grid(prepared, config.grid.dt))
    variant = "zca" if wp.zca else "std"
    label = (config.label or config.task) + "_" + variant

    records = run_many(config, "learn", prepared=prepared)
    baselines = run_many(config, "baseline", prepared=prepared)
    frozen_records = []
    for lr in records:
        fr = run(frozen_mean_config(config, lr.mu_T), lr.seed, prepared=prepared)
        fr.mode = "frozen_mean"
        frozen_records.append(fr)

    files = []
    test = prepared.test_whitened if wp.zca else prepared.test
    all_records = records + baselines + frozen_records
    for r in all_records:
        r.metrics.update(evaluate_weather(r, prepared, wp.zca))
        name = run_filename(label, r.mode, r.seed)
        write_run_csv(r, os.path.join(out_dir, name))
        files.append(name)

    pred_name = f"predictions_{variant}.csv"
    y_pred = test.features @ records[0].mu_T
    with open(os.path.join(out_dir, pred_name), "w", newline="") as fh:
        fh.write("y_true,y_pred\n")
        for yt, yp in zip(prepared.test.target, y_pred):
            fh.write("%.17g,%.17g\n" % (yt, yp))
    files.append(pred_name)

    write_summary_csv(all_records, os.path.join(out_dir, f"summary_{variant}.csv"))
    files.append(f"summary_{variant}.csv")
    write_manifest(config, out_dir, files, extra={"variant": variant})
    return all_records


# ---------------------------------------------------------------------------
# sweeps

SWEEPABLE = ("lam", "sigma", "eta", "rho")
_SWEEP_ALIASES = {"lambda": "lam", "lam": "lam", "sigma": "sigma", "eta": "eta", "rho": "rho"}


def default_sweep_values(center: float, n_points: int = 12) -> np.ndarray:
    """Log grid spanning a decade each way around the chosen value."""
    return np.geomspace(center / 10.0, center * 10.0, n_points)


def _with_hp(config: ExperimentConfig, param: str, value: float) -> ExperimentConfig:
    hp = config.hp
    if param == "lam":
        new = Hyperparams(lam=value, eta=hp.eta, rho=hp.rho, sigma=hp.sigma)
    elif param == "eta":
        new = Hyperparams(lam=hp.lam, eta=value, rho=hp.rho, sigma=hp.sigma)
    elif param == "rho":
        new = Hyperparams(lam=hp.lam, eta=hp.eta, rho=value, sigma=hp.sigma)
    elif param == "sigma":
        new = Hyperparams(lam=hp.lam, eta=hp.eta, rho=hp.rho, sigma=np.full(hp.n, value))
    else:
        raise ConfigError([f"cannot sweep {param!r}; choices: {SWEEPABLE}"])
    return replace(config, hp=new)


@dataclass
class SweepResult:
    param: str
    values: np.ndarray
    g_matrix: np.ndarray  # (n_values, n_seeds)
    seeds: tuple[int, ...]
    reference: float  # seed-mean G_T without learning

    @property
    def mean(self) -> np.ndarray:
        return self.g_matrix.mean(axis=1)

    @property
    def lo(self) -> np.ndarray:
        return self.g_matrix.min(axis=1)

    @property
    def hi(self) -> np.ndarray:
        return self.g_matrix.max(axis=1)


def sweep(
    config: ExperimentConfig,
    param: str,
    values=None,
    seeds: tuple[int, ...] | None = None,
) -> SweepResult:
    """Mean G(T) with min-max spread per hyper-parameter value, plus the
    no-learning reference level."""
    try:
        param = _SWEEP_ALIASES[param.strip()]
    except KeyError:
        raise ConfigError([f"cannot sweep {param!r}; choices: {SWEEPABLE}"])
    seeds = config.seeds if seeds is None else tuple(seeds)
    if values is None:
        center = {"lam": config.hp.lam, "eta": config.hp.eta, "rho": config.hp.rho}.get(
            param, float(config.hp.sigma[0])
        )
        values = default_sweep_values(center)
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        raise ConfigError(["sweep needs a non-empty value list"])

    jobs = [(i, v, s) for i, v in enumerate(values) for s in seeds]
    g = np.empty((values.size, len(seeds)))
    seed_pos = {s: j for j, s in enumerate(seeds)}

    def one(job):
        i, v, s = job
        return i, s, run(_with_hp(config, param, v), s).G_T

    with ThreadPoolExecutor(max_workers=_worker_count(len(jobs))) as pool:
        for i, s, g_t in pool.map(one, jobs):
            g[i, seed_pos[s]] = g_t

    baselines = run_many(config, "baseline", seeds=seeds)
    reference = float(np.mean([r.G_T for r in baselines]))
    return SweepResult(param=param, values=values, g_matrix=g, seeds=seeds, reference=reference)


def write_sweep_csv(result: SweepResult, out_dir) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    rows_name = f"sweep_{result.param}.csv"
    with open(os.path.join(out_dir, rows_name), "w", newline="") as fh:
        fh.write("value,seed,G_T\n")
        for i, v in enumerate(result.values):
            for j, s in enumerate(result.seeds):
                fh.write("%.17g,%d,%.17g\n" % (v, s, result.g_matrix[i, j]))
    summary_name = f"sweep_summary_{result.param}.csv"
    with open(os.path.join(out_dir, summary_name), "w", newline="") as fh:
        fh.write("value,mean_G,min_G,max_G,reference\n")
        for i, v in enumerate(result.values):
            fh.write(
                "%.17g,%.17g,%.17g,%.17g,%.17g\n"
                % (v, result.mean[i], result.lo[i], result.hi[i], result.reference)
            )
    return [rows_name, summary_name]
