"""Config files: TOML with one section per concern, applied on top of a
named base task.

A config names its base with ``task = "fig5"`` (a preset) or a raw task
id; every other key refines that base. Overrides from the command line
(``--set hyperparams.eta=50``) edit the parsed tree before validation, so
they are indistinguishable from editing the file. Validation reports all
problems at once, each naming the offending key.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .dynamics import Hyperparams
from .errors import ConfigError
from .harness import TASKS, ExperimentConfig, MetaParams, SdiParams, WeatherParams
from .presets import PRESET_NAMES, preset
from .sde import TimeGrid

SECTIONS = {
    "grid": {"t0", "t_end", "dt"},
    "hyperparams": {"lam", "eta", "rho", "sigma"},
    "initial": {"theta0", "mu0", "rbar0", "z0", "theta0_scale"},
    "target": {"theta_star", "theta_star_2", "t_switch"},
    "meta": {"lam_sigma", "eta_sigma", "sigma0", "mu_sigma0", "meta_diffusion", "sigma_floor"},
    "sdi": {"gamma", "alpha", "beta"},
    "weather": {"path", "zca", "train_fraction", "horizon", "synthetic_rows", "synthetic_seed"},
    "run": {"seeds", "record_stride", "label", "model"},
}
TOP_LEVEL_KEYS = {"task"} | set(SECTIONS)

# Key names are unique across sections, so a bare override like eta=50
# can be routed to the section that owns it.
_KEY_OWNER = {key: section for section, keys in SECTIONS.items() for key in keys}


def load_config_file(path) -> dict:
    """Parse the TOML file; missing file or syntax errors become config
    errors (exit code 1 at the CLI)."""
    if not os.path.exists(path):
        raise ConfigError([f"config file not found: {path}"])
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError([f"config file {path} is not valid TOML: {exc}"])


def parse_seeds(value) -> tuple[int, ...]:
    """Seed lists come as ints, lists, or 'a..b' ranges."""
    if isinstance(value, int):
        return (value,)
    if isinstance(value, str):
        text = value.strip()
        if ".." in text:
            lo, _, hi = text.partition("..")
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(p) for p in text.split(",") if p.strip())
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value)
    raise ValueError(f"cannot read seeds from {value!r}")


def apply_overrides(tree: dict, overrides: list[str]) -> dict:
    """Apply ``section.key=value`` (or ``task=...``) edits to the parsed
    tree. Bare keys route to the section that owns them, so ``eta=50``
    and ``hyperparams.eta=50`` are the same edit. Values are parsed as
    TOML literals, falling back to strings."""
    problems = []
    tree = {k: (dict(v) if isinstance(v, dict) else v) for k, v in tree.items()}
    for item in overrides:
        key, sep, raw_value = item.partition("=")
        key = key.strip()
        if not sep:
            problems.append(f"override {item!r} is not of the form key=value")
            continue
        try:
            value = tomllib.loads(f"v = {raw_value.strip()}")["v"]
        except tomllib.TOMLDecodeError:
            value = raw_value.strip()
        parts = key.split(".")
        if len(parts) == 1:
            if parts[0] == "task":
                tree["task"] = value
            elif parts[0] in _KEY_OWNER:
                tree.setdefault(_KEY_OWNER[parts[0]], {})[parts[0]] = value
            else:
                problems.append(f"override names unknown key {key!r}")
        elif len(parts) == 2:
            section, name = parts
            if section not in SECTIONS:
                problems.append(f"override names unknown section {section!r}")
            elif name not in SECTIONS[section]:
                problems.append(f"override names unknown key {key!r}")
            else:
                tree.setdefault(section, {})[name] = value
        else:
            problems.append(f"override key {key!r} nests too deep")
    if problems:
        raise ConfigError(problems)
    return tree


def _vector(value, problems, key) -> np.ndarray | None:
    try:
        arr = np.atleast_1d(np.asarray(value, dtype=float))
    except (TypeError, ValueError):
        problems.append(f"{key} must be a number or list of numbers")
        return None
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        problems.append(f"{key} must be a finite vector")
        return None
    return arr


def _number(value, problems, key, minimum=None, strict=False) -> float | None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{key} must be a number")
        return None
    v = float(value)
    if minimum is not None and (v <= minimum if strict else v < minimum):
        bound = ">" if strict else ">="
        problems.append(f"{key} must be {bound} {minimum}")
        return None
    return v


def validate_config(tree: dict) -> ExperimentConfig:
    """Normalize the parsed tree into an ExperimentConfig.

    All violations are gathered and raised together.
    """
    problems: list[str] = []
    unknown = sorted(set(tree) - TOP_LEVEL_KEYS)
    for key in unknown:
        problems.append(f"unknown key {key!r}")
    for section, keys in SECTIONS.items():
        body = tree.get(section, {})
        if not isinstance(body, dict):
            problems.append(f"{section} must be a table")
            continue
        for key in sorted(set(body) - keys):
            problems.append(f"unknown key {section}.{key!r}")
    task = tree.get("task")
    if task is None:
        problems.append("task key is required (a preset name or task id)")
        raise ConfigError(problems)
    if task in PRESET_NAMES:
        base = preset(task)
    elif task in TASKS:
        base = _bare_task(task, tree, problems)
    else:
        problems.append(
            f"task {task!r} is not a preset {PRESET_NAMES} or task id {TASKS}"
        )
        raise ConfigError(problems)
    if base is None:
        raise ConfigError(problems)

    cfg = _merge(base, tree, problems)
    if not problems:
        _cross_check(cfg, problems)
    if problems:
        raise ConfigError(problems)
    return cfg


def _cross_check(cfg: ExperimentConfig, problems: list[str]) -> None:
    """Length and presence constraints that span sections."""
    n = cfg.n
    if cfg.theta0.shape[0] != n:
        problems.append(f"initial.theta0 has length {cfg.theta0.shape[0]}, expected {n}")
    if cfg.mu0.shape[0] != n:
        problems.append(f"initial.mu0 has length {cfg.mu0.shape[0]}, expected {n}")
    if cfg.task in ("tracking", "ctrnn", "meta"):
        if cfg.theta_star is None:
            problems.append(f"target.theta_star is required for task {cfg.task!r}")
        elif cfg.theta_star.shape[0] != n:
            problems.append(
                f"target.theta_star has length {cfg.theta_star.shape[0]}, expected {n}"
            )
    if cfg.theta_star_2 is not None and cfg.theta_star_2.shape[0] != n:
        problems.append(
            f"target.theta_star_2 has length {cfg.theta_star_2.shape[0]}, expected {n}"
        )
    if np.isfinite(cfg.t_switch) and cfg.theta_star_2 is None:
        problems.append("target.t_switch set without target.theta_star_2")
    if cfg.task == "ctrnn" and n != 3:
        problems.append(f"ctrnn task uses 3 parameters, got {n}")
    if cfg.task == "sdi":
        if cfg.sdi is None:
            problems.append("[sdi] section is required for task 'sdi'")
        if n != 2:
            problems.append(f"sdi task uses 2 parameters, got {n}")
    if cfg.task == "meta" and cfg.meta is None:
        problems.append("[meta] section is required for task 'meta'")
    if cfg.task == "weather" and cfg.weather is None:
        problems.append("[weather] section is required for task 'weather'")
    if cfg.grid.n_steps < 1:
        problems.append("grid must span at least one step")


def _bare_task(task: str, tree: dict, problems: list[str]) -> ExperimentConfig | None:
    """A raw task id needs its defining pieces spelled out."""
    init = tree.get("initial", {})
    target = tree.get("target", {})
    needs = []
    if "theta0" not in init:
        needs.append("initial.theta0")
    if task in ("tracking", "ctrnn", "meta") and "theta_star" not in target:
        needs.append("target.theta_star")
    if task == "sdi" and "sdi" not in tree:
        needs.append("[sdi] section")
    if task == "weather" and "weather" not in tree:
        needs.append("[weather] section")
    if task == "meta" and "meta" not in tree:
        needs.append("[meta] section")
    if needs:
        problems.append(f"task {task!r} requires: " + ", ".join(needs))
        return None
    theta0 = _vector(init["theta0"], problems, "initial.theta0")
    if theta0 is None:
        return None
    n = theta0.shape[0]
    model = tree.get("run", {}).get(
        "model", {"tracking": "tanh", "ctrnn": "ctrnn", "meta": "tanh"}.get(task, "linear")
    )
    return ExperimentConfig(
        task=task,
        model=model,
        grid=TimeGrid(0.0, 100.0, 0.05),
        hp=Hyperparams.isotropic(lam=1.0, eta=1.0, rho=1.0, sigma=0.1, n=n),
        theta0=theta0,
        mu0=theta0.copy(),
        rbar0=0.0,
        theta_star=_vector(target["theta_star"], problems, "target.theta_star")
        if "theta_star" in target
        else None,
        label=task,
    )


def _merge(base: ExperimentConfig, tree: dict, problems: list[str]) -> ExperimentConfig:
    from dataclasses import replace

    cfg = base

    g = tree.get("grid", {})
    if g:
        t0 = _number(g.get("t0", cfg.grid.t0), problems, "grid.t0")
        t_end = _number(g.get("t_end", cfg.grid.t_end), problems, "grid.t_end")
        dt = _number(g.get("dt", cfg.grid.dt), problems, "grid.dt", minimum=0, strict=True)
        if None not in (t0, t_end, dt):
            if t_end <= t0:
                problems.append("grid.t_end must be > grid.t0")
            else:
                try:
                    cfg = replace(cfg, grid=TimeGrid(t0, t_end, dt))
                except ValueError as exc:
                    problems.append(f"grid: {exc}")

    h = tree.get("hyperparams", {})
    if h:
        lam = _number(h.get("lam", cfg.hp.lam), problems, "hyperparams.lam", minimum=0)
        eta = _number(h.get("eta", cfg.hp.eta), problems, "hyperparams.eta", minimum=0)
        rho = _number(h.get("rho", cfg.hp.rho), problems, "hyperparams.rho", minimum=0)
        sigma = cfg.hp.sigma
        if "sigma" in h:
            sigma = _vector(h["sigma"], problems, "hyperparams.sigma")
            if sigma is not None and np.any(sigma < 0):
                problems.append("hyperparams.sigma must be >= 0")
                sigma = None
        if None not in (lam, eta, rho) and sigma is not None:
            if sigma.shape[0] == 1 and cfg.n > 1:
                sigma = np.full(cfg.n, sigma[0])
            if sigma.shape[0] != cfg.n:
                problems.append(
                    f"hyperparams.sigma has length {sigma.shape[0]}, expected {cfg.n}"
                )
            else:
                cfg = replace(cfg, hp=Hyperparams(lam=lam, eta=eta, rho=rho, sigma=sigma))

    init = tree.get("initial", {})
    if init:
        updates = {}
        if "theta0" in init:
            v = _vector(init["theta0"], problems, "initial.theta0")
            if v is not None:
                updates["theta0"] = v
        if "mu0" in init:
            v = _vector(init["mu0"], problems, "initial.mu0")
            if v is not None:
                updates["mu0"] = v
        if "rbar0" in init:
            v = _number(init["rbar0"], problems, "initial.rbar0")
            if v is not None:
                updates["rbar0"] = v
        if "z0" in init:
            v = _number(init["z0"], problems, "initial.z0")
            if v is not None:
                updates["z0"] = v
        if "theta0_scale" in init:
            v = _number(init["theta0_scale"], problems, "initial.theta0_scale", minimum=0)
            updates["theta0_scale"] = v
        if updates:
            cfg = replace(cfg, **updates)

    target = tree.get("target", {})
    if target:
        updates = {}
        if "theta_star" in target:
            v = _vector(target["theta_star"], problems, "target.theta_star")
            if v is not None:
                updates["theta_star"] = v
        if "theta_star_2" in target:
            v = _vector(target["theta_star_2"], problems, "target.theta_star_2")
            if v is not None:
                updates["theta_star_2"] = v
        if "t_switch" in target:
            v = _number(target["t_switch"], problems, "target.t_switch")
            if v is not None:
                updates["t_switch"] = v
        if updates:
            cfg = replace(cfg, **updates)

    m = tree.get("meta", {})
    if m:
        # Fresh meta sections inherit the diffusion scale from rho unless
        # the key is given; presets carry their own explicit value.
        old = cfg.meta or MetaParams(2.0, 3.0, 0.15, 0.15, cfg.hp.rho)
        vals = {}
        for key, default in (
            ("lam_sigma", old.lam_sigma),
            ("eta_sigma", old.eta_sigma),
            ("sigma0", old.sigma0),
            ("mu_sigma0", old.mu_sigma0),
            ("meta_diffusion", old.meta_diffusion),
            ("sigma_floor", old.sigma_floor),
        ):
            v = _number(m.get(key, default), problems, f"meta.{key}")
            vals[key] = v if v is not None else default
        cfg = replace(cfg, meta=MetaParams(**vals))

    s = tree.get("sdi", {})
    if s:
        old = cfg.sdi or SdiParams(0.01, 0.005, 0.005)
        vals = {}
        for key, default in (("gamma", old.gamma), ("alpha", old.alpha), ("beta", old.beta)):
            v = _number(s.get(key, default), problems, f"sdi.{key}", minimum=0)
            vals[key] = v if v is not None else default
        cfg = replace(cfg, sdi=SdiParams(**vals))

    w = tree.get("weather", {})
    if w:
        old = cfg.weather or WeatherParams()
        frac = _number(
            w.get("train_fraction", old.train_fraction), problems, "weather.train_fraction"
        )
        if frac is not None and not 0.0 < frac < 1.0:
            problems.append("weather.train_fraction must be in (0, 1)")
        zca = w.get("zca", old.zca)
        if not isinstance(zca, bool):
            problems.append("weather.zca must be a boolean")
            zca = old.zca
        cfg = replace(
            cfg,
            weather=WeatherParams(
                path=w.get("path", old.path),
                zca=zca,
                train_fraction=frac if frac is not None else old.train_fraction,
                horizon=int(w.get("horizon", old.horizon)),
                synthetic_rows=w.get("synthetic_rows", old.synthetic_rows),
                synthetic_seed=int(w.get("synthetic_seed", old.synthetic_seed)),
            ),
        )

    r = tree.get("run", {})
    if r:
        updates = {}
        if "seeds" in r:
            try:
                seeds = parse_seeds(r["seeds"])
                if not seeds:
                    problems.append("run.seeds must be non-empty")
                else:
                    updates["seeds"] = seeds
            except (ValueError, TypeError):
                problems.append(f"run.seeds cannot be read from {r['seeds']!r}")
        if "record_stride" in r:
            stride = r["record_stride"]
            if not isinstance(stride, int) or stride < 1:
                problems.append("run.record_stride must be an integer >= 1")
            else:
                updates["record_stride"] = stride
        if "label" in r:
            updates["label"] = str(r["label"])
        if "model" in r:
            updates["model"] = str(r["model"])
        if updates:
            cfg = replace(cfg, **updates)

    return cfg


def load_experiment(
    path,
    overrides: list[str] | None = None,
    seeds: tuple[int, ...] | None = None,
) -> ExperimentConfig:
    """File + overrides + optional explicit seeds -> validated config.

    Seed precedence: explicit argument, then config file, then the
    OUA_SEED environment variable, then the base default.
    """
    tree = load_config_file(path)
    if overrides:
        tree = apply_overrides(tree, overrides)
    cfg = validate_config(tree)
    if seeds is not None:
        from dataclasses import replace

        cfg = replace(cfg, seeds=tuple(seeds))
    elif "seeds" not in tree.get("run", {}) and os.environ.get("OUA_SEED", "").strip():
        from dataclasses import replace

        cfg = replace(cfg, seeds=parse_seeds(os.environ["OUA_SEED"]))
    return cfg
