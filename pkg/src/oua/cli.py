"""Command-line entry point.

Thin sequential shell over the harness: parse, validate, run, report.
Exit codes: 0 success, 1 configuration problem, 2 data problem,
3 numerical failure. Parallelism lives in the harness, not here.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import harness
from .config import apply_overrides, load_config_file, parse_seeds, validate_config
from .errors import ConfigError, DataError, IntegrationError
from .harness import experiment, sweep, weather_experiment, write_sweep_csv
from .presets import PRESET_NAMES
from .weather import load_weather, remove_outliers


def _add_common(parser: argparse.ArgumentParser, default_preset: str | None = None):
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument(
        "--preset",
        choices=PRESET_NAMES,
        default=default_preset,
        help="built-in experiment preset used when no config file is given",
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key (repeatable), e.g. --set hyperparams.eta=50",
    )
    parser.add_argument(
        "--output-dir", default="./results", help="where result files go (default ./results)"
    )
    parser.add_argument(
        "--seeds", help="seed list: '3', '0,2,5', or '0..14' (default: config, then OUA_SEED)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oua",
        description="Reward-modulated Ornstein-Uhlenbeck learning experiments.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_run = sub.add_parser("run", help="run an experiment (learning + baseline)")
    _add_common(p_run)
    p_run.add_argument("--no-baseline", action="store_true", help="skip the baseline runs")
    p_run.add_argument(
        "--frozen-mean",
        action="store_true",
        help="add per-seed runs with parameters pinned at the learned mean",
    )

    p_sweep = sub.add_parser("sweep", help="sweep one hyperparameter over a log grid")
    _add_common(p_sweep)
    p_sweep.add_argument(
        "--param", required=True, help="hyperparameter to sweep: lambda, sigma, eta, or rho"
    )
    p_sweep.add_argument(
        "--values", help="comma-separated grid values (default: log grid around the config value)"
    )

    p_weather = sub.add_parser(
        "weather", help="temperature forecasting with and without whitening"
    )
    _add_common(p_weather, default_preset="fig6")
    p_weather.add_argument("--data", help="weather CSV path (default: synthesized corpus)")

    p_sdi = sub.add_parser("sdi", help="noisy double-integrator stabilization")
    _add_common(p_sdi, default_preset="fig7")

    p_meta = sub.add_parser("meta", help="tracking with self-adapted exploration noise")
    _add_common(p_meta, default_preset="fig8")

    p_val = sub.add_parser("validate-data", help="check a weather CSV and report cleaning stats")
    p_val.add_argument("--data", required=True, help="weather CSV path")

    return parser


def _resolve_config(args) -> harness.ExperimentConfig:
    """File or preset, then overrides, then validation, then seeds."""
    if args.config is not None:
        tree = load_config_file(args.config)
        if "task" not in tree and args.preset:
            tree["task"] = args.preset
    elif args.preset is not None:
        tree = {"task": args.preset}
    else:
        raise ConfigError(["one of --config or --preset is required"])
    if args.overrides:
        tree = apply_overrides(tree, args.overrides)
    cfg = validate_config(tree)

    from dataclasses import replace

    if args.seeds:
        cfg = replace(cfg, seeds=parse_seeds(args.seeds))
    elif "seeds" not in tree.get("run", {}) and os.environ.get("OUA_SEED", "").strip():
        cfg = replace(cfg, seeds=parse_seeds(os.environ["OUA_SEED"]))
    return cfg


def _seed_text(seeds) -> str:
    seeds = list(seeds)
    if len(seeds) > 2 and seeds == list(range(seeds[0], seeds[-1] + 1)):
        return f"{seeds[0]}..{seeds[-1]}"
    return ",".join(str(s) for s in seeds)


def _report(cfg, records) -> None:
    learn = [r for r in records if r.mode == "learn"] or records
    mean_g = float(np.mean([r.G_T for r in learn]))
    print(f"task={cfg.task} seeds={_seed_text(cfg.seeds)} mean_G_T={mean_g:.6g}")


def cmd_run(args) -> int:
    cfg = _resolve_config(args)
    if cfg.task == "weather":
        records = weather_experiment(cfg, args.output_dir)
    else:
        modes = ("learn",) if getattr(args, "no_baseline", False) else ("learn", "baseline")
        if cfg.task == "meta":
            modes = modes + ("fixed_sigma",)
        records = experiment(
            cfg, args.output_dir, modes=modes, frozen_mean=getattr(args, "frozen_mean", False)
        )
    _report(cfg, records)
    return 0


def cmd_sweep(args) -> int:
    cfg = _resolve_config(args)
    values = None
    if args.values:
        values = np.array([float(v) for v in args.values.split(",")], dtype=float)
    result = sweep(cfg, args.param, values=values)
    os.makedirs(args.output_dir, exist_ok=True)
    write_sweep_csv(result, args.output_dir)
    best = result.values[int(np.argmax(result.mean))]
    print(
        f"task={cfg.task} sweep={result.param} seeds={_seed_text(cfg.seeds)} "
        f"best_{result.param}={best:.6g} reference_G_T={result.reference:.6g}"
    )
    return 0


def cmd_weather(args) -> int:
    cfg = _resolve_config(args)
    from dataclasses import replace

    wp = cfg.weather
    if args.data:
        wp = replace(wp, path=args.data)
    # Same runs twice, differing only in the whitening stage.
    records = []
    for zca in (True, False):
        variant_cfg = replace(cfg, weather=replace(wp, zca=zca))
        records.extend(weather_experiment(variant_cfg, args.output_dir))
    learn = [r for r in records if r.mode == "learn"]
    zca_metrics = learn[0].metrics
    _report(cfg, records)
    print(
        f"zca: pearson={zca_metrics['pearson']:.4f} mse={zca_metrics['mse']:.4f}"
    )
    return 0


def cmd_validate_data(args) -> int:
    table = remove_outliers(load_weather(args.data))
    stats = table.cleaning_stats
    print(f"rows={table.features.shape[0]} " + " ".join(
        f"{k}={v}" for k, v in sorted(stats.items()) if not isinstance(v, dict)
    ))
    return 0


_DISPATCH = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "weather": cmd_weather,
    "sdi": cmd_run,
    "meta": cmd_run,
    "validate-data": cmd_validate_data,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.subcommand](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
