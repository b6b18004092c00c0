#!/usr/bin/env python3
"""Wall-time comparison of the compiled and plain-numpy integration paths.

Each workload runs identical arithmetic through both backends; the
numbers differ only in dispatch (machine code vs interpreter loop).

    python benchmarks/compare_backends.py [--repeat N]
"""

import argparse
import tempfile
import time
from dataclasses import replace

from oua import _backend
from oua.harness import prepare_weather_data, run_many, weather_grid
from oua.presets import preset
from oua.sde import TimeGrid


def tracking(seeds=5):
    return replace(preset("fig2"), seeds=tuple(range(seeds))), None


def six_parameter():
    cfg = preset("fig5")
    return replace(cfg, grid=TimeGrid(0.0, 300.0, 0.05), seeds=(0, 1, 2)), None


def recurrent():
    return preset("fig4"), None  # the preset seed stays finite


def state_feedback():
    return preset("fig7"), None


def adaptive_noise():
    return replace(preset("fig8"), seeds=(4,)), None


def forecasting(workdir):
    cfg = preset("fig6")
    cfg = replace(cfg, weather=replace(cfg.weather, synthetic_rows=2000))
    prepared = prepare_weather_data(cfg, workdir)
    return replace(cfg, grid=weather_grid(prepared, cfg.grid.dt)), prepared


def time_workload(cfg, prepared, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        run_many(cfg, prepared=prepared)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3, help="timed repetitions per cell")
    args = parser.parse_args()

    try:
        _backend.set_backend("numba")
    except RuntimeError as exc:
        parser.exit(1, f"cannot benchmark: {exc}\n")

    with tempfile.TemporaryDirectory() as workdir:
        workloads = {
            "tracking (n=1, 5 seeds)": tracking(),
            "tracking (n=6, 3 seeds)": six_parameter(),
            "recurrent (n=3)": recurrent(),
            "state feedback (n=2)": state_feedback(),
            "adaptive noise": adaptive_noise(),
            "forecasting (2000 rows)": forecasting(workdir),
        }

        print(f"{'workload':<26} {'numpy':>9} {'numba':>9} {'speedup':>8}")
        for name, (cfg, prepared) in workloads.items():
            _backend.set_backend("numba")
            run_many(cfg, prepared=prepared)  # compile outside the timer
            jit = time_workload(cfg, prepared, args.repeat)
            _backend.set_backend("numpy")
            plain = time_workload(cfg, prepared, args.repeat)
            print(f"{name:<26} {plain:>8.3f}s {jit:>8.3f}s {plain / jit:>7.1f}x")


if __name__ == "__main__":
    main()
