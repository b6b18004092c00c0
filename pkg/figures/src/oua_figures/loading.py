"""Readers for the result directory layout.

Run CSVs are named ``run_<label>[_<mode>]_<seed>.csv`` and hold a ``t``
column plus named state columns; sweeps summarize as
``sweep_summary_<param>.csv``; forecasting exports
``predictions_<variant>.csv``; ``manifest.json`` echoes the producing
configuration. Nothing else is assumed about the producer.
"""

from __future__ import annotations

import csv
import json
import os
import re
from dataclasses import dataclass

import numpy as np

RUN_NAME = re.compile(
    r"run_(?P<label>.+?)(?:_(?P<mode>baseline|frozen_mean|fixed_sigma))?_(?P<seed>\d+)\.csv$"
)
SWEEP_NAME = re.compile(r"sweep_summary_(?P<param>\w+)\.csv$")
PREDICTIONS_NAME = re.compile(r"predictions_(?P<variant>\w+)\.csv$")


class FigureError(Exception):
    """The results directory does not hold what the figure needs."""


@dataclass(frozen=True)
class RunSeries:
    """One run CSV: a time column plus named state columns."""

    file: str
    label: str
    mode: str
    seed: int
    header: tuple[str, ...]
    table: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.table[:, 0]

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.header.index(name)
        except ValueError:
            raise FigureError(
                f"{self.file} has no column {name!r}; columns: {list(self.header)}"
            )
        return self.table[:, j]

    def component_columns(self, prefix: str) -> list[str]:
        # theta0, theta1, ... but never theta-adjacent names like mu_sigma.
        return [name for name in self.header if re.fullmatch(prefix + r"\d+", name)]


def read_table(path) -> tuple[tuple[str, ...], np.ndarray]:
    name = os.path.basename(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FigureError(f"{name} is empty")
        try:
            rows = [[float(v) for v in row] for row in reader if row]
        except ValueError as exc:
            raise FigureError(f"{name} has a non-numeric cell: {exc}")
    if not rows:
        raise FigureError(f"{name} has a header but no data rows")
    return tuple(header), np.array(rows, dtype=float)


def scan_runs(results_dir) -> list[RunSeries]:
    runs = []
    for name in sorted(os.listdir(results_dir)):
        match = RUN_NAME.match(name)
        if not match:
            continue
        header, table = read_table(os.path.join(results_dir, name))
        runs.append(
            RunSeries(
                file=name,
                label=match["label"],
                mode=match["mode"] or "learn",
                seed=int(match["seed"]),
                header=header,
                table=table,
            )
        )
    runs.sort(key=lambda r: (r.mode, r.label, r.seed))
    return runs


def scan_sweeps(results_dir) -> dict[str, dict]:
    sweeps = {}
    for name in sorted(os.listdir(results_dir)):
        match = SWEEP_NAME.match(name)
        if not match:
            continue
        header, table = read_table(os.path.join(results_dir, name))
        sweeps[match["param"]] = {
            "file": name,
            **{column: table[:, j] for j, column in enumerate(header)},
        }
    return sweeps


def scan_predictions(results_dir) -> dict[str, dict]:
    predictions = {}
    for name in sorted(os.listdir(results_dir)):
        match = PREDICTIONS_NAME.match(name)
        if not match:
            continue
        header, table = read_table(os.path.join(results_dir, name))
        if "y_true" not in header or "y_pred" not in header:
            raise FigureError(f"{name} must have y_true and y_pred columns, has {list(header)}")
        predictions[match["variant"]] = {
            "file": name,
            "y_true": table[:, header.index("y_true")],
            "y_pred": table[:, header.index("y_pred")],
        }
    return predictions


def load_manifest(results_dir) -> dict:
    path = os.path.join(results_dir, "manifest.json")
    if not os.path.exists(path):
        return {}
    with open(path) as fh:
        return json.load(fh)
