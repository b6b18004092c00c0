"""Panel planning and drawing.

Planning is pure bookkeeping: it decides the panels and the file/column
behind every curve, which is what ``--list`` prints. Drawing renders the
same plan. Both only read the results directory.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")  # static batch output, never a display
import matplotlib.pyplot as plt
import numpy as np

from .loading import (
    FigureError,
    load_manifest,
    scan_predictions,
    scan_runs,
    scan_sweeps,
)

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8")


@dataclass(frozen=True)
class FigureSpec:
    figure: str
    results_dir: str
    out: str | None = None
    panels: tuple[str, ...] | None = None  # panel titles; None means all


@dataclass
class Curve:
    file: str
    column: str
    x: np.ndarray
    y: np.ndarray
    dashed: bool = False
    label: str | None = None


@dataclass
class Panel:
    title: str
    curves: list[Curve] = field(default_factory=list)
    kind: str = "series"  # series | scatter | sweep
    symlog: bool = False
    zero_line: bool = False
    reference: float | None = None
    logx: bool = False
    xlabel: str = "t"
    ylabel: str = ""


def _series_panel(title, runs, columns, ylabel="", **kwargs) -> Panel:
    curves = []
    for run in runs:
        for column in columns:
            curves.append(
                Curve(
                    file=run.file,
                    column=column,
                    x=run.times,
                    y=run.column(column),
                    dashed=run.mode != "learn",
                    label=f"seed {run.seed}" if run.mode == "learn" else run.mode,
                )
            )
    return Panel(title=title, curves=curves, ylabel=ylabel, **kwargs)


def _plan_trajectories(spec: FigureSpec) -> list[Panel]:
    runs = scan_runs(spec.results_dir)
    learn = [r for r in runs if r.mode == "learn"]
    if not learn:
        raise FigureError(
            f"no run CSVs in {spec.results_dir}; expected files like "
            f"run_{spec.figure}_0.csv and run_{spec.figure}_baseline_0.csv"
        )
    first = learn[0]
    panels = []

    state_columns = [c for c in ("s0", "s1", "z0") if c in first.header]
    if state_columns:
        panels.append(_series_panel("state", learn, state_columns, ylabel="s"))
    panels.append(
        _series_panel("parameters", learn, first.component_columns("theta"), ylabel="theta")
    )
    panels.append(_series_panel("means", learn, first.component_columns("mu"), ylabel="mu"))
    if "sigma" in first.header:
        manifest = load_manifest(spec.results_dir)
        sigma0 = manifest.get("config", {}).get("meta", {}).get("sigma0")
        panels.append(
            _series_panel("exploration", learn, ["sigma"], ylabel="sigma", reference=sigma0)
        )
    panels.append(_series_panel("average reward", learn, ["rbar"], ylabel="rbar"))
    panels.append(
        _series_panel(
            "prediction error", learn, ["delta"], ylabel="delta", symlog=True, zero_line=True
        )
    )
    panels.append(_series_panel("return", runs, ["G"], ylabel="G"))
    return panels


def _plan_sweeps(spec: FigureSpec) -> list[Panel]:
    sweeps = scan_sweeps(spec.results_dir)
    if not sweeps:
        raise FigureError(
            f"no sweep summaries in {spec.results_dir}; expected files like "
            "sweep_summary_lam.csv with columns value,mean_G,min_G,max_G,reference"
        )
    panels = []
    for param, data in sweeps.items():
        curves = [
            Curve(data["file"], "mean_G", data["value"], data["mean_G"], label="mean"),
            Curve(data["file"], "min_G", data["value"], data["min_G"], dashed=True, label="min"),
            Curve(data["file"], "max_G", data["value"], data["max_G"], dashed=True, label="max"),
        ]
        panels.append(
            Panel(
                title=f"sweep {param}",
                curves=curves,
                kind="sweep",
                reference=float(data["reference"][0]),
                logx=True,
                xlabel=param,
                ylabel="G(T)",
            )
        )
    return panels


def _plan_forecast(spec: FigureSpec) -> list[Panel]:
    predictions = scan_predictions(spec.results_dir)
    if not predictions:
        raise FigureError(
            f"no prediction CSVs in {spec.results_dir}; expected "
            "predictions_zca.csv or predictions_std.csv with columns y_true,y_pred"
        )
    panels = []
    for variant in sorted(predictions, reverse=True):  # zca before std
        data = predictions[variant]
        panels.append(
            Panel(
                title=f"predicted vs true ({variant})",
                curves=[Curve(data["file"], "y_pred", data["y_true"], data["y_pred"])],
                kind="scatter",
                xlabel="true",
                ylabel="predicted",
            )
        )
    runs = scan_runs(spec.results_dir)
    learn = [r for r in runs if r.mode == "learn"]
    if learn:
        panels.append(
            _series_panel("means", learn, learn[0].component_columns("mu"), ylabel="mu")
        )
        panels.append(_series_panel("return", runs, ["G"], ylabel="G"))
    return panels


def plan(spec: FigureSpec) -> list[Panel]:
    if spec.figure not in FIGURES:
        raise FigureError(f"unknown figure {spec.figure!r}; choices: {FIGURES}")
    if not os.path.isdir(spec.results_dir):
        raise FigureError(f"results directory not found: {spec.results_dir}")
    if spec.figure == "fig3":
        panels = _plan_sweeps(spec)
    elif spec.figure == "fig6":
        panels = _plan_forecast(spec)
    else:
        panels = _plan_trajectories(spec)
    if spec.panels is not None:
        chosen = [p for p in panels if p.title in spec.panels]
        if not chosen:
            have = [p.title for p in panels]
            raise FigureError(f"no panel matches {list(spec.panels)}; have {have}")
        panels = chosen
    return panels


def series_map(panels: list[Panel]) -> list[str]:
    """One line per plotted series: panel, file, column."""
    lines = []
    for panel in panels:
        for curve in panel.curves:
            suffix = " (dashed)" if curve.dashed else ""
            lines.append(f"{panel.title}: {curve.file}::{curve.column}{suffix}")
    return lines


def _draw_panel(ax, panel: Panel) -> None:
    if panel.kind == "scatter":
        for curve in panel.curves:
            ax.plot(curve.x, curve.y, ".", markersize=2.5, alpha=0.5)
            lo = min(curve.x.min(), curve.y.min())
            hi = max(curve.x.max(), curve.y.max())
            ax.plot([lo, hi], [lo, hi], linestyle=":", color="black", linewidth=1.0)
    else:
        for curve in panel.curves:
            ax.plot(
                curve.x,
                curve.y,
                linestyle="--" if curve.dashed else "-",
                linewidth=1.0,
                alpha=0.85,
                label=curve.label,
            )
        if panel.symlog:
            ax.set_yscale("symlog", linthresh=1e-3)
        if panel.zero_line:
            ax.axhline(0.0, linestyle=":", color="black", linewidth=0.8)
        if panel.reference is not None:
            ax.axhline(panel.reference, linestyle=":", color="gray", linewidth=0.8)
        if panel.logx:
            ax.set_xscale("log")
    ax.set_title(panel.title, fontsize=10)
    ax.set_xlabel(panel.xlabel, fontsize=9)
    ax.set_ylabel(panel.ylabel, fontsize=9)
    ax.tick_params(labelsize=8)


def build(panels: list[Panel]):
    """Assemble the multi-panel figure for an already-computed plan."""
    n = len(panels)
    ncols = min(3, n)
    nrows = math.ceil(n / ncols)
    fig, axes = plt.subplots(
        nrows,
        ncols,
        figsize=(4.2 * ncols, 3.2 * nrows),
        squeeze=False,
        constrained_layout=True,
    )
    flat = axes.ravel()
    for ax in flat[n:]:
        ax.set_visible(False)
    for ax, panel in zip(flat, panels):
        _draw_panel(ax, panel)
    return fig


def render(spec: FigureSpec) -> str:
    """Plan, draw, and save; returns the written path."""
    if spec.out is None:
        raise FigureError("an output path is required to render")
    panels = plan(spec)
    fig = build(panels)
    try:
        fig.savefig(spec.out, dpi=150)
    finally:
        plt.close(fig)
    return spec.out
