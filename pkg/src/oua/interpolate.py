"""Cubic Hermite interpolation of sampled input signals.

Knot slopes are backward differences, ``(v[i] - v[i-1]) / (t[i] - t[i-1])``;
the first knot copies the second knot's slope since its own backward
difference is undefined. The interpolant is C1, exact at the knots, and
never extrapolates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SampledSignal:
    """A vector signal known at strictly increasing sample instants."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or len(times) < 2:
            raise ValueError("signal needs at least 2 samples")
        if values.shape[0] != times.shape[0]:
            raise ValueError("times and values must have matching lengths")
        if not np.all(np.diff(times) > 0):
            raise ValueError("sample times must be strictly increasing")
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(times)):
            raise ValueError("signal samples must be finite")

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def slopes(self) -> np.ndarray:
        """Backward-difference knot slopes, shape (n_samples, dim)."""
        dv = np.diff(self.values, axis=0)
        dt = np.diff(self.times)[:, None]
        m = np.empty_like(self.values)
        m[1:] = dv / dt
        m[0] = m[1]
        return m


def hermite_interpolate(signal: SampledSignal, t: float) -> np.ndarray:
    """Evaluate the interpolant at ``t`` within the sampled range."""
    times = signal.times
    if t < times[0] or t > times[-1]:
        raise ValueError(
            f"query t={t} outside sample range [{times[0]}, {times[-1]}]; no extrapolation"
        )
    # Right-open segments so a query at a knot returns the sample exactly.
    k = int(np.searchsorted(times, t, side="right") - 1)
    if k >= len(times) - 1:
        return signal.values[-1].copy()
    m = signal.slopes()
    h = times[k + 1] - times[k]
    s = (t - times[k]) / h
    s2 = s * s
    s3 = s2 * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h10 = s3 - 2.0 * s2 + s
    h01 = -2.0 * s3 + 3.0 * s2
    h11 = s3 - s2
    return (
        h00 * signal.values[k]
        + h10 * h * m[k]
        + h01 * signal.values[k + 1]
        + h11 * h * m[k + 1]
    )


def hermite_series(signal: SampledSignal, query_times: np.ndarray) -> np.ndarray:
    """Evaluate at many instants at once; shape (len(query_times), dim)."""
    query_times = np.asarray(query_times, dtype=float)
    times = signal.times
    if query_times.min() < times[0] or query_times.max() > times[-1]:
        raise ValueError("query times outside sample range; no extrapolation")
    m = signal.slopes()
    k = np.clip(np.searchsorted(times, query_times, side="right") - 1, 0, len(times) - 2)
    h = (times[k + 1] - times[k])[:, None]
    s = ((query_times - times[k]) / (times[k + 1] - times[k]))[:, None]
    s2 = s * s
    s3 = s2 * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h10 = s3 - 2.0 * s2 + s
    h01 = -2.0 * s3 + 3.0 * s2
    h11 = s3 - s2
    return h00 * signal.values[k] + h10 * h * m[k] + h01 * signal.values[k + 1] + h11 * h * m[k + 1]
