"""Weather data pipeline: ingestion, cleaning, whitening, targets.

Operates on the hourly Szeged, Hungary weather export (the public
``szeged-weather`` CSV schema). Six regressors are used: temperature,
humidity, wind speed, sine and cosine of the wind bearing, and pressure.
The prediction target is the temperature 24 rows (hours) ahead.

Downloading the dataset is out of scope; :func:`synthesize_weather_csv`
writes a schema-identical corpus with the same statistical character
(diurnal and seasonal cycles, persistent anomalies, correlated features,
and the export's known defects: duplicate timestamps, zero-pressure rows,
spikes) so the pipeline and the forecasting task can run offline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DataError

DATE_COLUMN = "Formatted Date"
RAW_COLUMNS = {
    "temperature": "Temperature (C)",
    "humidity": "Humidity",
    "wind_speed": "Wind Speed (km/h)",
    "wind_bearing": "Wind Bearing (degrees)",
    "pressure": "Pressure (millibars)",
}
FEATURE_NAMES = (
    "temperature",
    "humidity",
    "wind_speed",
    "wind_bearing_sin",
    "wind_bearing_cos",
    "pressure",
)
TEMPERATURE = 0
PRESSURE = 5
BEARING_SIN = 3
BEARING_COS = 4

TARGET_HORIZON = 24
UNPARSEABLE_FRACTION_LIMIT = 0.01
OUTLIER_SIGMA = 6.0
OUTLIER_FRACTION_LIMIT = 0.5
COVARIANCE_RIDGE = 1e-8


@dataclass(frozen=True)
class WeatherTable:
    """Cleaned hourly table: timestamps, feature matrix, optional target.

    Features are ordered as FEATURE_NAMES. ``target`` is the temperature
    TARGET_HORIZON rows ahead, present once attached by
    :func:`make_target`.
    """

    timestamps: np.ndarray
    features: np.ndarray
    target: np.ndarray | None = None
    cleaning_stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[1] != len(FEATURE_NAMES):
            raise ValueError(f"features must have {len(FEATURE_NAMES)} columns")
        if self.timestamps.shape[0] != self.features.shape[0]:
            raise ValueError("timestamps and features must have matching lengths")
        if self.target is not None and self.target.shape[0] != self.features.shape[0]:
            raise ValueError("target length must match features")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]


def _renormalize_bearing(features: np.ndarray) -> None:
    """Restore unit norm on the bearing components after interpolation."""
    s = features[:, BEARING_SIN]
    c = features[:, BEARING_COS]
    norm = np.hypot(s, c)
    degenerate = norm < 1e-12
    norm[degenerate] = 1.0
    features[degenerate, BEARING_SIN] = 0.0
    features[degenerate, BEARING_COS] = 1.0
    features[:, BEARING_SIN] = features[:, BEARING_SIN] / norm
    features[:, BEARING_COS] = features[:, BEARING_COS] / norm


def load_weather(path) -> WeatherTable:
    """Parse, sort, deduplicate, and regularize the raw export to an
    hourly grid.

    Duplicate timestamps keep the first occurrence. Rows whose date or
    values fail to parse are dropped, up to a 1% budget. Missing hours
    are filled by linear interpolation (bearing interpolated on its
    sine/cosine components, then renormalized).
    """
    try:
        raw = pd.read_csv(path)
    except FileNotFoundError:
        raise DataError(f"weather file not found: {path}")
    except pd.errors.EmptyDataError:
        raise DataError(f"weather file is empty: {path}")
    if raw.shape[0] == 0:
        raise DataError(f"weather file has no data rows: {path}")

    required = [DATE_COLUMN] + list(RAW_COLUMNS.values())
    missing = [c for c in required if c not in raw.columns]
    if missing:
        raise DataError("missing required columns: " + ", ".join(missing))

    stamps = pd.to_datetime(raw[DATE_COLUMN], utc=True, errors="coerce")
    numeric = {
        name: pd.to_numeric(raw[col], errors="coerce") for name, col in RAW_COLUMNS.items()
    }
    bad = stamps.isna()
    for series in numeric.values():
        bad |= series.isna()
    n_bad = int(bad.sum())
    if n_bad > UNPARSEABLE_FRACTION_LIMIT * raw.shape[0]:
        raise DataError(
            f"{n_bad} of {raw.shape[0]} rows unparseable, above the "
            f"{UNPARSEABLE_FRACTION_LIMIT:.0%} budget"
        )

    keep = (~bad).to_numpy()
    # Column vectors must be plain arrays: series would re-align on their
    # integer labels against the datetime index and come back all-NaN.
    cols = {name: series.to_numpy(dtype=float)[keep] for name, series in numeric.items()}
    bearing = np.deg2rad(cols.pop("wind_bearing"))
    frame = pd.DataFrame(
        {
            "temperature": cols["temperature"],
            "humidity": cols["humidity"],
            "wind_speed": cols["wind_speed"],
            "wind_bearing_sin": np.sin(bearing),
            "wind_bearing_cos": np.cos(bearing),
            "pressure": cols["pressure"],
        },
        index=pd.DatetimeIndex(stamps[keep]),
    )
    if frame.shape[0] == 0:
        raise DataError("no parseable rows")
    frame = frame.sort_index()
    n_duplicates = int(frame.index.duplicated(keep="first").sum())
    frame = frame[~frame.index.duplicated(keep="first")]

    hourly = pd.date_range(frame.index[0], frame.index[-1], freq="h")
    n_gaps = int(len(hourly) - frame.shape[0])
    # Rows not on the hourly lattice would silently vanish in reindex;
    # treat them as unparseable instead.
    off_grid = int((~frame.index.isin(hourly)).sum())
    if off_grid + n_bad > UNPARSEABLE_FRACTION_LIMIT * raw.shape[0]:
        raise DataError(f"{off_grid} rows off the hourly grid; file too irregular")
    frame = frame.reindex(hourly)
    frame = frame.interpolate(method="linear", limit_direction="both")

    features = frame.to_numpy(dtype=float)
    _renormalize_bearing(features)
    stats = {
        "rows_raw": int(raw.shape[0]),
        "rows_unparseable": n_bad,
        "rows_off_grid": off_grid,
        "duplicate_timestamps": n_duplicates,
        "hours_gap_filled": max(n_gaps + off_grid, 0),
        "rows": int(features.shape[0]),
    }
    return WeatherTable(
        timestamps=hourly.to_numpy(), features=features, cleaning_stats=stats
    )


def remove_outliers(table: WeatherTable) -> WeatherTable:
    """Replace outliers by linear interpolation between valid neighbors.

    A value is an outlier when pressure equals 0 exactly, or when any
    feature sits more than OUTLIER_SIGMA sample standard deviations from
    its column mean. Leading/trailing outliers take the nearest valid
    value. A column that is mostly outliers raises a data-quality error.
    """
    if table.n_rows == 0:
        raise DataError("empty table")
    features = table.features.copy()
    n = table.n_rows
    idx = np.arange(n)
    counts = {}
    for j, name in enumerate(FEATURE_NAMES):
        col = features[:, j]
        mean = col.mean()
        std = col.std(ddof=1) if n > 1 else 0.0
        mask = np.zeros(n, dtype=bool)
        if std > 0:
            mask |= np.abs(col - mean) > OUTLIER_SIGMA * std
        if j == PRESSURE:
            mask |= col == 0.0
        if mask.all() or mask.sum() > OUTLIER_FRACTION_LIMIT * n:
            raise DataError(
                f"feature {name!r} has {int(mask.sum())}/{n} outliers; data unusable"
            )
        if mask.any():
            col[mask] = np.interp(idx[mask], idx[~mask], col[~mask])
        counts[name] = int(mask.sum())
    _renormalize_bearing(features)
    stats = dict(table.cleaning_stats)
    stats["outliers_interpolated"] = counts
    return WeatherTable(
        timestamps=table.timestamps,
        features=features,
        target=table.target,
        cleaning_stats=stats,
    )


def make_target(table: WeatherTable, horizon: int = TARGET_HORIZON) -> WeatherTable:
    """Attach the temperature ``horizon`` rows ahead; drops the final
    ``horizon`` rows, which have no future observation."""
    if table.n_rows <= horizon:
        raise DataError(f"table has {table.n_rows} rows, need more than {horizon}")
    target = table.features[horizon:, TEMPERATURE].copy()
    return WeatherTable(
        timestamps=table.timestamps[:-horizon],
        features=table.features[:-horizon],
        target=target,
        cleaning_stats=table.cleaning_stats,
    )


def make_split(table: WeatherTable, train_fraction: float = 0.8) -> tuple[WeatherTable, WeatherTable]:
    """Chronological split: first floor(fraction*N) rows train, rest test."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    n_train = int(table.n_rows * train_fraction)
    if n_train == 0 or n_train == table.n_rows:
        raise DataError(
            f"split of {table.n_rows} rows at fraction {train_fraction} leaves one side empty"
        )

    def slice_table(sl):
        return WeatherTable(
            timestamps=table.timestamps[sl],
            features=table.features[sl],
            target=None if table.target is None else table.target[sl],
            cleaning_stats=table.cleaning_stats,
        )

    return slice_table(slice(0, n_train)), slice_table(slice(n_train, None))


@dataclass(frozen=True)
class StandardizeStats:
    """Per-feature and target location/scale, fitted on training rows only."""

    feature_mean: np.ndarray
    feature_std: np.ndarray
    target_mean: float
    target_std: float


def fit_standardize(train: WeatherTable) -> StandardizeStats:
    if train.target is None:
        raise ValueError("fit requires a table with a target")
    feature_std = train.features.std(axis=0, ddof=1)
    target_std = float(train.target.std(ddof=1))
    degenerate = [
        FEATURE_NAMES[j] for j in np.flatnonzero(feature_std == 0.0)
    ]
    if target_std == 0.0:
        degenerate.append("target")
    if degenerate:
        raise DataError("zero-variance columns: " + ", ".join(degenerate))
    return StandardizeStats(
        feature_mean=train.features.mean(axis=0),
        feature_std=feature_std,
        target_mean=float(train.target.mean()),
        target_std=target_std,
    )


def standardize(table: WeatherTable, stats: StandardizeStats) -> WeatherTable:
    """Apply training-split location/scale to any table (train or test)."""
    features = (table.features - stats.feature_mean) / stats.feature_std
    target = None
    if table.target is not None:
        target = (table.target - stats.target_mean) / stats.target_std
    return WeatherTable(
        timestamps=table.timestamps,
        features=features,
        target=target,
        cleaning_stats=table.cleaning_stats,
    )


@dataclass(frozen=True)
class WhiteningTransform:
    """ZCA transform fitted on training rows: x_w = (x - mean) @ R.

    R is symmetric, making the whitened data as close as possible to the
    centered original; R_inv undoes it.
    """

    mean: np.ndarray
    R: np.ndarray
    R_inv: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) @ self.R


def fit_zca(X: np.ndarray) -> WhiteningTransform:
    """Eigendecompose the training covariance (plus a relative ridge) and
    build the symmetric inverse-square-root transform."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DataError("whitening needs at least 2 training rows")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (X.shape[0] - 1)
    d = cov.shape[0]
    cov = cov + np.eye(d) * (COVARIANCE_RIDGE * np.trace(cov) / d)
    evals, evecs = np.linalg.eigh(cov)
    if np.any(evals <= 0):
        raise DataError("covariance not positive definite after ridge")
    R = evecs @ np.diag(evals**-0.5) @ evecs.T
    R_inv = evecs @ np.diag(evals**0.5) @ evecs.T
    return WhiteningTransform(mean=mean, R=R, R_inv=R_inv)


def zca_whiten(X: np.ndarray, n_train: int | None = None) -> tuple[np.ndarray, WhiteningTransform]:
    """Whiten rows of X using a transform fitted on the first ``n_train``
    rows (all rows when omitted)."""
    X = np.asarray(X, dtype=float)
    transform = fit_zca(X if n_train is None else X[:n_train])
    return transform.apply(X), transform


def project_back(mu_T: np.ndarray, transform: WhiteningTransform) -> np.ndarray:
    """Map whitened-space coefficients to original-space coefficients.

    Predictions agree both ways: mu . x_w == (mu @ R) . (x - mean).
    """
    mu_T = np.asarray(mu_T, dtype=float)
    if mu_T.shape[-1] != transform.R.shape[0]:
        raise ValueError(
            f"coefficient length {mu_T.shape[-1]} does not match transform size {transform.R.shape[0]}"
        )
    return mu_T @ transform.R


@dataclass(frozen=True)
class PreparedWeather:
    """Everything the forecasting task consumes, fitted without leakage.

    ``train``/``test`` are standardized; ``train_whitened``/
    ``test_whitened`` additionally have the ZCA transform (fitted on the
    standardized training rows) applied to the features.
    """

    train: WeatherTable
    test: WeatherTable
    train_whitened: WeatherTable
    test_whitened: WeatherTable
    stats: StandardizeStats
    transform: WhiteningTransform


def prepare_weather(
    path,
    train_fraction: float = 0.8,
    horizon: int = TARGET_HORIZON,
) -> PreparedWeather:
    """Full pipeline: load, clean, target, split, standardize, whiten."""
    table = remove_outliers(load_weather(path))
    table = make_target(table, horizon=horizon)
    train_raw, test_raw = make_split(table, train_fraction)
    stats = fit_standardize(train_raw)
    train = standardize(train_raw, stats)
    test = standardize(test_raw, stats)
    transform = fit_zca(train.features)

    def whiten(t: WeatherTable) -> WeatherTable:
        return WeatherTable(
            timestamps=t.timestamps,
            features=transform.apply(t.features),
            target=t.target,
            cleaning_stats=t.cleaning_stats,
        )

    return PreparedWeather(
        train=train,
        test=test,
        train_whitened=whiten(train),
        test_whitened=whiten(test),
        stats=stats,
        transform=transform,
    )


def _table_frame(table: WeatherTable) -> pd.DataFrame:
    frame = pd.DataFrame(table.features, columns=list(FEATURE_NAMES))
    frame.insert(0, "timestamp", table.timestamps)
    if table.target is not None:
        frame["target"] = table.target
    return frame


def write_pipeline_cache(prepared: PreparedWeather, out_dir) -> None:
    """Write cleaned splits as CSV plus a JSON manifest holding cleaning
    statistics, split boundaries, and transform matrices."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    _table_frame(prepared.train).to_csv(
        os.path.join(out_dir, "train.csv"), index=False, float_format="%.17g"
    )
    _table_frame(prepared.test).to_csv(
        os.path.join(out_dir, "test.csv"), index=False, float_format="%.17g"
    )

    def listify(a):
        return np.asarray(a, dtype=float).tolist()

    manifest = {
        "feature_names": list(FEATURE_NAMES),
        "cleaning_stats": prepared.train.cleaning_stats,
        "split": {
            "train_rows": prepared.train.n_rows,
            "test_rows": prepared.test.n_rows,
            "train_end": str(prepared.train.timestamps[-1]),
            "test_start": str(prepared.test.timestamps[0]),
        },
        "standardize": {
            "feature_mean": listify(prepared.stats.feature_mean),
            "feature_std": listify(prepared.stats.feature_std),
            "target_mean": prepared.stats.target_mean,
            "target_std": prepared.stats.target_std,
        },
        "zca": {
            "mean": listify(prepared.transform.mean),
            "R": [listify(row) for row in prepared.transform.R],
            "R_inv": [listify(row) for row in prepared.transform.R_inv],
        },
    }
    with open(os.path.join(out_dir, "pipeline_manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)


def synthesize_weather_csv(
    path,
    n_rows: int = 6000,
    seed: int = 0,
    include_defects: bool = True,
) -> None:
    """Write a schema-identical synthetic corpus for offline runs.

    Hourly series with an annual cycle, a diurnal cycle, a persistent
    pressure-coupled anomaly, and fast noise; humidity and pressure are
    correlated with temperature so decorrelation genuinely matters.
    ``include_defects`` plants the export's characteristic flaws
    (duplicate timestamps, zero-pressure rows, 6-sigma spikes, a few
    unparseable rows) for the cleaning stage to remove.
    """
    rng = np.random.default_rng(seed)
    h = np.arange(n_rows)

    def ar1(phi, std, size):
        innov = rng.normal(0.0, std * np.sqrt(1.0 - phi * phi), size)
        out = np.empty(size)
        out[0] = rng.normal(0.0, std)
        for k in range(1, size):
            out[k] = phi * out[k - 1] + innov[k]
        return out

    pressure_anom = ar1(0.997, 1.0, n_rows)
    season = 7.0 * np.sin(2.0 * np.pi * h / (24.0 * 365.25) - 1.2)
    diurnal = 3.5 * np.sin(2.0 * np.pi * h / 24.0 - 2.3)
    slow = ar1(0.995, 1.0, n_rows)
    slow = 2.6 * slow - 1.1 * pressure_anom
    fast = ar1(0.6, 1.4, n_rows)
    temperature = 11.5 + season + diurnal + slow + fast

    humidity = np.clip(
        0.68
        - 0.016 * (temperature - 11.5)
        + 0.06 * ar1(0.98, 1.0, n_rows)
        + rng.normal(0.0, 0.03, n_rows),
        0.05,
        1.0,
    )
    wind_speed = np.maximum(
        0.0,
        9.5 + 3.5 * ar1(0.9, 1.0, n_rows) - 1.1 * pressure_anom + rng.normal(0.0, 1.0, n_rows),
    )
    bearing = np.cumsum(rng.normal(0.0, 14.0, n_rows)) % 360.0
    pressure = 1014.0 + 5.5 * pressure_anom - 0.35 * (temperature - 11.5)

    stamps = pd.date_range("2012-03-01 00:00", periods=n_rows, freq="h", tz="Europe/Budapest")
    frame = pd.DataFrame(
        {
            "Formatted Date": stamps.strftime("%Y-%m-%d %H:%M:%S.000 %z"),
            "Summary": "Partly Cloudy",
            "Precip Type": np.where(temperature > 0.0, "rain", "snow"),
            "Temperature (C)": temperature,
            "Apparent Temperature (C)": temperature - 0.12 * wind_speed,
            "Humidity": humidity,
            "Wind Speed (km/h)": wind_speed,
            "Wind Bearing (degrees)": bearing,
            "Visibility (km)": np.clip(16.0 - 8.0 * humidity + rng.normal(0.0, 1.0, n_rows), 0.1, 16.0),
            "Loud Cover": 0.0,
            "Pressure (millibars)": pressure,
            "Daily Summary": "Partly cloudy throughout the day.",
        }
    )

    if include_defects:
        zero_rows = rng.choice(n_rows, size=8, replace=False)
        frame.loc[zero_rows, "Pressure (millibars)"] = 0.0
        spike_rows = rng.choice(n_rows, size=4, replace=False)
        frame.loc[spike_rows, "Temperature (C)"] += 70.0
        bad_rows = rng.choice(n_rows, size=3, replace=False)
        frame["Humidity"] = frame["Humidity"].astype(object)
        frame.loc[bad_rows, "Humidity"] = "n/a"
        dup_rows = np.sort(rng.choice(n_rows, size=12, replace=False))
        frame = pd.concat([frame, frame.iloc[dup_rows]]).sort_values("Formatted Date", kind="stable")

    frame.to_csv(path, index=False)
