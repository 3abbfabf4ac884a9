"""Dataset generation, tabular CSV ingestion, min-max scaling, and splitting.

Synthetic regression sets follow the two noisy quadratics used throughout
the experiments: a 1-D ``x**2`` target on (-2, 2) whose single input can be
replicated across several feature columns (redundant encoding, one copy per
qubit), and a 2-D ``x**2 + y**2`` target on (-1, 1) x (-1, 1) with one input
per qubit.  Noise is Gaussian; the ``noise_sd`` argument is a standard
deviation by default, with a flag to read it as a variance instead.

Feature and target columns are min-max scaled to [-1, 1].  By default the
scaler is fit on the full dataset before splitting (a deliberate, documented
simplification); ``fit_rows`` restricts the fit to the training rows for a
leakage-free pipeline.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ParseError, ScalingError

__all__ = [
    "ColumnScale",
    "ScaleRecord",
    "Dataset",
    "Split",
    "gen_quadratic_1d",
    "gen_quadratic_2d",
    "load_table",
    "save_table",
    "fit_minmax_and_scale",
    "split_dataset",
    "save_scale",
    "load_scale",
]


@dataclass(frozen=True)
class ColumnScale:
    lo: float
    hi: float

    def scale(self, v):
        return 2.0 * (v - self.lo) / (self.hi - self.lo) - 1.0

    def unscale(self, v):
        return (v + 1.0) * 0.5 * (self.hi - self.lo) + self.lo


@dataclass(frozen=True)
class ScaleRecord:
    """Per-column original min/max, enough to invert predictions."""

    features: tuple[ColumnScale, ...]
    target: ColumnScale

    def unscale_y(self, y):
        return self.target.unscale(np.asarray(y, dtype=np.float64))

    def mse_factor(self) -> float:
        """Multiplier converting a scaled-unit MSE to original target units."""
        return (0.5 * (self.target.hi - self.target.lo)) ** 2


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    target_name: str = "y"
    scale: ScaleRecord | None = None

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class Split:
    train: np.ndarray
    val: np.ndarray


def _noise_scale(noise_sd: float, noise_as_variance: bool) -> float:
    return math.sqrt(noise_sd) if noise_as_variance else noise_sd


def gen_quadratic_1d(
    n: int = 500,
    noise_sd: float = 0.5,
    seed: int = 0,
    n_features: int = 4,
    noise_as_variance: bool = False,
) -> Dataset:
    """y = x**2 + eps with x ~ U(-2, 2); the scalar input is replicated
    across ``n_features`` columns.  Values are returned unscaled."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-2.0, 2.0, size=n)
    eps = rng.normal(0.0, _noise_scale(noise_sd, noise_as_variance), size=n) if noise_sd > 0 else np.zeros(n)
    X = np.repeat(x[:, None], n_features, axis=1)
    return Dataset(X=X, y=x * x + eps, feature_names=[f"x{j}" for j in range(n_features)])


def gen_quadratic_2d(
    n: int = 200,
    noise_sd: float = 0.5,
    seed: int = 0,
    noise_as_variance: bool = False,
) -> Dataset:
    """y = x0**2 + x1**2 + eps with (x0, x1) ~ U(-1, 1)^2, one input per qubit."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n, 2))
    eps = rng.normal(0.0, _noise_scale(noise_sd, noise_as_variance), size=n) if noise_sd > 0 else np.zeros(n)
    return Dataset(X=X, y=X[:, 0] ** 2 + X[:, 1] ** 2 + eps, feature_names=["x0", "x1"])


def load_table(path: str | Path, target_column: str) -> Dataset:
    """Read a numeric CSV (header row required) into a Dataset.

    All non-target columns become features in file order.  Parse failures
    report the offending row and column.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file") from None
        header = [h.strip() for h in header]
        if target_column not in header:
            raise ParseError(f"target column {target_column!r} not in header {header}")
        t_idx = header.index(target_column)

        rows: list[list[float]] = []
        for row_num, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", row=row_num)
            vals = []
            for col_name, cell in zip(header, row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ParseError(f"non-numeric value {cell!r}", row=row_num, column=col_name) from None
            rows.append(vals)

    if not rows:
        raise ParseError("no data rows")
    table = np.asarray(rows, dtype=np.float64)
    f_cols = [j for j in range(len(header)) if j != t_idx]
    return Dataset(
        X=table[:, f_cols],
        y=table[:, t_idx],
        feature_names=[header[j] for j in f_cols],
        target_name=target_column,
    )


def save_table(ds: Dataset, path: str | Path) -> None:
    """Write the dataset as CSV: feature columns in order, then the target."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(ds.feature_names) + [ds.target_name])
        for i in range(ds.n_samples):
            writer.writerow([repr(float(v)) for v in ds.X[i]] + [repr(float(ds.y[i]))])


def fit_minmax_and_scale(ds: Dataset, fit_rows=None) -> Dataset:
    """Affine-map every feature column and the target to [-1, 1].

    The min/max are taken over ``fit_rows`` when given (strict no-leakage
    mode: pass the training rows), else over the full dataset.
    """
    rows = slice(None) if fit_rows is None else np.asarray(fit_rows)
    cols = []
    for j in range(ds.n_features):
        lo, hi = float(ds.X[rows, j].min()), float(ds.X[rows, j].max())
        if hi <= lo:
            raise ScalingError(f"column {ds.feature_names[j]!r} is constant (min == max == {lo})")
        cols.append(ColumnScale(lo, hi))
    ylo, yhi = float(ds.y[rows].min()), float(ds.y[rows].max())
    if yhi <= ylo:
        raise ScalingError(f"column {ds.target_name!r} is constant (min == max == {ylo})")
    record = ScaleRecord(features=tuple(cols), target=ColumnScale(ylo, yhi))

    X = np.column_stack([cols[j].scale(ds.X[:, j]) for j in range(ds.n_features)])
    return Dataset(
        X=X,
        y=record.target.scale(ds.y),
        feature_names=list(ds.feature_names),
        target_name=ds.target_name,
        scale=record,
    )


def split_dataset(ds: Dataset, train_fraction: float = 0.8, seed: int = 0) -> Split:
    """Seeded uniform permutation; first floor(f*N) rows train, rest validation."""
    if not 0.0 < train_fraction < 1.0:
        raise ConfigurationError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if ds.n_samples < 2:
        raise ConfigurationError("need at least 2 samples to split")
    perm = np.random.default_rng(seed).permutation(ds.n_samples)
    cut = int(train_fraction * ds.n_samples)
    return Split(train=perm[:cut], val=perm[cut:])


# --- scale sidecar ------------------------------------------------------------

def save_scale(record: ScaleRecord, feature_names: list[str], target_name: str, path: str | Path) -> None:
    doc = {
        "columns": {
            name: {"min": c.lo, "max": c.hi} for name, c in zip(feature_names, record.features)
        },
        "target": {"name": target_name, "min": record.target.lo, "max": record.target.hi},
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_scale(path: str | Path, feature_names: list[str]) -> ScaleRecord:
    doc = json.loads(Path(path).read_text())
    try:
        cols = tuple(ColumnScale(doc["columns"][name]["min"], doc["columns"][name]["max"]) for name in feature_names)
        target = ColumnScale(doc["target"]["min"], doc["target"]["max"])
    except KeyError as exc:
        raise ParseError(f"scale sidecar is missing entry {exc}") from exc
    return ScaleRecord(features=cols, target=target)
