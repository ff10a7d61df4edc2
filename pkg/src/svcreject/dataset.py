"""CSV ingestion, label binarization, min-max scaling and stratified splitting.

Raw feature columns are rescaled to [0, 1]; the resulting unit box is the
domain every downstream component (training, calibration, explanation)
works in.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DatasetError(ValueError):
    """Malformed input data (bad CSV cell, degenerate column, single class...)."""


@dataclass(frozen=True, eq=False)
class FeatureSpace:
    """Named features with per-feature closed box domains [lower_i, upper_i]."""

    names: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        n = len(self.names)
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise DatasetError("feature names and bounds have mismatched lengths")
        if len(set(self.names)) != n:
            raise DatasetError("feature names must be unique")
        if not (np.isfinite(self.lower).all() and np.isfinite(self.upper).all()):
            raise DatasetError("feature bounds must be finite")
        bad = np.nonzero(~(self.lower < self.upper))[0]
        if bad.size:
            raise DatasetError(
                f"degenerate domain for feature {self.names[bad[0]]!r}: "
                f"lower {self.lower[bad[0]]} must be < upper {self.upper[bad[0]]}"
            )
        # plain-float views for hot per-coordinate scans
        object.__setattr__(self, "lower_tuple", tuple(self.lower.tolist()))
        object.__setattr__(self, "upper_tuple", tuple(self.upper.tolist()))

    def __len__(self) -> int:
        return len(self.names)

    @classmethod
    def unit(cls, names) -> "FeatureSpace":
        """The [0, 1]^n box, the domain of every scaled dataset."""
        n = len(names)
        return cls(tuple(names), np.zeros(n), np.ones(n))

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (len(self),):
            return False
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def check_instance(self, x: np.ndarray) -> np.ndarray:
        """Validate dimension and domain membership; return the float vector."""
        x = np.asarray(x, dtype=float)
        if x.shape != (len(self),):
            raise DatasetError(
                f"instance has {x.shape} values, expected {len(self)} features"
            )
        if not self.contains(x):
            raise DatasetError("instance lies outside the declared feature domains")
        return x


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Instances (rows of X) with labels in {-1, +1}."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2:
            X = X.reshape(len(y), -1) if len(y) else X.reshape(0, 0)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.shape[0] != y.shape[0]:
            raise DatasetError("instances and labels have different lengths")
        if y.size and not np.all(np.isin(y, (-1.0, 1.0))):
            raise DatasetError("labels must be -1 or +1")

    def __len__(self) -> int:
        return int(self.y.shape[0])


@dataclass(frozen=True, eq=False)
class ScalingParams:
    """Per-column (min, max) observed in raw data; maps raw values onto [0, 1]."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mins", np.asarray(self.mins, dtype=float))
        object.__setattr__(self, "maxs", np.asarray(self.maxs, dtype=float))
        if self.mins.shape != self.maxs.shape or self.mins.ndim != 1:
            raise DatasetError("scaling mins/maxs must be 1-d and equally long")
        if not np.all(self.maxs > self.mins):
            raise DatasetError("scaling requires max > min for every column")

    def __len__(self) -> int:
        return int(self.mins.shape[0])

    def transform(self, raw: np.ndarray) -> np.ndarray:
        raw = np.asarray(raw, dtype=float)
        return (raw - self.mins) / (self.maxs - self.mins)

    def invert(self, scaled: np.ndarray) -> np.ndarray:
        scaled = np.asarray(scaled, dtype=float)
        return scaled * (self.maxs - self.mins) + self.mins


def load_csv(path, label_column: str, positive_label) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Read a comma-separated file with a header row.

    Returns (raw feature matrix, labels in {-1,+1}, feature names).  The label
    column is matched by name; rows whose label equals ``positive_label``
    (string comparison) map to +1, everything else to -1.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError(f"{path}: file is empty") from None
        if label_column not in header:
            raise DatasetError(f"{path}: label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)
        feature_names = [h for k, h in enumerate(header) if k != label_idx]
        positive = str(positive_label).strip()

        rows: list[list[float]] = []
        labels: list[float] = []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}"
                )
            values = []
            for k, cell in enumerate(row):
                if k == label_idx:
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DatasetError(
                        f"{path}: row {row_no}, column {header[k]!r}: "
                        f"cannot parse {cell.strip()!r} as a number"
                    ) from None
            rows.append(values)
            labels.append(1.0 if row[label_idx].strip() == positive else -1.0)

    if not rows:
        raise DatasetError(f"{path}: no data rows")
    y = np.asarray(labels)
    if np.all(y == y[0]):
        raise DatasetError(
            f"{path}: only one class present after binarization "
            f"(positive label {positive!r})"
        )
    return np.asarray(rows, dtype=float), y, feature_names


def fit_scaling(raw: np.ndarray, names=None) -> ScalingParams:
    """Per-column min/max over the entire table; rejects constant columns."""
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2:
        raise DatasetError("raw table must be 2-d")
    if not np.all(np.isfinite(raw)):
        raise DatasetError("raw table contains non-finite values")
    mins = raw.min(axis=0)
    maxs = raw.max(axis=0)
    flat = np.nonzero(maxs <= mins)[0]
    if flat.size:
        col = names[flat[0]] if names is not None else f"#{flat[0]}"
        raise DatasetError(f"column {col} is constant; its domain would be degenerate")
    return ScalingParams(mins, maxs)


def apply_scaling(raw: np.ndarray, params: ScalingParams) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Map raw values to (v - min) / (max - min).

    Values from outside the fitted range map outside [0, 1]; they are
    reported in the returned flag list as (row, column) pairs, never clamped.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.size == 0:
        return raw.reshape(0, len(params)), []
    if raw.ndim != 2 or raw.shape[1] != len(params):
        raise DatasetError(
            f"raw table has shape {raw.shape}, expected {len(params)} columns"
        )
    scaled = params.transform(raw)
    out = np.nonzero((scaled < 0.0) | (scaled > 1.0))
    flags = list(zip(out[0].tolist(), out[1].tolist()))
    return scaled, flags


def scale_dataset(raw, y, names, params=None) -> tuple[FeatureSpace, ScalingParams, LabeledDataset]:
    """Fit-or-apply scaling and assemble the unit-box dataset used downstream."""
    if params is None:
        params = fit_scaling(raw, names)
    scaled, _ = apply_scaling(raw, params)
    return FeatureSpace.unit(names), params, LabeledDataset(scaled, y)


def stratified_split_indices(y: np.ndarray, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-class shuffled index split; train gets round(fraction * class size).

    Both sides keep at least one instance of every class, so each class needs
    two or more members.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DatasetError("train_fraction must lie strictly between 0 and 1")
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    train_parts, test_parts = [], []
    for cls in np.unique(y):
        idx = np.nonzero(y == cls)[0]
        if idx.size < 2:
            raise DatasetError(f"class {cls:+g} has fewer than 2 instances")
        k = int(round(train_fraction * idx.size))
        k = min(max(k, 1), idx.size - 1)
        perm = rng.permutation(idx.size)
        train_parts.append(idx[perm[:k]])
        test_parts.append(idx[perm[k:]])
    train = np.sort(np.concatenate(train_parts))
    test = np.sort(np.concatenate(test_parts))
    return train, test


def stratified_split(ds: LabeledDataset, train_fraction: float, seed: int) -> tuple[LabeledDataset, LabeledDataset]:
    train_idx, test_idx = stratified_split_indices(ds.y, train_fraction, seed)
    return (
        LabeledDataset(ds.X[train_idx], ds.y[train_idx]),
        LabeledDataset(ds.X[test_idx], ds.y[test_idx]),
    )


def dataset_to_json(space: FeatureSpace, params: ScalingParams, ds: LabeledDataset) -> dict:
    return {
        "features": [
            {"name": name, "lower": float(lo), "upper": float(hi)}
            for name, lo, hi in zip(space.names, space.lower, space.upper)
        ],
        "scaling": [
            {"min": float(lo), "max": float(hi)}
            for lo, hi in zip(params.mins, params.maxs)
        ],
        "rows": [[float(v) for v in row] for row in ds.X],
        "labels": [int(v) for v in ds.y],
    }


def dataset_from_json(doc: dict) -> tuple[FeatureSpace, ScalingParams, LabeledDataset]:
    space = FeatureSpace(
        tuple(f["name"] for f in doc["features"]),
        np.array([f["lower"] for f in doc["features"]], dtype=float),
        np.array([f["upper"] for f in doc["features"]], dtype=float),
    )
    params = ScalingParams(
        np.array([s["min"] for s in doc["scaling"]], dtype=float),
        np.array([s["max"] for s in doc["scaling"]], dtype=float),
    )
    n = len(space)
    rows = np.array(doc["rows"], dtype=float).reshape(-1, n)
    ds = LabeledDataset(rows, np.array(doc["labels"], dtype=float))
    return space, params, ds


def save_dataset(path, space, params, ds) -> None:
    Path(path).write_text(json.dumps(dataset_to_json(space, params, ds)) + "\n")


def load_dataset(path) -> tuple[FeatureSpace, ScalingParams, LabeledDataset]:
    return dataset_from_json(json.loads(Path(path).read_text()))
