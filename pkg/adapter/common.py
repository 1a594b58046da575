"""Shared plumbing for the export scripts: dataset loading, standardization,
and writers for the post-processing CLI's file schemas.

The adapter deliberately does not import the post-processing library; the
file formats are the only contract between the two sides.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


def render_float(x) -> str:
    return repr(float(x))


@dataclass
class TabularData:
    feature_names: list[str]
    features: np.ndarray  # standardized
    sensitive: dict[str, list[str]]
    labels: np.ndarray | None  # classification/regression targets
    times: np.ndarray | None  # survival
    events: np.ndarray | None


def _read_table(path) -> tuple[list[str], list[list[str]]]:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"dataset not found: {p}")
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"{p}: no data rows")
    return header, rows


def standardize(values: np.ndarray) -> np.ndarray:
    """Mean/std scale every non-binary column (binary flags pass through)."""
    out = values.astype(float).copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        if np.unique(col).size <= 2:
            continue
        std = col.std()
        out[:, j] = (col - col.mean()) / (std if std > 0 else 1.0)
    return out


def load_dataset(
    path,
    sensitive_columns: list[str],
    label_column: str | None = None,
    time_column: str | None = None,
    event_column: str | None = None,
) -> TabularData:
    header, rows = _read_table(path)
    for name in sensitive_columns:
        if name not in header:
            raise ValueError(f"sensitive column {name!r} not in {path}")
    special = set(sensitive_columns)
    for name in (label_column, time_column, event_column):
        if name is not None:
            if name not in header:
                raise ValueError(f"column {name!r} not in {path}")
            special.add(name)

    feature_names = [name for name in header if name not in special]
    if not feature_names:
        raise ValueError("no feature columns left after removing label/sensitive columns")
    idx = {name: header.index(name) for name in header}

    def column(name: str) -> list[str]:
        j = idx[name]
        return [row[j] for row in rows]

    features = np.array(
        [[float(row[idx[name]]) for name in feature_names] for row in rows]
    )
    sensitive = {name: column(name) for name in sensitive_columns}

    labels = times = events = None
    if label_column is not None:
        labels = np.array([float(v) for v in column(label_column)])
    if time_column is not None:
        times = np.array([float(v) for v in column(time_column)])
    if event_column is not None:
        events = np.array([float(v) for v in column(event_column)])

    return TabularData(
        feature_names=feature_names,
        features=standardize(features),
        sensitive=sensitive,
        labels=labels,
        times=times,
        events=events,
    )


def write_features(path, names, values) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in values:
            writer.writerow([render_float(v) for v in row])


def write_groups(path, sensitive: dict[str, list[str]]) -> None:
    names = list(sensitive)
    n = len(sensitive[names[0]])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(n):
            writer.writerow([sensitive[name][i] for name in names])


def write_binary_labels(path, labels) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"])
        for v in labels:
            writer.writerow([str(int(v))])


def write_targets(path, targets) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["target"])
        for v in targets:
            writer.writerow([render_float(v)])


def write_outcomes(path, times, events) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "event"])
        for t, e in zip(times, events):
            writer.writerow([render_float(t), "1" if e else "0"])


def write_preds(path, preds) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pred"])
        for v in preds:
            writer.writerow([render_float(v)])


def write_curves(path, grid_times, probs) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + [f"t={render_float(t)}" for t in grid_times])
        for i, row in enumerate(probs):
            writer.writerow([str(i)] + [render_float(v) for v in row])
