"""Domain data containers, dataset validation, and the train/test split."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence, Union

import numpy as np

_TOL = 1e-12  # slack for floating-point boundary checks in validation


class TaskKind(Enum):
    BINARY_CLASSIFICATION = "classification"
    REGRESSION = "regression"
    SURVIVAL = "survival"


class PredictionKind(Enum):
    PROBABILITY = "probability"
    REGRESSION = "regression"


class GroupMode(Enum):
    INTERSECTIONAL = "intersectional"
    PER_ATTRIBUTE = "per_attribute"


@dataclass(frozen=True)
class FeatureMatrix:
    """n x d matrix of standardized real-valued features with column names."""

    values: np.ndarray
    column_names: tuple[str, ...]

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise ValueError("feature matrix must be 2-D")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "column_names", tuple(self.column_names))
        if vals.shape[1] != len(self.column_names):
            raise ValueError(
                f"{len(self.column_names)} column names for {vals.shape[1]} columns"
            )
        if len(set(self.column_names)) != len(self.column_names):
            raise ValueError("duplicate feature column names")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def column(self, name: str) -> np.ndarray:
        if name not in self.column_names:
            raise KeyError(f"feature column not present: {name!r}")
        return self.values[:, self.column_names.index(name)]

    def take(self, idx) -> "FeatureMatrix":
        return FeatureMatrix(self.values[idx], self.column_names)


@dataclass(frozen=True)
class GroupAssignment:
    """Per-instance sensitive-group ids over a fixed set of group labels.

    ``mode`` controls how fairness penalties treat multiple sensitive
    attributes: INTERSECTIONAL uses the top-level partition directly (ids
    built from the cross-product of attribute values), PER_ATTRIBUTE keeps
    one sub-assignment per attribute and penalties take the maximum across
    attributes.
    """

    group_ids: np.ndarray
    group_labels: tuple[str, ...]
    mode: GroupMode = GroupMode.INTERSECTIONAL
    sub_assignments: tuple["GroupAssignment", ...] = ()

    def __post_init__(self) -> None:
        ids = np.asarray(self.group_ids, dtype=int)
        if ids.ndim != 1:
            raise ValueError("group_ids must be 1-D")
        object.__setattr__(self, "group_ids", ids)
        object.__setattr__(self, "group_labels", tuple(self.group_labels))
        object.__setattr__(self, "sub_assignments", tuple(self.sub_assignments))
        if len(self.group_labels) < 1:
            raise ValueError("at least one group label is required")
        if self.mode is GroupMode.PER_ATTRIBUTE and not self.sub_assignments:
            raise ValueError("per-attribute mode requires sub-assignments")
        for sub in self.sub_assignments:
            if sub.group_ids.shape != ids.shape:
                raise ValueError("sub-assignment length mismatch")

    @property
    def n(self) -> int:
        return self.group_ids.shape[0]

    @property
    def n_groups(self) -> int:
        return len(self.group_labels)

    def members(self, g: int) -> np.ndarray:
        return np.flatnonzero(self.group_ids == g)

    def take(self, idx) -> "GroupAssignment":
        return GroupAssignment(
            self.group_ids[idx],
            self.group_labels,
            self.mode,
            tuple(sub.take(idx) for sub in self.sub_assignments),
        )

    @staticmethod
    def from_attributes(
        attributes: Mapping[str, Sequence],
        mode: GroupMode = GroupMode.INTERSECTIONAL,
    ) -> "GroupAssignment":
        """Build an assignment from raw per-attribute values.

        Group ids are assigned by sorted distinct value (single attribute) or
        sorted distinct value combination (several attributes); only observed
        combinations get an id.  PER_ATTRIBUTE keeps the same intersectional
        top-level partition (used e.g. for stratified splitting) plus one
        sub-assignment per attribute.
        """
        if not attributes:
            raise ValueError("at least one sensitive attribute is required")
        names = list(attributes)
        columns = [np.asarray([str(v) for v in attributes[name]]) for name in names]
        n = columns[0].shape[0]
        if any(c.shape[0] != n for c in columns):
            raise ValueError("sensitive attribute columns differ in length")

        subs = []
        for name, col in zip(names, columns):
            values = sorted(set(col.tolist()))
            lookup = {v: i for i, v in enumerate(values)}
            subs.append(
                GroupAssignment(
                    np.array([lookup[v] for v in col], dtype=int),
                    tuple(f"{name}={v}" for v in values),
                )
            )

        if len(names) == 1:
            base = subs[0]
            return GroupAssignment(base.group_ids, base.group_labels, mode, ())

        combos = ["|".join(parts) for parts in zip(*(c.tolist() for c in columns))]
        distinct = sorted(set(combos))
        lookup = {v: i for i, v in enumerate(distinct)}
        ids = np.array([lookup[v] for v in combos], dtype=int)
        labels = tuple(
            "|".join(f"{name}={part}" for name, part in zip(names, combo.split("|")))
            for combo in distinct
        )
        if mode is GroupMode.PER_ATTRIBUTE:
            return GroupAssignment(ids, labels, mode, tuple(subs))
        return GroupAssignment(ids, labels, mode, ())


@dataclass(frozen=True)
class ScorePredictions:
    """Per-instance scalar predictions: probabilities or real values."""

    values: np.ndarray
    kind: PredictionKind

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("predictions must be 1-D")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def take(self, idx) -> "ScorePredictions":
        return ScorePredictions(self.values[idx], self.kind)


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing evaluation times starting at 0; tau is the horizon."""

    times: np.ndarray

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise ValueError("time grid needs at least the points 0 and tau")
        if times[0] != 0.0:
            raise ValueError("time grid must start at 0")
        if not np.all(np.diff(times) > 0):
            raise ValueError("time grid must be strictly increasing")
        if not np.all(np.isfinite(times)):
            raise ValueError("time grid must be finite")
        object.__setattr__(self, "times", times)

    @property
    def m(self) -> int:
        return self.times.shape[0]

    @property
    def tau(self) -> float:
        return float(self.times[-1])


@dataclass(frozen=True)
class SurvivalCurves:
    """n survival curves sampled on a shared time grid (rows: instances)."""

    grid: TimeGrid
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 2:
            raise ValueError("survival probabilities must be 2-D")
        if probs.shape[1] != self.grid.m:
            raise ValueError("curve width does not match the time grid")
        object.__setattr__(self, "probs", probs)

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    def take(self, idx) -> "SurvivalCurves":
        return SurvivalCurves(self.grid, self.probs[idx])


@dataclass(frozen=True)
class SurvivalOutcomes:
    """Observed follow-up times with event indicators (True = event observed)."""

    times: np.ndarray
    events: np.ndarray

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        events = np.asarray(self.events, dtype=bool)
        if times.ndim != 1 or events.shape != times.shape:
            raise ValueError("times and events must be aligned 1-D arrays")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "events", events)

    @property
    def n(self) -> int:
        return self.times.shape[0]

    def take(self, idx) -> "SurvivalOutcomes":
        return SurvivalOutcomes(self.times[idx], self.events[idx])


PredictionSet = Union[ScorePredictions, SurvivalCurves]
Labels = Union[np.ndarray, SurvivalOutcomes]


@dataclass(frozen=True)
class Dataset:
    """All aligned per-instance components used for fitting and evaluation.

    ``labels`` and ``fair_preds`` are optional: labels are only needed for
    evaluation metrics and for auto-fitting a fairness model, fair_preds only
    for the two-pretrained variants.
    """

    features: FeatureMatrix
    groups: GroupAssignment
    perf_preds: PredictionSet
    labels: Labels | None = None
    fair_preds: PredictionSet | None = None

    def __post_init__(self) -> None:
        n = self.features.n
        parts = {"groups": self.groups.n, "perf_preds": self.perf_preds.n}
        if self.labels is not None:
            labels = self.labels
            if isinstance(labels, SurvivalOutcomes):
                parts["labels"] = labels.n
            else:
                labels = np.asarray(labels, dtype=float)
                if labels.ndim != 1:
                    raise ValueError("labels must be 1-D")
                object.__setattr__(self, "labels", labels)
                parts["labels"] = labels.shape[0]
        if self.fair_preds is not None:
            parts["fair_preds"] = self.fair_preds.n
        for name, size in parts.items():
            if size != n:
                raise ValueError(f"{name} has {size} rows, features has {n}")

    @property
    def n(self) -> int:
        return self.features.n

    def take(self, idx) -> "Dataset":
        labels = self.labels
        if labels is not None:
            labels = labels.take(idx) if isinstance(labels, SurvivalOutcomes) else labels[idx]
        return Dataset(
            features=self.features.take(idx),
            groups=self.groups.take(idx),
            perf_preds=self.perf_preds.take(idx),
            labels=labels,
            fair_preds=None if self.fair_preds is None else self.fair_preds.take(idx),
        )


@dataclass
class ValidationReport:
    """Accumulated invariant violations; empty means the dataset is valid."""

    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __iter__(self):
        return iter(self.violations)

    def __len__(self) -> int:
        return len(self.violations)


def _check_curves(report: list[str], curves: SurvivalCurves, what: str) -> None:
    probs = curves.probs
    if not np.all(np.isfinite(probs)):
        report.append(f"{what}: non-finite survival probability")
        return
    if np.any(probs < -_TOL) or np.any(probs > 1 + _TOL):
        row = int(np.argwhere((probs < -_TOL) | (probs > 1 + _TOL))[0][0])
        report.append(f"{what}: survival probability out of [0,1] in row {row}")
    rises = np.diff(probs, axis=1) > _TOL
    for row in np.flatnonzero(rises.any(axis=1)):
        col = int(np.argmax(rises[row])) + 1
        report.append(f"{what}: row {row} non-increasing violated at index {col}")
    bad0 = np.abs(probs[:, 0] - 1.0) > _TOL
    if bad0.any():
        row = int(np.argmax(bad0))
        report.append(f"{what}: row {row} does not start at S(0)=1")


def _check_scores(report: list[str], preds: ScorePredictions, what: str) -> None:
    if not np.all(np.isfinite(preds.values)):
        report.append(f"{what}: non-finite prediction value")
        return
    if preds.kind is PredictionKind.PROBABILITY:
        bad = (preds.values < -_TOL) | (preds.values > 1 + _TOL)
        for row in np.flatnonzero(bad):
            report.append(f"{what}: probability out of [0,1] at row {int(row)}")


def _check_groups(report: list[str], groups: GroupAssignment) -> None:
    ids = groups.group_ids
    if ids.size and (ids.min() < 0 or ids.max() >= groups.n_groups):
        report.append("groups: id outside [0, G)")
        return
    counts = np.bincount(ids, minlength=groups.n_groups)
    for g in np.flatnonzero(counts == 0):
        report.append(f"groups: group {groups.group_labels[int(g)]!r} has no instances")
    for sub in groups.sub_assignments:
        _check_groups(report, sub)


def _check_predictions(
    report: list[str], preds: PredictionSet, task: TaskKind, what: str,
) -> None:
    if task is TaskKind.SURVIVAL:
        if not isinstance(preds, SurvivalCurves):
            report.append(f"{what}: survival task requires survival curves")
        else:
            _check_curves(report, preds, what)
        return
    if not isinstance(preds, ScorePredictions):
        report.append(f"{what}: {task.value} task requires scalar predictions")
        return
    wanted = (
        PredictionKind.PROBABILITY
        if task is TaskKind.BINARY_CLASSIFICATION
        else PredictionKind.REGRESSION
    )
    if preds.kind is not wanted:
        report.append(f"{what}: prediction kind {preds.kind.value!r} does not match task")
    _check_scores(report, preds, what)


def validate_dataset(ds: Dataset, task: TaskKind) -> ValidationReport:
    """Collect every invariant violation in ``ds`` for the given task."""
    report: list[str] = []

    if ds.features.n < 1:
        report.append("features: empty matrix (n must be >= 1)")
    if ds.features.d < 1:
        report.append("features: no columns (d must be >= 1)")
    if not np.all(np.isfinite(ds.features.values)):
        row, col = np.argwhere(~np.isfinite(ds.features.values))[0]
        report.append(f"features: non-finite value at row {int(row)}, column {int(col)}")

    _check_groups(report, ds.groups)
    _check_predictions(report, ds.perf_preds, task, "perf_preds")

    if ds.fair_preds is not None:
        _check_predictions(report, ds.fair_preds, task, "fair_preds")
        if isinstance(ds.fair_preds, SurvivalCurves) and isinstance(ds.perf_preds, SurvivalCurves):
            if not np.array_equal(ds.fair_preds.grid.times, ds.perf_preds.grid.times):
                report.append("fair_preds: time grid differs from perf_preds")

    if ds.labels is not None:
        if task is TaskKind.SURVIVAL:
            if not isinstance(ds.labels, SurvivalOutcomes):
                report.append("labels: survival task requires time/event outcomes")
            else:
                times = ds.labels.times
                if not np.all(np.isfinite(times)) or np.any(times <= 0):
                    report.append("labels: outcome times must be positive and finite")
        elif isinstance(ds.labels, SurvivalOutcomes):
            report.append(f"labels: outcomes supplied for a {task.value} task")
        elif task is TaskKind.BINARY_CLASSIFICATION:
            if not np.all(np.isin(ds.labels, (0.0, 1.0))):
                report.append("labels: binary labels must be 0 or 1")
        elif not np.all(np.isfinite(ds.labels)):
            report.append("labels: non-finite regression target")

    return ValidationReport(report)


def _allocate_test_counts(sizes: np.ndarray, test_total: int) -> np.ndarray:
    """Largest-remainder apportionment of test slots, capped at size-1 per group."""
    if np.any(sizes == 0):
        raise ValueError("cannot split: a group has no instances on the fit side")
    n = int(sizes.sum())
    ideal = sizes * (test_total / n)
    counts = np.minimum(np.floor(ideal).astype(int), sizes - 1)
    while counts.sum() < test_total:
        remainder = ideal - counts
        remainder[counts >= sizes - 1] = -np.inf
        g = int(np.argmax(remainder))
        if not np.isfinite(remainder[g]):
            raise ValueError(
                "cannot split: placing more rows in the test side would empty "
                "a group on the fit side"
            )
        counts[g] += 1
    return counts


def split_indices(
    groups: GroupAssignment, test_fraction: float, seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic group-stratified (train, test) row index split."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be strictly between 0 and 1")
    n = groups.n
    test_total = int(math.floor(n * test_fraction + 0.5))
    sizes = np.bincount(groups.group_ids, minlength=groups.n_groups)
    counts = _allocate_test_counts(sizes.astype(float), test_total).astype(int)

    rng = np.random.default_rng(seed)
    picks = []
    for g in range(groups.n_groups):
        members = groups.members(g)
        perm = rng.permutation(members)
        picks.append(perm[: counts[g]])
    test_idx = np.sort(np.concatenate(picks)) if picks else np.empty(0, dtype=int)
    train_idx = np.setdiff1d(np.arange(n), test_idx)
    return train_idx, test_idx


def split_train_test(
    ds: Dataset, test_fraction: float, seed: int,
) -> tuple[Dataset, Dataset]:
    """Split a dataset into disjoint (train, test) parts, stratified by group."""
    train_idx, test_idx = split_indices(ds.groups, test_fraction, seed)
    return ds.take(train_idx), ds.take(test_idx)
