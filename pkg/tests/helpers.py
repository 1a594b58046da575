"""Shared dataset builders for the test suite."""

from __future__ import annotations

import numpy as np

from fairmix import (
    Dataset,
    FeatureMatrix,
    GroupAssignment,
    PredictionKind,
    ScorePredictions,
    SurvivalCurves,
    SurvivalOutcomes,
    TimeGrid,
)


def feature_matrix(values, names=None) -> FeatureMatrix:
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if names is None:
        names = tuple(f"x{i}" for i in range(values.shape[1]))
    return FeatureMatrix(values, tuple(names))


def two_group_assignment(ids) -> GroupAssignment:
    ids = np.asarray(ids, dtype=int)
    labels = tuple(f"g{i}" for i in range(int(ids.max()) + 1))
    return GroupAssignment(ids, labels)


def classification_ds(n=8, seed=0, with_labels=True) -> Dataset:
    rng = np.random.default_rng(seed)
    features = feature_matrix(rng.normal(size=(n, 2)))
    groups = two_group_assignment(np.arange(n) % 2)
    perf = ScorePredictions(rng.uniform(0.05, 0.95, n), PredictionKind.PROBABILITY)
    labels = rng.integers(0, 2, n).astype(float) if with_labels else None
    return Dataset(features=features, groups=groups, perf_preds=perf, labels=labels)


def regression_ds(n=8, seed=0, with_labels=True, fair=False) -> Dataset:
    rng = np.random.default_rng(seed)
    features = feature_matrix(rng.normal(size=(n, 2)))
    groups = two_group_assignment(np.arange(n) % 2)
    perf = ScorePredictions(rng.normal(size=n), PredictionKind.REGRESSION)
    labels = rng.normal(size=n) if with_labels else None
    fair_preds = (
        ScorePredictions(rng.normal(size=n), PredictionKind.REGRESSION) if fair else None
    )
    return Dataset(
        features=features, groups=groups, perf_preds=perf, labels=labels, fair_preds=fair_preds
    )


def exponential_curves(rates, grid: TimeGrid) -> SurvivalCurves:
    rates = np.asarray(rates, dtype=float)
    return SurvivalCurves(grid, np.exp(-np.outer(rates, grid.times)))


def survival_ds(n=12, seed=0, m=9) -> Dataset:
    rng = np.random.default_rng(seed)
    features = feature_matrix(rng.normal(size=(n, 2)))
    groups = two_group_assignment(np.arange(n) % 2)
    grid = TimeGrid(np.linspace(0.0, 4.0, m))
    rates = np.exp(0.5 * features.values[:, 0])
    perf = exponential_curves(rates, grid)
    times = rng.exponential(1.0 / rates)
    events = rng.random(n) < 0.5
    outcomes = SurvivalOutcomes(np.maximum(times, 1e-3), events)
    return Dataset(features=features, groups=groups, perf_preds=perf, labels=outcomes)
