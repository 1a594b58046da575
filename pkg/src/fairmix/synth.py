"""Deterministic synthetic benchmark data with a tunable group bias.

Each generator emits features, a two-group assignment, labels, and the
predictions of a deterministic "base model" whose unfairness scales with
``bias_strength``: the base model leans on a group-shifted signal that the
labels themselves do not contain, so post-processing can remove the bias
without giving up much performance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import (
    Dataset,
    FeatureMatrix,
    GroupAssignment,
    PredictionKind,
    ScorePredictions,
    SurvivalCurves,
    SurvivalOutcomes,
    TaskKind,
    TimeGrid,
)
from .numerics import sigmoid

SURVIVAL_GRID_POINTS = 33


@dataclass(frozen=True)
class SyntheticBundle:
    task: TaskKind
    features: FeatureMatrix
    group_values: dict[str, list[str]]
    labels: object
    perf_preds: object

    def dataset(self, mode=None) -> Dataset:
        from .data import GroupMode

        groups = GroupAssignment.from_attributes(
            self.group_values, mode if mode is not None else GroupMode.INTERSECTIONAL
        )
        return Dataset(
            features=self.features,
            groups=groups,
            perf_preds=self.perf_preds,
            labels=self.labels,
        )


def _proxy_and_noise(rng: np.random.Generator, n: int, extra: int):
    group = rng.integers(0, 2, size=n)
    sign = 2.0 * group - 1.0
    proxy = 0.9 * sign + 0.436 * rng.normal(size=n)  # unit-variance group proxy
    others = rng.normal(size=(n, extra))
    return group, sign, proxy, others


def generate_classification(n: int, bias_strength: float, seed: int) -> SyntheticBundle:
    rng = np.random.default_rng(seed)
    group, sign, proxy, others = _proxy_and_noise(rng, n, 3)
    # strong signal keeps scores away from the 0.5 threshold, so equalizing
    # group means also equalizes hard positive rates
    fair_logit = 3.0 * others[:, 0] + 2.0 * others[:, 1] - 2.0 * others[:, 2]
    labels = (rng.random(n) < sigmoid(fair_logit)).astype(float)
    # the base model carries a group-aligned shift the labels do not have
    perf = sigmoid(fair_logit + 1.5 * bias_strength * sign)
    features = FeatureMatrix(
        np.column_stack([proxy, others]), ("x_proxy", "x1", "x2", "x3")
    )
    return SyntheticBundle(
        task=TaskKind.BINARY_CLASSIFICATION,
        features=features,
        group_values={"group": [f"g{int(g)}" for g in group]},
        labels=labels,
        perf_preds=ScorePredictions(perf, PredictionKind.PROBABILITY),
    )


def generate_regression(n: int, bias_strength: float, seed: int) -> SyntheticBundle:
    rng = np.random.default_rng(seed)
    group, sign, proxy, others = _proxy_and_noise(rng, n, 2)
    fair_signal = 1.0 * others[:, 0] + 0.6 * others[:, 1]
    targets = fair_signal + 0.3 * rng.normal(size=n)
    perf = fair_signal + bias_strength * sign
    features = FeatureMatrix(np.column_stack([proxy, others]), ("x_proxy", "x1", "x2"))
    return SyntheticBundle(
        task=TaskKind.REGRESSION,
        features=features,
        group_values={"group": [f"g{int(g)}" for g in group]},
        labels=targets,
        perf_preds=ScorePredictions(perf, PredictionKind.REGRESSION),
    )


def _censoring_rate(event_rates: np.ndarray, target_fraction: float) -> float:
    """Exponential censoring rate giving the target expected censored fraction."""
    lo, hi = 1e-9, 1e9
    for _ in range(200):
        mid = np.sqrt(lo * hi)
        frac = float(np.mean(mid / (mid + event_rates)))
        if frac < target_fraction:
            lo = mid
        else:
            hi = mid
    return np.sqrt(lo * hi)


def generate_survival(
    n: int, bias_strength: float, seed: int, censor_fraction: float = 0.48,
) -> SyntheticBundle:
    rng = np.random.default_rng(seed)
    group, sign, proxy, others = _proxy_and_noise(rng, n, 2)
    fair_eta = 0.8 * others[:, 0] + 0.5 * others[:, 1]
    event_rates = np.exp(fair_eta)
    event_times = rng.exponential(1.0 / event_rates)
    cens_rate = _censoring_rate(event_rates, censor_fraction)
    cens_times = rng.exponential(1.0 / cens_rate, size=n)
    observed = np.minimum(event_times, cens_times)
    events = event_times <= cens_times

    grid = TimeGrid(np.linspace(0.0, float(observed.max()), SURVIVAL_GRID_POINTS))
    biased_eta = fair_eta + 0.8 * bias_strength * sign
    probs = np.exp(-np.outer(np.exp(biased_eta), grid.times))

    features = FeatureMatrix(np.column_stack([proxy, others]), ("x_proxy", "x1", "x2"))
    return SyntheticBundle(
        task=TaskKind.SURVIVAL,
        features=features,
        group_values={"group": [f"g{int(g)}" for g in group]},
        labels=SurvivalOutcomes(observed, events),
        perf_preds=SurvivalCurves(grid, probs),
    )


def generate(
    task: TaskKind,
    n: int,
    bias_strength: float,
    seed: int,
    censor_fraction: float = 0.48,
) -> SyntheticBundle:
    if n < 20:
        raise ValueError("synthetic generation requires n >= 20")
    if task is TaskKind.BINARY_CLASSIFICATION:
        return generate_classification(n, bias_strength, seed)
    if task is TaskKind.REGRESSION:
        return generate_regression(n, bias_strength, seed)
    return generate_survival(n, bias_strength, seed, censor_fraction)
