"""Trainable simple experts: logistic score, linear score, and a
constant-baseline-hazard proportional-hazards survival curve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import FeatureMatrix, SurvivalCurves, TimeGrid
from .numerics import sigmoid

# linear predictors are clamped here before exponentiation in the survival
# expert; keeps exp() finite while preserving monotonicity in t
LINPRED_CLAMP = 30.0


@dataclass(frozen=True)
class SimpleExpertParams:
    """Coefficients of the simple expert over a feature subset.

    ``gamma`` has one entry per subset column plus a trailing intercept.  The
    subset defaults to all (non-sensitive) feature columns; restricting it to
    a single column reproduces the single-feature fairness-model setup.
    """

    gamma: np.ndarray
    feature_subset: tuple[str, ...]

    def __post_init__(self) -> None:
        gamma = np.asarray(self.gamma, dtype=float)
        subset = tuple(self.feature_subset)
        if gamma.ndim != 1:
            raise ValueError("gamma must be 1-D")
        if gamma.shape[0] != len(subset) + 1:
            raise ValueError(
                f"gamma has {gamma.shape[0]} entries, expected {len(subset)} + intercept"
            )
        if not np.all(np.isfinite(gamma)):
            raise ValueError("gamma must be finite")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "feature_subset", subset)

    @staticmethod
    def zeros(feature_subset) -> "SimpleExpertParams":
        subset = tuple(feature_subset)
        return SimpleExpertParams(np.zeros(len(subset) + 1), subset)


def design_matrix(features: FeatureMatrix, subset) -> np.ndarray:
    """Subset columns with an appended intercept column of ones."""
    subset = tuple(subset)
    missing = [c for c in subset if c not in features.column_names]
    if missing:
        raise KeyError(f"feature column(s) not present: {missing}")
    cols = [features.column_names.index(c) for c in subset]
    ones = np.ones((features.n, 1))
    if not cols:
        return ones
    return np.hstack([features.values[:, cols], ones])


def linear_predictor(params: SimpleExpertParams, features: FeatureMatrix) -> np.ndarray:
    return design_matrix(features, params.feature_subset) @ params.gamma


def logistic_expert(params: SimpleExpertParams, features: FeatureMatrix) -> np.ndarray:
    """Per-row probability sigmoid(x_sub . gamma), strictly inside (0, 1)."""
    return sigmoid(linear_predictor(params, features))


def linear_expert(params: SimpleExpertParams, features: FeatureMatrix) -> np.ndarray:
    """Per-row real-valued score x_sub . gamma."""
    return linear_predictor(params, features)


def cox_expert_curves(
    params: SimpleExpertParams, features: FeatureMatrix, grid: TimeGrid,
) -> SurvivalCurves:
    """Survival curves S(t|x) = exp(-t * exp(x_sub . gamma)) on the grid.

    Assumes a unit constant baseline hazard, so each row is exp(-t) scaled in
    the hazard by the exponentiated (clamped) linear predictor; rows start at
    exactly 1 and decrease strictly for t > 0.
    """
    lin = np.clip(linear_predictor(params, features), -LINPRED_CLAMP, LINPRED_CLAMP)
    rates = np.exp(lin)
    probs = np.exp(-np.outer(rates, grid.times))
    return SurvivalCurves(grid, probs)
