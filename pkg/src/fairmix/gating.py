"""Mixture weights: a constant coefficient or a logistic gate over features."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .data import FeatureMatrix
from .numerics import sigmoid


class GateVariant(Enum):
    CONSTANT = "constant"
    LOGISTIC = "logistic"


@dataclass(frozen=True)
class GateParams:
    """Parameters of the blending weight.

    CONSTANT holds a fixed alpha in [0, 1]; LOGISTIC holds coefficients
    ``beta`` over the feature columns plus an intercept ``beta0`` and yields
    a weight strictly inside (0, 1) per instance.
    """

    variant: GateVariant
    alpha: float | None = None
    beta: np.ndarray | None = None
    beta0: float | None = None

    def __post_init__(self) -> None:
        if self.variant is GateVariant.CONSTANT:
            if self.alpha is None or not 0.0 <= self.alpha <= 1.0:
                raise ValueError("constant gate requires alpha in [0, 1]")
        else:
            if self.beta is None or self.beta0 is None:
                raise ValueError("logistic gate requires beta and beta0")
            beta = np.asarray(self.beta, dtype=float)
            if beta.ndim != 1:
                raise ValueError("beta must be 1-D")
            if not (np.all(np.isfinite(beta)) and np.isfinite(self.beta0)):
                raise ValueError("logistic gate parameters must be finite")
            object.__setattr__(self, "beta", beta)

    @staticmethod
    def constant(alpha: float) -> "GateParams":
        return GateParams(GateVariant.CONSTANT, alpha=float(alpha))

    @staticmethod
    def logistic(beta, beta0: float) -> "GateParams":
        return GateParams(GateVariant.LOGISTIC, beta=np.asarray(beta, float), beta0=float(beta0))


def gate_weight(params: GateParams, x) -> float:
    """Blending weight for a single feature row."""
    if params.variant is GateVariant.CONSTANT:
        return float(params.alpha)
    x = np.asarray(x, dtype=float)
    if x.shape != params.beta.shape:
        raise ValueError(
            f"feature row has {x.shape[0]} entries, gate expects {params.beta.shape[0]}"
        )
    return float(sigmoid(float(x @ params.beta) + params.beta0))


def gate_weights(params: GateParams, features: FeatureMatrix) -> np.ndarray:
    """Rowwise blending weights for a whole feature matrix."""
    if params.variant is GateVariant.CONSTANT:
        return np.full(features.n, float(params.alpha))
    if features.d != params.beta.shape[0]:
        raise ValueError(
            f"feature matrix has {features.d} columns, gate expects {params.beta.shape[0]}"
        )
    return sigmoid(features.values @ params.beta + params.beta0)
