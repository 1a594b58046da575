"""A compact random survival forest built on scikit-learn tree machinery.

scikit-survival is not available in this environment, so each tree is a CART
regressor grown on a bootstrap sample against the null-model martingale
residual (event indicator minus Nelson-Aalen cumulative hazard at the
observed time), a standard risk surrogate for survival splitting.  Leaves
store the Kaplan-Meier curve of their bootstrap members; the forest predicts
the average of leaf curves over trees on a shared event-time grid.
"""

from __future__ import annotations

import numpy as np
from sklearn.tree import DecisionTreeRegressor


def event_time_grid(times: np.ndarray, events: np.ndarray) -> np.ndarray:
    """Distinct observed event times prefixed with t=0."""
    distinct = np.unique(times[events.astype(bool)])
    return np.concatenate([[0.0], distinct])


def nelson_aalen(times: np.ndarray, events: np.ndarray):
    """Cumulative-hazard step estimate; returns an evaluator over times."""
    events = events.astype(bool)
    distinct = np.unique(times[events])
    hazards = np.zeros(distinct.size)
    cum = 0.0
    for k, t in enumerate(distinct):
        at_risk = int(np.sum(times >= t))
        deaths = int(np.sum((times == t) & events))
        cum += deaths / at_risk
        hazards[k] = cum

    def evaluate(ts):
        idx = np.searchsorted(distinct, ts, side="right") - 1
        return np.where(idx < 0, 0.0, hazards[np.maximum(idx, 0)])

    return evaluate


def km_curve(times: np.ndarray, events: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Kaplan-Meier curve of one leaf's members evaluated on the grid."""
    events = events.astype(bool)
    distinct = np.unique(times[events])
    surv = np.ones(grid.size)
    s = 1.0
    for t in distinct:  # ascending, so later steps overwrite the tail
        at_risk = int(np.sum(times >= t))
        deaths = int(np.sum((times == t) & events))
        s *= 1.0 - deaths / at_risk
        surv[grid >= t] = s
    return surv


class RandomSurvivalForest:
    """Bagged survival trees with KM leaf estimates and curve averaging."""

    def __init__(self, n_trees: int = 1000, min_leaf: int = 10, seed: int = 0):
        self.n_trees = n_trees
        self.min_leaf = min_leaf
        self.seed = seed
        self._trees: list[tuple[DecisionTreeRegressor, dict[int, np.ndarray]]] = []
        self.grid: np.ndarray | None = None

    def fit(self, X: np.ndarray, times: np.ndarray, events: np.ndarray):
        events = events.astype(bool)
        if not events.any():
            raise ValueError("survival forest needs at least one observed event")
        self.grid = event_time_grid(times, events)
        residual = events.astype(float) - nelson_aalen(times, events)(times)
        rng = np.random.default_rng(self.seed)
        n = X.shape[0]
        self._trees = []
        for k in range(self.n_trees):
            rows = rng.integers(0, n, size=n)
            tree = DecisionTreeRegressor(
                max_features="sqrt",
                min_samples_leaf=self.min_leaf,
                random_state=int(rng.integers(0, 2**31 - 1)),
            )
            tree.fit(X[rows], residual[rows])
            leaves = tree.apply(X[rows])
            curves = {
                int(leaf): km_curve(times[rows][leaves == leaf], events[rows][leaves == leaf], self.grid)
                for leaf in np.unique(leaves)
            }
            self._trees.append((tree, curves))
        return self

    def predict_curves(self, X: np.ndarray) -> np.ndarray:
        if self.grid is None:
            raise RuntimeError("fit before predict")
        total = np.zeros((X.shape[0], self.grid.size))
        for tree, curves in self._trees:
            leaves = tree.apply(X)
            for i, leaf in enumerate(leaves):
                total[i] += curves[int(leaf)]
        return total / len(self._trees)
