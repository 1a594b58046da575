"""Evaluation metrics for reporting fairness/performance trade-offs.

These are reporting quantities, independent of the penalties used during
fitting: accuracy plus demographic-parity and equalized-odds gaps for
classification, MSE plus statistical-parity AUC for regression, and
Harrell's C-index, the censoring-weighted integrated Brier score, and the
groupwise survival deviation (max and time-averaged) for survival.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import (
    Dataset,
    GroupAssignment,
    GroupMode,
    ScorePredictions,
    SurvivalCurves,
    SurvivalOutcomes,
    TaskKind,
)
from .fairness import gf_integrated, gf_max_over_grid, sp_auc_penalty
from .numerics import trapezoid


@dataclass(frozen=True)
class MetricReport:
    task: TaskKind
    values: dict[str, float]

    def __getitem__(self, key: str) -> float:
        return self.values[key]


def accuracy(preds: np.ndarray, labels: np.ndarray, threshold: float = 0.5) -> float:
    """Fraction of thresholded predictions equal to the labels (ties are positive)."""
    preds = np.asarray(preds, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if preds.size == 0:
        raise ValueError("accuracy of an empty prediction set is undefined")
    if preds.shape != labels.shape:
        raise ValueError("predictions and labels differ in length")
    return float(np.mean((preds >= threshold).astype(float) == labels))


def _positive_rates(
    preds: np.ndarray, groups: GroupAssignment, threshold: float,
) -> list[float]:
    hard = np.asarray(preds, dtype=float) >= threshold
    rates = []
    for g in range(groups.n_groups):
        members = groups.members(g)
        if members.size == 0:
            raise ValueError(f"group {groups.group_labels[g]!r} has no instances")
        rates.append(float(hard[members].mean()))
    return rates


def dp_gap(preds: np.ndarray, groups: GroupAssignment, threshold: float = 0.5) -> float:
    """Range of positive prediction rates across groups (hard thresholded)."""
    if groups.mode is GroupMode.PER_ATTRIBUTE:
        return max(dp_gap(preds, sub, threshold) for sub in groups.sub_assignments)
    rates = _positive_rates(preds, groups, threshold)
    return max(rates) - min(rates)


def eo_gap(
    preds: np.ndarray,
    labels: np.ndarray,
    groups: GroupAssignment,
    threshold: float = 0.5,
) -> float:
    """Sum of the groupwise TPR range and FPR range."""
    if groups.mode is GroupMode.PER_ATTRIBUTE:
        return max(eo_gap(preds, labels, sub, threshold) for sub in groups.sub_assignments)
    hard = np.asarray(preds, dtype=float) >= threshold
    labels = np.asarray(labels, dtype=float)
    tprs, fprs = [], []
    for g in range(groups.n_groups):
        members = groups.members(g)
        label_g = labels[members]
        pos = label_g == 1.0
        name = groups.group_labels[g]
        if not pos.any():
            raise ValueError(f"group {name!r} has no positive labels; TPR undefined")
        if pos.all():
            raise ValueError(f"group {name!r} has no negative labels; FPR undefined")
        hard_g = hard[members]
        tprs.append(float(hard_g[pos].mean()))
        fprs.append(float(hard_g[~pos].mean()))
    return (max(tprs) - min(tprs)) + (max(fprs) - min(fprs))


def mse(preds: np.ndarray, targets: np.ndarray) -> float:
    preds = np.asarray(preds, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if preds.size == 0:
        raise ValueError("mse of an empty prediction set is undefined")
    if preds.shape != targets.shape:
        raise ValueError("predictions and targets differ in length")
    return float(np.mean((preds - targets) ** 2))


@dataclass(frozen=True)
class KaplanMeierCurve:
    """Right-continuous product-limit survival estimate (steps at event times)."""

    times: np.ndarray  # distinct event times, ascending
    probs: np.ndarray  # S immediately after each event time

    def at(self, t):
        """S(t), right-continuous."""
        if self.times.size == 0:
            return np.ones_like(np.asarray(t, dtype=float))
        idx = np.searchsorted(self.times, t, side="right") - 1
        return np.where(idx < 0, 1.0, self.probs[np.maximum(idx, 0)])

    def at_left(self, t):
        """S(t-), the left limit just before t."""
        if self.times.size == 0:
            return np.ones_like(np.asarray(t, dtype=float))
        idx = np.searchsorted(self.times, t, side="left") - 1
        return np.where(idx < 0, 1.0, self.probs[np.maximum(idx, 0)])


def kaplan_meier(outcomes: SurvivalOutcomes) -> KaplanMeierCurve:
    """Standard product-limit estimate from (time, event) outcomes."""
    if outcomes.n < 1:
        raise ValueError("Kaplan-Meier requires at least one outcome")
    times = outcomes.times
    events = outcomes.events
    event_times = np.unique(times[events])
    if event_times.size == 0:
        return KaplanMeierCurve(np.empty(0), np.empty(0))
    surv = np.empty(event_times.size)
    s = 1.0
    for k, t in enumerate(event_times):
        at_risk = int(np.sum(times >= t))
        deaths = int(np.sum((times == t) & events))
        s *= 1.0 - deaths / at_risk
        surv[k] = s
    return KaplanMeierCurve(event_times, surv)


def c_index(risks: np.ndarray, outcomes: SurvivalOutcomes) -> float:
    """Harrell's concordance: over pairs (i, j) with t_i < t_j and an observed
    event at i, the fraction where risk_i > risk_j (risk ties count 1/2)."""
    risks = np.asarray(risks, dtype=float)
    if risks.shape != outcomes.times.shape:
        raise ValueError("risks and outcomes differ in length")
    if risks.size < 2:
        raise ValueError("c_index requires at least two instances")
    t = outcomes.times
    comparable = (t[:, None] < t[None, :]) & outcomes.events[:, None]
    n_comp = int(comparable.sum())
    if n_comp == 0:
        raise ValueError("no comparable pairs (check event indicators and times)")
    higher = risks[:, None] > risks[None, :]
    tied = risks[:, None] == risks[None, :]
    score = float((comparable & higher).sum()) + 0.5 * float((comparable & tied).sum())
    return score / n_comp


def ibs(curves: SurvivalCurves, outcomes: SurvivalOutcomes) -> float:
    """Integrated Brier score over [0, tau] with inverse-probability-of-
    censoring weights from the Kaplan-Meier estimate of the censoring
    distribution (event indicators flipped), normalized by tau."""
    if curves.n != outcomes.n:
        raise ValueError("curves and outcomes differ in length")
    if not outcomes.events.any():
        raise ValueError("ibs requires at least one uncensored event")
    cens_km = kaplan_meier(SurvivalOutcomes(outcomes.times, ~outcomes.events))
    grid = curves.grid.times
    t_obs = outcomes.times

    g_left = np.asarray(cens_km.at_left(t_obs), dtype=float)
    g_grid = np.asarray(cens_km.at(grid), dtype=float)

    dead = (t_obs[:, None] <= grid[None, :]) & outcomes.events[:, None]
    alive = t_obs[:, None] > grid[None, :]

    needs_event_w = dead.any(axis=1)
    if np.any(needs_event_w & (g_left <= 0.0)):
        bad = float(t_obs[np.argmax(needs_event_w & (g_left <= 0.0))])
        raise ValueError(f"censoring survival reaches 0 before event time {bad}")
    cols_alive = alive.any(axis=0)
    if np.any(cols_alive & (g_grid <= 0.0)):
        bad = float(grid[np.argmax(cols_alive & (g_grid <= 0.0))])
        raise ValueError(f"censoring survival reaches 0 at grid time {bad}")

    w_event = np.where(g_left > 0.0, 1.0 / np.where(g_left > 0.0, g_left, 1.0), 0.0)
    w_alive = np.where(g_grid > 0.0, 1.0 / np.where(g_grid > 0.0, g_grid, 1.0), 0.0)

    s = curves.probs
    contrib = dead * (s**2) * w_event[:, None] + alive * ((1.0 - s) ** 2) * w_alive[None, :]
    bs = contrib.mean(axis=0)
    return float(trapezoid(bs, grid)) / curves.grid.tau


def survival_risks(curves: SurvivalCurves, t_index: int | None = None) -> np.ndarray:
    """Scalar risk per instance: 1 - S at a reference grid time (median by default)."""
    idx = curves.grid.m // 2 if t_index is None else t_index
    if not 0 <= idx < curves.grid.m:
        raise IndexError(f"t_index {idx} outside the grid")
    return 1.0 - curves.probs[:, idx]


def evaluate_components(
    task: TaskKind, labels, groups: GroupAssignment, combined,
) -> MetricReport:
    """Task-appropriate metric map from raw labels/groups/predictions."""
    if labels is None:
        raise ValueError("labels are required for evaluation")

    if task is TaskKind.BINARY_CLASSIFICATION:
        if not isinstance(combined, ScorePredictions):
            raise ValueError("classification evaluation requires scalar predictions")
        preds = combined.values
        labels = np.asarray(labels, dtype=float)
        values = {
            "accuracy": accuracy(preds, labels),
            "dp_gap": dp_gap(preds, groups),
            "eo_gap": eo_gap(preds, labels, groups),
        }
    elif task is TaskKind.REGRESSION:
        if not isinstance(combined, ScorePredictions):
            raise ValueError("regression evaluation requires scalar predictions")
        values = {
            "mse": mse(combined.values, np.asarray(labels, dtype=float)),
            "sp_auc": sp_auc_penalty(combined.values, groups),
        }
    else:
        if not isinstance(combined, SurvivalCurves):
            raise ValueError("survival evaluation requires survival curves")
        if not isinstance(labels, SurvivalOutcomes):
            raise ValueError("survival evaluation requires time/event outcomes")
        values = {
            "c_index": c_index(survival_risks(combined), labels),
            "ibs": ibs(combined, labels),
            "gf_max": gf_max_over_grid(combined, groups),
            "gf_avg": gf_integrated(combined, groups) / combined.grid.tau,
        }
    return MetricReport(task, values)


def evaluate(task: TaskKind, ds: Dataset, combined) -> MetricReport:
    """Task-appropriate metric map for combined predictions on ``ds``."""
    return evaluate_components(task, ds.labels, ds.groups, combined)
