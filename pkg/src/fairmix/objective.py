"""Combined predictors, parameter packing, and the fitting objectives.

The combined model blends a fixed performance model with a second predictor
(a jointly fitted simple expert, or a second pre-trained fairness model)
through a constant or logistic gate; the additive-correction baseline is also
provided.  The objective is the mean fidelity to the performance model plus
``lambda`` times the task's fairness penalty, all evaluated on one dataset.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .data import (
    Dataset,
    FeatureMatrix,
    PredictionKind,
    ScorePredictions,
    SurvivalCurves,
    TaskKind,
)
from .experts import SimpleExpertParams, cox_expert_curves, linear_expert, logistic_expert
from .fairness import (
    FairnessKind,
    gf_integrated,
    sp_auc_penalty,
    sp_penalty,
)
from .gating import GateParams, GateVariant, gate_weights
from .losses import (
    CLAMP_EPS,
    FidelityKind,
    ce_fidelity,
    ce_fidelity_swapped,
)
from .numerics import IntegratorConfig, sigmoid, trapezoid


class VariantKind(Enum):
    ONE_PRETRAINED_MIXTURE = "one_pretrained_mixture"
    ONE_PRETRAINED_MOE = "one_pretrained_moe"
    TWO_PRETRAINED_MIXTURE = "two_pretrained_mixture"
    TWO_PRETRAINED_MOE = "two_pretrained_moe"
    FRAPPE_BASELINE = "frappe_baseline"


_TASK_FIDELITIES = {
    TaskKind.BINARY_CLASSIFICATION: (FidelityKind.CROSS_ENTROPY, FidelityKind.CROSS_ENTROPY_SWAPPED),
    TaskKind.REGRESSION: (FidelityKind.SQUARED_ERROR,),
    TaskKind.SURVIVAL: (FidelityKind.INTEGRATED_SURVIVAL_SE,),
}

_TASK_FAIRNESS = {
    TaskKind.BINARY_CLASSIFICATION: FairnessKind.STATISTICAL_PARITY,
    TaskKind.REGRESSION: FairnessKind.STATISTICAL_PARITY_AUC,
    TaskKind.SURVIVAL: FairnessKind.GROUP_FAIRNESS_SURVIVAL,
}


def default_fidelity(task: TaskKind) -> FidelityKind:
    return _TASK_FIDELITIES[task][0]


def default_fairness(task: TaskKind) -> FairnessKind:
    return _TASK_FAIRNESS[task]


@dataclass(frozen=True)
class CombinerParams:
    """All learnable parameters of one combined predictor.

    Exactly one structure is legal per variant: the one-pretrained variants
    carry a gate plus a simple expert, the two-pretrained variants a gate
    only, and the additive baseline carries the correction coefficients
    ``theta`` (the gate is a fixed alpha=1 placeholder there).
    """

    gate: GateParams
    expert: SimpleExpertParams | None = None
    theta: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.theta is not None:
            theta = np.asarray(self.theta, dtype=float)
            if theta.ndim != 1 or not np.all(np.isfinite(theta)):
                raise ValueError("theta must be a finite 1-D vector")
            object.__setattr__(self, "theta", theta)
            if self.expert is not None:
                raise ValueError("theta and a simple expert are mutually exclusive")


def variant_of(params: CombinerParams) -> VariantKind:
    """The variant a parameter structure belongs to (unambiguous by presence)."""
    if params.theta is not None:
        return VariantKind.FRAPPE_BASELINE
    moe = params.gate.variant is GateVariant.LOGISTIC
    if params.expert is not None:
        return VariantKind.ONE_PRETRAINED_MOE if moe else VariantKind.ONE_PRETRAINED_MIXTURE
    return VariantKind.TWO_PRETRAINED_MOE if moe else VariantKind.TWO_PRETRAINED_MIXTURE


@dataclass(frozen=True)
class ObjectiveSpec:
    """Everything that defines one fitting problem apart from the data."""

    task: TaskKind
    variant: VariantKind
    lam: float
    fidelity: FidelityKind | None = None
    fairness: FairnessKind | None = None
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        fidelity = self.fidelity if self.fidelity is not None else default_fidelity(self.task)
        fairness = self.fairness if self.fairness is not None else default_fairness(self.task)
        if fidelity not in _TASK_FIDELITIES[self.task]:
            raise ValueError(f"{fidelity.value} fidelity is not valid for {self.task.value}")
        if fairness is not _TASK_FAIRNESS[self.task]:
            raise ValueError(f"{fairness.value} fairness is not valid for {self.task.value}")
        if self.variant is VariantKind.FRAPPE_BASELINE and self.task is TaskKind.SURVIVAL:
            raise ValueError("the additive baseline does not support survival outputs")
        object.__setattr__(self, "fidelity", fidelity)
        object.__setattr__(self, "fairness", fairness)


def combine_scores(
    gate: GateParams,
    features: FeatureMatrix,
    perf: ScorePredictions,
    second: ScorePredictions,
) -> ScorePredictions:
    """Per-instance convex blend alpha(x)*perf + (1-alpha(x))*second."""
    if perf.n != second.n or perf.n != features.n:
        raise ValueError("prediction lengths do not agree")
    w = gate_weights(gate, features)
    return ScorePredictions(w * perf.values + (1.0 - w) * second.values, perf.kind)


def combine_survival(
    gate: GateParams,
    features: FeatureMatrix,
    s_perf: SurvivalCurves,
    s_second: SurvivalCurves,
) -> SurvivalCurves:
    """Pointwise convex blend of two survival-curve sets on a shared grid."""
    if s_perf.n != s_second.n or s_perf.n != features.n:
        raise ValueError("curve set sizes do not agree")
    if not np.array_equal(s_perf.grid.times, s_second.grid.times):
        raise ValueError("curve sets are on different time grids")
    w = gate_weights(gate, features)[:, None]
    return SurvivalCurves(s_perf.grid, w * s_perf.probs + (1.0 - w) * s_second.probs)


def frappe_combine(
    theta: np.ndarray, features: FeatureMatrix, perf: ScorePredictions,
) -> ScorePredictions:
    """Additive linear correction theta . [x, 1] applied to the base output.

    Regression adds the correction directly; classification applies it in
    logit space (with clamping) so outputs stay valid probabilities.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape[0] != features.d + 1:
        raise ValueError(f"theta needs {features.d} coefficients plus an intercept")
    correction = features.values @ theta[:-1] + theta[-1]
    if perf.kind is PredictionKind.REGRESSION:
        return ScorePredictions(perf.values + correction, perf.kind)
    p = np.clip(perf.values, CLAMP_EPS, 1.0 - CLAMP_EPS)
    return ScorePredictions(sigmoid(np.log(p / (1.0 - p)) + correction), perf.kind)


def pack_params(params: CombinerParams) -> tuple[np.ndarray, list[tuple[float, float]]]:
    """Flatten params to an optimizer vector with per-entry box bounds.

    Order is [gate, expert, theta]; only a constant alpha is box-bounded.
    The additive baseline packs theta alone (its gate placeholder is fixed).
    """
    entries: list[float] = []
    bounds: list[tuple[float, float]] = []
    unbounded = (-np.inf, np.inf)
    if params.theta is None:
        if params.gate.variant is GateVariant.CONSTANT:
            entries.append(float(params.gate.alpha))
            bounds.append((0.0, 1.0))
        else:
            entries.extend(params.gate.beta.tolist())
            entries.append(float(params.gate.beta0))
            bounds.extend([unbounded] * (params.gate.beta.size + 1))
    if params.expert is not None:
        entries.extend(params.expert.gamma.tolist())
        bounds.extend([unbounded] * params.expert.gamma.size)
    if params.theta is not None:
        entries.extend(params.theta.tolist())
        bounds.extend([unbounded] * params.theta.size)
    return np.asarray(entries, dtype=float), bounds


def unpack_params(template: CombinerParams, vector: np.ndarray) -> CombinerParams:
    """Inverse of :func:`pack_params` against a structural template."""
    vector = np.asarray(vector, dtype=float)
    pos = 0
    gate = template.gate
    if template.theta is None:
        if gate.variant is GateVariant.CONSTANT:
            gate = GateParams.constant(vector[pos])
            pos += 1
        else:
            d = gate.beta.size
            gate = GateParams.logistic(vector[pos : pos + d], vector[pos + d])
            pos += d + 1
    expert = None
    if template.expert is not None:
        k = template.expert.gamma.size
        expert = SimpleExpertParams(vector[pos : pos + k], template.expert.feature_subset)
        pos += k
    theta = None
    if template.theta is not None:
        theta = vector[pos : pos + template.theta.size].copy()
        pos += template.theta.size
    if pos != vector.size:
        raise ValueError(f"vector has {vector.size} entries, template expects {pos}")
    return CombinerParams(gate=gate, expert=expert, theta=theta)


def _second_scores(
    spec: ObjectiveSpec, params: CombinerParams, ds: Dataset,
) -> ScorePredictions:
    if params.expert is not None:
        if spec.task is TaskKind.BINARY_CLASSIFICATION:
            vals = logistic_expert(params.expert, ds.features)
            return ScorePredictions(vals, PredictionKind.PROBABILITY)
        return ScorePredictions(linear_expert(params.expert, ds.features), PredictionKind.REGRESSION)
    if ds.fair_preds is None:
        raise ValueError("two-pretrained variants require fair-model predictions")
    if not isinstance(ds.fair_preds, ScorePredictions):
        raise ValueError("fair predictions have the wrong shape for this task")
    return ds.fair_preds


def combined_predictions(spec: ObjectiveSpec, params: CombinerParams, ds: Dataset):
    """The combined model's predictions on a dataset (scores or curves)."""
    if variant_of(params) is not spec.variant:
        raise ValueError("parameter structure does not match the spec variant")
    if spec.task is TaskKind.SURVIVAL:
        s_perf = ds.perf_preds
        if not isinstance(s_perf, SurvivalCurves):
            raise ValueError("survival task requires survival-curve predictions")
        if params.expert is not None:
            s_second = cox_expert_curves(params.expert, ds.features, s_perf.grid)
        else:
            if not isinstance(ds.fair_preds, SurvivalCurves):
                raise ValueError("two-pretrained survival variants require fair curves")
            s_second = ds.fair_preds
        return combine_survival(params.gate, ds.features, s_perf, s_second)
    perf = ds.perf_preds
    if not isinstance(perf, ScorePredictions):
        raise ValueError(f"{spec.task.value} task requires scalar predictions")
    if spec.variant is VariantKind.FRAPPE_BASELINE:
        return frappe_combine(params.theta, ds.features, perf)
    return combine_scores(params.gate, ds.features, perf, _second_scores(spec, params, ds))


def evaluate_objective(spec: ObjectiveSpec, params: CombinerParams, ds: Dataset) -> float:
    """Mean fidelity plus lambda times the fairness penalty on ``ds``.

    With lambda = 0 the fairness term (and hence the group assignment) is
    never touched.
    """
    combined = combined_predictions(spec, params, ds)

    if spec.task is TaskKind.SURVIVAL:
        diff2 = (combined.probs - ds.perf_preds.probs) ** 2
        fid = float(trapezoid(diff2, ds.perf_preds.grid.times, axis=1).mean())
        if spec.lam == 0.0:
            return fid
        return fid + spec.lam * gf_integrated(combined, ds.groups)

    comb = combined.values
    perf = ds.perf_preds.values
    if spec.fidelity is FidelityKind.CROSS_ENTROPY:
        fid = float(np.mean(ce_fidelity(comb, perf)))
    elif spec.fidelity is FidelityKind.CROSS_ENTROPY_SWAPPED:
        fid = float(np.mean(ce_fidelity_swapped(comb, perf)))
    else:
        fid = float(np.mean((comb - perf) ** 2))
    if spec.lam == 0.0:
        return fid
    if spec.fairness is FairnessKind.STATISTICAL_PARITY:
        fair = sp_penalty(comb, ds.groups)
    else:
        fair = sp_auc_penalty(comb, ds.groups, spec.integrator)
    return fid + spec.lam * fair
