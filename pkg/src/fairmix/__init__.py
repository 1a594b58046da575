"""Fairness-aware post-processing of black-box predictions by blending them
with a jointly fitted simple expert through a constant or logistic gate."""

from .data import (
    Dataset,
    FeatureMatrix,
    GroupAssignment,
    GroupMode,
    PredictionKind,
    ScorePredictions,
    SurvivalCurves,
    SurvivalOutcomes,
    TaskKind,
    TimeGrid,
    ValidationReport,
    split_train_test,
    validate_dataset,
)
from .experts import SimpleExpertParams, cox_expert_curves, linear_expert, logistic_expert
from .fairness import (
    FairnessKind,
    gf_at_time,
    gf_integrated,
    gf_max_over_grid,
    sp_auc_penalty,
    sp_penalty,
)
from .gating import GateParams, GateVariant, gate_weight, gate_weights
from .losses import (
    FidelityKind,
    ce_fidelity,
    ce_fidelity_swapped,
    se_fidelity,
    survival_fidelity,
)
from .metrics import (
    MetricReport,
    accuracy,
    c_index,
    dp_gap,
    eo_gap,
    evaluate,
    ibs,
    kaplan_meier,
    mse,
)
from .numerics import IntegratorConfig, adaptive_even_grid_integral, empirical_quantile, sigmoid
from .objective import (
    CombinerParams,
    ObjectiveSpec,
    VariantKind,
    combine_scores,
    combine_survival,
    combined_predictions,
    evaluate_objective,
    frappe_combine,
    pack_params,
    unpack_params,
    variant_of,
)
from .optimizer import (
    FitResult,
    OptimizerOptions,
    central_fd_gradient,
    fit,
    fit_expert_to_labels,
    minimize_box_lbfgs,
    rank_single_feature_experts,
)

__version__ = "0.1.0"
