"""Command-line surface: data generation, fitting, prediction, evaluation,
and lambda sweeps.

Exit codes: 0 success, 1 validation failure, 2 I/O failure.  Prediction never
reads sensitive-group information; extra feature columns are ignored with a
notice so outputs cannot depend on them.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .data import (
    Dataset,
    FeatureMatrix,
    GroupAssignment,
    GroupMode,
    TaskKind,
    split_train_test,
    validate_dataset,
)
from .fairness import FairnessKind
from .fileio import (
    ModelFile,
    SweepRecord,
    metric_report_json,
    read_features,
    read_features_subset,
    read_groups,
    read_labels,
    read_model,
    read_predictions,
    sweep_columns,
    write_curves,
    write_features,
    write_groups,
    write_labels,
    write_model,
    write_predictions,
    write_score_preds,
    write_sweep_tsv,
)
from .losses import FidelityKind
from .metrics import evaluate_components
from .numerics import IntegratorConfig
from .objective import ObjectiveSpec, VariantKind, combined_predictions
from .optimizer import (
    OptimizerOptions,
    fair_predictions_from_expert,
    fit,
    fit_expert_to_labels,
)
from .synth import generate

TWO_PRETRAINED = (VariantKind.TWO_PRETRAINED_MIXTURE, VariantKind.TWO_PRETRAINED_MOE)

SWEEP_HELP = (
    "Fit every (variant, lambda) pair on the train split and evaluate on the "
    "test split. Output TSV columns, in order: variant, lambda, objective, "
    "iterations, converged, then the task metrics (classification: accuracy, "
    "dp_gap, eo_gap; regression: mse, sp_auc; survival: c_index, ibs, gf_max, "
    "gf_avg). Rows are sorted by (variant, lambda)."
)


class _Settings:
    """Flag values overriding --config file entries."""

    def __init__(self, args: argparse.Namespace):
        self.flags = vars(args)
        self.config: dict = {}
        path = self.flags.get("config")
        if path:
            with open(Path(path), encoding="utf-8") as fh:
                self.config = json.load(fh)
        if "lambda" in self.config:  # flag dest is 'lam' ('lambda' is reserved)
            self.config.setdefault("lam", self.config.pop("lambda"))

    def get(self, key, default=None):
        value = self.flags.get(key)
        if value is not None:
            return value
        return self.config.get(key, default)

    def require(self, key):
        value = self.get(key)
        if value is None:
            flag = "--" + key.replace("_", "-")
            raise ValueError(f"missing required setting {key!r} (use {flag} or --config)")
        return value


def _parse_task(value) -> TaskKind:
    return value if isinstance(value, TaskKind) else TaskKind(value)


def _parse_variants(value) -> list[VariantKind]:
    if isinstance(value, VariantKind):
        return [value]
    if isinstance(value, str):
        value = [v for v in value.split(",") if v]
    return [v if isinstance(v, VariantKind) else VariantKind(v) for v in value]


def _parse_lambdas(value) -> list[float]:
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, str):
        value = [v for v in value.split(",") if v]
    return [float(v) for v in value]


def _optimizer_options(settings: _Settings) -> OptimizerOptions:
    cfg = dict(settings.config.get("optimizer", {}))
    for key in ("memory", "max_iters", "grad_tol", "fd_step", "restarts"):
        if settings.flags.get(key) is not None:
            cfg[key] = settings.flags[key]
    return OptimizerOptions(**cfg)


def _integrator_config(settings: _Settings) -> IntegratorConfig:
    return IntegratorConfig(**settings.config.get("integrator", {}))


def _expert_features(settings: _Settings):
    value = settings.get("expert_features")
    if value is None:
        return None
    if isinstance(value, str):
        value = [v for v in value.split(",") if v]
    return tuple(value)


def _group_mode(settings: _Settings) -> GroupMode:
    value = settings.get("group_mode", GroupMode.INTERSECTIONAL.value)
    return value if isinstance(value, GroupMode) else GroupMode(value.replace("-", "_"))


def _load_dataset(settings: _Settings, task: TaskKind, need_labels: bool) -> Dataset:
    features = read_features(settings.require("features"))
    groups = read_groups(settings.require("groups"), _group_mode(settings))
    perf = read_predictions(settings.require("perf_preds"), task)
    labels = None
    labels_path = settings.get("labels")
    if labels_path is not None:
        labels = read_labels(labels_path, task)
    elif need_labels:
        raise ValueError("this command requires --labels")
    fair = None
    fair_path = settings.get("fair_preds")
    if fair_path is not None:
        fair = read_predictions(fair_path, task)
    return Dataset(
        features=features, groups=groups, perf_preds=perf, labels=labels, fair_preds=fair
    )


def _check_valid(ds: Dataset, task: TaskKind) -> None:
    report = validate_dataset(ds, task)
    if not report.ok:
        raise ValueError("invalid dataset:\n  " + "\n  ".join(report.violations))


def _build_spec(settings: _Settings, task: TaskKind, variant: VariantKind, lam: float) -> ObjectiveSpec:
    fidelity = settings.get("fidelity")
    fairness = settings.get("fairness")
    return ObjectiveSpec(
        task=task,
        variant=variant,
        lam=lam,
        fidelity=None if fidelity is None else FidelityKind(fidelity),
        fairness=None if fairness is None else FairnessKind(fairness),
        integrator=_integrator_config(settings),
    )


def _attach_auto_fair(task, train: Dataset, test: Dataset | None, settings, opts):
    """Fit the simple expert on train labels as the fairness model."""
    expert = fit_expert_to_labels(task, train, _expert_features(settings), opts)
    train = replace(train, fair_preds=fair_predictions_from_expert(task, expert, train))
    if test is not None:
        test = replace(test, fair_preds=fair_predictions_from_expert(task, expert, test))
    return expert, train, test


def cmd_gen_synthetic(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    task = _parse_task(settings.require("task"))
    out_dir = Path(settings.require("out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle = generate(
        task,
        int(settings.require("n")),
        float(settings.get("bias_strength", 1.0)),
        int(settings.get("seed", 0)),
        float(settings.get("censor_fraction", 0.48)),
    )
    write_features(out_dir / "features.csv", bundle.features)
    write_groups(out_dir / "groups.csv", bundle.group_values)
    write_labels(out_dir / "labels.csv", task, bundle.labels)
    if task is TaskKind.SURVIVAL:
        perf_path = out_dir / "perf_curves.csv"
        write_curves(perf_path, bundle.perf_preds)
    else:
        perf_path = out_dir / "perf_preds.csv"
        write_score_preds(perf_path, bundle.perf_preds)
    for name in ("features.csv", "groups.csv", "labels.csv", perf_path.name):
        print(out_dir / name)
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    task = _parse_task(settings.require("task"))
    variant = _parse_variants(settings.require("variant"))[0]
    lam = _parse_lambdas(settings.require("lam"))[0]
    seed = int(settings.get("seed", 0))
    opts = _optimizer_options(settings)

    ds = _load_dataset(settings, task, need_labels=False)
    _check_valid(ds, task)

    fair_expert = None
    if variant in TWO_PRETRAINED and ds.fair_preds is None:
        if ds.labels is None:
            raise ValueError(
                "two-pretrained variants need --fair-preds, or --labels to auto-fit "
                "a fairness model"
            )
        fair_expert, ds, _ = _attach_auto_fair(task, ds, None, settings, opts)

    spec = _build_spec(settings, task, variant, lam)
    result = fit(spec, ds, opts, seed=seed, expert_features=_expert_features(settings))
    model = ModelFile(
        spec=spec,
        params=result.params,
        feature_columns=ds.features.column_names,
        seed=seed,
        objective_value=result.objective_value,
        iterations=result.iterations,
        converged=result.converged,
        fair_expert=fair_expert,
    )
    write_model(settings.require("out"), model)
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    model = read_model(settings.require("model"))
    task = model.spec.task
    features, extra = read_features_subset(settings.require("features"), model.feature_columns)
    if extra:
        print(f"notice: ignoring feature column(s) not in the model: {extra}", file=sys.stderr)
    perf = read_predictions(settings.require("perf_preds"), task)

    fair = None
    fair_path = settings.get("fair_preds")
    if fair_path is not None:
        fair = read_predictions(fair_path, task)
    # prediction is blind to sensitive groups; a single dummy group stands in
    groups = GroupAssignment(np.zeros(features.n, dtype=int), ("all",))
    ds = Dataset(features=features, groups=groups, perf_preds=perf, fair_preds=fair)

    if model.spec.variant in TWO_PRETRAINED and ds.fair_preds is None:
        if model.fair_expert is None:
            raise ValueError("this model requires --fair-preds at prediction time")
        ds = replace(ds, fair_preds=fair_predictions_from_expert(task, model.fair_expert, ds))

    combined = combined_predictions(model.spec, model.params, ds)
    write_predictions(settings.require("out"), combined)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    task = _parse_task(settings.require("task"))
    preds = read_predictions(settings.require("predictions"), task)
    labels = read_labels(settings.require("labels"), task)
    groups = read_groups(settings.require("groups"), _group_mode(settings))
    report = evaluate_components(task, labels, groups, preds)
    print(metric_report_json(report))
    return 0


def _sweep_point(spec, train, test, opts, seed, expert_features, task):
    try:
        result = fit(spec, train, opts, seed=seed, expert_features=expert_features)
        combined = combined_predictions(spec, result.params, test)
        report = evaluate_components(task, test.labels, test.groups, combined)
        return SweepRecord(
            variant=spec.variant,
            lam=spec.lam,
            objective_value=result.objective_value,
            iterations=result.iterations,
            converged=result.converged,
            metrics=report,
        )
    except (ValueError, KeyError, ArithmeticError) as exc:
        print(f"warning: fit failed for {spec.variant.value} lambda={spec.lam}: {exc}", file=sys.stderr)
        return SweepRecord(
            variant=spec.variant,
            lam=spec.lam,
            objective_value=float("nan"),
            iterations=0,
            converged=False,
            metrics=None,
        )


def cmd_sweep(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    task = _parse_task(settings.require("task"))
    variants = _parse_variants(settings.require("variant"))
    lambdas = _parse_lambdas(settings.require("lambda_list"))
    seed = int(settings.get("seed", 0))
    threads = int(settings.get("threads", 1))
    opts = _optimizer_options(settings)
    expert_features = _expert_features(settings)

    ds = _load_dataset(settings, task, need_labels=True)
    _check_valid(ds, task)
    train, test = split_train_test(ds, float(settings.get("test_fraction", 0.2)), seed)

    if any(v in TWO_PRETRAINED for v in variants) and ds.fair_preds is None:
        _, train, test = _attach_auto_fair(task, train, test, settings, opts)

    points = sorted(
        (_build_spec(settings, task, variant, lam) for variant in variants for lam in lambdas),
        key=lambda spec: (spec.variant.value, spec.lam),
    )
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(
                pool.map(
                    lambda spec: _sweep_point(spec, train, test, opts, seed, expert_features, task),
                    points,
                )
            )
    else:
        records = [
            _sweep_point(spec, train, test, opts, seed, expert_features, task) for spec in points
        ]

    write_sweep_tsv(settings.require("out"), task, records)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with settings; flags override it")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")


def _add_data_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--features", help="features CSV (header = column names)")
    parser.add_argument("--groups", help="sensitive-attribute CSV (one column per attribute)")
    parser.add_argument("--labels", help="labels CSV (label | target | time,event)")
    parser.add_argument("--perf-preds", dest="perf_preds", help="performance-model predictions")
    parser.add_argument("--fair-preds", dest="fair_preds", help="fairness-model predictions")
    parser.add_argument(
        "--group-mode",
        dest="group_mode",
        choices=[m.value.replace("_", "-") for m in GroupMode],
        help="how multiple sensitive attributes combine (default intersectional)",
    )


def _add_fit_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--task", choices=[t.value for t in TaskKind])
    parser.add_argument("--fidelity", choices=[f.value for f in FidelityKind])
    parser.add_argument(
        "--expert-features",
        dest="expert_features",
        help="comma-separated expert feature subset (default: all columns)",
    )
    parser.add_argument("--max-iters", dest="max_iters", type=int)
    parser.add_argument("--restarts", type=int)
    parser.add_argument(
        "--fd-step",
        dest="fd_step",
        type=float,
        help="finite-difference step; rank-based penalties (sp_auc) need a "
        "coarse step such as 1e-2 to see through their plateaus",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairmix",
        description=(
            "Post-process black-box predictions for group fairness by blending "
            "them with a simple expert via a constant or logistic gate."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synthetic", help="write a synthetic benchmark CSV bundle")
    _add_common(p)
    p.add_argument("--task", choices=[t.value for t in TaskKind])
    p.add_argument("--n", type=int, help="number of instances (>= 20)")
    p.add_argument("--bias-strength", dest="bias_strength", type=float)
    p.add_argument("--censor-fraction", dest="censor_fraction", type=float)
    p.add_argument("--out", help="output directory")
    p.set_defaults(handler=cmd_gen_synthetic)

    p = sub.add_parser("fit", help="fit a combiner and write a model file")
    _add_common(p)
    _add_data_flags(p)
    _add_fit_flags(p)
    p.add_argument("--variant", choices=[v.value for v in VariantKind])
    p.add_argument("--lambda", dest="lam", type=float, help="fairness weight")
    p.add_argument("--out", help="model JSON path")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("predict", help="apply a fitted model (group-blind)")
    _add_common(p)
    p.add_argument("--model", help="model JSON from fit")
    p.add_argument("--features", help="features CSV")
    p.add_argument("--perf-preds", dest="perf_preds")
    p.add_argument("--fair-preds", dest="fair_preds")
    p.add_argument("--out", help="output predictions path")
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("evaluate", help="print metrics for a prediction file")
    _add_common(p)
    p.add_argument("--task", choices=[t.value for t in TaskKind])
    p.add_argument("--predictions")
    p.add_argument("--labels")
    p.add_argument("--groups")
    p.add_argument(
        "--group-mode",
        dest="group_mode",
        choices=[m.value.replace("_", "-") for m in GroupMode],
    )
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("sweep", help="lambda sweep to a TSV", description=SWEEP_HELP)
    _add_common(p)
    _add_data_flags(p)
    _add_fit_flags(p)
    p.add_argument("--variant", help="comma-separated variant list")
    p.add_argument("--lambda-list", dest="lambda_list", help="comma-separated lambda values")
    p.add_argument("--test-fraction", dest="test_fraction", type=float)
    p.add_argument("--threads", type=int, help="concurrent sweep points (default 1)")
    p.add_argument("--out", help="output TSV path")
    p.set_defaults(handler=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
