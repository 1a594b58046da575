#!/usr/bin/env python3
"""Train a reference base model on a CSV dataset and export everything the
post-processing CLI needs: features, groups, labels, and base predictions.

Base models: random forest (100 estimators) or a single-hidden-layer MLP with
20 units for classification, random forest regressor for regression, and a
1000-tree random survival forest for survival.  Continuous features are
standardized before training; all outputs use the CLI's file schemas.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
from sklearn.ensemble import RandomForestClassifier, RandomForestRegressor
from sklearn.neural_network import MLPClassifier

from common import (
    load_dataset,
    write_binary_labels,
    write_curves,
    write_features,
    write_groups,
    write_outcomes,
    write_preds,
    write_targets,
)
from survival_forest import RandomSurvivalForest


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--task", required=True, choices=["classification", "regression", "survival"])
    parser.add_argument(
        "--model",
        default=None,
        choices=["rf", "mlp", "rsf"],
        help="rf|mlp for classification, rf for regression, rsf for survival",
    )
    parser.add_argument("--data", required=True, help="input CSV with header")
    parser.add_argument("--sensitive", required=True, help="comma-separated sensitive column(s)")
    parser.add_argument("--label", help="label/target column (classification, regression)")
    parser.add_argument("--time", help="survival time column")
    parser.add_argument("--event", help="survival event column (1=event, 0=censored)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    return parser.parse_args(argv)


def train_and_predict(task, model_kind, features, data, seed):
    if task == "classification":
        if model_kind == "mlp":
            model = MLPClassifier(hidden_layer_sizes=(20,), max_iter=2000, random_state=seed)
        else:
            model = RandomForestClassifier(n_estimators=100, random_state=seed)
        model.fit(features, data.labels.astype(int))
        return model.predict_proba(features)[:, 1]
    if task == "regression":
        model = RandomForestRegressor(n_estimators=100, random_state=seed)
        model.fit(features, data.labels)
        return model.predict(features)
    forest = RandomSurvivalForest(n_trees=1000, seed=seed)
    forest.fit(features, data.times, data.events)
    return forest.grid, forest.predict_curves(features)


def main(argv=None) -> int:
    args = parse_args(argv)
    sensitive = [c for c in args.sensitive.split(",") if c]
    try:
        if args.task == "survival":
            if not args.time or not args.event:
                raise ValueError("survival export needs --time and --event")
            data = load_dataset(args.data, sensitive, time_column=args.time, event_column=args.event)
        else:
            if not args.label:
                raise ValueError(f"{args.task} export needs --label")
            data = load_dataset(args.data, sensitive, label_column=args.label)

        model_kind = args.model or ("rsf" if args.task == "survival" else "rf")
        valid = {"classification": ("rf", "mlp"), "regression": ("rf",), "survival": ("rsf",)}
        if model_kind not in valid[args.task]:
            raise ValueError(f"model {model_kind!r} is not valid for {args.task}")

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_features(out / "features.csv", data.feature_names, data.features)
        write_groups(out / "groups.csv", data.sensitive)

        if args.task == "survival":
            grid, curves = train_and_predict(args.task, model_kind, data.features, data, args.seed)
            write_outcomes(out / "labels.csv", data.times, data.events.astype(bool))
            write_curves(out / "perf_curves.csv", grid, curves)
            print(out / "perf_curves.csv")
        else:
            preds = train_and_predict(args.task, model_kind, data.features, data, args.seed)
            if args.task == "classification":
                write_binary_labels(out / "labels.csv", data.labels)
            else:
                write_targets(out / "labels.csv", data.labels)
            write_preds(out / "perf_preds.csv", preds)
            print(out / "perf_preds.csv")
        print(out / "features.csv")
        print(out / "groups.csv")
        print(out / "labels.csv")
        return 0
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
