#!/usr/bin/env python3
"""Train a simple fairness-oriented model on a restricted feature subset and
export its predictions for the two-pretrained post-processing variants.

The subset must not contain a sensitive column.  Classification uses logistic
regression, regression ordinary least squares, and survival a proportional-
hazards model with constant unit baseline hazard fitted by Newton iterations
on the exponential likelihood; curves are exported on the dataset's
event-time grid (with a leading t=0 column of ones) so they align with the
base-model export.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
from sklearn.linear_model import LinearRegression, LogisticRegression

from common import load_dataset, write_curves, write_preds
from survival_forest import event_time_grid


def exponential_hazard_fit(design: np.ndarray, times, events, iters: int = 50) -> np.ndarray:
    """Newton MLE of gamma in hazard(t|x) = exp(x . gamma)."""
    gamma = np.zeros(design.shape[1])
    for _ in range(iters):
        eta = np.clip(design @ gamma, -30.0, 30.0)
        mu = times * np.exp(eta)
        grad = design.T @ (events - mu)
        hess = -(design * mu[:, None]).T @ design
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        gamma = gamma - step
        if float(np.max(np.abs(step))) < 1e-10:
            break
    return gamma


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--task", required=True, choices=["classification", "regression", "survival"])
    parser.add_argument("--data", required=True)
    parser.add_argument("--sensitive", required=True, help="comma-separated sensitive column(s)")
    parser.add_argument("--feature-subset", required=True, help="comma-separated non-sensitive columns")
    parser.add_argument("--label", help="label/target column")
    parser.add_argument("--time", help="survival time column")
    parser.add_argument("--event", help="survival event column")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    sensitive = [c for c in args.sensitive.split(",") if c]
    subset = [c for c in args.feature_subset.split(",") if c]
    try:
        blocked = [c for c in subset if c in sensitive]
        if blocked:
            raise ValueError(f"sensitive column(s) in the feature subset: {blocked}")
        if args.task == "survival":
            if not args.time or not args.event:
                raise ValueError("survival export needs --time and --event")
            data = load_dataset(args.data, sensitive, time_column=args.time, event_column=args.event)
        else:
            if not args.label:
                raise ValueError(f"{args.task} export needs --label")
            data = load_dataset(args.data, sensitive, label_column=args.label)

        missing = [c for c in subset if c not in data.feature_names]
        if missing:
            raise ValueError(f"subset column(s) not in the dataset features: {missing}")
        cols = [data.feature_names.index(c) for c in subset]
        X = data.features[:, cols]

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.task == "classification":
            model = LogisticRegression(max_iter=1000, random_state=args.seed)
            model.fit(X, data.labels.astype(int))
            write_preds(out / "fair_preds.csv", model.predict_proba(X)[:, 1])
            print(out / "fair_preds.csv")
        elif args.task == "regression":
            model = LinearRegression()
            model.fit(X, data.labels)
            write_preds(out / "fair_preds.csv", model.predict(X))
            print(out / "fair_preds.csv")
        else:
            design = np.hstack([X, np.ones((X.shape[0], 1))])
            gamma = exponential_hazard_fit(design, data.times, data.events.astype(float))
            grid = event_time_grid(data.times, data.events)
            rates = np.exp(np.clip(design @ gamma, -30.0, 30.0))
            curves = np.exp(-np.outer(rates, grid))
            write_curves(out / "fair_curves.csv", grid, curves)
            print(out / "fair_curves.csv")
        return 0
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
