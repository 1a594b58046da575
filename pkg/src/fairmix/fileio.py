"""File formats for interchange: CSV data files, JSON model files, sweep TSV.

All files are UTF-8 with '.' decimals; row order is instance identity.
Floats are rendered with the shortest decimal representation that round-trips
(Python's repr), which makes byte-level determinism contracts testable.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .data import (
    FeatureMatrix,
    GroupAssignment,
    GroupMode,
    PredictionKind,
    ScorePredictions,
    SurvivalCurves,
    SurvivalOutcomes,
    TaskKind,
    TimeGrid,
)
from .experts import SimpleExpertParams
from .fairness import FairnessKind
from .gating import GateParams, GateVariant
from .losses import FidelityKind
from .metrics import MetricReport
from .numerics import IntegratorConfig
from .objective import CombinerParams, ObjectiveSpec, VariantKind

MODEL_FORMAT = "fairmix-model-v1"


def render_float(x) -> str:
    return repr(float(x))


def _require(path) -> Path:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"file not found: {p}")
    return p


def _read_csv(path) -> tuple[list[str], list[list[str]]]:
    p = _require(path)
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{p}: empty file") from None
        rows = [row for row in reader if row]
    return header, rows


def _parse_float(token: str, path, line: int, col: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ValueError(f"{path}: line {line}: bad numeric value {token!r} in {col!r}") from None


def read_features(path) -> FeatureMatrix:
    header, rows = _read_csv(path)
    values = np.array(
        [
            [_parse_float(tok, path, i + 2, header[j]) for j, tok in enumerate(row)]
            for i, row in enumerate(rows)
        ],
        dtype=float,
    ).reshape(len(rows), len(header))
    return FeatureMatrix(values, tuple(header))


def read_features_subset(path, wanted: Sequence[str]) -> tuple[FeatureMatrix, list[str]]:
    """Read only the named feature columns, tolerating extra columns.

    Extra columns are never parsed (they may be non-numeric, e.g. sensitive
    attributes that must not influence prediction); their names are returned
    so callers can report that they were ignored.
    """
    header, rows = _read_csv(path)
    wanted = list(wanted)
    missing = [c for c in wanted if c not in header]
    if missing:
        raise ValueError(f"{path}: feature file lacks column(s): {missing}")
    extra = [c for c in header if c not in wanted]
    indices = [header.index(c) for c in wanted]
    values = np.array(
        [
            [_parse_float(row[j], path, i + 2, header[j]) for j in indices]
            for i, row in enumerate(rows)
        ],
        dtype=float,
    ).reshape(len(rows), len(wanted))
    return FeatureMatrix(values, tuple(wanted)), extra


def write_features(path, features: FeatureMatrix) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(features.column_names)
        for row in features.values:
            writer.writerow([render_float(v) for v in row])


def read_groups(path, mode: GroupMode = GroupMode.INTERSECTIONAL) -> GroupAssignment:
    header, rows = _read_csv(path)
    columns = {name: [row[j] for row in rows] for j, name in enumerate(header)}
    return GroupAssignment.from_attributes(columns, mode)


def write_groups(path, attributes: Mapping[str, Sequence]) -> None:
    names = list(attributes)
    n = len(next(iter(attributes.values())))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(n):
            writer.writerow([str(attributes[name][i]) for name in names])


def read_labels(path, task: TaskKind):
    header, rows = _read_csv(path)
    if task is TaskKind.SURVIVAL:
        if header[:2] != ["time", "event"]:
            raise ValueError(f"{path}: survival labels need columns 'time,event'")
        times = np.array([_parse_float(r[0], path, i + 2, "time") for i, r in enumerate(rows)])
        events = np.array([_parse_float(r[1], path, i + 2, "event") for i, r in enumerate(rows)])
        return SurvivalOutcomes(times, events.astype(bool))
    wanted = "label" if task is TaskKind.BINARY_CLASSIFICATION else "target"
    if header[:1] != [wanted]:
        raise ValueError(f"{path}: {task.value} labels need a single column {wanted!r}")
    return np.array([_parse_float(r[0], path, i + 2, wanted) for i, r in enumerate(rows)])


def write_labels(path, task: TaskKind, labels) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if task is TaskKind.SURVIVAL:
            writer.writerow(["time", "event"])
            for t, e in zip(labels.times, labels.events):
                writer.writerow([render_float(t), "1" if e else "0"])
        elif task is TaskKind.BINARY_CLASSIFICATION:
            writer.writerow(["label"])
            for v in np.asarray(labels):
                writer.writerow([str(int(v))])
        else:
            writer.writerow(["target"])
            for v in np.asarray(labels):
                writer.writerow([render_float(v)])


def read_score_preds(path, kind: PredictionKind) -> ScorePredictions:
    header, rows = _read_csv(path)
    if header[:1] != ["pred"]:
        raise ValueError(f"{path}: prediction files need a single column 'pred'")
    vals = np.array([_parse_float(r[0], path, i + 2, "pred") for i, r in enumerate(rows)])
    return ScorePredictions(vals, kind)


def write_score_preds(path, preds: ScorePredictions) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pred"])
        for v in preds.values:
            writer.writerow([render_float(v)])


def read_curves(path) -> SurvivalCurves:
    header, rows = _read_csv(path)
    if not header or header[0] != "id" or len(header) < 3:
        raise ValueError(f"{path}: curve files need header 'id,t=<v1>,...'")
    times = []
    for name in header[1:]:
        if not name.startswith("t="):
            raise ValueError(f"{path}: curve column {name!r} does not look like 't=<value>'")
        times.append(_parse_float(name[2:], path, 1, name))
    grid = TimeGrid(np.asarray(times))
    probs = np.array(
        [
            [_parse_float(tok, path, i + 2, header[j + 1]) for j, tok in enumerate(row[1:])]
            for i, row in enumerate(rows)
        ],
        dtype=float,
    ).reshape(len(rows), grid.m)
    return SurvivalCurves(grid, probs)


def write_curves(path, curves: SurvivalCurves) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + [f"t={render_float(t)}" for t in curves.grid.times])
        for i, row in enumerate(curves.probs):
            writer.writerow([str(i)] + [render_float(v) for v in row])


def read_predictions(path, task: TaskKind):
    if task is TaskKind.SURVIVAL:
        return read_curves(path)
    kind = (
        PredictionKind.PROBABILITY
        if task is TaskKind.BINARY_CLASSIFICATION
        else PredictionKind.REGRESSION
    )
    return read_score_preds(path, kind)


def write_predictions(path, preds) -> None:
    if isinstance(preds, SurvivalCurves):
        write_curves(path, preds)
    else:
        write_score_preds(path, preds)


@dataclass(frozen=True)
class ModelFile:
    """Everything a fitted combiner needs at prediction time, plus diagnostics."""

    spec: ObjectiveSpec
    params: CombinerParams
    feature_columns: tuple[str, ...]
    seed: int
    objective_value: float
    iterations: int
    converged: bool
    fair_expert: SimpleExpertParams | None = None


def _gate_to_json(gate: GateParams) -> dict:
    if gate.variant is GateVariant.CONSTANT:
        return {"variant": "constant", "alpha": gate.alpha}
    return {"variant": "logistic", "beta": gate.beta.tolist(), "beta0": gate.beta0}


def _gate_from_json(obj: dict) -> GateParams:
    if obj["variant"] == "constant":
        return GateParams.constant(obj["alpha"])
    return GateParams.logistic(np.asarray(obj["beta"], dtype=float), obj["beta0"])


def _expert_to_json(expert: SimpleExpertParams | None):
    if expert is None:
        return None
    return {"gamma": expert.gamma.tolist(), "feature_subset": list(expert.feature_subset)}


def _expert_from_json(obj) -> SimpleExpertParams | None:
    if obj is None:
        return None
    return SimpleExpertParams(np.asarray(obj["gamma"], dtype=float), tuple(obj["feature_subset"]))


def write_model(path, model: ModelFile) -> None:
    spec = model.spec
    payload = {
        "format": MODEL_FORMAT,
        "task": spec.task.value,
        "variant": spec.variant.value,
        "lambda": spec.lam,
        "fidelity": spec.fidelity.value,
        "fairness": spec.fairness.value,
        "integrator": {
            "initial_points": spec.integrator.initial_points,
            "max_points": spec.integrator.max_points,
            "rel_tol": spec.integrator.rel_tol,
        },
        "feature_columns": list(model.feature_columns),
        "gate": _gate_to_json(model.params.gate),
        "expert": _expert_to_json(model.params.expert),
        "theta": None if model.params.theta is None else model.params.theta.tolist(),
        "fair_expert": _expert_to_json(model.fair_expert),
        "seed": model.seed,
        "fit": {
            "objective_value": model.objective_value,
            "iterations": model.iterations,
            "converged": model.converged,
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def read_model(path) -> ModelFile:
    p = _require(path)
    with open(p, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"{p}: not a {MODEL_FORMAT} file")
    integ = payload["integrator"]
    spec = ObjectiveSpec(
        task=TaskKind(payload["task"]),
        variant=VariantKind(payload["variant"]),
        lam=payload["lambda"],
        fidelity=FidelityKind(payload["fidelity"]),
        fairness=FairnessKind(payload["fairness"]),
        integrator=IntegratorConfig(
            initial_points=integ["initial_points"],
            max_points=integ["max_points"],
            rel_tol=integ["rel_tol"],
        ),
    )
    params = CombinerParams(
        gate=_gate_from_json(payload["gate"]),
        expert=_expert_from_json(payload["expert"]),
        theta=None if payload["theta"] is None else np.asarray(payload["theta"], dtype=float),
    )
    fit_info = payload["fit"]
    return ModelFile(
        spec=spec,
        params=params,
        feature_columns=tuple(payload["feature_columns"]),
        seed=payload["seed"],
        objective_value=fit_info["objective_value"],
        iterations=fit_info["iterations"],
        converged=fit_info["converged"],
        fair_expert=_expert_from_json(payload.get("fair_expert")),
    )


@dataclass(frozen=True)
class SweepRecord:
    """One fitted (variant, lambda) point with its test-split metrics."""

    variant: VariantKind
    lam: float
    objective_value: float
    iterations: int
    converged: bool
    metrics: MetricReport | None  # None when the fit itself failed


METRIC_COLUMNS = {
    TaskKind.BINARY_CLASSIFICATION: ("accuracy", "dp_gap", "eo_gap"),
    TaskKind.REGRESSION: ("mse", "sp_auc"),
    TaskKind.SURVIVAL: ("c_index", "ibs", "gf_max", "gf_avg"),
}


def sweep_columns(task: TaskKind) -> tuple[str, ...]:
    return ("variant", "lambda", "objective", "iterations", "converged") + METRIC_COLUMNS[task]


def write_sweep_tsv(path, task: TaskKind, records: Sequence[SweepRecord]) -> None:
    columns = sweep_columns(task)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("\t".join(columns) + "\n")
        for rec in records:
            cells = [
                rec.variant.value,
                render_float(rec.lam),
                render_float(rec.objective_value),
                str(rec.iterations),
                "true" if rec.converged else "false",
            ]
            for name in METRIC_COLUMNS[task]:
                value = float("nan") if rec.metrics is None else rec.metrics[name]
                cells.append(render_float(value))
            fh.write("\t".join(cells) + "\n")


def read_sweep_tsv(path) -> tuple[list[str], list[dict[str, str]]]:
    p = _require(path)
    with open(p, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    header = lines[0].split("\t")
    rows = [dict(zip(header, line.split("\t"))) for line in lines[1:]]
    return header, rows


def metric_report_json(report: MetricReport) -> str:
    """Stable-order JSON rendering of a metric report."""
    ordered = {"task": report.task.value}
    for name in METRIC_COLUMNS[report.task]:
        ordered[name] = report.values[name]
    return json.dumps(ordered, indent=2)
