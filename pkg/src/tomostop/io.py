"""JSON and CSV serialization.

Complex matrices are nested row-major lists of ``[re, im]`` pairs.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any

import numpy as np

from .constrained import ConfidenceInterval
from .errors import ValidationError
from .homodyne import HomodyneDataset, Scenario
from .likelihood import Dataset
from .optimizer import FitResult

TRACE_HEADER = ("k", "loglik", "r_k", "trace_dist", "step", "epsilon")


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(obj) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed complex matrix: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"complex matrix must be d x d x [re, im], got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def dataset_to_json(data: Dataset) -> dict:
    if isinstance(data, HomodyneDataset):
        return {
            "kind": "homodyne",
            "dim": data.dim,
            "efficiency": data.efficiency,
            "records": [[float(t), float(x)] for t, x in zip(data.thetas, data.xs)],
        }
    return {
        "dim": data.dim,
        "elements": [{"op": matrix_to_json(op), "weight": int(w)} for op, w in zip(data.ops, data.weights)],
    }


def dataset_from_json(obj: dict) -> Dataset:
    if not isinstance(obj, dict) or "dim" not in obj:
        raise ValidationError("dataset JSON must be an object with a 'dim' field")
    dim = int(obj["dim"])
    if obj.get("kind") == "homodyne":
        records = np.asarray(obj.get("records", []), dtype=float).reshape(-1, 2)
        if len(records) == 0:
            raise ValidationError("homodyne dataset has no records")
        return HomodyneDataset(records[:, 0], records[:, 1], float(obj["efficiency"]), dim)
    elements = obj.get("elements")
    if not elements:
        raise ValidationError("dataset JSON needs a non-empty 'elements' list")
    ops = [matrix_from_json(e["op"]) for e in elements]
    if any(op.shape != (dim, dim) for op in ops):
        raise ValidationError(f"element dimension does not match dim={dim}")
    return Dataset(ops, [e.get("weight", 1) for e in elements])


def scenario_from_json(obj: dict) -> Scenario:
    kwargs: dict[str, Any] = {}
    if "alpha" in obj:
        a = obj["alpha"]
        kwargs["alpha"] = complex(a[0], a[1]) if isinstance(a, (list, tuple)) else complex(a)
    for key in ("transmissivity", "efficiency", "dim", "n_samples", "seed"):
        if key in obj:
            kwargs[key] = obj[key]
    if "phases" in obj:
        kwargs["phases"] = tuple(obj["phases"])
    unknown = set(obj) - {"alpha", "transmissivity", "efficiency", "dim", "n_samples", "phases", "seed"}
    if unknown:
        raise ValidationError(f"unknown scenario fields: {sorted(unknown)}")
    return Scenario(**kwargs)


def scenario_to_json(sc: Scenario) -> dict:
    return {
        "alpha": [sc.alpha.real, sc.alpha.imag],
        "transmissivity": sc.transmissivity,
        "efficiency": sc.efficiency,
        "dim": sc.dim,
        "n_samples": sc.n_samples,
        "phases": list(sc.phases),
        "seed": sc.seed,
    }


def fit_to_json(fit: FitResult) -> dict:
    return {
        "dim": int(fit.state.shape[0]),
        "n_total": fit.n_total,
        "stop_reason": fit.stop_reason.value,
        "iterations": fit.iterations,
        "final_r": fit.final_r,
        "loglik": fit.loglik,
        "state": matrix_to_json(fit.state),
    }


def write_trace_csv(fit: FitResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for r in fit.trace:
            w.writerow([
                r.k,
                repr(r.loglik),
                repr(r.r_k),
                "" if r.trace_dist_prev is None else repr(r.trace_dist_prev),
                r.step_kind.value,
                "" if r.epsilon is None else repr(r.epsilon),
            ])


def read_trace_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def ci_to_json(ci: ConfidenceInterval) -> dict:
    return ci.to_dict()


def read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def read_reference_loglik(path) -> float:
    """A bare number, or a JSON object with a ``loglik`` field (e.g. a fit file)."""
    text = Path(path).read_text().strip()
    try:
        return float(text)
    except ValueError:
        pass
    obj = json.loads(text)
    if isinstance(obj, dict) and "loglik" in obj:
        return float(obj["loglik"])
    raise ValidationError(f"{path}: no reference log-likelihood found")


def load_observable(path) -> np.ndarray:
    obj = read_json(path)
    if isinstance(obj, dict):
        obj = obj.get("op", obj.get("matrix"))
    return matrix_from_json(obj)
