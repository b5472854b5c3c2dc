"""Classify unlabeled records by the cost of counterfactual transformation.

For each candidate class we generate counterfactuals and score the cheapest
converged one by the Euclidean distance over its changed features, measured
in standardized space clipped to the search box. The class needing the
smallest change wins.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .engine import SCALED_BOUND, CfConfig, Counterfactual, generate
from .errors import AllClassesFailedError, IndexOutOfRangeError
from .model import Model
from .schema import PatientRecord


@dataclass(frozen=True, eq=False)
class ClassEntry:
    distance: float
    changed: dict[str, tuple[float, float]]  # feature -> (old scaled, new scaled)
    counterfactual: Counterfactual


@dataclass(frozen=True, eq=False)
class DistanceReport:
    factual_id: str
    per_class: dict[str, ClassEntry]
    predicted: str
    failed: dict[str, str]  # class -> reason, for classes with no converged member
    factual_scaled: dict[str, float]

    def ranking(self) -> list[tuple[str, float]]:
        ordered = sorted(self.per_class.items(), key=lambda kv: kv[1].distance)
        return [(label, entry.distance) for label, entry in ordered]

    def to_json_dict(self) -> dict:
        return {
            "factual_id": self.factual_id,
            "predicted": self.predicted,
            "per_class": {
                label: {
                    "distance": entry.distance,
                    "changed": {f: [old, new] for f, (old, new) in entry.changed.items()},
                    "n_changed": len(entry.changed),
                }
                for label, entry in self.per_class.items()
            },
            "failed": dict(self.failed),
        }

    def save_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n", encoding="utf-8")

    def save_csv(self, path: str | Path, feature_names: Sequence[str]) -> None:
        """Distance table: scaled factual row, then per-class sparse rows."""
        with Path(path).open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["row", *feature_names, "distance", "predicted"])
            writer.writerow(
                ["factual", *[f"{self.factual_scaled[f]:.6g}" for f in feature_names], "-", ""]
            )
            for label, entry in self.per_class.items():
                cells = [
                    f"{entry.changed[f][1]:.6g}" if f in entry.changed else "-"
                    for f in feature_names
                ]
                writer.writerow(
                    [label, *cells, f"{entry.distance:.6g}", str(label == self.predicted).lower()]
                )
            for label, reason in self.failed.items():
                writer.writerow([label, *["-"] * len(feature_names), "failed", reason])


def changed_feature_distance(
    factual: np.ndarray, cf: np.ndarray, changed: Sequence[int]
) -> float:
    """Euclidean distance restricted to the changed coordinates; 0 if none."""
    factual = np.asarray(factual, dtype=float)
    cf = np.asarray(cf, dtype=float)
    if factual.shape != cf.shape:
        raise IndexOutOfRangeError("factual and counterfactual vectors differ in length")
    idx = np.asarray(sorted(set(int(i) for i in changed)), dtype=int)
    if idx.size == 0:
        return 0.0
    if idx.min() < 0 or idx.max() >= factual.shape[0]:
        raise IndexOutOfRangeError(f"changed index out of range for {factual.shape[0]} features")
    diff = factual[idx] - cf[idx]
    return float(np.sqrt(np.sum(diff * diff)))


def _clip_box(z: np.ndarray) -> np.ndarray:
    return np.clip(z, -SCALED_BOUND, SCALED_BOUND)


def score_counterfactual(model: Model, factual: PatientRecord, cf: Counterfactual) -> ClassEntry:
    """Distance of one counterfactual in clipped standardized space."""
    schema = model.schema
    x_z = _clip_box(model.scaler.transform(factual.values))
    c_z = _clip_box(model.scaler.transform(cf.values))
    idx = [schema.index_of(f) for f in cf.delta]
    distance = changed_feature_distance(x_z, c_z, idx)
    changed = {schema.feature_names[j]: (float(x_z[j]), float(c_z[j])) for j in sorted(idx)}
    return ClassEntry(distance=distance, changed=changed, counterfactual=cf)


def classify_unknown(
    model: Model,
    record: PatientRecord,
    config: CfConfig = CfConfig(),
    locked: Sequence[str] = (),
) -> DistanceReport:
    """Build the per-class distance report for one record.

    Ties go to the class whose counterfactual changes fewer features, then to
    the lowest class index.
    """
    schema = model.schema
    record.require_conforms(schema)
    per_class: dict[str, ClassEntry] = {}
    failed: dict[str, str] = {}
    for label in schema.label_classes:
        cfset = generate(model, record, label, config, locked=locked)
        candidates = cfset.converged_members()
        if not candidates:
            failed[label] = "no converged counterfactual"
            continue
        entries = [score_counterfactual(model, record, cf) for cf in candidates]
        entries.sort(key=lambda e: (e.distance, len(e.changed)))
        per_class[label] = entries[0]

    if not per_class:
        raise AllClassesFailedError(f"no class produced a converged counterfactual for {record.id!r}")

    predicted = min(
        per_class,
        key=lambda label: (
            per_class[label].distance,
            len(per_class[label].changed),
            schema.class_index(label),
        ),
    )
    x_z = _clip_box(model.scaler.transform(record.values))
    factual_scaled = {name: float(x_z[j]) for j, name in enumerate(schema.feature_names)}
    return DistanceReport(
        factual_id=record.id,
        per_class=per_class,
        predicted=predicted,
        failed=failed,
        factual_scaled=factual_scaled,
    )
