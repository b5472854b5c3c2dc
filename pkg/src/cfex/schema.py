"""Feature schema and record types for tabular cohorts.

The canonical layout mirrors multiparametric MRI signal-intensity panels:
six modalities, each contributing a tumor measurement, a normal-parenchyma
reference measurement, and their ratio. Parenchyma columns act as tissue
reference points and are flagged immutable so downstream counterfactual
search never edits them.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import SchemaMismatchError

UNKNOWN_LABEL = "UNKNOWN"

MODALITIES = ("T2", "FLAIR", "DWI", "ADC", "T1", "T1CE")
PARTS = ("Tumor", "Parenchyma", "Ratio")
CANONICAL_CLASSES = ("MB", "EP", "PA", "BG")


@dataclass(frozen=True)
class FeatureSpec:
    """One column: name, whether counterfactuals may edit it, raw-value range."""

    name: str
    immutable: bool = False
    min: float = -1e9
    max: float = 1e9

    def __post_init__(self):
        if not self.name:
            raise ValueError("feature name must be non-empty")
        if not self.min < self.max:
            raise ValueError(f"feature {self.name!r}: min must be < max")


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature layout plus the label vocabulary."""

    features: tuple[FeatureSpec, ...]
    label_classes: tuple[str, ...]

    def __post_init__(self):
        if not self.features:
            raise ValueError("schema needs at least one feature")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        if not self.label_classes:
            raise ValueError("schema needs at least one label class")
        if len(set(self.label_classes)) != len(self.label_classes):
            raise ValueError("label classes must be unique")
        if UNKNOWN_LABEL in self.label_classes:
            raise ValueError(f"{UNKNOWN_LABEL!r} is reserved and cannot be a class")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def immutable_mask(self) -> np.ndarray:
        mask = np.array([f.immutable for f in self.features], dtype=bool)
        mask.flags.writeable = False
        return mask

    def index_of(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise KeyError(f"unknown feature {name!r}") from None

    def class_index(self, label: str) -> int:
        try:
            return self.label_classes.index(label)
        except ValueError:
            raise KeyError(f"unknown class {label!r}") from None

    def is_valid_label(self, label: str) -> bool:
        return label == UNKNOWN_LABEL or label in self.label_classes

    def to_dict(self) -> dict:
        return {
            "features": [
                {"name": f.name, "immutable": f.immutable, "min": f.min, "max": f.max}
                for f in self.features
            ],
            "classes": list(self.label_classes),
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> "FeatureSchema":
        feats = tuple(
            FeatureSpec(
                name=str(item["name"]),
                immutable=bool(item.get("immutable", False)),
                min=float(item.get("min", -1e9)),
                max=float(item.get("max", 1e9)),
            )
            for item in payload["features"]
        )
        return cls(features=feats, label_classes=tuple(str(c) for c in payload["classes"]))

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, path: str | Path) -> "FeatureSchema":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def digest(self) -> str:
        """Stable hash used to pair serialized models with their schema."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def canonical_schema() -> FeatureSchema:
    """The 18-feature MRI panel: {T2,FLAIR,DWI,ADC,T1,T1CE} x {Tumor,Parenchyma,Ratio}."""
    feats = []
    for modality in MODALITIES:
        for part in PARTS:
            feats.append(
                FeatureSpec(
                    name=f"{modality}_{part}",
                    immutable=(part == "Parenchyma"),
                    min=0.0,
                    max=1e6,
                )
            )
    return FeatureSchema(features=tuple(feats), label_classes=CANONICAL_CLASSES)


def _freeze(values: np.ndarray) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class PatientRecord:
    """One labeled feature vector. ``label`` may be UNKNOWN for unclassified cases."""

    id: str
    label: str
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        if self.values.ndim != 1:
            raise ValueError("record values must be a flat vector")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"record {self.id!r} has non-finite values")

    def conforms_to(self, schema: FeatureSchema) -> bool:
        return self.values.shape == (schema.n_features,) and schema.is_valid_label(self.label)

    def require_conforms(self, schema: FeatureSchema) -> None:
        if self.values.shape != (schema.n_features,):
            raise SchemaMismatchError(
                f"record {self.id!r} has {self.values.shape[0]} values, "
                f"schema expects {schema.n_features}"
            )
        if not schema.is_valid_label(self.label):
            raise SchemaMismatchError(f"record {self.id!r} has label {self.label!r} outside schema")

    def value_of(self, schema: FeatureSchema, feature: str) -> float:
        return float(self.values[schema.index_of(feature)])

    def with_values(self, values: np.ndarray, id: str | None = None, label: str | None = None):
        return PatientRecord(
            id=self.id if id is None else id,
            label=self.label if label is None else label,
            values=values,
        )


@dataclass(frozen=True)
class RatioWarning:
    """Ingestion note: a ratio column disagrees with tumor/parenchyma beyond 5%."""

    record_id: str
    feature: str
    stated: float
    computed: float

    def __str__(self):
        return (
            f"record {self.record_id!r}: {self.feature} = {self.stated:g} "
            f"but tumor/parenchyma = {self.computed:g}"
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    """A cohort: immutable record list bound to one schema."""

    schema: FeatureSchema
    records: tuple[PatientRecord, ...]
    ingest_warnings: tuple[RatioWarning, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        for record in self.records:
            record.require_conforms(self.schema)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def class_counts(self) -> dict[str, int]:
        counts = {label: 0 for label in self.schema.label_classes}
        unknown = 0
        for record in self.records:
            if record.label == UNKNOWN_LABEL:
                unknown += 1
            else:
                counts[record.label] += 1
        if unknown:
            counts[UNKNOWN_LABEL] = unknown
        return counts

    def of_class(self, label: str) -> tuple[PatientRecord, ...]:
        return tuple(r for r in self.records if r.label == label)

    def labeled(self) -> "Dataset":
        return Dataset(self.schema, tuple(r for r in self.records if r.label != UNKNOWN_LABEL))

    def matrix(self) -> np.ndarray:
        if not self.records:
            return np.zeros((0, self.schema.n_features))
        return np.stack([r.values for r in self.records])

    def by_id(self, record_id: str) -> PatientRecord:
        for record in self.records:
            if record.id == record_id:
                return record
        raise KeyError(f"no record with id {record_id!r}")

    def extend(self, extra: Iterable[PatientRecord]) -> "Dataset":
        return Dataset(self.schema, self.records + tuple(extra))


def record_from_mapping(
    schema: FeatureSchema, values: Mapping[str, float], id: str = "query", label: str = UNKNOWN_LABEL
) -> PatientRecord:
    """Build a record from a feature-name -> value mapping (all features required)."""
    missing = [name for name in schema.feature_names if name not in values]
    if missing:
        raise SchemaMismatchError(f"missing value(s) for feature(s): {', '.join(missing)}")
    vec = np.array([float(values[name]) for name in schema.feature_names])
    return PatientRecord(id=id, label=label, values=vec)


def ratio_triples(schema: FeatureSchema) -> list[tuple[int, int, int]]:
    """Indices of (tumor, parenchyma, ratio) column triples present in the schema."""
    names = schema.feature_names
    triples = []
    for modality in sorted({n.rsplit("_", 1)[0] for n in names}):
        cols = (f"{modality}_Tumor", f"{modality}_Parenchyma", f"{modality}_Ratio")
        if all(c in names for c in cols):
            triples.append(tuple(names.index(c) for c in cols))
    return triples
