"""Shared fixtures: synthetic MRI-style cohorts and small helper schemas."""

from __future__ import annotations

import numpy as np
import pytest

from cfex.schema import (
    CANONICAL_CLASSES,
    Dataset,
    FeatureSchema,
    FeatureSpec,
    PatientRecord,
    canonical_schema,
)
from cfex.synth import make_cohort

__all__ = ["make_cohort", "tiny_schema", "blob_dataset"]


def tiny_schema(n_features: int = 2, classes: tuple[str, ...] = ("A", "B")) -> FeatureSchema:
    feats = tuple(
        FeatureSpec(name=f"f{i}", immutable=False, min=-1e6, max=1e6) for i in range(n_features)
    )
    return FeatureSchema(features=feats, label_classes=classes)


def blob_dataset(
    schema: FeatureSchema,
    centers: dict[str, tuple[float, ...]],
    n_per_class: int = 30,
    spread: float = 0.6,
    seed: int = 3,
) -> Dataset:
    rng = np.random.default_rng(seed)
    records = []
    for label, center in centers.items():
        for i in range(n_per_class):
            values = np.array(center) + rng.normal(0.0, spread, len(center))
            records.append(PatientRecord(id=f"{label.lower()}{i:03d}", label=label, values=values))
    return Dataset(schema=schema, records=tuple(records))


@pytest.fixture(scope="session")
def mri_schema() -> FeatureSchema:
    return canonical_schema()


@pytest.fixture(scope="session")
def balanced_cohort(mri_schema) -> Dataset:
    return make_cohort({c: 40 for c in CANONICAL_CLASSES}, seed=11)


@pytest.fixture(scope="session")
def paper_sized_cohort() -> Dataset:
    return make_cohort({"MB": 25, "EP": 11, "PA": 25, "BG": 25}, seed=5)


@pytest.fixture(scope="session")
def full_sized_cohort() -> Dataset:
    return make_cohort({"MB": 42, "EP": 11, "PA": 25, "BG": 34}, seed=9)
