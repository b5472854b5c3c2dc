"""Cohort ingestion, standardization, and stratified splitting."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ClassTooSmallError,
    EmptyDatasetError,
    MissingColumnError,
    NonNumericCellError,
    SchemaMismatchError,
    UnknownLabelError,
)
from .schema import (
    UNKNOWN_LABEL,
    Dataset,
    FeatureSchema,
    PatientRecord,
    RatioWarning,
    ratio_triples,
)

RATIO_TOLERANCE = 0.05  # relative; violations are warnings, not errors

_ID_COLUMN = "id"
_LABEL_COLUMN = "tumor_type"


def load_dataset(path: str | Path, schema: FeatureSchema) -> Dataset:
    """Parse a cohort CSV with columns ``id,tumor_type,<features...>``.

    Ratio columns that disagree with tumor/parenchyma by more than 5% are
    collected as warnings on the returned dataset: counterfactual rows
    legitimately break that association, so it is not enforced.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        required = [_ID_COLUMN, _LABEL_COLUMN, *schema.feature_names]
        missing = [col for col in required if col not in header]
        if missing:
            raise MissingColumnError(missing)

        records: list[PatientRecord] = []
        warnings: list[RatioWarning] = []
        triples = ratio_triples(schema)
        for line_no, row in enumerate(reader, start=2):
            label = (row[_LABEL_COLUMN] or "").strip()
            if not schema.is_valid_label(label):
                raise UnknownLabelError(label, row=line_no)
            values = np.empty(schema.n_features)
            for j, name in enumerate(schema.feature_names):
                cell = (row[name] or "").strip()
                try:
                    values[j] = float(cell)
                except ValueError:
                    raise NonNumericCellError(line_no, name, cell) from None
            record = PatientRecord(id=(row[_ID_COLUMN] or "").strip(), label=label, values=values)
            warnings.extend(_ratio_warnings(schema, record, triples))
            records.append(record)

    return Dataset(schema=schema, records=tuple(records), ingest_warnings=tuple(warnings))


def _ratio_warnings(schema, record, triples) -> list[RatioWarning]:
    out = []
    for t_idx, p_idx, r_idx in triples:
        parenchyma = record.values[p_idx]
        stated = record.values[r_idx]
        if parenchyma == 0:
            continue
        computed = record.values[t_idx] / parenchyma
        denom = max(abs(stated), abs(computed), 1e-12)
        if abs(stated - computed) / denom > RATIO_TOLERANCE:
            out.append(
                RatioWarning(
                    record_id=record.id,
                    feature=schema.feature_names[r_idx],
                    stated=float(stated),
                    computed=float(computed),
                )
            )
    return out


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write a cohort CSV that ``load_dataset`` re-reads bit-identically."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow([_ID_COLUMN, _LABEL_COLUMN, *dataset.schema.feature_names])
        for record in dataset.records:
            writer.writerow([record.id, record.label, *[repr(float(v)) for v in record.values]])


@dataclass(frozen=True, eq=False)
class StandardScaler:
    """Per-feature centering/scaling fitted on training data.

    Uses the population standard deviation. Constant columns (sigma = 0) are
    recorded as degenerate and transform to 0 so small cohorts still flow
    through the pipeline.
    """

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).copy()
        sigma = np.asarray(self.sigma, dtype=float).copy()
        if mu.shape != sigma.shape or mu.ndim != 1:
            raise ValueError("mu and sigma must be matching vectors")
        if np.any(sigma < 0):
            raise ValueError("sigma must be non-negative")
        mu.flags.writeable = False
        sigma.flags.writeable = False
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n_features(self) -> int:
        return self.mu.shape[0]

    @property
    def degenerate_mask(self) -> np.ndarray:
        return self.sigma == 0

    def _check(self, values: np.ndarray) -> np.ndarray:
        arr = np.asarray(values, dtype=float)
        if arr.shape[-1] != self.n_features:
            raise SchemaMismatchError(
                f"expected {self.n_features} features, got {arr.shape[-1]}"
            )
        return arr

    def transform(self, values: np.ndarray) -> np.ndarray:
        arr = self._check(values)
        safe_sigma = np.where(self.sigma == 0, 1.0, self.sigma)
        z = (arr - self.mu) / safe_sigma
        if z.ndim == 1:
            z[self.degenerate_mask] = 0.0
        else:
            z[:, self.degenerate_mask] = 0.0
        return z

    def inverse_transform(self, z: np.ndarray) -> np.ndarray:
        arr = self._check(z)
        safe_sigma = np.where(self.sigma == 0, 1.0, self.sigma)
        x = arr * safe_sigma + self.mu
        if x.ndim == 1:
            x[self.degenerate_mask] = self.mu[self.degenerate_mask]
        else:
            x[:, self.degenerate_mask] = self.mu[self.degenerate_mask]
        return x

    def transform_record(self, record: PatientRecord) -> PatientRecord:
        return record.with_values(self.transform(record.values))

    def inverse_transform_record(self, record: PatientRecord) -> PatientRecord:
        return record.with_values(self.inverse_transform(record.values))

    def to_dict(self) -> dict:
        return {"mu": [float(v) for v in self.mu], "sigma": [float(v) for v in self.sigma]}

    @classmethod
    def from_dict(cls, payload) -> "StandardScaler":
        return cls(mu=np.array(payload["mu"], dtype=float), sigma=np.array(payload["sigma"], dtype=float))


def fit_scaler(train: Dataset) -> StandardScaler:
    if len(train) == 0:
        raise EmptyDatasetError("cannot fit a scaler on an empty dataset")
    matrix = train.matrix()
    mu = matrix.mean(axis=0)
    sigma = matrix.std(axis=0)  # population form
    return StandardScaler(mu=mu, sigma=sigma)


def round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def apportion(
    counts: Sequence[int], frac: float, rng: np.random.Generator
) -> list[int]:
    """Largest-remainder apportionment of round(frac * total) across groups.

    Ties between equal remainders are broken by a seeded shuffle so the
    allocation is deterministic for a fixed generator state.
    """
    total = round_half_up(frac * sum(counts))
    quotas = [frac * c for c in counts]
    base = [int(np.floor(q)) for q in quotas]
    remainders = [q - b for q, b in zip(quotas, base)]
    extras = total - sum(base)
    order = list(range(len(counts)))
    rng.shuffle(order)
    order.sort(key=lambda i: -remainders[i])  # stable: shuffled order breaks ties
    for i in order[:extras]:
        base[i] += 1
    return base


def stratified_split(
    data: Dataset, train_frac: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Split per class by largest-remainder apportionment; deterministic by seed."""
    if not 0 < train_frac < 1:
        raise ValueError("train_frac must be in (0, 1)")
    counts = data.class_counts()
    if counts.get(UNKNOWN_LABEL):
        raise ValueError(
            "dataset contains UNKNOWN-labeled records; stratify on data.labeled()"
        )
    present = [label for label in data.schema.label_classes if counts.get(label, 0) > 0]
    if not present:
        raise EmptyDatasetError("no labeled records to split")
    for label in present:
        if counts[label] < 2:
            raise ClassTooSmallError(label, counts[label])

    rng = np.random.default_rng(seed)
    allocation = apportion([counts[label] for label in present], train_frac, rng)
    allocation = _clamp_allocation(allocation, [counts[label] for label in present])

    train_records, test_records = [], []
    for label, n_train in zip(present, allocation):
        members = list(data.of_class(label))
        idx = rng.permutation(len(members))
        chosen = set(idx[:n_train])
        for i, record in enumerate(members):
            (train_records if i in chosen else test_records).append(record)
    return Dataset(data.schema, tuple(train_records)), Dataset(data.schema, tuple(test_records))


def _clamp_allocation(allocation: list[int], counts: list[int]) -> list[int]:
    """Guarantee every class keeps >=1 record on each side, conserving the total."""
    alloc = list(allocation)
    for i, (a, c) in enumerate(zip(alloc, counts)):
        alloc[i] = min(max(a, 1), c - 1)
    delta = sum(allocation) - sum(alloc)
    # Redistribute whatever clamping displaced, largest headroom first.
    while delta != 0:
        if delta > 0:
            candidates = [i for i in range(len(alloc)) if alloc[i] < counts[i] - 1]
            if not candidates:
                break
            j = max(candidates, key=lambda i: counts[i] - alloc[i])
            alloc[j] += 1
            delta -= 1
        else:
            candidates = [i for i in range(len(alloc)) if alloc[i] > 1]
            if not candidates:
                break
            j = max(candidates, key=lambda i: alloc[i])
            alloc[j] -= 1
            delta += 1
    return alloc
