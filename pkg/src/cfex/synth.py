"""Synthetic cohort generation for demos and tests.

Produces records on the canonical 18-feature panel with class structure in
the tumor/parenchyma ratios: parenchyma columns are class-independent
reference values, tumor columns are parenchyma times a noisy class factor,
and ratio columns equal tumor/parenchyma exactly.
"""

from __future__ import annotations

import numpy as np

from .schema import CANONICAL_CLASSES, Dataset, FeatureSchema, PatientRecord, canonical_schema

# One intensity-ratio factor per modality (T2, FLAIR, DWI, ADC, T1, T1CE).
# EP sits closest to MB so the rare class is also the hard one.
CLASS_FACTORS = {
    "MB": (1.55, 1.30, 1.05, 0.70, 0.90, 1.45),
    "EP": (1.30, 1.55, 1.10, 0.95, 0.80, 1.20),
    "PA": (1.85, 1.05, 0.90, 1.30, 1.00, 1.70),
    "BG": (1.10, 0.90, 1.35, 1.10, 1.25, 0.95),
}
PARENCHYMA_MEANS = (850.0, 900.0, 780.0, 1.05, 520.0, 820.0)


def make_cohort(
    counts: dict[str, int],
    seed: int = 7,
    factor_noise: float = 0.16,
    schema: FeatureSchema | None = None,
    id_prefix: str = "",
) -> Dataset:
    """Sample a labeled cohort; ``factor_noise`` controls class overlap."""
    schema = schema or canonical_schema()
    rng = np.random.default_rng(seed)
    records = []
    for label in CANONICAL_CLASSES:
        n = counts.get(label, 0)
        factors = np.array(CLASS_FACTORS[label])
        for i in range(n):
            parenchyma = np.array(PARENCHYMA_MEANS) * rng.normal(1.0, 0.05, 6)
            ratio = np.clip(factors * rng.normal(1.0, factor_noise, 6), 0.15, None)
            tumor = parenchyma * ratio
            values = np.empty(schema.n_features)
            for m in range(6):
                values[3 * m + 0] = tumor[m]
                values[3 * m + 1] = parenchyma[m]
                values[3 * m + 2] = ratio[m]
            records.append(
                PatientRecord(id=f"{id_prefix}{label.lower()}{i:03d}", label=label, values=values)
            )
    return Dataset(schema=schema, records=tuple(records))
