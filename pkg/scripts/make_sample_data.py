#!/usr/bin/env python3
"""Regenerate the committed sample data under data/.

Writes a 112-record labeled cohort (42 MB, 11 EP, 25 PA, 34 BG), a handful
of unlabeled query records, the canonical schema file, and one ready-made
query payload for `cfex classify --values-json`.
"""

import json
from pathlib import Path

from cfex.dataset import save_dataset
from cfex.schema import UNKNOWN_LABEL, Dataset, PatientRecord, canonical_schema
from cfex.synth import make_cohort

OUT = Path(__file__).resolve().parent.parent / "data"


def main() -> None:
    OUT.mkdir(exist_ok=True)
    schema = canonical_schema()
    schema.to_json(OUT / "schema.json")

    cohort = make_cohort({"MB": 42, "EP": 11, "PA": 25, "BG": 34}, seed=20240516)
    save_dataset(cohort, OUT / "sample_cohort.csv")

    holdout = make_cohort(
        {"MB": 2, "EP": 2, "PA": 2, "BG": 2}, seed=99, id_prefix="query-"
    )
    unknowns = Dataset(
        schema,
        tuple(
            PatientRecord(id=r.id, label=UNKNOWN_LABEL, values=r.values)
            for r in holdout.records
        ),
    )
    save_dataset(unknowns, OUT / "sample_unknowns.csv")

    query = {
        name: float(v)
        for name, v in zip(schema.feature_names, unknowns.records[0].values)
    }
    (OUT / "sample_query.json").write_text(json.dumps(query, indent=2) + "\n")
    print(f"wrote {len(cohort)} cohort records and {len(unknowns)} unknowns to {OUT}")


if __name__ == "__main__":
    main()
