"""Counterfactual-based data augmentation scenarios and repeated evaluation.

Three augmentation recipes are supported besides the real-only baseline:
top up the rarest class to the majority count (A), top up every class to the
majority count (B), or move a fixed block of real records per class to the
test side and rebuild the training side with counterfactuals (C). Pools are
drawn round-robin across source classes to keep the synthetic records
diverse, and a leakage guard ensures no training counterfactual descends
from a test record.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import apportion, stratified_split
from .engine import CfConfig, generate
from .errors import (
    InsufficientPoolError,
    LeakageViolationError,
)
from .model import EvaluationMetrics, Model, TrainConfig, evaluate_macro, train
from .schema import Dataset, FeatureSchema, PatientRecord

DEFAULT_TRAIN_FRAC = {"baseline": 0.55, "A": 0.65, "B": 0.75, "C": None}

PROVENANCE_REAL = "real"
PROVENANCE_CF = "counterfactual"


@dataclass(frozen=True, eq=False)
class Scenario:
    kind: str  # "baseline" | "A" | "B" | "C"
    train_frac: float | None = None
    seed: int = 0
    target_counts: dict[str, int] | None = None  # per-class totals; None = derive by kind

    def __post_init__(self):
        if self.kind not in DEFAULT_TRAIN_FRAC:
            raise ValueError(f"unknown scenario kind {self.kind!r}")

    @property
    def effective_train_frac(self) -> float | None:
        if self.train_frac is not None:
            return self.train_frac
        return DEFAULT_TRAIN_FRAC[self.kind]


def counterfactuals_needed(data: Dataset, scenario: Scenario) -> dict[str, int]:
    """Per-class counterfactual counts required to realize a scenario."""
    counts = {c: len(data.of_class(c)) for c in data.schema.label_classes}
    present = {c: n for c, n in counts.items() if n > 0}
    if not present:
        return {}
    max_count = max(present.values())
    min_count = min(present.values())
    if scenario.target_counts is not None:
        # Explicit per-class totals: for A/B they count real + counterfactual
        # records, for C they size the training side after the per-class real
        # test block is removed.
        if scenario.kind == "C":
            return {
                c: max(0, scenario.target_counts.get(c, n - min_count) - (n - min_count))
                for c, n in present.items()
            }
        return {c: max(0, scenario.target_counts.get(c, n) - n) for c, n in present.items()}
    if scenario.kind == "baseline":
        return {c: 0 for c in present}
    if scenario.kind == "A":
        return {c: (max_count - n if n == min_count else 0) for c, n in present.items()}
    if scenario.kind == "B":
        return {c: max_count - n for c, n in present.items()}
    # C: every class sends min_count real records to test; training classes are
    # then topped up to the largest remaining real count.
    remaining = {c: n - min_count for c, n in present.items()}
    target = max(remaining.values())
    return {c: target - r for c, r in remaining.items()}


@dataclass(frozen=True, eq=False)
class PoolCandidate:
    record: PatientRecord  # labeled with the target class
    parent_id: str
    source_class: str
    target_class: str


@dataclass(frozen=True, eq=False)
class CfPool:
    """Round-robin-ordered counterfactual candidates per target class."""

    candidates: dict[str, tuple[PoolCandidate, ...]]
    target_counts: dict[str, int]

    def selected(self, target: str) -> tuple[PoolCandidate, ...]:
        return self.candidates.get(target, ())[: self.target_counts.get(target, 0)]

    def all_selected(self) -> tuple[PoolCandidate, ...]:
        out: list[PoolCandidate] = []
        for target in self.candidates:
            out.extend(self.selected(target))
        return tuple(out)


def build_cf_pool(
    model: Model,
    data: Dataset,
    config: CfConfig,
    target_counts: dict[str, int],
    seed: int = 0,
) -> CfPool:
    """Generate and order candidates for every class that needs extras.

    Sources rotate in schema order and, within a source, one member is taken
    per patient before a second is drawn from anyone, which maximizes parent
    variety near the front of the ordering.
    """
    schema = data.schema
    rng = np.random.default_rng(seed)
    candidates: dict[str, tuple[PoolCandidate, ...]] = {}
    for target in schema.label_classes:
        needed = target_counts.get(target, 0)
        if needed <= 0:
            continue
        per_source: list[list[PoolCandidate]] = []
        for source in schema.label_classes:
            if source == target:
                continue  # self-transitions are excluded from augmentation
            patients = list(data.of_class(source))
            if not patients:
                continue
            order = rng.permutation(len(patients))
            sets = [generate(model, patients[i], target, config) for i in order]
            source_list: list[PoolCandidate] = []
            for member_idx in range(config.k):
                for patient_pos, cfset in zip(order, sets):
                    converged = cfset.converged_members()
                    if member_idx < len(converged):
                        member = converged[member_idx]
                        parent = patients[patient_pos]
                        record = PatientRecord(
                            id=f"cf-{target}-{parent.id}-m{member_idx}",
                            label=target,
                            values=member.values,
                        )
                        source_list.append(
                            PoolCandidate(
                                record=record,
                                parent_id=parent.id,
                                source_class=source,
                                target_class=target,
                            )
                        )
            per_source.append(source_list)

        interleaved: list[PoolCandidate] = []
        depth = max((len(lst) for lst in per_source), default=0)
        for i in range(depth):
            for lst in per_source:
                if i < len(lst):
                    interleaved.append(lst[i])
        if len(interleaved) < needed:
            raise InsufficientPoolError(
                f"target {target!r} needs {needed} counterfactuals, "
                f"only {len(interleaved)} converged"
            )
        candidates[target] = tuple(interleaved)
    return CfPool(candidates=candidates, target_counts=dict(target_counts))


@dataclass(frozen=True, eq=False)
class AugmentedSplit:
    train: Dataset
    test: Dataset
    provenance: dict[str, str]  # record id -> real | counterfactual
    parents: dict[str, str]  # counterfactual id -> parent record id

    def composition(self) -> dict:
        def side(ds: Dataset) -> dict:
            real = sum(1 for r in ds.records if self.provenance[r.id] == PROVENANCE_REAL)
            return {"total": len(ds), "real": real, "cf": len(ds) - real}

        return {"train": side(self.train), "test": side(self.test)}

    def check_leakage(self) -> None:
        test_ids = {r.id for r in self.test.records}
        for record in self.train.records:
            parent = self.parents.get(record.id)
            if parent is not None and parent in test_ids:
                raise LeakageViolationError(
                    f"counterfactual {record.id!r} in train descends from test record {parent!r}"
                )


def build_scenario(data: Dataset, pool: CfPool | None, scenario: Scenario) -> AugmentedSplit:
    """Assemble one augmented train/test split.

    Splitting stratifies on (class, provenance) so real and counterfactual
    records are apportioned independently; this is what makes the composition
    bookkeeping exact for a fixed cohort.
    """
    labeled = data.labeled()
    if scenario.kind == "baseline":
        train_ds, test_ds = stratified_split(labeled, scenario.effective_train_frac, scenario.seed)
        provenance = {r.id: PROVENANCE_REAL for r in labeled.records}
        return AugmentedSplit(train=train_ds, test=test_ds, provenance=provenance, parents={})

    needed = counterfactuals_needed(labeled, scenario)
    if pool is None:
        raise InsufficientPoolError("scenario requires a counterfactual pool")
    for label, count in needed.items():
        have = len(pool.candidates.get(label, ()))
        if count > 0 and have < count:
            raise InsufficientPoolError(
                f"target {label!r} needs {count} counterfactuals, pool holds {have}"
            )

    if scenario.kind == "C":
        return _build_scenario_c(labeled, pool, scenario, needed)
    return _build_scenario_frac(labeled, pool, scenario, needed)


def _build_scenario_frac(
    data: Dataset, pool: CfPool, scenario: Scenario, needed: dict[str, int]
) -> AugmentedSplit:
    schema = data.schema
    rng = np.random.default_rng(scenario.seed)
    frac = scenario.effective_train_frac

    strata: list[tuple[str, str, list]] = []  # (class, provenance, items)
    for label in schema.label_classes:
        reals = list(data.of_class(label))
        if reals:
            strata.append((label, PROVENANCE_REAL, reals))
        if needed.get(label, 0) > 0:
            strata.append((label, PROVENANCE_CF, list(pool.candidates[label][: needed[label]])))

    quotas = apportion([len(items) for _, _, items in strata], frac, rng)

    train_records: list[PatientRecord] = []
    test_records: list[PatientRecord] = []
    provenance: dict[str, str] = {}
    parents: dict[str, str] = {}

    # Reals first so counterfactual placement can respect the leakage guard.
    test_real_ids: set[str] = set()
    cf_strata: list[tuple[str, list[PoolCandidate], int]] = []
    for (label, prov, items), quota in zip(strata, quotas):
        if prov == PROVENANCE_REAL:
            idx = rng.permutation(len(items))
            chosen = set(idx[:quota])
            for i, record in enumerate(items):
                provenance[record.id] = PROVENANCE_REAL
                if i in chosen:
                    train_records.append(record)
                else:
                    test_records.append(record)
                    test_real_ids.add(record.id)
        else:
            cf_strata.append((label, items, quota))

    for label, selected, quota in cf_strata:
        chosen = list(selected)
        rng.shuffle(chosen)
        train_picks = chosen[:quota]
        test_picks = chosen[quota:]
        selected_ids = {c.record.id for c in selected}
        unused = [c for c in pool.candidates[label] if c.record.id not in selected_ids]
        for i, pick in enumerate(train_picks):
            if pick.parent_id not in test_real_ids:
                continue
            swap = next(
                (j for j, other in enumerate(test_picks) if other.parent_id not in test_real_ids),
                None,
            )
            if swap is not None:
                train_picks[i], test_picks[swap] = test_picks[swap], train_picks[i]
                continue
            fresh = next(
                (c for c in unused if c.parent_id not in test_real_ids), None
            )
            if fresh is None:
                raise LeakageViolationError(
                    f"cannot place counterfactuals for {label!r} without test-parent leakage"
                )
            unused.remove(fresh)
            train_picks[i] = fresh
        for pick in train_picks:
            train_records.append(pick.record)
            provenance[pick.record.id] = PROVENANCE_CF
            parents[pick.record.id] = pick.parent_id
        for pick in test_picks:
            test_records.append(pick.record)
            provenance[pick.record.id] = PROVENANCE_CF
            parents[pick.record.id] = pick.parent_id

    split = AugmentedSplit(
        train=Dataset(schema, tuple(train_records)),
        test=Dataset(schema, tuple(test_records)),
        provenance=provenance,
        parents=parents,
    )
    split.check_leakage()
    return split


def _build_scenario_c(
    data: Dataset, pool: CfPool, scenario: Scenario, needed: dict[str, int]
) -> AugmentedSplit:
    schema = data.schema
    rng = np.random.default_rng(scenario.seed)
    counts = {c: len(data.of_class(c)) for c in schema.label_classes if data.of_class(c)}
    test_block = min(counts.values())

    train_records: list[PatientRecord] = []
    test_records: list[PatientRecord] = []
    provenance: dict[str, str] = {}
    parents: dict[str, str] = {}
    test_real_ids: set[str] = set()

    for label in schema.label_classes:
        reals = list(data.of_class(label))
        if not reals:
            continue
        idx = rng.permutation(len(reals))
        to_test = set(idx[:test_block])
        for i, record in enumerate(reals):
            provenance[record.id] = PROVENANCE_REAL
            if i in to_test:
                test_records.append(record)
                test_real_ids.add(record.id)
            else:
                train_records.append(record)

    for label in schema.label_classes:
        extra = needed.get(label, 0)
        if extra <= 0:
            continue
        taken = 0
        for candidate in pool.candidates[label]:
            if taken == extra:
                break
            if candidate.parent_id in test_real_ids:
                continue
            train_records.append(candidate.record)
            provenance[candidate.record.id] = PROVENANCE_CF
            parents[candidate.record.id] = candidate.parent_id
            taken += 1
        if taken < extra:
            raise InsufficientPoolError(
                f"target {label!r}: only {taken}/{extra} leakage-free candidates available"
            )

    split = AugmentedSplit(
        train=Dataset(schema, tuple(train_records)),
        test=Dataset(schema, tuple(test_records)),
        provenance=provenance,
        parents=parents,
    )
    split.check_leakage()
    return split


def save_augmented_split(split: AugmentedSplit, out_dir: str | Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, ds in (("train", split.train), ("test", split.test)):
        with (out_dir / f"{name}.csv").open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                ["id", "tumor_type", *ds.schema.feature_names, "provenance", "parent_id"]
            )
            for record in ds.records:
                writer.writerow(
                    [
                        record.id,
                        record.label,
                        *[repr(float(v)) for v in record.values],
                        split.provenance[record.id],
                        split.parents.get(record.id, ""),
                    ]
                )


def load_augmented_split(out_dir: str | Path, schema: FeatureSchema) -> AugmentedSplit:
    out_dir = Path(out_dir)
    provenance: dict[str, str] = {}
    parents: dict[str, str] = {}
    sides = {}
    for name in ("train", "test"):
        records = []
        with (out_dir / f"{name}.csv").open(newline="", encoding="utf-8") as handle:
            for row in csv.DictReader(handle):
                values = np.array([float(row[f]) for f in schema.feature_names])
                record = PatientRecord(id=row["id"], label=row["tumor_type"], values=values)
                records.append(record)
                provenance[record.id] = row["provenance"]
                if row["parent_id"]:
                    parents[record.id] = row["parent_id"]
        sides[name] = Dataset(schema, tuple(records))
    return AugmentedSplit(
        train=sides["train"], test=sides["test"], provenance=provenance, parents=parents
    )


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    scenario: Scenario
    n_runs: int
    runs: tuple[EvaluationMetrics, ...]
    composition: dict

    def _stat(self, name: str) -> tuple[float, float]:
        values = np.array([getattr(m, name) for m in self.runs])
        std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
        return float(values.mean()), std

    def summary(self) -> dict:
        out = {"scenario": self.scenario.kind, "n_runs": self.n_runs, "composition": self.composition}
        for name in ("macro_precision", "macro_recall", "macro_f1"):
            mean, std = self._stat(name)
            out[name] = {"mean": mean, "std": std}
        return out

    def save_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2) + "\n", encoding="utf-8")


def run_experiment(
    data: Dataset,
    scenario: Scenario,
    n_runs: int = 5,
    seeds: Sequence[int] | None = None,
    train_config: TrainConfig = TrainConfig(),
    cf_config: CfConfig = CfConfig(),
) -> ExperimentResult:
    """Train/evaluate over repeated stratified splits of one scenario.

    Scenario C has a fixed real-only test side by construction, so it runs
    once regardless of ``n_runs``.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    labeled = data.labeled()
    if scenario.kind == "C":
        n_runs = 1
    if seeds is None:
        seeds = [scenario.seed + i for i in range(n_runs)]
    if len(seeds) < n_runs:
        raise ValueError("need one seed per run")

    pool = None
    if scenario.kind != "baseline":
        needed = counterfactuals_needed(labeled, scenario)
        generation_model = train(labeled, train_config)
        pool = build_cf_pool(generation_model, labeled, cf_config, needed, seed=scenario.seed)

    runs = []
    composition = None
    for run_idx in range(n_runs):
        split = build_scenario(labeled, pool, replace(scenario, seed=int(seeds[run_idx])))
        if composition is None:
            composition = split.composition()
        model = train(split.train, train_config)
        runs.append(evaluate_macro(model, split.test))

    return ExperimentResult(
        scenario=scenario, n_runs=n_runs, runs=tuple(runs), composition=composition
    )


def save_experiment_table(results: Sequence[ExperimentResult], path: str | Path) -> None:
    """One row per scenario in the train/test-composition + mean/std format."""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["scenario", "train", "test", "precision", "recall", "f1"]
        )
        for result in results:
            comp = result.composition
            train_txt = f"{comp['train']['total']}({comp['train']['real']} R, {comp['train']['cf']} CF)"
            test_txt = f"{comp['test']['total']}({comp['test']['real']} R, {comp['test']['cf']} CF)"
            cells = []
            for name in ("macro_precision", "macro_recall", "macro_f1"):
                mean, std = result._stat(name)
                cells.append(f"{100 * mean:.2f} +/- {100 * std:.2f}")
            writer.writerow([result.scenario.kind, train_txt, test_txt, *cells])
