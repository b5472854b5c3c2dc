"""Pool construction, scenario bookkeeping, leakage guard, experiments."""

import numpy as np
import pytest

from cfex.augmentation import (
    CfPool,
    PoolCandidate,
    Scenario,
    build_cf_pool,
    build_scenario,
    counterfactuals_needed,
    load_augmented_split,
    run_experiment,
    save_augmented_split,
)
from cfex.engine import CfConfig
from cfex.errors import InsufficientPoolError, LeakageViolationError
from cfex.model import TrainConfig, train
from cfex.schema import PatientRecord

from conftest import make_cohort

FAST_CF = CfConfig(k=5, seed=0, max_iters=800)
FAST_TRAIN = TrainConfig(epochs=300)


def synthetic_pool(schema, target, per_source, values=2.0):
    """Hand-built pool.

    ``per_source`` maps source class to either a candidate count or a
    ``(count, distinct_parents)`` pair; parent ids cycle so deep pools reuse
    parents the way multi-member generation does.
    """
    candidates = []
    spec = {
        src: v if isinstance(v, tuple) else (v, v) for src, v in per_source.items()
    }
    depth = max(v[0] for v in spec.values())
    sources = [c for c in schema.label_classes if c != target and c in spec]
    for i in range(depth):
        for source in sources:
            count, parents = spec[source]
            if i < count:
                rec = PatientRecord(
                    id=f"cf-{target}-{source.lower()}-{i:03d}",
                    label=target,
                    values=np.full(schema.n_features, values),
                )
                candidates.append(
                    PoolCandidate(
                        record=rec,
                        parent_id=f"{source.lower()}{i % parents:03d}",
                        source_class=source,
                        target_class=target,
                    )
                )
    return candidates


class TestCounterfactualsNeeded:
    def test_scenario_a_tops_up_rarest_only(self, paper_sized_cohort):
        needed = counterfactuals_needed(paper_sized_cohort, Scenario(kind="A"))
        assert needed == {"MB": 0, "EP": 14, "PA": 0, "BG": 0}

    def test_scenario_b_tops_up_everyone(self, full_sized_cohort):
        needed = counterfactuals_needed(full_sized_cohort, Scenario(kind="B"))
        assert needed == {"MB": 0, "EP": 31, "PA": 17, "BG": 8}

    def test_scenario_c_rebalances_after_test_block(self, full_sized_cohort):
        needed = counterfactuals_needed(full_sized_cohort, Scenario(kind="C"))
        assert needed == {"MB": 0, "EP": 31, "PA": 17, "BG": 8}

    def test_baseline_needs_nothing(self, paper_sized_cohort):
        needed = counterfactuals_needed(paper_sized_cohort, Scenario(kind="baseline"))
        assert all(v == 0 for v in needed.values())

    def test_explicit_target_counts_override(self, paper_sized_cohort):
        scenario = Scenario(kind="A", target_counts={"EP": 30, "MB": 25})
        needed = counterfactuals_needed(paper_sized_cohort, scenario)
        assert needed == {"MB": 0, "EP": 19, "PA": 0, "BG": 0}
        scenario_c = Scenario(kind="C", target_counts={"MB": 20, "EP": 20, "PA": 20, "BG": 20})
        needed_c = counterfactuals_needed(paper_sized_cohort, scenario_c)
        # min class (EP, 11) sets the test block; remaining reals are 14/0/14/14
        assert needed_c == {"MB": 6, "EP": 20, "PA": 6, "BG": 6}


class TestBuildCfPool:
    def test_round_robin_source_balance(self, paper_sized_cohort):
        model = train(paper_sized_cohort, FAST_TRAIN)
        pool = build_cf_pool(model, paper_sized_cohort, FAST_CF, {"EP": 14}, seed=3)
        selected = pool.selected("EP")
        assert len(selected) == 14
        by_source = {}
        for cand in selected:
            by_source[cand.source_class] = by_source.get(cand.source_class, 0) + 1
        assert sorted(by_source.values(), reverse=True) == [5, 5, 4]
        assert set(by_source) == {"MB", "PA", "BG"}
        assert all(c.record.label == "EP" for c in selected)
        # one member per patient before any second member is drawn
        parents = [c.parent_id for c in selected]
        assert len(set(parents)) == len(parents)

    def test_zero_request_gives_empty_pool(self, paper_sized_cohort):
        model = train(paper_sized_cohort, FAST_TRAIN)
        pool = build_cf_pool(model, paper_sized_cohort, FAST_CF, {"EP": 0}, seed=3)
        assert pool.selected("EP") == ()
        assert pool.all_selected() == ()

    def test_insufficient_pool_raised(self):
        # two tiny classes, knowing the other-class source count cannot cover
        cohort = make_cohort({"MB": 2, "EP": 2, "PA": 2, "BG": 2}, seed=8)
        model = train(cohort, FAST_TRAIN)
        config = CfConfig(k=1, seed=0, max_iters=200)
        with pytest.raises(InsufficientPoolError):
            build_cf_pool(model, cohort, config, {"EP": 500}, seed=3)


class TestBuildScenario:
    def test_baseline_totals(self, paper_sized_cohort):
        split = build_scenario(paper_sized_cohort, None, Scenario(kind="baseline", seed=1))
        comp = split.composition()
        assert comp["train"] == {"total": 47, "real": 47, "cf": 0}
        assert comp["test"] == {"total": 39, "real": 39, "cf": 0}

    def test_scenario_a_bookkeeping(self, paper_sized_cohort):
        schema = paper_sized_cohort.schema
        pool = CfPool(
            candidates={"EP": tuple(synthetic_pool(schema, "EP", {"MB": 7, "PA": 7, "BG": 7}))},
            target_counts={"EP": 14},
        )
        split = build_scenario(paper_sized_cohort, pool, Scenario(kind="A", seed=2))
        comp = split.composition()
        assert comp["train"] == {"total": 65, "real": 56, "cf": 9}
        assert comp["test"] == {"total": 35, "real": 30, "cf": 5}

    def test_scenario_b_bookkeeping(self, full_sized_cohort):
        schema = full_sized_cohort.schema
        pool = CfPool(
            candidates={
                "EP": tuple(synthetic_pool(schema, "EP", {"MB": 14, "PA": 14, "BG": 14})),
                "PA": tuple(synthetic_pool(schema, "PA", {"MB": 8, "EP": 8, "BG": 8})),
                "BG": tuple(synthetic_pool(schema, "BG", {"MB": 4, "EP": 4, "PA": 4})),
            },
            target_counts={"EP": 31, "PA": 17, "BG": 8},
        )
        split = build_scenario(full_sized_cohort, pool, Scenario(kind="B", seed=2))
        comp = split.composition()
        assert comp["train"] == {"total": 126, "real": 84, "cf": 42}
        assert comp["test"] == {"total": 42, "real": 28, "cf": 14}

    def test_scenario_c_bookkeeping(self, full_sized_cohort):
        schema = full_sized_cohort.schema
        pool = CfPool(
            candidates={
                "EP": tuple(
                    synthetic_pool(
                        schema, "EP", {"MB": (40, 20), "PA": (36, 18), "BG": (40, 20)}
                    )
                ),
                "PA": tuple(
                    synthetic_pool(
                        schema, "PA", {"MB": (40, 20), "EP": (22, 11), "BG": (40, 20)}
                    )
                ),
                "BG": tuple(
                    synthetic_pool(
                        schema, "BG", {"MB": (24, 12), "EP": (16, 8), "PA": (24, 12)}
                    )
                ),
            },
            target_counts={"EP": 31, "PA": 17, "BG": 8},
        )
        split = build_scenario(full_sized_cohort, pool, Scenario(kind="C", seed=2))
        comp = split.composition()
        assert comp["train"] == {"total": 124, "real": 68, "cf": 56}
        assert comp["test"] == {"total": 44, "real": 44, "cf": 0}
        # per-class composition of the training side
        train_counts = split.train.class_counts()
        assert train_counts == {"MB": 31, "EP": 31, "PA": 31, "BG": 31}

    def test_leakage_guard_enforced(self, paper_sized_cohort):
        schema = paper_sized_cohort.schema
        # every candidate descends from the same single MB patient, so once
        # that patient lands in the test side no train counterfactual is legal
        cands = []
        for i in range(14):
            rec = PatientRecord(
                id=f"cf-EP-dup-{i}", label="EP", values=np.full(schema.n_features, 2.0)
            )
            cands.append(
                PoolCandidate(record=rec, parent_id="mb000", source_class="MB", target_class="EP")
            )
        pool = CfPool(candidates={"EP": tuple(cands)}, target_counts={"EP": 14})
        raised_or_clean = False
        for seed in range(20):
            try:
                split = build_scenario(paper_sized_cohort, pool, Scenario(kind="A", seed=seed))
                split.check_leakage()
                test_ids = {r.id for r in split.test.records}
                assert "mb000" not in test_ids or not any(
                    split.parents.get(r.id) == "mb000" for r in split.train.records
                )
            except LeakageViolationError:
                raised_or_clean = True
        assert raised_or_clean, "with mb000 in test at least one seed must refuse"

    def test_insufficient_pool_rejected(self, paper_sized_cohort):
        pool = CfPool(candidates={"EP": ()}, target_counts={"EP": 14})
        with pytest.raises(InsufficientPoolError):
            build_scenario(paper_sized_cohort, pool, Scenario(kind="A", seed=2))

    def test_provenance_roundtrip(self, paper_sized_cohort, tmp_path):
        schema = paper_sized_cohort.schema
        pool = CfPool(
            candidates={"EP": tuple(synthetic_pool(schema, "EP", {"MB": 7, "PA": 7, "BG": 7}))},
            target_counts={"EP": 14},
        )
        split = build_scenario(paper_sized_cohort, pool, Scenario(kind="A", seed=2))
        save_augmented_split(split, tmp_path)
        loaded = load_augmented_split(tmp_path, schema)
        assert loaded.composition() == split.composition()
        assert loaded.provenance == split.provenance
        assert loaded.parents == split.parents
        loaded.check_leakage()

    def test_deterministic_given_seed(self, paper_sized_cohort):
        schema = paper_sized_cohort.schema
        pool = CfPool(
            candidates={"EP": tuple(synthetic_pool(schema, "EP", {"MB": 7, "PA": 7, "BG": 7}))},
            target_counts={"EP": 14},
        )
        s1 = build_scenario(paper_sized_cohort, pool, Scenario(kind="A", seed=5))
        s2 = build_scenario(paper_sized_cohort, pool, Scenario(kind="A", seed=5))
        assert [r.id for r in s1.train.records] == [r.id for r in s2.train.records]
        assert [r.id for r in s1.test.records] == [r.id for r in s2.test.records]


class TestRunExperiment:
    def test_aggregation_shape(self, paper_sized_cohort):
        result = run_experiment(
            paper_sized_cohort,
            Scenario(kind="baseline", seed=1),
            n_runs=5,
            train_config=FAST_TRAIN,
            cf_config=FAST_CF,
        )
        assert result.n_runs == 5
        assert len(result.runs) == 5
        summary = result.summary()
        for name in ("macro_precision", "macro_recall", "macro_f1"):
            assert 0.0 <= summary[name]["mean"] <= 1.0
            assert summary[name]["std"] >= 0.0

    def test_identical_seeds_give_zero_std(self, paper_sized_cohort):
        result = run_experiment(
            paper_sized_cohort,
            Scenario(kind="baseline", seed=1),
            n_runs=3,
            seeds=[7, 7, 7],
            train_config=FAST_TRAIN,
        )
        assert result.summary()["macro_f1"]["std"] == 0.0

    def test_scenario_c_runs_once(self, full_sized_cohort):
        result = run_experiment(
            full_sized_cohort,
            Scenario(kind="C", seed=1),
            n_runs=5,
            train_config=FAST_TRAIN,
            cf_config=CfConfig(k=3, seed=0, max_iters=600),
        )
        assert result.n_runs == 1
        assert result.composition["test"]["cf"] == 0
