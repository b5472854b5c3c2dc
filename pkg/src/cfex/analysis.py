"""Downstream analysis of counterfactual populations.

Covers three reporting layers: which features get edited and how often
(change-frequency tables), whether the edits are statistically meaningful
(paired and Welch t-tests against factuals and against real target-class
records), and density curves for visual comparison of real vs generated
values.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .engine import CounterfactualSet
from .errors import (
    DegenerateSampleError,
    DegenerateVarianceError,
    LengthMismatchError,
    MixedTransitionsError,
)
from .schema import Dataset

KDE_GRID_POINTS = 512
KDE_SUPPORT_BANDWIDTHS = 4.0


@dataclass(frozen=True)
class ChangeFrequencyReport:
    source_class: str
    target_class: str
    n_patients: int
    n_counterfactuals: int
    counts: dict[str, int]  # every schema feature, immutables included (always 0)

    def sorted_counts(self) -> list[tuple[str, int]]:
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))

    def to_json_dict(self) -> dict:
        return {
            "source": self.source_class,
            "target": self.target_class,
            "n_patients": self.n_patients,
            "n_counterfactuals": self.n_counterfactuals,
            "counts": {f: c for f, c in self.sorted_counts()},
        }

    def save_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["feature", "changes"])
            for feature, count in self.sorted_counts():
                writer.writerow([feature, count])


def change_frequency(cfsets: Sequence[CounterfactualSet], schema=None) -> ChangeFrequencyReport:
    """Count, per feature, how many converged members modified it."""
    if not cfsets:
        return ChangeFrequencyReport(
            source_class="",
            target_class="",
            n_patients=0,
            n_counterfactuals=0,
            counts={} if schema is None else {f: 0 for f in schema.feature_names},
        )
    source = cfsets[0].source_label
    target = cfsets[0].target
    for cfset in cfsets:
        if cfset.source_label != source or cfset.target != target:
            raise MixedTransitionsError(
                f"expected {source}->{target}, got {cfset.source_label}->{cfset.target}"
            )
    if schema is not None:
        feature_names = schema.feature_names
    else:
        # No layout provided: fall back to the union of observed delta keys.
        feature_names = tuple(
            sorted({f for cfset in cfsets for m in cfset.members for f in m.delta})
        )
    counts = {name: 0 for name in feature_names}
    n_cf = 0
    for cfset in cfsets:
        for member in cfset.converged_members():
            n_cf += 1
            for feature in member.delta:
                counts[feature] = counts.get(feature, 0) + 1
    return ChangeFrequencyReport(
        source_class=source,
        target_class=target,
        n_patients=len(cfsets),
        n_counterfactuals=n_cf,
        counts=counts,
    )


def top_features(report: ChangeFrequencyReport, k: int) -> list[tuple[str, int]]:
    """Top-k nonzero counts, descending, alphabetical on ties."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = [(f, c) for f, c in report.sorted_counts() if c > 0]
    return ranked[:k]


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    p_value: float
    df: float
    kind: str  # "paired" | "welch"


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    MAXIT, EPS, FPMIN = 200, 3e-14, 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_tailed(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def paired_ttest(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Dependent t-test on elementwise differences (two-tailed)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatchError("paired test needs equal-length vectors")
    n = a.shape[0]
    if n < 2:
        raise LengthMismatchError("paired test needs at least 2 pairs")
    d = a - b
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        raise DegenerateVarianceError("all paired differences are equal")
    t = float(d.mean()) / (sd / math.sqrt(n))
    df = n - 1
    return TTestResult(t_statistic=t, p_value=student_t_two_tailed(t, df), df=float(df), kind="paired")


def welch_ttest(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Unequal-variance t-test with Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or b.ndim != 1 or a.shape[0] < 2 or b.shape[0] < 2:
        raise LengthMismatchError("welch test needs two samples of size >= 2")
    na, nb = a.shape[0], b.shape[0]
    va, vb = float(a.var(ddof=1)), float(b.var(ddof=1))
    if va == 0.0 and vb == 0.0:
        raise DegenerateVarianceError("both samples are constant")
    se2 = va / na + vb / nb
    t = (float(a.mean()) - float(b.mean())) / math.sqrt(se2)
    df = se2**2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return TTestResult(t_statistic=t, p_value=student_t_two_tailed(t, df), df=float(df), kind="welch")


@dataclass(frozen=True)
class SignificanceRow:
    kind: str  # "paired" | "welch"
    feature: str
    original_class: str  # baseline population: source class (paired), target class (welch)
    source_class: str
    target_class: str
    result: TTestResult | None
    n_a: int
    n_b: int
    skipped_reason: str | None = None

    @property
    def transition(self) -> str:
        return f"{self.source_class} to {self.target_class}"

    def to_json_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "feature": self.feature,
            "original": self.original_class,
            "transition": self.transition,
            "n_a": self.n_a,
            "n_b": self.n_b,
        }
        if self.result is not None:
            out.update(
                t=self.result.t_statistic, p=self.result.p_value, df=self.result.df
            )
        if self.skipped_reason:
            out["skipped"] = self.skipped_reason
        return out


TRACK1_TOP_FEATURES = 5
TRACK2_TOP_FEATURES = 3


def significance_suite(
    data: Dataset, cfpools: Sequence[CounterfactualSet]
) -> list[SignificanceRow]:
    """Two-track hypothesis tests over every transition present in ``cfpools``.

    Track 1 pairs each converged counterfactual with its own factual on the
    transition's five most-changed features. Track 2 compares counterfactual
    values against real target-class records, per feature, on the top three.
    Degenerate cases become flagged rows instead of failures.
    """
    schema = data.schema
    by_transition: dict[tuple[str, str], list[CounterfactualSet]] = {}
    for cfset in cfpools:
        if cfset.source_label not in schema.label_classes:
            continue  # unlabeled factuals cannot anchor a transition
        by_transition.setdefault((cfset.source_label, cfset.target), []).append(cfset)

    def transition_order(key):
        source, target = key
        return (schema.class_index(source), schema.class_index(target))

    rows: list[SignificanceRow] = []
    for source, target in sorted(by_transition, key=transition_order):
        pools = by_transition[(source, target)]
        report = change_frequency(pools, schema=schema)
        ranked = top_features(report, TRACK1_TOP_FEATURES)

        for feature, _count in ranked:
            j = schema.index_of(feature)
            cf_values, factual_values = [], []
            for cfset in pools:
                for member in cfset.converged_members():
                    cf_values.append(float(member.values[j]))
                    factual_values.append(float(cfset.factual.values[j]))
            rows.append(
                _tested_row(
                    "paired", feature, source, source, target, cf_values, factual_values
                )
            )

        real_target = [
            [float(r.values[schema.index_of(f)]) for r in data.of_class(target)]
            for f, _ in ranked[:TRACK2_TOP_FEATURES]
        ]
        for (feature, _count), reference in zip(ranked[:TRACK2_TOP_FEATURES], real_target):
            j = schema.index_of(feature)
            cf_values = [
                float(member.values[j])
                for cfset in pools
                for member in cfset.converged_members()
            ]
            rows.append(
                _tested_row("welch", feature, target, source, target, cf_values, reference)
            )
    return rows


def _tested_row(kind, feature, original, source, target, a, b) -> SignificanceRow:
    base = dict(
        kind=kind,
        feature=feature,
        original_class=original,
        source_class=source,
        target_class=target,
        n_a=len(a),
        n_b=len(b),
    )
    if len(a) < 2 or len(b) < 2:
        return SignificanceRow(result=None, skipped_reason="n < 2", **base)
    try:
        result = paired_ttest(a, b) if kind == "paired" else welch_ttest(a, b)
    except (DegenerateVarianceError, LengthMismatchError) as exc:
        return SignificanceRow(result=None, skipped_reason=str(exc), **base)
    return SignificanceRow(result=result, skipped_reason=None, **base)


def save_significance_csv(rows: Iterable[SignificanceRow], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["kind", "feature", "original", "transition", "t", "p", "df", "n_a", "n_b", "skipped"]
        )
        for row in rows:
            if row.result is None:
                writer.writerow(
                    [row.kind, row.feature, row.original_class, row.transition,
                     "", "", "", row.n_a, row.n_b, row.skipped_reason or ""]
                )
            else:
                writer.writerow(
                    [row.kind, row.feature, row.original_class, row.transition,
                     f"{row.result.t_statistic:.6g}", f"{row.result.p_value:.6g}",
                     f"{row.result.df:.6g}", row.n_a, row.n_b, ""]
                )


def save_significance_json(rows: Iterable[SignificanceRow], path: str | Path) -> None:
    payload = [row.to_json_dict() for row in rows]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True, eq=False)
class KdeCurve:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float).copy()
        d = np.asarray(self.density, dtype=float).copy()
        g.flags.writeable = False
        d.flags.writeable = False
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "density", d)

    def integral(self) -> float:
        trapezoid = getattr(np, "trapezoid", np.trapz)
        return float(trapezoid(self.density, self.grid))

    def to_json_dict(self) -> dict:
        return {
            "bandwidth": self.bandwidth,
            "grid": [float(v) for v in self.grid],
            "density": [float(v) for v in self.density],
        }


def scott_bandwidth(samples: np.ndarray) -> float:
    n = samples.shape[0]
    return float(samples.std(ddof=1)) * n ** (-1.0 / 5.0)


def kde_estimate(samples: Sequence[float], bandwidth: float | str = "auto") -> KdeCurve:
    """Gaussian-kernel density on a 512-point grid spanning the data range
    plus four bandwidths on each side."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.shape[0] < 1:
        raise DegenerateSampleError("need a non-empty 1-d sample")
    if bandwidth == "auto":
        if samples.shape[0] < 2 or samples.std(ddof=1) == 0.0:
            raise DegenerateSampleError("auto bandwidth needs >=2 samples with spread")
        h = scott_bandwidth(samples)
    else:
        h = float(bandwidth)
        if h <= 0:
            raise ValueError("bandwidth must be positive")
    lo = samples.min() - KDE_SUPPORT_BANDWIDTHS * h
    hi = samples.max() + KDE_SUPPORT_BANDWIDTHS * h
    grid = np.linspace(lo, hi, KDE_GRID_POINTS)
    z = (grid[:, None] - samples[None, :]) / h
    density = np.exp(-0.5 * z * z).sum(axis=1) / (samples.shape[0] * h * math.sqrt(2 * math.pi))
    return KdeCurve(grid=grid, density=density, bandwidth=h)


def save_kde_csv(curve: KdeCurve, path: str | Path, label: str = "density") -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["grid", label])
        for g, d in zip(curve.grid, curve.density):
            writer.writerow([repr(float(g)), repr(float(d))])
