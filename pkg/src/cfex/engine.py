"""Gradient-based generation of diverse, constrained counterfactuals.

The search runs in standardized feature space and minimizes, over k
candidates jointly,

    mean hinge(margin) + (lambda1/k) * sum of MAD-weighted L1 distances
    - lambda2 * det(K),   K[i,j] = 1 / (1 + dist(c_i, c_j))

subject to box bounds and frozen (immutable or user-locked) coordinates.
Candidates are post-processed for sparsity (greedy reversion of changes)
and proximity (per-coordinate shrink toward the factual while the target
prediction holds).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidTargetError, LengthMismatchError
from .model import Model
from .schema import PatientRecord

SCALED_BOUND = 2.0  # default half-width of the search box, in standard deviations


@dataclass(frozen=True)
class CfConfig:
    k: int = 5
    lambda1: float = 0.5
    lambda2: float = 1.0
    learning_rate: float = 0.05
    max_iters: int = 5000
    sparsify_tolerance: float = 1e-3
    seed: int = 0
    init_spread: float = 0.5
    min_iters: int = 50
    refine: bool = True  # shrink surviving changes to the closest valid point

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("objective weights must be non-negative")

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "learning_rate": self.learning_rate,
            "max_iters": self.max_iters,
            "sparsify_tolerance": self.sparsify_tolerance,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class Counterfactual:
    """One candidate in original feature units, with its sparse change map."""

    factual_id: str
    target: str
    values: np.ndarray
    delta: dict[str, tuple[float, float]]  # feature -> (factual value, new value)
    converged: bool
    achieved_class: str

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def n_changed(self) -> int:
        return len(self.delta)


@dataclass(frozen=True, eq=False)
class CounterfactualSet:
    factual: PatientRecord
    target: str
    config: CfConfig
    members: tuple[Counterfactual, ...]

    @property
    def source_label(self) -> str:
        return self.factual.label

    def converged_members(self) -> tuple[Counterfactual, ...]:
        return tuple(m for m in self.members if m.converged)

    def to_json_dict(self) -> dict:
        return {
            "factual": {
                "id": self.factual.id,
                "label": self.factual.label,
                "values": [float(v) for v in self.factual.values],
            },
            "target": self.target,
            "config": self.config.to_dict(),
            "members": [
                {
                    "delta": {f: [old, new] for f, (old, new) in m.delta.items()},
                    "converged": m.converged,
                    "achieved_class": m.achieved_class,
                    "values": [float(v) for v in m.values],
                }
                for m in self.members
            ],
        }

    def save_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n", encoding="utf-8")

    def save_csv(self, path: str | Path, feature_names: Sequence[str]) -> None:
        """Sparse table: one factual row, then one row per member with '-' for
        untouched features."""
        with Path(path).open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["row", "tumor_type", *feature_names, "converged"])
            writer.writerow(
                ["factual", self.factual.label, *[repr(float(v)) for v in self.factual.values], ""]
            )
            for i, m in enumerate(self.members):
                cells = []
                for name in feature_names:
                    if name in m.delta:
                        cells.append(repr(float(m.delta[name][1])))
                    else:
                        cells.append("-")
                writer.writerow([f"cf_{i}", self.target, *cells, str(m.converged).lower()])


def hinge_loss(logit: float, z: int = 1) -> float:
    """max(0, 1 - z * logit); z is +1 when the outcome is the target, else -1."""
    return max(0.0, 1.0 - z * logit)


def proximity(c: np.ndarray, x: np.ndarray, mad: np.ndarray) -> float:
    """MAD-weighted L1 distance; degenerate MAD entries must be pre-replaced by 1."""
    c = np.asarray(c, dtype=float)
    x = np.asarray(x, dtype=float)
    mad = np.asarray(mad, dtype=float)
    if c.shape != x.shape or c.shape != mad.shape:
        raise LengthMismatchError(
            f"shape mismatch: c{c.shape}, x{x.shape}, mad{mad.shape}"
        )
    return float(np.sum(np.abs(c - x) / mad))


def _pairwise_weighted_l1(C: np.ndarray, mad: np.ndarray) -> np.ndarray:
    scaled = C / mad
    return np.abs(scaled[:, None, :] - scaled[None, :, :]).sum(axis=2)


def dpp_diversity(cfs: Sequence[np.ndarray], mad: np.ndarray | None = None) -> float:
    """det(K) with K[i,j] = 1/(1 + dist(c_i, c_j)); 1 for a single candidate."""
    if len(cfs) == 0:
        raise ValueError("need at least one counterfactual")
    C = np.stack([np.asarray(c, dtype=float) for c in cfs])
    if mad is None:
        mad = np.ones(C.shape[1])
    K = 1.0 / (1.0 + _pairwise_weighted_l1(C, np.asarray(mad, dtype=float)))
    return float(np.linalg.det(K))


def _det_and_adjugate(K: np.ndarray) -> tuple[float, np.ndarray]:
    det = float(np.linalg.det(K))
    n = K.shape[0]
    if abs(det) > 1e-10:
        try:
            return det, det * np.linalg.inv(K)
        except np.linalg.LinAlgError:
            pass
    adj = np.empty_like(K)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(K, j, axis=0), i, axis=1)
            adj[i, j] = (-1) ** (i + j) * (np.linalg.det(minor) if minor.size else 1.0)
    return det, adj


def _margins(model: Model, C: np.ndarray, t_idx: int) -> tuple[np.ndarray, np.ndarray]:
    logits = C @ model.weights.T + model.bias
    competing = logits.copy()
    competing[:, t_idx] = -np.inf
    j_star = np.argmax(competing, axis=1)
    margin = logits[:, t_idx] - competing[np.arange(C.shape[0]), j_star]
    return margin, j_star


def _objective(model, C, x_z, mad, t_idx, config) -> float:
    margin, _ = _margins(model, C, t_idx)
    hinge = np.maximum(0.0, 1.0 - margin).mean()
    prox = np.abs((C - x_z) / mad).sum(axis=1).mean()
    value = hinge + config.lambda1 * prox
    if config.k > 1 and config.lambda2 > 0:
        K = 1.0 / (1.0 + _pairwise_weighted_l1(C, mad))
        value -= config.lambda2 * float(np.linalg.det(K))
    return float(value)


def _scaled_bounds(model: Model, x_z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature search box: +/-2 sd, narrowed by the schema's raw ranges and
    widened (only if needed) to keep the factual itself feasible."""
    schema = model.schema
    sigma = model.scaler.sigma
    mu = model.scaler.mu
    lo = np.full(schema.n_features, -SCALED_BOUND)
    hi = np.full(schema.n_features, SCALED_BOUND)
    for j, spec in enumerate(schema.features):
        if sigma[j] > 0:
            lo[j] = max(lo[j], (spec.min - mu[j]) / sigma[j])
            hi[j] = min(hi[j], (spec.max - mu[j]) / sigma[j])
        else:
            lo[j] = hi[j] = 0.0
    lo = np.minimum(lo, x_z)
    hi = np.maximum(hi, x_z)
    return lo, hi


def _resolve_locks(model: Model, locked: Sequence[str]) -> np.ndarray:
    schema = model.schema
    mask = schema.immutable_mask.copy()
    for name in locked:
        mask[schema.index_of(name)] = True
    return mask


def generate(
    model: Model,
    factual: PatientRecord,
    target: str,
    config: CfConfig = CfConfig(),
    locked: Sequence[str] = (),
) -> CounterfactualSet:
    """Produce k counterfactuals for one (factual, target) request.

    Immutable and locked coordinates are projected back to the factual after
    every step, so they match it bit-exactly in the output. Non-convergence is
    reported per member via ``converged=False``, never raised.
    """
    schema = model.schema
    factual.require_conforms(schema)
    if target not in schema.label_classes:
        raise InvalidTargetError(f"{target!r} is not one of {schema.label_classes}")
    t_idx = schema.class_index(target)

    frozen = _resolve_locks(model, locked)
    mutable = ~frozen & ~model.scaler.degenerate_mask
    x_z = model.scaler.transform(factual.values)
    lo, hi = _scaled_bounds(model, x_z)
    mad = model.feature_mad
    rng = np.random.default_rng(config.seed)
    k = config.k

    C = np.tile(x_z, (k, 1))
    if k > 1:
        noise = rng.normal(0.0, config.init_spread, size=(k - 1, schema.n_features))
        C[1:] += noise * mutable  # member 0 starts exactly at the factual
    C = np.clip(C, lo, hi)
    C[:, ~mutable] = x_z[~mutable]

    W = model.weights
    shrink = config.learning_rate * config.lambda1 / (k * mad)
    best_obj = np.inf
    patience = 0
    for it in range(config.max_iters):
        # Gradient step on the smooth terms (hinge + diversity) ...
        margin, j_star = _margins(model, C, t_idx)
        grad = np.zeros_like(C)
        active = margin < 1.0
        if np.any(active):
            grad[active] -= (W[t_idx] - W[j_star[active]]) / k
        if k > 1 and config.lambda2 > 0:
            D = _pairwise_weighted_l1(C, mad)
            K = 1.0 / (1.0 + D)
            _, adj = _det_and_adjugate(K)
            coef = 2.0 * adj * (-1.0 / (1.0 + D) ** 2)  # d det / d D, both triangles
            signs = np.sign(C[:, None, :] - C[None, :, :])
            grad -= config.lambda2 * np.einsum("ab,abf->af", coef, signs) / mad
        grad *= mutable
        norms = np.linalg.norm(grad, axis=1, keepdims=True)
        np.divide(grad, norms / 5.0, out=grad, where=norms > 5.0)
        C -= config.learning_rate * grad

        # ... then the proximal step for the L1 proximity term, which pulls
        # coordinates the other terms do not defend exactly onto the factual.
        diff = C - x_z
        C = x_z + np.sign(diff) * np.maximum(0.0, np.abs(diff) - shrink)

        np.clip(C, lo, hi, out=C)
        C[:, ~mutable] = x_z[~mutable]

        if it >= config.min_iters and (it + 1) % 25 == 0:
            margin_now, _ = _margins(model, C, t_idx)
            obj = _objective(model, C, x_z, mad, t_idx, config)
            if obj < best_obj - 1e-5 * (1.0 + abs(best_obj)):
                best_obj = obj
                patience = 0
            else:
                patience += 1
            if np.all(margin_now > 0) and patience >= 2:
                break

    members = []
    for i in range(k):
        member = _build_member(model, factual, target, x_z, C[i], frozen)
        if member.converged:
            member = sparsify(member, model, tolerance=config.sparsify_tolerance)
            if config.refine:
                member = _tighten(member, model, tolerance=config.sparsify_tolerance)
        members.append(member)

    return CounterfactualSet(factual=factual, target=target, config=config, members=tuple(members))


def _build_member(
    model: Model,
    factual: PatientRecord,
    target: str,
    x_z: np.ndarray,
    c_z: np.ndarray,
    frozen: np.ndarray,
) -> Counterfactual:
    schema = model.schema
    values = factual.values.copy()
    changed = (~frozen) & (c_z != x_z)
    raw = model.scaler.inverse_transform(c_z)
    values[changed] = raw[changed]
    prediction = model.predict_scaled(model.scaler.transform(values))
    delta = {
        schema.feature_names[j]: (float(factual.values[j]), float(values[j]))
        for j in np.flatnonzero(changed)
        if values[j] != factual.values[j]
    }
    return Counterfactual(
        factual_id=factual.id,
        target=target,
        values=values,
        delta=delta,
        converged=(prediction.label == target),
        achieved_class=prediction.label,
    )


def _predicts_target(model: Model, values: np.ndarray, target: str) -> bool:
    return model.predict_scaled(model.scaler.transform(values)).label == target


def _scaled_change(model: Model, feature: str, old: float, new: float) -> float:
    j = model.schema.index_of(feature)
    sigma = model.scaler.sigma[j]
    return abs(new - old) / sigma if sigma > 0 else 0.0


def sparsify(
    cf: Counterfactual, model: Model, tolerance: float | None = None
) -> Counterfactual:
    """Greedily revert changed features (smallest scaled change first), keeping
    a reversion only when the prediction still equals the target. Changes whose
    surviving scaled magnitude is within ``tolerance`` are treated as numeric
    residue and left out of the reported delta."""
    if not cf.converged:
        return cf
    if tolerance is None:
        tolerance = 1e-3
    values = cf.values.copy()
    surviving = dict(cf.delta)
    while True:
        order = sorted(surviving, key=lambda f: _scaled_change(model, f, *surviving[f]))
        reverted_any = False
        for feature in order:
            j = model.schema.index_of(feature)
            old = surviving[feature][0]
            trial = values.copy()
            trial[j] = old
            if _predicts_target(model, trial, cf.target):
                values = trial
                del surviving[feature]
                reverted_any = True
        if not reverted_any:
            break
    delta = {
        f: (old, float(values[model.schema.index_of(f)]))
        for f, (old, _) in surviving.items()
        if _scaled_change(model, f, old, values[model.schema.index_of(f)]) > tolerance
    }
    prediction = model.predict_scaled(model.scaler.transform(values))
    return Counterfactual(
        factual_id=cf.factual_id,
        target=cf.target,
        values=values,
        delta=delta,
        converged=(prediction.label == cf.target),
        achieved_class=prediction.label,
    )


def _tighten(cf: Counterfactual, model: Model, tolerance: float) -> Counterfactual:
    """Shrink each surviving change toward its factual value as far as the
    target prediction allows (bisection; the valid set along each segment is an
    interval for a linear model)."""
    if not cf.converged or not cf.delta:
        return cf
    values = cf.values.copy()
    current = dict(cf.delta)
    for _ in range(2):  # a second pass catches couplings between features
        order = sorted(
            current, key=lambda f: -_scaled_change(model, f, current[f][0], current[f][1])
        )
        moved = False
        for feature in order:
            j = model.schema.index_of(feature)
            old = current[feature][0]
            new = values[j]
            if new == old:
                continue
            lo_frac, hi_frac = 0.0, 1.0
            trial = values.copy()
            trial[j] = old
            if _predicts_target(model, trial, cf.target):
                values = trial
                moved = True
                continue
            for _ in range(40):
                mid = 0.5 * (lo_frac + hi_frac)
                trial[j] = old + mid * (new - old)
                if _predicts_target(model, trial, cf.target):
                    hi_frac = mid
                else:
                    lo_frac = mid
            if hi_frac < 1.0:
                values[j] = old + hi_frac * (new - old)
                moved = True
        if not moved:
            break
        current = {
            f: (old, float(values[model.schema.index_of(f)])) for f, (old, _) in current.items()
        }
    delta = {
        f: (old, new)
        for f, (old, new) in current.items()
        if new != old
    }
    prediction = model.predict_scaled(model.scaler.transform(values))
    return Counterfactual(
        factual_id=cf.factual_id,
        target=cf.target,
        values=values,
        delta=delta,
        converged=(prediction.label == cf.target),
        achieved_class=prediction.label,
    )
