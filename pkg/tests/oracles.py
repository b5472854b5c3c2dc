"""Independent reference implementations used to check the optimizer."""

from __future__ import annotations

import numpy as np

from cfex.model import Model


class GridOracle:
    """Exhaustive search over a 2-feature scaled box.

    Enumerates every grid point, keeps those the model assigns to the target
    class, and reports the minimum MAD-weighted L1 distance to a query point.
    Deliberately brute-force: it shares no code path with the engine.
    """

    def __init__(self, model: Model, step: float = 0.01, bound: float = 2.0):
        if model.schema.n_features != 2:
            raise ValueError("grid oracle is for 2-feature models")
        axis = np.arange(-bound, bound + step / 2, step)
        g0, g1 = np.meshgrid(axis, axis, indexing="ij")
        self.points = np.column_stack([g0.ravel(), g1.ravel()])
        logits = self.points @ model.weights.T + model.bias
        self.assigned = np.argmax(logits, axis=1)
        self.mad = model.feature_mad

    def best_proximity(self, x_z: np.ndarray, target_index: int) -> float | None:
        valid = self.points[self.assigned == target_index]
        if valid.shape[0] == 0:
            return None
        prox = np.abs((valid - x_z) / self.mad).sum(axis=1)
        return float(prox.min())
