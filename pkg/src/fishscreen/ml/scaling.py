"""Min-max scaling to [0, 1]."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ScalerParams:
    minimum: np.ndarray
    maximum: np.ndarray

    def to_dict(self) -> dict:
        return {"min": [float(v) for v in self.minimum], "max": [float(v) for v in self.maximum]}

    @classmethod
    def from_dict(cls, d: dict) -> "ScalerParams":
        return cls(np.asarray(d["min"], dtype=float), np.asarray(d["max"], dtype=float))

    def subset(self, idx) -> "ScalerParams":
        idx = list(idx)
        return ScalerParams(self.minimum[idx], self.maximum[idx])


def fit_minmax(X) -> ScalerParams:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] < 1:
        raise ValueError("need at least one row to fit a scaler")
    return ScalerParams(X.min(axis=0), X.max(axis=0))


def apply_minmax(params: ScalerParams, X) -> np.ndarray:
    """Map each column to [0, 1]; zero-range columns become 0 and values
    outside the fitted range are clamped."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    span = params.maximum - params.minimum
    safe = np.where(span > 0, span, 1.0)
    out = (X - params.minimum) / safe
    out[:, span <= 0] = 0.0
    return np.clip(out, 0.0, 1.0)
