"""Feature and target scalers used by every trained regressor.

Inputs are mapped feature-wise onto [0, 1] by the training data's min/max;
targets are standardized to zero mean, unit standard deviation.  Zero-width
features and zero-variance targets degrade to identity-width scales so the
round trip stays exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError, DataError


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{what} contains non-finite values")


@dataclass
class MinMaxScaler:
    """x -> (x - offset) / scale, fitted so training data lands in [0, 1]."""

    offset: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "MinMaxScaler":
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1:
            raise ArgumentError("scaler needs a nonempty (N, d) array")
        _check_finite(X, "input data")
        offset = X.min(axis=0)
        scale = X.max(axis=0) - offset
        scale[scale == 0.0] = 1.0  # constant feature: identity width
        return cls(offset, scale)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.offset) / self.scale

    def inverse(self, Xs: np.ndarray) -> np.ndarray:
        return np.asarray(Xs, dtype=float) * self.scale + self.offset


@dataclass
class StandardScaler:
    """y -> (y - mean) / std with population (ddof 0) statistics."""

    mean: float
    std: float

    @classmethod
    def fit(cls, y: np.ndarray) -> "StandardScaler":
        y = np.asarray(y, dtype=float).ravel()
        if y.size < 2:
            raise ArgumentError("standardization needs at least 2 values")
        _check_finite(y, "target data")
        std = float(np.std(y))
        return cls(float(np.mean(y)), std if std > 0.0 else 1.0)

    def transform(self, y: np.ndarray) -> np.ndarray:
        return (np.asarray(y, dtype=float) - self.mean) / self.std

    def inverse(self, ys: np.ndarray) -> np.ndarray:
        return np.asarray(ys, dtype=float) * self.std + self.mean
