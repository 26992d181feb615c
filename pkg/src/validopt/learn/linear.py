"""Ordinary least squares on scaled features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LinearCore:
    """ys = weights @ xs + intercept, in scaled input/output space."""

    weights: np.ndarray
    intercept: float

    def predict(self, Xs: np.ndarray) -> np.ndarray:
        return np.asarray(Xs, dtype=float) @ self.weights + self.intercept


def fit_linear(Xs: np.ndarray, ys: np.ndarray) -> LinearCore:
    Xs = np.asarray(Xs, dtype=float)
    ys = np.asarray(ys, dtype=float).ravel()
    A = np.hstack([Xs, np.ones((Xs.shape[0], 1))])
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    return LinearCore(coef[:-1].copy(), float(coef[-1]))
