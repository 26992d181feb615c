"""Surrogate regressors trained from scratch on sampled data.

All kinds share the same preprocessing: inputs are min-max scaled onto
[0, 1], targets are standardized; prediction undoes both, so callers only
ever see original units.  Training is deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError, DataError, DimensionError
from .isofor import (IsoForestCore, fit_isolation_forest, path_length,
                     path_lengths)
from .linear import LinearCore, fit_linear
from .mlp import MlpCore, fit_mlp
from .scaling import MinMaxScaler, StandardScaler
from .trees import (LEAF, BoostedCore, ForestCore, TreeCore, fit_boosted,
                    fit_forest, fit_tree)

KINDS = ("linear", "tree", "forest", "boosted", "mlp")


@dataclass
class TrainedRegressor:
    """A fitted surrogate plus the scalers that tie it to original units."""

    kind: str
    input_scaler: MinMaxScaler
    output_scaler: StandardScaler
    core: object

    @property
    def dim(self) -> int:
        return self.input_scaler.offset.size

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise DimensionError(
                f"model expects dimension {self.dim}, got {X.shape[1]}")
        ys = self.core.predict(self.input_scaler.transform(X))
        return self.output_scaler.inverse(ys)


def _data_arrays(dataset):
    if hasattr(dataset, "inputs") and hasattr(dataset, "values"):
        return np.asarray(dataset.inputs, float), np.asarray(dataset.values, float)
    X, y = dataset
    return np.atleast_2d(np.asarray(X, float)), np.asarray(y, float).ravel()


def train_regressor(kind: str, dataset, seed: int = 0, **config) -> TrainedRegressor:
    """Fit a surrogate of the given kind on a dataset or an (X, y) pair.

    Config keys default to the reference sizes (forest/boosted: 100 members,
    depth 5; mlp: two hidden layers of 30) and pass straight to the fitter.
    """
    X, y = _data_arrays(dataset)
    input_scaler = MinMaxScaler.fit(X)
    output_scaler = StandardScaler.fit(y)
    Xs = input_scaler.transform(X)
    ys = output_scaler.transform(y)
    if kind == "linear":
        core = fit_linear(Xs, ys)
    elif kind == "tree":
        core = fit_tree(Xs, ys, **config)
    elif kind == "forest":
        core = fit_forest(Xs, ys, seed=seed, **config)
    elif kind == "boosted":
        core = fit_boosted(Xs, ys, **config)
    elif kind == "mlp":
        core = fit_mlp(Xs, ys, seed=seed, **config)
    else:
        raise ArgumentError(f"unknown regressor kind '{kind}'")
    return TrainedRegressor(kind, input_scaler, output_scaler, core)


def train_isolation_forest(dataset, seed: int = 0, n_trees: int = 100,
                           max_depth: int = 5, subsample: int = 256) -> IsoForestCore:
    """Isolation forest on the raw (unscaled) inputs of the dataset."""
    if isinstance(dataset, np.ndarray):
        X = np.atleast_2d(dataset)
    else:
        X, _ = _data_arrays(dataset)
    return fit_isolation_forest(X, n_trees=n_trees, max_depth=max_depth,
                                subsample=subsample, seed=seed)


def predict(model: TrainedRegressor, x) -> float | np.ndarray:
    """Model value in original target units; scalar for a single point."""
    x = np.asarray(x, dtype=float)
    if x.ndim <= 1:
        return float(model.predict(x)[0])
    return model.predict(x)


def r2_score(model: TrainedRegressor, inputs, targets) -> float:
    """1 - SSE/SST of the model on the given set."""
    y = np.asarray(targets, dtype=float).ravel()
    if y.size < 2:
        raise ArgumentError("r2 needs at least 2 targets")
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0.0:
        raise DataError("r2 undefined for zero target variance")
    sse = float(np.sum((model.predict(inputs) - y) ** 2))
    return 1.0 - sse / sst


__all__ = [
    "KINDS", "LEAF", "BoostedCore", "ForestCore", "IsoForestCore",
    "LinearCore", "MinMaxScaler", "MlpCore", "StandardScaler",
    "TrainedRegressor", "TreeCore", "fit_boosted", "fit_forest",
    "fit_isolation_forest", "fit_linear", "fit_mlp", "fit_tree",
    "path_length", "path_lengths", "predict", "r2_score",
    "train_isolation_forest", "train_regressor",
]
