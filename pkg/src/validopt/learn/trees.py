"""Regression trees and the ensembles built from them.

Trees are greedy CART variance-reduction fits stored as flat preorder node
arrays (internal nodes carry feature/threshold, leaves carry the mean target).
Prediction sends x left when x[feature] <= threshold.  Forests average
bootstrap trees with a random feature subset drawn at every split; boosted
ensembles sum shrunken stage trees on residuals around a constant base.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError

LEAF = -1


@dataclass
class TreeCore:
    """Flat preorder arrays; node 0 is the root.

    feature[i] is LEAF for leaves, threshold[i] is NaN there and value[i]
    holds the leaf mean; internal nodes have NaN value and child indices.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    def leaf_index(self, x: np.ndarray) -> int:
        i = 0
        while self.feature[i] != LEAF:
            if x[self.feature[i]] <= self.threshold[i]:
                i = self.left[i]
            else:
                i = self.right[i]
        return i

    def predict(self, Xs: np.ndarray) -> np.ndarray:
        Xs = np.atleast_2d(np.asarray(Xs, dtype=float))
        return np.array([self.value[self.leaf_index(x)] for x in Xs])


class _TreeBuilder:
    """Accumulates nodes in preorder during the recursive fit."""

    def __init__(self) -> None:
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def add(self, feature, threshold, value) -> int:
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        return len(self.feature) - 1

    def done(self) -> TreeCore:
        return TreeCore(
            np.array(self.feature, dtype=np.int64),
            np.array(self.threshold, dtype=float),
            np.array(self.left, dtype=np.int64),
            np.array(self.right, dtype=np.int64),
            np.array(self.value, dtype=float),
        )


def _best_split(X, y, feats):
    """Best (feature, threshold, gain) over midpoint candidates, or None.

    Gain is the SSE reduction; prefix sums give every split of a sorted
    column in one pass.  Ties resolve to the earliest feature in feats and
    the smallest threshold, so refits are reproducible.
    """
    n = y.size
    total = y.sum()
    sse_parent = float(y @ y - total * total / n)
    best = None
    best_gain = 1e-12 * max(1.0, sse_parent)  # ignore noise-level gains
    for f in feats:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        yo = y[order]
        cum = np.cumsum(yo)
        cum2 = np.cumsum(yo * yo)
        k = np.arange(1, n)  # points going left
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        sse_l = cum2[:-1] - cum[:-1] ** 2 / k
        sse_r = (cum2[-1] - cum2[:-1]) - (total - cum[:-1]) ** 2 / (n - k)
        gain = sse_parent - (sse_l + sse_r)
        gain[~valid] = -np.inf
        j = int(np.argmax(gain))
        if gain[j] > best_gain:
            best_gain = float(gain[j])
            best = (f, 0.5 * (xs[j] + xs[j + 1]), best_gain)
    return best


def fit_tree(Xs, ys, max_depth=5, min_leaf=1, rng=None, max_features=None):
    """CART regression tree; max_depth 0 yields the single-leaf mean stump."""
    X = np.asarray(Xs, dtype=float)
    y = np.asarray(ys, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.size or y.size == 0:
        raise ArgumentError("tree fit needs matching nonempty (N, d) and (N,)")
    if max_depth < 0 or min_leaf < 1:
        raise ArgumentError("max_depth must be >= 0 and min_leaf >= 1")
    d = X.shape[1]
    builder = _TreeBuilder()

    def grow(idx, depth):
        ysub = y[idx]
        node = builder.add(LEAF, np.nan, float(ysub.mean()))
        if depth >= max_depth or idx.size < 2 * min_leaf:
            return node
        if max_features is not None and max_features < d:
            feats = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            feats = np.arange(d)
        split = _best_split(X[idx], ysub, feats)
        if split is None:
            return node
        f, t, _ = split
        mask = X[idx, f] <= t
        if mask.sum() < min_leaf or (~mask).sum() < min_leaf:
            return node
        builder.feature[node] = f
        builder.threshold[node] = t
        builder.value[node] = np.nan
        builder.left[node] = grow(idx[mask], depth + 1)
        builder.right[node] = grow(idx[~mask], depth + 1)
        return node

    grow(np.arange(y.size), 0)
    return builder.done()


@dataclass
class ForestCore:
    """Mean of bootstrap trees."""

    trees: list = field(default_factory=list)

    def predict(self, Xs: np.ndarray) -> np.ndarray:
        preds = np.stack([t.predict(Xs) for t in self.trees])
        return preds.mean(axis=0)


def fit_forest(Xs, ys, n_trees=100, max_depth=5, seed=0):
    """Bootstrap forest; each split sees ceil(sqrt(d)) random features."""
    X = np.asarray(Xs, dtype=float)
    y = np.asarray(ys, dtype=float).ravel()
    if n_trees < 1:
        raise ArgumentError("forest needs n_trees >= 1")
    rng = np.random.default_rng(seed)
    k = int(np.ceil(np.sqrt(X.shape[1])))
    trees = []
    for _ in range(n_trees):
        idx = rng.integers(0, y.size, size=y.size)
        trees.append(fit_tree(X[idx], y[idx], max_depth=max_depth,
                              rng=rng, max_features=k))
    return ForestCore(trees)


@dataclass
class BoostedCore:
    """base + learning_rate * sum of stage trees."""

    base: float
    learning_rate: float
    stages: list = field(default_factory=list)

    def predict(self, Xs: np.ndarray) -> np.ndarray:
        Xs = np.atleast_2d(np.asarray(Xs, dtype=float))
        out = np.full(Xs.shape[0], self.base)
        for t in self.stages:
            out += self.learning_rate * t.predict(Xs)
        return out


def fit_boosted(Xs, ys, n_stages=100, learning_rate=0.1, max_depth=5):
    """Least-squares gradient boosting on residuals from the mean base.

    learning_rate 0 keeps every prediction at the base mean; the stages are
    still fitted so stage counts stay comparable.
    """
    X = np.asarray(Xs, dtype=float)
    y = np.asarray(ys, dtype=float).ravel()
    if n_stages < 0 or learning_rate < 0:
        raise ArgumentError("boosting needs n_stages >= 0 and rate >= 0")
    base = float(y.mean())
    resid = y - base
    stages = []
    for _ in range(n_stages):
        t = fit_tree(X, resid, max_depth=max_depth)
        stages.append(t)
        resid = resid - learning_rate * t.predict(X)
    return BoostedCore(base, learning_rate, stages)
