"""Isolation forest over raw inputs, used as a data-support test.

Each tree recursively picks a uniform-random feature and a uniform-random
threshold inside the node's sample range, so sparse regions isolate in few
splits.  The support test downstream is per tree: a point must reach a leaf
at depth >= d in every tree, the averaged anomaly score is never used.

Trees reuse the flat TreeCore layout with value[i] = node depth (edge count
from the root), for leaves and internal nodes alike.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError
from .trees import LEAF, TreeCore, _TreeBuilder


@dataclass
class IsoForestCore:
    trees: list = field(default_factory=list)
    max_depth: int = 5
    subsample: int = 256

    @property
    def n_trees(self) -> int:
        return len(self.trees)


def _grow_iso(builder, X, idx, depth, max_depth, rng):
    node = builder.add(LEAF, np.nan, float(depth))
    if depth >= max_depth or idx.size <= 1:
        return node
    lo = X[idx].min(axis=0)
    hi = X[idx].max(axis=0)
    open_feats = np.flatnonzero(hi > lo)
    if open_feats.size == 0:  # duplicated points only
        return node
    f = int(rng.choice(open_feats))
    t = float(rng.uniform(lo[f], hi[f]))
    mask = X[idx, f] <= t
    builder.feature[node] = f
    builder.threshold[node] = t
    builder.left[node] = _grow_iso(builder, X, idx[mask], depth + 1,
                                   max_depth, rng)
    builder.right[node] = _grow_iso(builder, X, idx[~mask], depth + 1,
                                    max_depth, rng)
    return node


def fit_isolation_forest(X, n_trees=100, max_depth=5, subsample=256, seed=0):
    """Fit on raw (unscaled) inputs; each tree sees a fresh subsample
    drawn without replacement."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    if n < 1 or n_trees < 1 or max_depth < 0:
        raise ArgumentError("isolation forest needs data, trees and depth >= 0")
    if subsample > n:
        warnings.warn(f"subsample {subsample} exceeds N={n}, clamping")
        subsample = n
    rng = np.random.default_rng(seed)
    trees = []
    for _ in range(n_trees):
        idx = rng.choice(n, size=subsample, replace=False)
        builder = _TreeBuilder()
        _grow_iso(builder, X, idx, 0, max_depth, rng)
        trees.append(builder.done())
    return IsoForestCore(trees, max_depth, subsample)


def path_length(forest: IsoForestCore, tree_index: int, x) -> int:
    """Edge count from the root to the leaf that x reaches in one tree."""
    if not 0 <= tree_index < forest.n_trees:
        raise ArgumentError(f"tree index {tree_index} out of range")
    tree = forest.trees[tree_index]
    return int(tree.value[tree.leaf_index(np.asarray(x, dtype=float))])


def path_lengths(forest: IsoForestCore, x) -> np.ndarray:
    """Per-tree leaf depths of x, in tree order."""
    x = np.asarray(x, dtype=float)
    return np.array([int(t.value[t.leaf_index(x)]) for t in forest.trees])
