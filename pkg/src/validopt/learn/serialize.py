"""Plain-text model serialization, mainly for test fixtures.

Line-oriented format, whitespace-separated tokens, floats written with
repr() so the round trip is bit-exact.  Trees are dumped as preorder node
lists (feature threshold left right value, -1/nan marking leaves); MLPs as
layer sizes plus row-major weight rows.
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from .isofor import IsoForestCore
from .linear import LinearCore
from .mlp import MlpCore
from .scaling import MinMaxScaler, StandardScaler
from .trees import BoostedCore, ForestCore, TreeCore

_MAGIC = "validopt-model 1"
_ISO_MAGIC = "validopt-isofor 1"


def _floats(values) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values).ravel())


def _write_tree(out: list, tree: TreeCore) -> None:
    out.append(f"tree {tree.n_nodes}")
    for i in range(tree.n_nodes):
        out.append(f"node {tree.feature[i]} {float(tree.threshold[i])!r} "
                   f"{tree.left[i]} {tree.right[i]} {float(tree.value[i])!r}")


class _Cursor:
    def __init__(self, text: str) -> None:
        self.lines = [ln for ln in text.splitlines() if ln.strip()]
        self.pos = 0

    def take(self, tag: str) -> list:
        if self.pos >= len(self.lines):
            raise DataError(f"model text ended while expecting '{tag}'")
        parts = self.lines[self.pos].split()
        if parts[0] != tag:
            raise DataError(f"expected '{tag}', found '{parts[0]}'")
        self.pos += 1
        return parts[1:]


def _read_tree(cur: _Cursor) -> TreeCore:
    (count,) = cur.take("tree")
    n = int(count)
    feature = np.empty(n, dtype=np.int64)
    threshold = np.empty(n)
    left = np.empty(n, dtype=np.int64)
    right = np.empty(n, dtype=np.int64)
    value = np.empty(n)
    for i in range(n):
        f, t, lo, hi, v = cur.take("node")
        feature[i] = int(f)
        threshold[i] = float(t)
        left[i] = int(lo)
        right[i] = int(hi)
        value[i] = float(v)
    return TreeCore(feature, threshold, left, right, value)


def _write_core(out: list, kind: str, core) -> None:
    if kind == "linear":
        out.append(f"linear {core.weights.size}")
        out.append(f"weights {_floats(core.weights)}")
        out.append(f"intercept {core.intercept!r}")
    elif kind == "tree":
        _write_tree(out, core)
    elif kind == "forest":
        out.append(f"forest {len(core.trees)}")
        for t in core.trees:
            _write_tree(out, t)
    elif kind == "boosted":
        out.append(f"boosted {len(core.stages)} {core.base!r} "
                   f"{core.learning_rate!r}")
        for t in core.stages:
            _write_tree(out, t)
    elif kind == "mlp":
        out.append(f"mlp {len(core.weights)}")
        out.append("sizes " + " ".join(str(s) for s in core.layer_sizes))
        for k, (W, b) in enumerate(zip(core.weights, core.biases)):
            out.append(f"W{k} {_floats(W)}")
            out.append(f"b{k} {_floats(b)}")
    else:
        raise DataError(f"cannot serialize model kind '{kind}'")


def _read_core(cur: _Cursor, kind: str):
    if kind == "linear":
        cur.take("linear")
        weights = np.array([float(v) for v in cur.take("weights")])
        (intercept,) = cur.take("intercept")
        return LinearCore(weights, float(intercept))
    if kind == "tree":
        return _read_tree(cur)
    if kind == "forest":
        (count,) = cur.take("forest")
        return ForestCore([_read_tree(cur) for _ in range(int(count))])
    if kind == "boosted":
        count, base, rate = cur.take("boosted")
        return BoostedCore(float(base), float(rate),
                           [_read_tree(cur) for _ in range(int(count))])
    if kind == "mlp":
        (count,) = cur.take("mlp")
        sizes = [int(s) for s in cur.take("sizes")]
        weights, biases = [], []
        for k in range(int(count)):
            w = np.array([float(v) for v in cur.take(f"W{k}")])
            weights.append(w.reshape(sizes[k + 1], sizes[k]))
            biases.append(np.array([float(v) for v in cur.take(f"b{k}")]))
        return MlpCore(weights, biases)
    raise DataError(f"cannot parse model kind '{kind}'")


def model_to_text(model) -> str:
    """Serialize a TrainedRegressor."""
    out = [_MAGIC, f"kind {model.kind}"]
    out.append(f"input_scaler {model.input_scaler.offset.size}")
    out.append(f"offset {_floats(model.input_scaler.offset)}")
    out.append(f"scale {_floats(model.input_scaler.scale)}")
    out.append(f"output_scaler {model.output_scaler.mean!r} "
               f"{model.output_scaler.std!r}")
    _write_core(out, model.kind, model.core)
    return "\n".join(out) + "\n"


def model_from_text(text: str):
    from . import TrainedRegressor  # avoid import cycle at module load

    cur = _Cursor(text)
    if cur.lines[:1] != [_MAGIC]:
        raise DataError("not a serialized model (bad header)")
    cur.pos = 1
    (kind,) = cur.take("kind")
    cur.take("input_scaler")
    offset = np.array([float(v) for v in cur.take("offset")])
    scale = np.array([float(v) for v in cur.take("scale")])
    mean, std = cur.take("output_scaler")
    return TrainedRegressor(kind, MinMaxScaler(offset, scale),
                            StandardScaler(float(mean), float(std)),
                            _read_core(cur, kind))


def isofor_to_text(forest: IsoForestCore) -> str:
    out = [_ISO_MAGIC,
           f"config {forest.n_trees} {forest.max_depth} {forest.subsample}"]
    for t in forest.trees:
        _write_tree(out, t)
    return "\n".join(out) + "\n"


def isofor_from_text(text: str) -> IsoForestCore:
    cur = _Cursor(text)
    if cur.lines[:1] != [_ISO_MAGIC]:
        raise DataError("not a serialized isolation forest (bad header)")
    cur.pos = 1
    count, max_depth, subsample = cur.take("config")
    trees = [_read_tree(cur) for _ in range(int(count))]
    return IsoForestCore(trees, int(max_depth), int(subsample))
