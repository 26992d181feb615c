"""Exact mixed-integer encodings of trained regressors.

The encodings compose three affine layers around the core model: the input
scaler (explicit scaled-input variables), the core itself (leaf one-hot
binaries per tree, big-M ReLU rows per unstable neuron), and the target
unscaling to an output variable in original units.  Every feasible point of
a block forces the output variable to predict(model, x) within solver
tolerance.

All big-M constants are per-constraint, derived from variable bounds or
interval propagation.  x variables must carry finite bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, ConfigError, DimensionError
from .learn import LEAF, IsoForestCore, TrainedRegressor, TreeCore
from .milp import EQUAL, GREATER, LESS, MilpModel

# ties at a split threshold go left; the right branch holds strictly above
_RIGHT_OFFSET = 1e-9


@dataclass
class EmbeddedOutput:
    """Handles into the rows appended for one regressor."""

    output_var: int
    scaled_input_vars: list = field(default_factory=list)
    scaled_output_var: int = -1
    binaries: list = field(default_factory=list)
    activations: list = field(default_factory=list)
    rows: list = field(default_factory=list)


@dataclass
class IsoforBlock:
    """Depth-threshold support block; one binary family per tree."""

    binaries: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    infeasible: bool = False


def _var_bounds(milp: MilpModel, x_vars) -> tuple[np.ndarray, np.ndarray]:
    lo = np.array([milp.variables[i].lb for i in x_vars])
    hi = np.array([milp.variables[i].ub for i in x_vars])
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ArgumentError("x variables need finite bounds to derive big-M")
    return lo, hi


def _add_scaled_inputs(model, x_vars, milp, prefix, out: EmbeddedOutput):
    """xs_j = (x_j - offset_j) / scale_j with bounds mapped from x."""
    lo, hi = _var_bounds(milp, x_vars)
    off, scale = model.input_scaler.offset, model.input_scaler.scale
    xs_lo = (lo - off) / scale
    xs_hi = (hi - off) / scale
    for j, xv in enumerate(x_vars):
        xs = milp.add_var(xs_lo[j], xs_hi[j], name=f"{prefix}xs{j}")
        out.rows.append(milp.add_constr({xs: scale[j], xv: -1.0}, EQUAL,
                                        -off[j], name=f"{prefix}scale{j}"))
        out.scaled_input_vars.append(xs)
    return np.array(out.scaled_input_vars), xs_lo, xs_hi


def _subtree_leaves(tree: TreeCore) -> dict:
    """node index -> list of leaf indices underneath it."""
    under = {}

    def walk(i):
        if tree.feature[i] == LEAF:
            under[i] = [i]
        else:
            under[i] = walk(tree.left[i]) + walk(tree.right[i])
        return under[i]

    walk(0)
    return under


def _encode_tree(tree, xvars, xlo, xhi, milp, prefix, out):
    """One-hot leaf binaries plus two big-M rows per internal node.

    Returns ({z_var: leaf_value}, constant): single-leaf trees contribute a
    plain constant and add nothing to the model.
    """
    if tree.n_nodes == 1:
        return {}, float(tree.value[0])
    under = _subtree_leaves(tree)
    zvar = {}
    for leaf in under[0]:
        if tree.feature[leaf] == LEAF:
            zvar[leaf] = milp.add_var(binary=True, name=f"{prefix}z{leaf}")
            out.binaries.append(zvar[leaf])
    out.rows.append(milp.add_constr({z: 1.0 for z in zvar.values()},
                                    EQUAL, 1.0, name=f"{prefix}onehot"))
    for i in range(tree.n_nodes):
        if tree.feature[i] == LEAF:
            continue
        f = int(tree.feature[i])
        t = float(tree.threshold[i])
        xv = int(xvars[f])
        # any left-subtree leaf active forces x_f <= t
        m_up = max(xhi[f] - t, 0.0)
        coeffs = {zvar[l]: m_up for l in under[tree.left[i]]}
        coeffs[xv] = coeffs.get(xv, 0.0) + 1.0
        out.rows.append(milp.add_constr(coeffs, LESS, t + m_up,
                                        name=f"{prefix}n{i}L"))
        # any right-subtree leaf active forces x_f above t
        t_up = t + _RIGHT_OFFSET
        m_dn = max(t_up - xlo[f], 0.0)
        coeffs = {zvar[l]: m_dn for l in under[tree.right[i]]}
        coeffs[xv] = coeffs.get(xv, 0.0) - 1.0
        out.rows.append(milp.add_constr(coeffs, LESS, m_dn - t_up,
                                        name=f"{prefix}n{i}R"))
    return {zvar[l]: float(tree.value[l]) for l in zvar}, 0.0


def _tree_value_range(tree: TreeCore) -> tuple[float, float]:
    vals = tree.value[tree.feature == LEAF]
    return float(vals.min()), float(vals.max())


def propagate_bounds(model: TrainedRegressor, box) -> list:
    """Per-layer pre-activation intervals of an mlp over an input box.

    box is (lower, upper) in original input units; intervals are computed
    by interval arithmetic through each affine layer and ReLU, so they
    contain the true pre-activation range of every x in the box.
    """
    if model.kind != "mlp":
        raise ConfigError("bound propagation applies to mlp models")
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    a_lo = (lo - model.input_scaler.offset) / model.input_scaler.scale
    a_hi = (hi - model.input_scaler.offset) / model.input_scaler.scale
    intervals = []
    for W, b in zip(model.core.weights, model.core.biases):
        Wp = np.clip(W, 0.0, None)
        Wm = np.clip(W, None, 0.0)
        p_lo = Wp @ a_lo + Wm @ a_hi + b
        p_hi = Wp @ a_hi + Wm @ a_lo + b
        intervals.append((p_lo, p_hi))
        a_lo = np.maximum(p_lo, 0.0)
        a_hi = np.maximum(p_hi, 0.0)
    return intervals


def _encode_mlp(model, xvars, milp, prefix, out):
    """Big-M ReLU per unstable neuron; stable neurons use no binary."""
    lo, hi = _var_bounds(milp, out.scaled_input_vars)
    core = model.core
    intervals = _intervals_from_scaled(core, lo, hi)
    prev = list(xvars)
    n_hidden = len(core.weights) - 1
    for k in range(n_hidden):
        W, b = core.weights[k], core.biases[k]
        p_lo, p_hi = intervals[k]
        layer_vars = []
        for i in range(W.shape[0]):
            plo, phi = float(p_lo[i]), float(p_hi[i])
            alo, ahi = max(plo, 0.0), max(phi, 0.0)
            a = milp.add_var(alo, ahi, name=f"{prefix}a{k}_{i}")
            out.activations.append(a)
            layer_vars.append(a)
            lin = {prev[j]: -float(W[i, j]) for j in range(len(prev))}
            if phi <= 0.0:
                continue  # fixed at zero by its bounds
            if plo >= 0.0:
                row = dict(lin)
                row[a] = row.get(a, 0.0) + 1.0
                out.rows.append(milp.add_constr(row, EQUAL, float(b[i]),
                                                name=f"{prefix}eq{k}_{i}"))
                continue
            z = milp.add_var(binary=True, name=f"{prefix}r{k}_{i}")
            out.binaries.append(z)
            row = dict(lin)
            row[a] = row.get(a, 0.0) + 1.0
            out.rows.append(milp.add_constr(row, GREATER, float(b[i]),
                                            name=f"{prefix}ge{k}_{i}"))
            out.rows.append(milp.add_constr({a: 1.0, z: -phi}, LESS, 0.0,
                                            name=f"{prefix}on{k}_{i}"))
            row = dict(lin)
            row[a] = row.get(a, 0.0) + 1.0
            row[z] = row.get(z, 0.0) - plo
            out.rows.append(milp.add_constr(row, LESS, float(b[i]) - plo,
                                            name=f"{prefix}off{k}_{i}"))
        prev = layer_vars
    W, b = core.weights[-1], core.biases[-1]
    p_lo, p_hi = intervals[-1]
    ys = milp.add_var(float(p_lo[0]), float(p_hi[0]), name=f"{prefix}ys")
    row = {prev[j]: -float(W[0, j]) for j in range(len(prev))}
    row[ys] = row.get(ys, 0.0) + 1.0
    out.rows.append(milp.add_constr(row, EQUAL, float(b[0]),
                                    name=f"{prefix}out"))
    return ys


def _intervals_from_scaled(core, a_lo, a_hi):
    intervals = []
    for W, b in zip(core.weights, core.biases):
        Wp = np.clip(W, 0.0, None)
        Wm = np.clip(W, None, 0.0)
        p_lo = Wp @ a_lo + Wm @ a_hi + b
        p_hi = Wp @ a_hi + Wm @ a_lo + b
        intervals.append((p_lo, p_hi))
        a_lo = np.maximum(p_lo, 0.0)
        a_hi = np.maximum(p_hi, 0.0)
    return intervals


def embed_regressor(model: TrainedRegressor, x_vars, milp: MilpModel,
                    prefix: str = "m") -> EmbeddedOutput:
    """Append rows forcing an output variable to equal model predictions.

    x_vars index existing, finitely bounded variables of milp in original
    units; the returned output variable is in original target units.
    """
    x_vars = [int(v) for v in x_vars]
    if len(x_vars) != model.dim:
        raise DimensionError(
            f"model expects {model.dim} inputs, got {len(x_vars)} variables")
    out = EmbeddedOutput(output_var=-1)
    xvars, xs_lo, xs_hi = _add_scaled_inputs(model, x_vars, milp, prefix, out)

    if model.kind == "linear":
        w, b = model.core.weights, model.core.intercept
        ys_lo = float(np.clip(w, 0, None) @ xs_lo + np.clip(w, None, 0) @ xs_hi + b)
        ys_hi = float(np.clip(w, 0, None) @ xs_hi + np.clip(w, None, 0) @ xs_lo + b)
        ys = milp.add_var(ys_lo, ys_hi, name=f"{prefix}ys")
        row = {xvars[j]: -float(w[j]) for j in range(w.size)}
        row[ys] = row.get(ys, 0.0) + 1.0
        out.rows.append(milp.add_constr(row, EQUAL, b, name=f"{prefix}lin"))
    elif model.kind in ("tree", "forest", "boosted"):
        if model.kind == "tree":
            trees, weights, const = [model.core], [1.0], 0.0
        elif model.kind == "forest":
            n = len(model.core.trees)
            trees, weights, const = model.core.trees, [1.0 / n] * n, 0.0
        else:
            lr = model.core.learning_rate
            trees = model.core.stages
            weights = [lr] * len(trees)
            const = model.core.base
        ys_lo, ys_hi = const, const
        agg = {}
        for ti, (t, w) in enumerate(zip(trees, weights)):
            coeffs, c = _encode_tree(t, xvars, xs_lo, xs_hi, milp,
                                     f"{prefix}t{ti}_", out)
            const += w * c
            vlo, vhi = _tree_value_range(t)
            ys_lo += w * vlo if w >= 0 else w * vhi
            ys_hi += w * vhi if w >= 0 else w * vlo
            for z, v in coeffs.items():
                agg[z] = agg.get(z, 0.0) + w * v
        ys = milp.add_var(min(ys_lo, ys_hi), max(ys_lo, ys_hi),
                          name=f"{prefix}ys")
        row = {z: -v for z, v in agg.items()}
        row[ys] = row.get(ys, 0.0) + 1.0
        out.rows.append(milp.add_constr(row, EQUAL, const,
                                        name=f"{prefix}agg"))
    elif model.kind == "mlp":
        ys = _encode_mlp(model, xvars, milp, prefix, out)
    else:
        raise ConfigError(f"cannot embed model kind '{model.kind}'")

    out.scaled_output_var = ys
    sigma = model.output_scaler.std
    mu = model.output_scaler.mean
    ylo, yhi = milp.variables[ys].lb, milp.variables[ys].ub
    o_lo = sigma * ylo + mu if sigma >= 0 else sigma * yhi + mu
    o_hi = sigma * yhi + mu if sigma >= 0 else sigma * ylo + mu
    out.output_var = milp.add_var(o_lo, o_hi, name=f"{prefix}out")
    out.rows.append(milp.add_constr({out.output_var: 1.0, ys: -sigma},
                                    EQUAL, mu, name=f"{prefix}unscale"))
    return out


def embed_isofor_depth(forest: IsoForestCore, x_vars, threshold: int,
                       milp: MilpModel, prefix: str = "iso") -> IsoforBlock:
    """Require x to reach depth >= threshold in every tree of the forest.

    Thresholds live in original input units (the forest trains unscaled).
    Leaves shallower than the threshold get their binaries fixed to zero;
    a tree with no deep leaf makes the block provably infeasible, which is
    flagged rather than raised.
    """
    if not 0 <= threshold <= forest.max_depth:
        raise ArgumentError(
            f"depth threshold {threshold} outside [0, {forest.max_depth}]")
    x_vars = [int(v) for v in x_vars]
    lo, hi = _var_bounds(milp, x_vars)
    block = IsoforBlock()
    for k, tree in enumerate(forest.trees):
        leaf_mask = tree.feature == LEAF
        if tree.n_nodes == 1:
            if threshold > 0:
                block.infeasible = True
                block.rows.append(milp.add_constr({}, EQUAL, 1.0,
                                                  name=f"{prefix}{k}none"))
            block.binaries.append([])
            continue
        if not np.any(tree.value[leaf_mask] >= threshold):
            block.infeasible = True
        under = _subtree_leaves(tree)
        zvar = {}
        for leaf in under[0]:
            deep = tree.value[leaf] >= threshold
            zvar[leaf] = milp.add_var(0.0, 1.0 if deep else 0.0, binary=True,
                                      name=f"{prefix}{k}z{leaf}")
        block.binaries.append(list(zvar.values()))
        block.rows.append(milp.add_constr({z: 1.0 for z in zvar.values()},
                                          EQUAL, 1.0, name=f"{prefix}{k}sum"))
        for i in range(tree.n_nodes):
            if leaf_mask[i]:
                continue
            f = int(tree.feature[i])
            t = float(tree.threshold[i])
            xv = x_vars[f]
            m_up = max(hi[f] - t, 0.0)
            coeffs = {zvar[l]: m_up for l in under[tree.left[i]]}
            coeffs[xv] = coeffs.get(xv, 0.0) + 1.0
            block.rows.append(milp.add_constr(coeffs, LESS, t + m_up,
                                              name=f"{prefix}{k}n{i}L"))
            t_up = t + _RIGHT_OFFSET
            m_dn = max(t_up - lo[f], 0.0)
            coeffs = {zvar[l]: m_dn for l in under[tree.right[i]]}
            coeffs[xv] = coeffs.get(xv, 0.0) - 1.0
            block.rows.append(milp.add_constr(coeffs, LESS, m_dn - t_up,
                                              name=f"{prefix}{k}n{i}R"))
    return block
