"""Bounded-variable primal simplex on a dense tableau.

Solves min c.x subject to A x = b, lb <= x <= ub (entries of lb/ub may be
infinite).  Inequality rows must already carry slack columns; pass the
slack column of each row via slack_of_row so phase 1 can start from a
slack basis wherever the initial residual fits the slack's sign.

Two-phase method with Dantzig pricing, a Bland's-rule fallback after a
per-phase pivot-count threshold for anti-cycling, and bound flips for
nonbasic variables with two finite bounds.  The tableau keeps explicit
reduced-cost rows for both phases plus the transformed right-hand side,
all updated by the same elementary row operations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SolverError
from .model import INFEASIBLE, OPTIMAL, UNBOUNDED, SolverConfig

ATLB, ATUB, FREE, BASIC = 0, 1, 2, 3

_REFRESH_EVERY = 256  # pivots between right-hand-side refreshes (drift control)


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray | None
    objective: float | None
    n_pivots: int


def solve_bounded_lp(
    A: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    lb: np.ndarray,
    ub: np.ndarray,
    cfg: SolverConfig | None = None,
    slack_of_row: np.ndarray | None = None,
) -> SimplexResult:
    cfg = cfg or SolverConfig()
    A = np.ascontiguousarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    m, n = A.shape
    if np.any(lb > ub):
        return SimplexResult(INFEASIBLE, None, None, 0)
    if m == 0:
        return _solve_box_only(c, lb, ub)
    if slack_of_row is None:
        slack_of_row = np.full(m, -1, dtype=int)

    K = n + m
    lbf = np.concatenate([lb, np.zeros(m)])
    ubf = np.concatenate([ub, np.full(m, np.inf)])

    # nonbasic start: every variable at a finite bound, free variables at 0
    vstat = np.where(
        np.isfinite(lbf), ATLB, np.where(np.isfinite(ubf), ATUB, FREE)
    ).astype(np.int8)
    vals0 = np.where(vstat == ATLB, np.where(np.isfinite(lbf), lbf, 0.0), 0.0)
    vals0 = np.where(vstat == ATUB, np.where(np.isfinite(ubf), ubf, 0.0), vals0)

    resid = b - A @ vals0[:n]
    basis = np.empty(m, dtype=int)
    dsign = np.ones(m)
    art_used = np.zeros(m, dtype=bool)
    for i in range(m):
        s = slack_of_row[i]
        if s >= 0 and lbf[s] <= resid[i] <= ubf[s]:
            basis[i] = s
            vstat[s] = BASIC
        else:
            basis[i] = n + i
            dsign[i] = 1.0 if resid[i] >= 0 else -1.0
            art_used[i] = True
            vstat[n + i] = BASIC

    T = np.empty((m, K))
    T[:, :n] = A * (1.0 / dsign)[:, None]
    T[:, n:] = np.eye(m)
    rhs = b / dsign
    xB = resid / dsign  # slack rows: resid itself; artificial rows: |resid|

    c1 = np.zeros(K)
    c1[n:][art_used] = 1.0
    c2 = np.concatenate([c, np.zeros(m)])
    z1 = c1 - T.T @ c1[basis]
    z2 = c2 - T.T @ c2[basis]

    allowed = np.zeros(K, dtype=bool)
    allowed[:n] = lbf[:n] < ubf[:n]  # fixed variables never price in

    state = _State(T, rhs, xB, basis, vstat, lbf, ubf, z1, z2, allowed, cfg, n, vals0)

    if art_used.any():
        status = _iterate(state, phase=1)
        if status != OPTIMAL:
            raise SolverError("phase-1 simplex reported unbounded; numerical failure")
        art_rows = np.flatnonzero(state.basis >= n)
        p1 = float(np.sum(np.maximum(state.xB[art_rows], 0.0)))
        if p1 > cfg.feas_tol * (1.0 + float(np.max(np.abs(b)))):
            return SimplexResult(INFEASIBLE, None, None, state.pivots)
        _expel_artificials(state)
        state.ubf[n:] = 0.0  # artificials pinned at zero from here on

    status = _iterate(state, phase=2)
    if status == UNBOUNDED:
        return SimplexResult(UNBOUNDED, None, None, state.pivots)

    vals = _current_values(state)
    x = vals[:n]
    return SimplexResult(OPTIMAL, x, float(c @ x), state.pivots)


def _solve_box_only(c, lb, ub) -> SimplexResult:
    x = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    x = np.where((c > 0) & np.isfinite(lb), lb, x)
    x = np.where((c < 0) & np.isfinite(ub), ub, x)
    bad = ((c > 0) & ~np.isfinite(lb)) | ((c < 0) & ~np.isfinite(ub))
    if bad.any():
        return SimplexResult(UNBOUNDED, None, None, 0)
    return SimplexResult(OPTIMAL, x, float(c @ x), 0)


class _State:
    def __init__(self, T, rhs, xB, basis, vstat, lbf, ubf, z1, z2, allowed, cfg, n, vals0):
        self.T = T
        self.rhs = rhs
        self.xB = xB
        self.basis = basis
        self.vstat = vstat
        self.lbf = lbf
        self.ubf = ubf
        self.z1 = z1
        self.z2 = z2
        self.allowed = allowed
        self.cfg = cfg
        self.n = n
        self.pivots = 0
        self._outer_buf = np.empty_like(T)

    def bound_value(self, j) -> float:
        s = self.vstat[j]
        if s == ATLB:
            return self.lbf[j]
        if s == ATUB:
            return self.ubf[j]
        return 0.0

    def pivot(self, r: int, j: int, entering_val: float) -> None:
        T, z1, z2, rhs = self.T, self.z1, self.z2, self.rhs
        piv = T[r, j]
        T[r] /= piv
        rhs[r] /= piv
        colv = T[:, j].copy()
        colv[r] = 0.0
        np.multiply(colv[:, None], T[r][None, :], out=self._outer_buf)
        T -= self._outer_buf
        rhs -= colv * rhs[r]
        z1 -= z1[j] * T[r]
        z2 -= z2[j] * T[r]
        T[:, j] = 0.0
        T[r, j] = 1.0
        z1[j] = 0.0
        z2[j] = 0.0
        self.basis[r] = j
        self.vstat[j] = BASIC
        self.xB[r] = entering_val
        self.pivots += 1
        if self.pivots % _REFRESH_EVERY == 0:
            self.refresh_xB()

    def refresh_xB(self) -> None:
        # recompute basic values from the transformed rhs to cancel drift
        nb = np.flatnonzero(self.vstat != BASIC)
        vals = np.where(self.vstat[nb] == ATLB, self.lbf[nb], 0.0)
        up = self.vstat[nb] == ATUB
        vals[up] = self.ubf[nb][up]
        nz = vals != 0.0
        self.xB[:] = self.rhs - self.T[:, nb[nz]] @ vals[nz]


def _current_values(state: _State) -> np.ndarray:
    vstat, lbf, ubf = state.vstat, state.lbf, state.ubf
    vals = np.zeros(lbf.size)
    at_lo = vstat == ATLB
    at_up = vstat == ATUB
    vals[at_lo] = lbf[at_lo]
    vals[at_up] = ubf[at_up]
    vals[state.basis] = state.xB
    return vals


def _iterate(state: _State, phase: int) -> str:
    cfg = state.cfg
    T, xB, basis, vstat = state.T, state.xB, state.basis, state.vstat
    lbf, ubf = state.lbf, state.ubf
    m = T.shape[0]
    bland = False
    phase_pivots = 0

    while True:
        if phase_pivots > cfg.bland_threshold:
            bland = True
        if state.pivots > cfg.max_pivots:
            raise SolverError(
                f"simplex exceeded {cfg.max_pivots} pivots; numerical trouble likely"
            )
        z = state.z1 if phase == 1 else state.z2
        can_up = state.allowed & ((vstat == ATLB) | (vstat == FREE)) & (z < -cfg.dj_tol)
        can_dn = state.allowed & ((vstat == ATUB) | (vstat == FREE)) & (z > cfg.dj_tol)
        cand = can_up | can_dn
        if not cand.any():
            return OPTIMAL
        if bland:
            j = int(np.argmax(cand))
        else:
            score = np.where(cand, np.abs(z), -1.0)
            j = int(np.argmax(score))
        d = 1.0 if can_up[j] else -1.0

        col = T[:, j]
        den = d * col
        t_rows = np.full(m, np.inf)
        pos = den > cfg.pivot_tol
        neg = den < -cfg.pivot_tol
        if pos.any():
            t_rows[pos] = (xB[pos] - lbf[basis[pos]]) / den[pos]
        if neg.any():
            t_rows[neg] = (xB[neg] - ubf[basis[neg]]) / den[neg]
        np.clip(t_rows, 0.0, None, out=t_rows)
        t_basic = float(t_rows.min()) if m else np.inf
        t_bound = ubf[j] - lbf[j]
        t = min(t_bound, t_basic)

        if not np.isfinite(t):
            if phase == 1:
                raise SolverError("phase-1 simplex unbounded; numerical failure")
            return UNBOUNDED

        if t_bound <= t_basic:
            # bound flip: nonbasic variable crosses to its other bound
            xB -= t_bound * den
            vstat[j] = ATUB if vstat[j] == ATLB else ATLB
            phase_pivots += 1
            continue

        tie = np.flatnonzero(t_rows <= t * (1.0 + 1e-10) + 1e-12)
        if bland:
            r = int(tie[np.argmin(basis[tie])])
        else:
            r = int(tie[np.argmax(np.abs(den[tie]))])
        xB -= t * den
        leaving = basis[r]
        # a finite ratio implies the hit bound is finite
        vstat[leaving] = ATLB if den[r] > 0 else ATUB
        entering_val = state.bound_value(j)
        state.pivot(r, j, entering_val + d * t)
        phase_pivots += 1


def _expel_artificials(state: _State) -> None:
    """Degenerate pivots that swap basic artificials for structural columns."""
    n = state.n
    for r in np.flatnonzero(state.basis >= n):
        row = state.T[r, :n]
        nonbasic = state.vstat[:n] != BASIC
        cand = np.where(nonbasic, np.abs(row), 0.0)
        j = int(np.argmax(cand))
        if cand[j] > 1e-7:
            entering_val = state.bound_value(j)
            state.pivot(r, j, entering_val)
        # else: the row is redundant; the artificial stays basic at value 0
        # and no structural column can ever move it (its row is ~ zero there)
