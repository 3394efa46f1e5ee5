"""Bounded-variable primal simplex (dense, revised form).

Solves ``min c x  s.t.  A x (<=,=,>=) b,  lb <= x <= ub``. Rows are turned
into equalities with bounded slacks; phase one starts from an all-artificial
basis. Dantzig pricing switches to Bland's rule after a run of degenerate
pivots and back once the objective moves again.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
STALL_LIMIT = 30
REFACTOR_EVERY = 40

_AT_LB, _AT_UB, _FREE, _BASIC = 0, 1, 2, 3


@dataclass
class SimplexResult:
    status: str  # "optimal" | "infeasible" | "unbounded" | "numerical"
    x: np.ndarray | None
    objective: float | None
    iterations: int


class _Tableau:
    def __init__(self, A, b, lb, ub):
        self.A = A
        self.b = b
        self.lb = lb
        self.ub = ub
        self.m, self.n = A.shape
        self.iterations = 0

    def refactor(self):
        self.Binv = np.linalg.inv(self.A[:, self.basis])
        self.since_refactor = 0

    def recompute_xb(self):
        nb = self.state != _BASIC
        rhs = self.b - self.A[:, nb] @ self.x[nb]
        self.x[self.basis] = self.Binv @ rhs

    def run(self, c, max_iter) -> str:
        stall = 0
        bland = False
        self.refactor()
        self.recompute_xb()
        while True:
            if self.iterations >= max_iter:
                return "numerical"
            y = c[self.basis] @ self.Binv
            d = c - y @ self.A
            d[self.basis] = 0.0
            st = self.state
            elig = ((st == _AT_LB) & (d < -OPT_TOL)) | ((st == _AT_UB) & (d > OPT_TOL)) \
                | ((st == _FREE) & (np.abs(d) > OPT_TOL))
            # fixed nonbasic variables never enter
            elig &= (self.ub - self.lb) > 0
            cand = np.flatnonzero(elig)
            if cand.size == 0:
                return "optimal"
            q = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if d[q] < 0 else -1.0
            alpha = self.Binv @ self.A[:, q]
            step = direction * alpha
            xb = self.x[self.basis]
            lbb = self.lb[self.basis]
            ubb = self.ub[self.basis]
            ratios = np.full(self.m, np.inf)
            dec = step > PIVOT_TOL
            inc = step < -PIVOT_TOL
            with np.errstate(invalid="ignore", divide="ignore"):
                ratios[dec] = (xb[dec] - lbb[dec]) / step[dec]
                ratios[inc] = (ubb[inc] - xb[inc]) / (-step[inc])
            ratios = np.maximum(ratios, 0.0)
            theta_flip = self.ub[q] - self.lb[q]
            theta = ratios.min() if self.m else np.inf
            if not np.isfinite(theta) and not np.isfinite(theta_flip):
                return "unbounded"
            self.iterations += 1
            if theta_flip <= theta:
                theta = theta_flip
                self.x[self.basis] = xb - theta * step
                self.x[q] = self.ub[q] if direction > 0 else self.lb[q]
                self.state[q] = _AT_UB if direction > 0 else _AT_LB
            else:
                ties = np.flatnonzero(ratios <= theta + 1e-12)
                if bland:
                    r = int(ties[np.argmin(np.asarray(self.basis)[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(alpha[ties]))])
                leaving = self.basis[r]
                self.x[self.basis] = xb - theta * step
                self.x[q] = self.x[q] + direction * theta
                # leaving variable sits on the bound it hit
                if step[r] > 0:
                    self.x[leaving] = self.lb[leaving]
                    self.state[leaving] = _AT_LB
                else:
                    self.x[leaving] = self.ub[leaving]
                    self.state[leaving] = _AT_UB
                self.basis[r] = q
                self.state[q] = _BASIC
                # product-form update of the basis inverse
                piv = alpha[r]
                if abs(piv) < PIVOT_TOL:
                    self.refactor()
                else:
                    row = self.Binv[r] / piv
                    self.Binv -= np.outer(alpha, row)
                    self.Binv[r] = row
                    self.since_refactor += 1
                if self.since_refactor >= REFACTOR_EVERY:
                    try:
                        self.refactor()
                    except np.linalg.LinAlgError:
                        return "numerical"
                    self.recompute_xb()
            if theta <= 1e-12:
                stall += 1
                if stall > STALL_LIMIT:
                    bland = True
            else:
                stall = 0
                bland = False


def simplex(c, A, senses, b, lb, ub, max_iter: int = 50_000) -> SimplexResult:
    """Minimise ``c @ x``; ``senses`` holds ``"<="``, ``"="`` or ``">="`` per row."""
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    m = len(b)
    n = len(c)
    if m == 0:
        A = np.zeros((0, n))
    if np.any(lb > ub + FEAS_TOL):
        return SimplexResult("infeasible", None, None, 0)

    # slacks: a x + s = b with s >= 0 for <=, a x - s = b for >=
    slack_cols, slack_lb, slack_ub = [], [], []
    for i, s in enumerate(senses):
        if s == "=":
            continue
        col = np.zeros(m)
        col[i] = 1.0 if s == "<=" else -1.0
        slack_cols.append(col)
        slack_lb.append(0.0)
        slack_ub.append(np.inf)
    S = np.column_stack(slack_cols) if slack_cols else np.zeros((m, 0))
    ns = S.shape[1]

    x0 = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    state0 = np.where(np.isfinite(lb), _AT_LB, np.where(np.isfinite(ub), _AT_UB, _FREE))
    resid = b - A @ x0
    sign = np.where(resid >= 0, 1.0, -1.0)
    Art = np.diag(sign) if m else np.zeros((0, 0))

    full_A = np.hstack([A, S, Art])
    full_lb = np.concatenate([lb, slack_lb, np.zeros(m)])
    full_ub = np.concatenate([ub, slack_ub, np.full(m, np.inf)])
    ntot = n + ns + m
    x = np.concatenate([x0, np.zeros(ns), np.abs(resid)])
    state = np.concatenate([state0, np.full(ns, _AT_LB), np.full(m, _BASIC)]).astype(int)

    tab = _Tableau(full_A, b, full_lb, full_ub)
    tab.x = x
    tab.state = state
    tab.basis = list(range(n + ns, ntot))

    if m:
        c1 = np.zeros(ntot)
        c1[n + ns:] = 1.0
        try:
            status = tab.run(c1, max_iter)
        except np.linalg.LinAlgError:
            return SimplexResult("numerical", None, None, tab.iterations)
        if status != "optimal":
            return SimplexResult("numerical", None, None, tab.iterations)
        if tab.x[n + ns:].sum() > FEAS_TOL * max(1.0, np.abs(b).max(initial=0.0)):
            return SimplexResult("infeasible", None, None, tab.iterations)
        # artificials are pinned at zero from here on
        tab.ub[n + ns:] = 0.0
        art = np.arange(n + ns, ntot)
        tab.x[art] = np.where(tab.state[art] == _BASIC, tab.x[art], 0.0)
        tab.state[art] = np.where(tab.state[art] == _BASIC, _BASIC, _AT_LB)

    c2 = np.concatenate([c, np.zeros(ns + m)])
    try:
        status = tab.run(c2, max_iter)
    except np.linalg.LinAlgError:
        return SimplexResult("numerical", None, None, tab.iterations)
    if status != "optimal":
        return SimplexResult(status, None, None, tab.iterations)
    tab.refactor()
    tab.recompute_xb()
    xs = tab.x[:n].copy()
    xs = np.clip(xs, lb, ub)
    return SimplexResult("optimal", xs, float(c @ xs), tab.iterations)
