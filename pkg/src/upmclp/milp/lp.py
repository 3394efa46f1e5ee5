"""LP relaxations of a MilpModel through either LP engine."""
from __future__ import annotations

import time

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .model import EQ, GE, LE, MilpModel, SolveResult, Status
from .simplex import simplex

ENGINES = ("highs", "simplex")


class LPData:
    """Minimisation form of a model: ``min c x`` over rows and bounds.

    Extra rows (cuts) can be appended without rebuilding the base matrix.
    """

    def __init__(self, model: MilpModel):
        self.sign = -1.0 if model.sense == "max" else 1.0
        self.c = self.sign * model.objective_vector()
        self.constant = model.obj_constant
        self.lb = np.array(model.lb, dtype=float)
        self.ub = np.array(model.ub, dtype=float)
        A = model.matrix()
        senses = np.array(model.row_sense, dtype=object)
        rhs = np.array(model.row_rhs, dtype=float)
        self._set_rows(A, senses, rhs)
        self.n = len(self.c)

    def _set_rows(self, A, senses, rhs):
        le = senses == LE
        ge = senses == GE
        eq = senses == EQ
        self.A_ub = sparse.vstack([A[le], -A[ge]]).tocsr() if A.shape[0] else \
            sparse.csr_matrix((0, A.shape[1]))
        self.b_ub = np.concatenate([rhs[le], -rhs[ge]])
        self.A_eq = A[eq].tocsr()
        self.b_eq = rhs[eq]

    def add_rows(self, rows):
        """Append ``(coefs, sense, rhs)`` rows as inequalities or equalities."""
        ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
        for coefs, sense, rhs in rows:
            vec = np.zeros(self.n)
            for j, v in coefs.items():
                vec[j] += v
            if sense == LE:
                ub_rows.append(vec)
                ub_rhs.append(rhs)
            elif sense == GE:
                ub_rows.append(-vec)
                ub_rhs.append(-rhs)
            else:
                eq_rows.append(vec)
                eq_rhs.append(rhs)
        if ub_rows:
            self.A_ub = sparse.vstack([self.A_ub, sparse.csr_matrix(np.array(ub_rows))]).tocsr()
            self.b_ub = np.concatenate([self.b_ub, ub_rhs])
        if eq_rows:
            self.A_eq = sparse.vstack([self.A_eq, sparse.csr_matrix(np.array(eq_rows))]).tocsr()
            self.b_eq = np.concatenate([self.b_eq, eq_rhs])

    def solve(self, lb=None, ub=None, engine: str = "highs"):
        """Return ``(status, x, min-form objective, iterations)``."""
        lb = self.lb if lb is None else lb
        ub = self.ub if ub is None else ub
        if np.any(lb > ub + 1e-12):
            return Status.INFEASIBLE, None, None, 0
        if engine == "highs":
            return self._solve_highs(lb, ub)
        if engine == "simplex":
            return self._solve_simplex(lb, ub)
        raise ValueError(f"unknown LP engine {engine!r}; choose from {ENGINES}")

    def _solve_highs(self, lb, ub):
        res = linprog(
            self.c,
            A_ub=self.A_ub if self.A_ub.shape[0] else None,
            b_ub=self.b_ub if self.A_ub.shape[0] else None,
            A_eq=self.A_eq if self.A_eq.shape[0] else None,
            b_eq=self.b_eq if self.A_eq.shape[0] else None,
            bounds=np.column_stack([lb, ub]),
            method="highs-ds",
        )
        iters = int(getattr(res, "nit", 0) or 0)
        if res.status == 0:
            return Status.OPTIMAL, res.x, float(res.fun), iters
        if res.status == 2:
            return Status.INFEASIBLE, None, None, iters
        if res.status == 3:
            return Status.UNBOUNDED, None, None, iters
        return Status.NUMERICAL, None, None, iters

    def _solve_simplex(self, lb, ub):
        A = sparse.vstack([self.A_ub, self.A_eq]).toarray()
        senses = [LE] * self.A_ub.shape[0] + ["="] * self.A_eq.shape[0]
        b = np.concatenate([self.b_ub, self.b_eq])
        res = simplex(self.c, A, senses, b, lb, ub)
        status = {"optimal": Status.OPTIMAL, "infeasible": Status.INFEASIBLE,
                  "unbounded": Status.UNBOUNDED}.get(res.status, Status.NUMERICAL)
        return status, res.x, res.objective, res.iterations


def solve_lp(model: MilpModel, engine: str = "highs") -> SolveResult:
    """Solve the LP relaxation of ``model`` (integrality ignored)."""
    t0 = time.perf_counter()
    data = LPData(model)
    status, x, fun, iters = data.solve(engine=engine)
    obj = None if fun is None else data.sign * fun + data.constant
    return SolveResult(status=status, objective=obj, bound=obj, x=x, node_count=0,
                       wall_time=time.perf_counter() - t0, iterations=iters)
