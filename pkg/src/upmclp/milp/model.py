"""Formulation-agnostic MILP container and solve results."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

import numpy as np
from scipy import sparse

CONTINUOUS, BINARY, INTEGER = "C", "B", "I"
LE, EQ, GE = "<=", "=", ">="
_SENSES = {LE: LE, EQ: EQ, GE: GE, "<": LE, ">": GE, "==": EQ}


@dataclass(frozen=True)
class Tolerances:
    feasibility: float = 1e-7
    integrality: float = 1e-6
    cut_violation: float = 1e-6
    mip_gap: float = 1e-6


TOL = Tolerances()


class Status(str, Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"          # limit reached with an incumbent
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NO_SOLUTION = "NoSolution"     # limit reached before any incumbent
    NUMERICAL = "NumericalError"


@dataclass
class SolveResult:
    status: Status
    objective: float | None = None
    bound: float | None = None
    x: np.ndarray | None = None
    node_count: int = 0
    wall_time: float = 0.0
    cut_counts: dict = field(default_factory=dict)
    iterations: int = 0

    @property
    def gap(self) -> float | None:
        """Relative gap ``|bound - objective| / |objective|`` in percent."""
        if self.objective is None or self.bound is None:
            return None
        if self.objective == 0:
            return 0.0 if abs(self.bound) < 1e-9 else math.inf
        return abs(self.bound - self.objective) / abs(self.objective) * 100.0

    @property
    def has_solution(self) -> bool:
        return self.x is not None and self.status in (Status.OPTIMAL, Status.FEASIBLE)


@dataclass
class Cut:
    """A linear row ``sum(coefs) sense rhs`` returned by a cut generator."""

    coefs: dict
    sense: str
    rhs: float
    name: str = "cut"

    def activity(self, x) -> float:
        return float(sum(c * x[j] for j, c in self.coefs.items()))

    def violation(self, x) -> float:
        lhs = self.activity(x)
        if self.sense == LE:
            return lhs - self.rhs
        if self.sense == GE:
            return self.rhs - lhs
        return abs(lhs - self.rhs)


def _merge(coefs) -> dict:
    if isinstance(coefs, Mapping):
        items = coefs.items()
    else:
        items = coefs
    out: dict = {}
    for j, c in items:
        out[j] = out.get(j, 0.0) + c
    return out


class MilpModel:
    """Variables with bounds and kinds, sparse linear rows, linear objective."""

    counting = False

    def __init__(self, name: str = "model", sense: str = "max"):
        self.name = name
        self.sense = sense
        self.var_names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.kind: list[str] = []
        self.row_idx: list[np.ndarray] = []
        self.row_val: list[np.ndarray] = []
        self.row_sense: list[str] = []
        self.row_rhs: list[float] = []
        self.row_names: list[str] = []
        self.obj: dict = {}
        self.obj_constant = 0.0
        self._name_index: dict | None = None
        self._arrays = None

    # construction -------------------------------------------------------
    def add_var(self, name: str, lb: float = 0.0, ub: float = math.inf,
                kind: str = CONTINUOUS) -> int:
        if kind == BINARY:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        if lb > ub:
            raise ValueError(f"variable {name}: lb {lb} > ub {ub}")
        self.var_names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.kind.append(kind)
        self._name_index = None
        self._arrays = None
        return len(self.var_names) - 1

    def add_constr(self, coefs, sense: str, rhs: float, name: str | None = None) -> int:
        sense = _SENSES[sense]
        merged = _merge(coefs)
        nv = len(self.var_names)
        for j in merged:
            if not 0 <= j < nv:
                raise IndexError(f"constraint {name}: unknown variable index {j}")
        idx = np.fromiter(merged.keys(), dtype=np.int64, count=len(merged))
        val = np.fromiter(merged.values(), dtype=float, count=len(merged))
        self.row_idx.append(idx)
        self.row_val.append(val)
        self.row_sense.append(sense)
        self.row_rhs.append(float(rhs))
        self.row_names.append(name if name is not None else f"c{len(self.row_rhs)}")
        self._arrays = None
        return len(self.row_rhs) - 1

    def set_objective(self, coefs, sense: str | None = None, constant: float = 0.0):
        if sense is not None:
            if sense not in ("max", "min"):
                raise ValueError("objective sense must be 'max' or 'min'")
            self.sense = sense
        self.obj = _merge(coefs)
        self.obj_constant = float(constant)
        self._arrays = None

    # sizes --------------------------------------------------------------
    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def n_constraints(self) -> int:
        return len(self.row_rhs)

    @property
    def n_binvars(self) -> int:
        return sum(1 for k in self.kind if k in (BINARY, INTEGER))

    @property
    def integer_mask(self) -> np.ndarray:
        return np.array([k != CONTINUOUS for k in self.kind], dtype=bool)

    def var_index(self, name: str) -> int:
        if self._name_index is None:
            self._name_index = {nm: j for j, nm in enumerate(self.var_names)}
        return self._name_index[name]

    # numeric views ------------------------------------------------------
    def objective_vector(self) -> np.ndarray:
        c = np.zeros(self.n_vars)
        for j, v in self.obj.items():
            c[j] += v
        return c

    def matrix(self) -> sparse.csr_matrix:
        if self._arrays is None:
            lens = np.fromiter((len(r) for r in self.row_idx), dtype=np.int64,
                               count=self.n_constraints)
            indptr = np.concatenate(([0], np.cumsum(lens)))
            if self.n_constraints:
                indices = np.concatenate(self.row_idx)
                data = np.concatenate(self.row_val)
            else:
                indices = np.zeros(0, dtype=np.int64)
                data = np.zeros(0)
            self._arrays = sparse.csr_matrix(
                (data, indices, indptr), shape=(self.n_constraints, self.n_vars))
        return self._arrays

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.objective_vector() @ x) + self.obj_constant

    def violations(self, x, tol: float = 1e-6) -> list[tuple[str, float]]:
        """Rows and bounds violated by more than ``tol``, with the amount."""
        x = np.asarray(x, dtype=float)
        out = []
        act = self.matrix() @ x if self.n_constraints else np.zeros(0)
        for r in range(self.n_constraints):
            s, b = self.row_sense[r], self.row_rhs[r]
            v = act[r] - b if s == LE else b - act[r] if s == GE else abs(act[r] - b)
            if v > tol:
                out.append((self.row_names[r], float(v)))
        for j in range(self.n_vars):
            if x[j] < self.lb[j] - tol:
                out.append((f"lb({self.var_names[j]})", self.lb[j] - x[j]))
            elif x[j] > self.ub[j] + tol:
                out.append((f"ub({self.var_names[j]})", x[j] - self.ub[j]))
        return out

    def is_integral(self, x, tol: float = TOL.integrality) -> bool:
        mask = self.integer_mask
        if not mask.any():
            return True
        xi = np.asarray(x)[mask]
        return bool(np.all(np.abs(xi - np.round(xi)) <= tol))

    def summary(self) -> dict:
        return {"n_constraints": self.n_constraints, "n_vars": self.n_vars,
                "n_binvars": self.n_binvars}


class SizeCounter(MilpModel):
    """Drop-in builder sink that only counts rows and variables.

    Lets a formulation builder report the size of models too large to hold.
    """

    counting = True

    def __init__(self, name: str = "model", sense: str = "max"):
        super().__init__(name, sense)
        self._nv = 0
        self._nb = 0
        self._nc = 0

    def add_var(self, name, lb=0.0, ub=math.inf, kind=CONTINUOUS) -> int:
        self._nv += 1
        if kind != CONTINUOUS:
            self._nb += 1
        return self._nv - 1

    def add_constr(self, coefs, sense, rhs, name=None) -> int:
        self._nc += 1
        return self._nc - 1

    def set_objective(self, coefs, sense=None, constant=0.0):
        if sense is not None:
            self.sense = sense

    @property
    def n_vars(self) -> int:
        return self._nv

    @property
    def n_constraints(self) -> int:
        return self._nc

    @property
    def n_binvars(self) -> int:
        return self._nb


def iter_rows(model: MilpModel) -> Iterable[tuple[str, dict, str, float]]:
    for r in range(model.n_constraints):
        yield (model.row_names[r],
               dict(zip(model.row_idx[r].tolist(), model.row_val[r].tolist())),
               model.row_sense[r], model.row_rhs[r])
