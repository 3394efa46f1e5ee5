"""scikit-learn style wrappers: hyperparameters in ``__init__``, results in ``*_``."""
from __future__ import annotations

import time

from sklearn.base import BaseEstimator

from .formulations import FormulationSpec, build_model, solve_formulation
from .instance import Instance, normalize
from .milp import Limits, solve_lp
from .preprocess import CONDITIONS, PreprocessReport, classify_pairs


def check_instance(inst, auto_normalize: bool = True) -> Instance:
    if not isinstance(inst, Instance):
        raise TypeError(f"expected an Instance, got {type(inst).__name__}")
    if auto_normalize:
        inst, _ = normalize(inst)
    return inst


class PairPreprocessor(BaseEstimator):
    """Pair classification. ``fit(inst)`` stores ``report_``."""

    def __init__(self, conditions=CONDITIONS, engine="highs", exact_dmip=False, jobs=1):
        self.conditions = conditions
        self.engine = engine
        self.exact_dmip = exact_dmip
        self.jobs = jobs

    def fit(self, inst, y=None):
        inst = check_instance(inst)
        self.report_ = classify_pairs(inst, self.conditions, self.engine, self.exact_dmip,
                                      self.jobs)
        self.counts_ = self.report_.counts()
        return self


class UpMCLPSolver(BaseEstimator):
    """Build one formulation, solve it, decode the optimum.

    After ``fit``: ``solution_``, ``facilities_``, ``delta_``, ``covered_``,
    ``objective_``, ``result_`` (raw solve), ``report_`` and ``model_``.
    """

    def __init__(self, formulation="flowcov-gamma", vi=None, cuts=None, use_preprocess=True,
                 time_limit=None, node_limit=None, engine="highs", tie_break=False,
                 allow_conflict=False):
        self.formulation = formulation
        self.vi = vi
        self.cuts = cuts
        self.use_preprocess = use_preprocess
        self.time_limit = time_limit
        self.node_limit = node_limit
        self.engine = engine
        self.tie_break = tie_break
        self.allow_conflict = allow_conflict

    def spec(self) -> FormulationSpec:
        return FormulationSpec.from_cli(self.formulation, self.vi, self.cuts,
                                        self.use_preprocess, self.allow_conflict)

    def fit(self, inst, y=None, report: PreprocessReport | None = None):
        inst = check_instance(inst)
        spec = self.spec()
        t0 = time.perf_counter()
        if report is None and spec.use_preprocess and spec.kind != "Path":
            report = classify_pairs(inst, engine=self.engine)
        self.t_preprocess_ = time.perf_counter() - t0
        limits = Limits(time=self.time_limit, nodes=self.node_limit)
        solved = solve_formulation(inst, spec, report, limits, self.engine, self.tie_break)
        self.instance_ = inst        # normalized; delta_ indexes its edges
        self.report_ = report
        self.model_, self.vm_, self.result_ = solved.model, solved.vm, solved.result
        self.solution_ = solved.solution
        self.t_total_ = time.perf_counter() - t0
        if solved.solution is not None:
            self.facilities_ = solved.solution.facilities
            self.delta_ = solved.solution.delta
            self.covered_ = solved.solution.covered
            self.objective_ = solved.solution.objective
        else:
            self.facilities_ = self.delta_ = self.covered_ = None
            self.objective_ = None
        return self

    def lp_bound(self, inst, report: PreprocessReport | None = None) -> float:
        """Value of the LP relaxation of the same model."""
        inst = check_instance(inst)
        spec = self.spec()
        if report is None and spec.use_preprocess and spec.kind != "Path":
            report = classify_pairs(inst, engine=self.engine)
        model, _vm = build_model(inst, spec, report)
        res = solve_lp(model, self.engine)
        return res.objective

    def score(self, inst, y=None) -> float:
        """Covered weight of the fitted solution."""
        return float(self.objective_)
