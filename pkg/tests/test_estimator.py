import pytest
from sklearn.base import clone

from _tiny import random_tiny
from upmclp.estimator import PairPreprocessor, UpMCLPSolver
from upmclp.instance import toy_instance
from upmclp.oracle import solve_upmclp_exact


def test_params_round_trip():
    est = UpMCLPSolver(formulation="pathcov", cuts=["cutdi"], time_limit=5.0)
    params = est.get_params()
    assert params["formulation"] == "pathcov" and params["time_limit"] == 5.0
    est.set_params(formulation="path")
    assert clone(est).formulation == "path"


def test_fit_toy():
    est = UpMCLPSolver(formulation="flowcov-alpha", tie_break=True).fit(toy_instance())
    assert est.objective_ == pytest.approx(2004)
    assert est.facilities_ == (0, 3)
    assert est.score(toy_instance()) == pytest.approx(2004)
    assert est.lp_bound(toy_instance()) >= 2004 - 1e-6
    assert est.t_total_ >= est.t_preprocess_ >= 0


@pytest.mark.parametrize("seed", range(5))
def test_fit_matches_oracle(seed):
    inst = random_tiny(seed)
    ref = solve_upmclp_exact(inst).objective
    pre = PairPreprocessor().fit(inst)
    est = UpMCLPSolver(formulation="pathcov").fit(inst, report=pre.report_)
    assert est.objective_ == pytest.approx(ref)
    assert sum(pre.counts_.values()) == inst.n * (inst.n - 1) // 2


def test_bad_inputs():
    with pytest.raises(TypeError):
        UpMCLPSolver().fit("not an instance")
    with pytest.raises(ValueError):
        UpMCLPSolver(formulation="nope").fit(toy_instance())
