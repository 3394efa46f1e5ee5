"""MILP formulations of Up-MCLP, their valid inequalities, cuts and decoding."""
from __future__ import annotations

from dataclasses import dataclass

from ..instance import Instance
from ..milp import BINARY, MilpModel, SolveResult, Limits, solve_mip
from ..preprocess import PreprocessReport
from .base import (ALLOWED_CUTS, ALLOWED_VI, CLI_KINDS, CUT_GENERATORS, DEFAULT_VI, FLOWCOV,
                   KINDS, PATH, PATHCOV, VI_FAMILIES, FormulationSpec, IncompatibleFamilies,
                   VariableMap, check_normalized, resolve_names)
from .flow_cov import build_flow_cov, pair_arcs
from .lift import forest, lift_solution
from .path import build_path, build_path_cov, triangles
from .separation import (GENERATORS, CutdiGenerator, CutsepaGenerator, TriangleGenerator,
                         cutdi_row, cutsepa_row, cutsepa_set, make_generators, separate_cutdi,
                         separate_cutsepa, separate_triangles)
from .solution import (SolutionInvariantError, UpMclpSolution, decode, extract_solution,
                       model_size_report)

LEX_MAX_NODES = 20


def build_model(inst: Instance, spec: FormulationSpec, report: PreprocessReport | None = None,
                model: MilpModel | None = None):
    """Dispatch on ``spec.kind``; returns ``(model, VariableMap)``."""
    if spec.kind == FLOWCOV:
        return build_flow_cov(inst, report, spec, model)
    if spec.kind == PATH:
        return build_path(inst, spec, model)
    return build_path_cov(inst, report, spec, model)


@dataclass
class Solved:
    solution: UpMclpSolution | None
    result: SolveResult
    model: MilpModel
    vm: VariableMap


def solve_formulation(inst: Instance, spec: FormulationSpec,
                      report: PreprocessReport | None = None, limits: Limits | None = None,
                      engine: str = "highs", tie_break: bool = False) -> Solved:
    """Build, solve with the cut generators named in ``spec`` and decode.

    ``tie_break`` re-solves with the objective held at its optimum and
    prefers facility sets that come first lexicographically, so equal-value
    optima are reported deterministically (only for ``n <= 20``).
    """
    model, vm = build_model(inst, spec, report)
    gens = make_generators(spec.cut_generators, vm, inst)
    res = solve_mip(model, gens, limits, engine)
    if tie_break and res.has_solution and res.status.value == "Optimal":
        if inst.n > LEX_MAX_NODES:
            raise ValueError(f"lexicographic tie-break limited to n <= {LEX_MAX_NODES}")
        res2 = _lex_phase(inst, spec, report, limits, engine, res.objective)
        if res2.has_solution:
            res2.objective = res.objective
            res2.bound = res.bound
            res2.node_count += res.node_count
            res2.wall_time += res.wall_time
            res = res2
    sol = extract_solution(inst, vm, res) if res.has_solution else None
    return Solved(sol, res, model, vm)


def _lex_phase(inst, spec, report, limits, engine, opt):
    spec2 = spec.with_(relax_x=False)
    model, vm = build_model(inst, spec2, report)
    row = dict(model.obj)
    model.add_constr(row, ">=", opt - 1e-6 * max(1.0, abs(opt)), "keep_optimum")
    n = inst.n
    model.set_objective({vm.x[j]: float(2 ** (n - 1 - j)) for j in range(n)}, "max")
    res = solve_mip(model, make_generators(spec.cut_generators, vm, inst), limits, engine)
    # the secondary objective is not the coverage value; recompute it
    if res.x is not None:
        res.objective = None
    return res


__all__ = [
    "ALLOWED_CUTS", "ALLOWED_VI", "BINARY", "CLI_KINDS", "CUT_GENERATORS", "DEFAULT_VI",
    "FLOWCOV", "GENERATORS", "KINDS", "PATH", "PATHCOV", "VI_FAMILIES", "CutdiGenerator",
    "CutsepaGenerator", "FormulationSpec", "IncompatibleFamilies", "Solved",
    "SolutionInvariantError", "TriangleGenerator", "UpMclpSolution", "VariableMap",
    "build_flow_cov", "build_model", "build_path", "build_path_cov", "check_normalized",
    "cutdi_row", "cutsepa_row", "cutsepa_set", "decode", "extract_solution", "forest",
    "lift_solution", "make_generators", "model_size_report", "pair_arcs", "resolve_names",
    "separate_cutdi", "separate_cutsepa", "separate_triangles", "solve_formulation",
    "triangles",
]
