"""Generic MILP plumbing: model container, LP engines, branch-and-bound, LP files."""
from .bnb import CutGenerator, Limits, solve_mip
from .lp import ENGINES, LPData, solve_lp
from .lpformat import InfeasibleSolutionError, export_lp_file, import_solution, write_solution
from .model import (BINARY, CONTINUOUS, EQ, GE, INTEGER, LE, TOL, Cut, MilpModel,
                    SizeCounter, SolveResult, Status, Tolerances)
from .simplex import SimplexResult, simplex

__all__ = [
    "BINARY", "CONTINUOUS", "INTEGER", "LE", "EQ", "GE", "TOL", "Tolerances",
    "Cut", "CutGenerator", "Limits", "MilpModel", "SizeCounter", "SolveResult", "Status",
    "ENGINES", "LPData", "solve_lp", "solve_mip", "simplex", "SimplexResult",
    "export_lp_file", "import_solution", "write_solution", "InfeasibleSolutionError",
]
