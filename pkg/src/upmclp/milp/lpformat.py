"""CPLEX-LP text export and ``name value`` solution import.

Exported names keep the model's variable names; characters the LP format
forbids are replaced by ``_`` and clashes get a numeric suffix. The mapping
is listed in comment lines at the top of the file::

    \\ map: <model name> -> <lp name>

Solution files hold one ``name value`` pair per line; ``#`` starts a comment
and absent variables read as zero.
"""
from __future__ import annotations

import io
import math
import re
from typing import IO

import numpy as np

from .model import BINARY, CONTINUOUS, EQ, GE, INTEGER, LE, MilpModel, SolveResult, Status

_ALLOWED = re.compile(r"[^A-Za-z0-9_!\"#$%&()/,.;?@`'{}|~]")
_MAX_LINE = 200


class InfeasibleSolutionError(ValueError):
    def __init__(self, violations):
        self.violations = violations
        lines = ", ".join(f"{name} (by {amt:.3g})" for name, amt in violations[:20])
        more = f" and {len(violations) - 20} more" if len(violations) > 20 else ""
        super().__init__(f"claimed solution violates: {lines}{more}")


def lp_names(model: MilpModel) -> list[str]:
    """Deterministic LP-safe names for the model's variables."""
    used: set[str] = set()
    out = []
    for name in model.var_names:
        safe = _ALLOWED.sub("_", name) or "v"
        if safe[0].isdigit() or safe[0] == "." or re.match(r"[eE][0-9eE+\-.]", safe):
            safe = "v" + safe
        base, k = safe, 1
        while safe in used:
            safe = f"{base}_{k}"
            k += 1
        used.add(safe)
        out.append(safe)
    return out


def _fmt(v: float) -> str:
    if v == math.inf:
        return "+inf"
    if v == -math.inf:
        return "-inf"
    return repr(float(v))


def _terms(coefs, names) -> list[str]:
    parts = []
    for j, c in coefs:
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {_fmt(abs(c))} {names[j]}")
    if not parts and names:
        parts = ["0 " + names[0]]
    return parts


def _wrap(head: str, parts: list[str]) -> list[str]:
    lines, cur = [], head
    for p in parts:
        if len(cur) + len(p) + 1 > _MAX_LINE:
            lines.append(cur)
            cur = "   "
        cur += " " + p
    lines.append(cur)
    return lines


def export_lp_file(model: MilpModel, sink: IO[str] | str) -> dict[str, str]:
    """Write ``model`` in LP format; return the name mapping that was applied."""
    names = lp_names(model)
    mapping = {orig: new for orig, new in zip(model.var_names, names) if orig != new}
    out: list[str] = [f"\\ model: {model.name}"]
    for orig, new in mapping.items():
        out.append(f"\\ map: {orig} -> {new}")
    out.append("Maximize" if model.sense == "max" else "Minimize")
    obj = sorted(model.obj.items())
    out += _wrap(" obj:", _terms(obj, names))
    out.append("Subject To")
    row_names = [_ALLOWED.sub("_", r) for r in model.row_names]
    seen: dict[str, int] = {}
    for r in range(model.n_constraints):
        rn = row_names[r]
        if rn in seen:
            seen[rn] += 1
            rn = f"{rn}_{seen[rn]}"
        else:
            seen[rn] = 0
        coefs = sorted(zip(model.row_idx[r].tolist(), model.row_val[r].tolist()))
        sense = {LE: "<=", GE: ">=", EQ: "="}[model.row_sense[r]]
        out += _wrap(f" {rn}:", _terms(coefs, names) + [sense, _fmt(model.row_rhs[r])])
    out.append("Bounds")
    for j in range(model.n_vars):
        if model.kind[j] == BINARY:
            continue
        lo, hi = model.lb[j], model.ub[j]
        if lo == -math.inf and hi == math.inf:
            out.append(f" {names[j]} free")
        else:
            out.append(f" {_fmt(lo)} <= {names[j]} <= {_fmt(hi)}")
    bins = [names[j] for j in range(model.n_vars) if model.kind[j] == BINARY]
    gens = [names[j] for j in range(model.n_vars) if model.kind[j] == INTEGER]
    if bins:
        out.append("Binaries")
        out += _wrap("", bins)
    if gens:
        out.append("Generals")
        out += _wrap("", gens)
    out.append("End")
    text = "\n".join(out) + "\n"
    if isinstance(sink, str):
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sink.write(text)
    return mapping


def import_solution(model: MilpModel, text: str | IO[str], check: bool = True,
                    tol: float = 1e-6) -> SolveResult:
    """Bind ``name value`` lines to variables and re-evaluate the objective."""
    if not isinstance(text, str):
        text = text.read()
    lookup = {nm: j for j, nm in enumerate(model.var_names)}
    for j, nm in enumerate(lp_names(model)):
        lookup.setdefault(nm, j)
    x = np.zeros(model.n_vars)
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'name value', got {raw.strip()!r}")
        name, value = parts
        if name not in lookup:
            raise KeyError(f"line {lineno}: unknown variable {name!r}")
        x[lookup[name]] = float(value)
    if check:
        bad = model.violations(x, tol)
        mask = model.integer_mask
        frac = np.abs(x - np.round(x)) > tol
        for j in np.flatnonzero(mask & frac):
            bad.append((f"integrality({model.var_names[j]})", float(abs(x[j] - round(x[j])))))
        if bad:
            raise InfeasibleSolutionError(bad)
    obj = model.evaluate(x)
    return SolveResult(Status.FEASIBLE, objective=obj, x=x)


def write_solution(model: MilpModel, x, sink: IO[str]):
    """Nonzero entries of ``x`` under their LP names (readable back by import)."""
    for name, v in zip(lp_names(model), np.asarray(x, dtype=float)):
        if v != 0:
            sink.write(f"{name} {float(v)!r}\n")


__all__ = ["export_lp_file", "import_solution", "write_solution", "lp_names",
           "InfeasibleSolutionError", "CONTINUOUS"]
