"""Vertex enumeration for tiny bounded LPs: the reference for the simplex."""
import itertools

import numpy as np


def random_lp(rng, max_vars=6, max_rows=6):
    n = int(rng.integers(1, max_vars + 1))
    m = int(rng.integers(1, max_rows + 1))
    A = rng.integers(-3, 4, size=(m, n)).astype(float)
    senses = list(rng.choice(["<=", ">=", "="], size=m, p=[0.5, 0.3, 0.2]))
    b = rng.integers(-4, 9, size=m).astype(float)
    lb = rng.choice([0.0, -2.0], size=n)
    ub = lb + rng.integers(1, 6, size=n)
    c = rng.integers(-5, 6, size=n).astype(float)
    return c, A, senses, b, lb, ub


def brute_force_lp(c, A, senses, b, lb, ub, tol=1e-7):
    """``min c x`` over every basic feasible solution; ``None`` if infeasible.
    All bounds must be finite so the feasible set is a polytope."""
    c, A, b = np.asarray(c, float), np.atleast_2d(np.asarray(A, float)), np.asarray(b, float)
    n = len(c)
    eq = [r for r, s in enumerate(senses) if s == "="]
    ineq = [r for r, s in enumerate(senses) if s != "="]
    # candidate active constraints: inequality rows and the 2n bounds
    cand = [("row", r) for r in ineq] + [("lb", j) for j in range(n)] + [("ub", j) for j in range(n)]
    k = n - len(eq)
    if k < 0:
        combos = [()]
    else:
        combos = list(itertools.combinations(range(len(cand)), k))
    best = None
    rows_eq = [(A[r], b[r]) for r in eq]
    for combo in combos:
        M, rhs = [], []
        for a, v in rows_eq:
            M.append(a)
            rhs.append(v)
        for t in combo:
            kind, idx = cand[t]
            if kind == "row":
                M.append(A[idx])
                rhs.append(b[idx])
            else:
                e = np.zeros(n)
                e[idx] = 1.0
                M.append(e)
                rhs.append(lb[idx] if kind == "lb" else ub[idx])
        M, rhs = np.array(M), np.array(rhs)
        if M.shape[0] != n:
            x, *_ = np.linalg.lstsq(M, rhs, rcond=None)
            if np.abs(M @ x - rhs).max() > 1e-9:
                continue
        else:
            if abs(np.linalg.det(M)) < 1e-9:
                continue
            x = np.linalg.solve(M, rhs)
        if np.any(x < lb - tol) or np.any(x > ub + tol):
            continue
        act = A @ x
        ok = True
        for r, s in enumerate(senses):
            if (s == "<=" and act[r] > b[r] + tol) or (s == ">=" and act[r] < b[r] - tol) \
                    or (s == "=" and abs(act[r] - b[r]) > tol):
                ok = False
                break
        if ok:
            val = float(c @ x)
            if best is None or val < best:
                best = val
    return best
