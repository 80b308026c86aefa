"""Brute-force LP oracle: enumerate every row-subset intersection.

Independent of the simplex under test. A large axis box is appended so
the feasible region, when nonempty, is pointed; an optimum leaning on
that box is classified unbounded. Feasibility tolerance matches the
solver's re-verification tolerance.
"""

import itertools

import numpy as np

from monocert.certify import GE

BOX = 1e4
FEAS_TOL = 1e-7


def normalize(lp):
    rows, h = [], []
    m, n = lp.A.shape
    for i in range(m):
        if lp.senses[i] == GE:
            rows.append(lp.A[i])
            h.append(lp.rhs[i])
        else:
            rows.append(-lp.A[i])
            h.append(-lp.rhs[i])
    eye = np.eye(n)
    if lp.lb is not None:
        for j in range(n):
            if np.isfinite(lp.lb[j]):
                rows.append(eye[j])
                h.append(lp.lb[j])
    if lp.ub is not None:
        for j in range(n):
            if np.isfinite(lp.ub[j]):
                rows.append(-eye[j])
                h.append(-lp.ub[j])
    return np.array(rows), np.array(h)


def solve_by_enumeration(lp):
    """Returns (status_string, optimal_value_or_None)."""
    G, h = normalize(lp)
    n = lp.c.size
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        G = np.vstack([G, e, -e])
        h = np.concatenate([h, [-BOX, -BOX]])
    m = G.shape[0]
    best, best_x = None, None
    feasible = False
    for subset in itertools.combinations(range(m), n):
        GS = G[list(subset)]
        try:
            x = np.linalg.solve(GS, h[list(subset)])
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > 10 * BOX:
            continue
        if np.all(G @ x >= h - FEAS_TOL):
            feasible = True
            v = float(lp.c @ x)
            if best is None or v < best - 1e-12:
                best, best_x = v, x
    if not feasible:
        return "infeasible", None
    if np.max(np.abs(best_x)) >= BOX * (1 - 1e-6):
        return "unbounded", None
    return "optimal", best


def random_lp(rng):
    """Random instance mix covering optimal, infeasible, and unbounded cases."""
    from monocert.solver import LinearProgram

    n = int(rng.integers(2, 7))
    m = int(rng.integers(3, 13))
    A = rng.normal(size=(m, n))
    senses = np.where(rng.random(m) < 0.5, GE, -GE).astype(np.int8)
    rhs = rng.normal(size=m)
    lb = None
    if rng.random() < 0.5:
        lb = np.where(rng.random(n) < 0.5, 0.0, -np.inf)
    return LinearProgram(c=rng.normal(size=n), A=A, senses=senses, rhs=rhs, lb=lb)
