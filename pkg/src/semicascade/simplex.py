"""Dense simplex solver for minimax problems over the probability simplex.

Solves min over b in the simplex (b >= 0, sum b = 1) of max_s |(W^T b)_s|
for a K x S value matrix W, the inner subproblem of the cancellation
defect. The solve runs on the dual program, which has only K+1 rows no
matter how many grid constraints S there are:

    max z  s.t.  W_k (u - v) >= z (k = 1..K),  sum(u) + sum(v) <= 1,
                 u, v, z >= 0

(the normalization may be relaxed to an inequality: any slack would be
rescaled away at a positive optimum). Column layout u | v | z | h | g with
slacks h_k for the K rows and g for the normalization gives the identity
basis {h, g} as an immediately feasible start, so no phase-1 is needed.
At optimality the primal weights are read off the reduced costs of the h
columns and the defect from the reduced cost of g.

Pivoting is Dantzig's rule, switching permanently to Bland's rule after a
run of degenerate steps (the zero right-hand sides of the h rows invite
cycling). A pivot budget turns pathological instances into a flagged
suboptimal result instead of a hang.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

PIVOT_BUDGET = 20_000
BLAND_AFTER_DEGENERATE = 50
REDCOST_TOL = 1e-11
RATIO_TOL = 1e-12


@dataclass(frozen=True)
class SimplexResult:
    value: float  # certified max_s |(W^T b)_s| at the returned b
    weights: np.ndarray  # b on the probability simplex
    objective: float  # LP optimum z (equals value up to solver tolerance)
    iterations: int
    status: str  # optimal | pivot_budget_exhausted | unbounded
    suboptimal: bool


def solve_minimax_on_simplex(w, pivot_budget=PIVOT_BUDGET):
    """Minimize max_s |(W^T b)_s| over the probability simplex in b."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
        raise InputError("need a (K, S) value matrix with K, S >= 1")
    if not np.all(np.isfinite(w)):
        raise InputError("value matrix must be finite")
    n_rows, n_grid = w.shape
    scale = max(1.0, float(np.max(np.abs(w))))
    tol = REDCOST_TOL * scale

    # columns: u (n_grid) | v (n_grid) | z | h (n_rows) | g
    z_col = 2 * n_grid
    h_cols = z_col + 1
    g_col = h_cols + n_rows
    n_cols = g_col + 1
    tab = np.zeros((n_rows + 1, n_cols + 1))
    tab[:n_rows, :n_grid] = -w
    tab[:n_rows, n_grid:z_col] = w
    tab[:n_rows, z_col] = 1.0
    tab[:n_rows, h_cols:g_col] = np.eye(n_rows)
    tab[n_rows, :z_col] = 1.0
    tab[n_rows, g_col] = 1.0
    tab[n_rows, -1] = 1.0

    red = np.zeros(n_cols)  # reduced costs; objective is min -z
    red[z_col] = -1.0
    obj_value = 0.0
    basis = list(range(h_cols, g_col)) + [g_col]

    iters = 0
    degenerate_run = 0
    use_bland = False
    status = "optimal"
    while True:
        negatives = np.flatnonzero(red < -tol)
        if negatives.size == 0:
            break
        if iters >= pivot_budget:
            status = "pivot_budget_exhausted"
            break
        if use_bland:
            enter = int(negatives[0])
        else:
            enter = int(negatives[np.argmin(red[negatives])])
        col = tab[:, enter]
        pos = np.flatnonzero(col > RATIO_TOL)
        if pos.size == 0:
            status = "unbounded"
            break
        ratios = tab[pos, -1] / col[pos]
        best = np.min(ratios)
        tied = pos[ratios <= best + RATIO_TOL]
        # leaving choice by smallest basic index breaks degenerate ties
        leave = int(tied[np.argmin([basis[i] for i in tied])])
        if best <= RATIO_TOL:
            degenerate_run += 1
            if degenerate_run >= BLAND_AFTER_DEGENERATE:
                use_bland = True
        else:
            degenerate_run = 0
        pivot = tab[leave, enter]
        tab[leave] /= pivot
        factors = tab[:, enter].copy()
        factors[leave] = 0.0
        tab -= np.outer(factors, tab[leave])
        obj_value += red[enter] * tab[leave, -1]
        red = red - red[enter] * tab[leave, :-1]
        red[enter] = 0.0
        basis[leave] = enter
        iters += 1

    weights = np.maximum(red[h_cols:g_col], 0.0)
    total = weights.sum()
    if total <= 0.0:
        # defect-zero corner where no h column ever left the basis
        weights = np.full(n_rows, 1.0 / n_rows)
    else:
        weights = weights / total
    value = float(np.max(np.abs(w.T.dot(weights))))
    return SimplexResult(value, weights, float(-obj_value), iters, status,
                         status != "optimal")
