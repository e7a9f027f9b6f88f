"""Quantitative separation diagnostics between rigid and chaotic maps.

Three instruments, all comparative rather than absolute:

cancellation_defect asks how well signed unit-l1 combinations of iterated
test functions x(phi^n .) can cancel on a grid. Rigid systems (rotations)
admit exact linear dependences among shifts, so the defect collapses to
float noise; expanding maps produce near-orthogonal iterates that refuse
to cancel. The absolute-value objective is handled exactly by sign-orthant
decomposition: for each sign pattern of the coefficients the inner
problem is a minimax LP over the probability simplex (see simplex module)
and the defect is the best orthant's value.

envelope_metric equips the iterates {phi^n} with the weighted double-sum
pseudometric d(n1, n2) = sum 2^-(i+j) |x_i(phi^{n1} w_j) - x_i(phi^{n2} w_j)|
over a truncated function bank and a deterministic dense point sequence;
covering_profile then counts greedy eps-net sizes of {phi^0..phi^N} under
d. Near-periodic families stay coverable by a bounded net; hyperbolic
ones keep opening centers as N grows.

equicontinuity_probe measures worst-case forward expansion of initially
close pairs, the most direct rigid-vs-expanding separation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import systems, ulam
from .errors import InputError, ResourceBudgetError
from .simplex import solve_minimax_on_simplex

MAX_CANCELLATION_TERMS = 14
COVERING_PAIR_BUDGET = 1 << 22
ENVELOPE_BANK = 16
ENVELOPE_POINTS = 16


def koopman_value_matrix(spec, fn, powers, grid):
    """Entry (k, s) = x(phi^{powers[k]} grid[s]); one orbit pass, rows reused."""
    powers = [int(p) for p in powers]
    if any(b <= a for a, b in zip(powers, powers[1:])):
        raise InputError("powers must be strictly increasing")
    if any(p < 0 for p in powers):
        raise InputError("powers must be nonnegative")
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim == 1:
        grid = grid[:, None]
    if grid.shape[0] < 1 or grid.shape[1] != spec.dimension:
        raise InputError("grid must be a nonempty (S, %d) array" % spec.dimension)
    orbit = systems.orbit_batch(spec, grid, powers[-1])
    return np.stack([fn(orbit[p]) for p in powers])


def cancellation_defect(values, pivot_budget=None):
    """Smallest grid sup-norm of sum a_k * row_k over sum |a_k| = 1.

    Decomposes by coefficient sign pattern (2^(K-1) patterns after fixing
    the first sign; flipping all signs cannot change |sum a_k row_k|) and
    solves each pattern's minimax program on the simplex. Returns
    (defect, coefficients, report) with sum |coefficients| = 1.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise InputError("values must be a (K, S) matrix")
    n_terms = values.shape[0]
    if n_terms > MAX_CANCELLATION_TERMS:
        raise ResourceBudgetError(
            "%d terms would take %d sign-pattern solves; cap is %d terms"
            % (n_terms, 1 << (n_terms - 1), MAX_CANCELLATION_TERMS))
    kwargs = {} if pivot_budget is None else {"pivot_budget": pivot_budget}
    best = None
    best_coeffs = None
    any_suboptimal = False
    iterations = 0
    for pattern in range(1 << (n_terms - 1)):
        signs = np.ones(n_terms)
        for k in range(1, n_terms):
            if (pattern >> (k - 1)) & 1:
                signs[k] = -1.0
        res = solve_minimax_on_simplex(signs[:, None] * values, **kwargs)
        iterations += res.iterations
        any_suboptimal = any_suboptimal or res.suboptimal
        if best is None or res.value < best:
            best = res.value
            best_coeffs = signs * res.weights
    report = {"sign_patterns": 1 << (n_terms - 1),
              "total_pivots": iterations,
              "suboptimal": any_suboptimal}
    return float(best), best_coeffs, report


@dataclass(frozen=True)
class TamenessReport:
    function_name: str
    strategy: str  # fixed | adversarial
    grid_size: int
    subsequence: tuple  # powers at the largest K
    defect_per_k: dict  # K -> defect
    coefficients: np.ndarray  # optimal coefficients at the largest K
    suboptimal: bool

    def as_jsonable(self):
        return {
            "function_name": self.function_name,
            "strategy": self.strategy,
            "grid_size": self.grid_size,
            "subsequence": [int(p) for p in self.subsequence],
            "defect_per_k": {str(k): float(v) for k, v in self.defect_per_k.items()},
            "suboptimal": self.suboptimal,
        }


def tameness_profile(spec, fn_entry, k_max, grid, strategy="fixed",
                     candidate_span=8):
    """Cancellation defect as a function of the number of terms K = 2..k_max.

    fn_entry is a (name, callable) pair as produced by the trig bank. The
    fixed strategy uses powers 1..K (nested, so the defect must be
    nonincreasing in K, which is enforced); the adversarial strategy grows
    the subsequence greedily, picking the next power from a short span to
    maximize the defect, giving upper-bound evidence against cancellation.
    """
    name, fn = fn_entry
    if k_max < 2:
        raise InputError("k_max must be >= 2")
    if strategy not in ("fixed", "adversarial"):
        raise InputError("strategy must be fixed or adversarial")
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim == 1:
        grid = grid[:, None]
    defects = {}
    if strategy == "fixed":
        powers = list(range(1, k_max + 1))
        values = koopman_value_matrix(spec, fn, powers, grid)
        coeffs = None
        for k in range(2, k_max + 1):
            defect, coeffs, rep = cancellation_defect(values[:k])
            defects[k] = defect
            if k > 2 and defect > defects[k - 1] + 1e-10:
                raise RuntimeError(
                    "defect rose from %.3g to %.3g between K=%d and K=%d on a "
                    "nested subsequence; solver tolerance exceeded"
                    % (defects[k - 1], defect, k - 1, k))
        return TamenessReport(name, strategy, grid.shape[0], tuple(powers),
                              defects, coeffs, rep["suboptimal"])
    powers = [1, 2]
    values = koopman_value_matrix(spec, fn, powers, grid)
    defect, coeffs, rep = cancellation_defect(values)
    defects[2] = defect
    suboptimal = rep["suboptimal"]
    for k in range(3, k_max + 1):
        best_defect, best_power, best_coeffs = -1.0, None, None
        for cand in range(powers[-1] + 1, powers[-1] + 1 + candidate_span):
            cand_values = koopman_value_matrix(spec, fn, powers + [cand], grid)
            defect, coeffs, rep = cancellation_defect(cand_values)
            suboptimal = suboptimal or rep["suboptimal"]
            if defect > best_defect:
                best_defect, best_power, best_coeffs = defect, cand, coeffs
        powers.append(best_power)
        defects[k] = best_defect
    return TamenessReport(name, "adversarial", grid.shape[0], tuple(powers),
                          defects, best_coeffs, suboptimal)


# ---------------------------------------------------------------------------
# envelope pseudometric and covering profiles


def _envelope_features(spec, horizon, bank_count, point_count):
    """Weighted feature rows; row t flattens 2^-(i+j) x_i(phi^t w_j).

    The l1 distance between two rows is exactly the truncated double-sum
    pseudometric between phi^{t1} and phi^{t2}.
    """
    bank = ulam.trig_bank(bank_count, spec.dimension)
    pts = systems.kronecker_points(point_count, spec.dimension)
    orbit = systems.orbit_batch(spec, pts, horizon)  # (horizon+1, M, d)
    feats = np.empty((horizon + 1, bank_count * point_count))
    i_w = 0.5 ** np.arange(1, bank_count + 1)
    j_w = 0.5 ** np.arange(1, point_count + 1)
    weights = np.outer(i_w, j_w).ravel()
    for t in range(horizon + 1):
        vals = np.stack([fn(orbit[t]) for _, fn in bank])  # (B, M)
        feats[t] = vals.ravel()
    feats *= weights[None, :]
    return feats


def envelope_metric(spec, n1, n2, bank_count=ENVELOPE_BANK,
                    point_count=ENVELOPE_POINTS):
    """Truncated double-sum distance between the n1-th and n2-th iterates."""
    if n1 < 0 or n2 < 0:
        raise InputError("iterate indices must be nonnegative")
    if bank_count < 1 or point_count < 1:
        raise InputError("bank and point counts must be >= 1")
    feats = _envelope_features(spec, max(n1, n2), bank_count, point_count)
    return float(np.abs(feats[n1] - feats[n2]).sum())


@dataclass(frozen=True)
class CoveringProfile:
    horizon: int
    eps_list: tuple
    counts: tuple
    bank_count: int
    point_count: int
    truncation_bound: float

    def as_jsonable(self):
        return {
            "horizon": self.horizon,
            "eps_list": [float(e) for e in self.eps_list],
            "counts": [int(c) for c in self.counts],
            "bank_count": self.bank_count,
            "point_count": self.point_count,
            "truncation_bound": self.truncation_bound,
        }


def covering_profile(spec, horizon, eps_list, bank_count=ENVELOPE_BANK,
                     point_count=ENVELOPE_POINTS, budget=COVERING_PAIR_BUDGET):
    """Greedy first-fit eps-net sizes of {phi^0 .. phi^horizon}.

    Scans iterates in order, opening a new center whenever no existing
    center lies within eps; deterministic, and monotone in both arguments
    (more iterates never shrink the net, larger eps never grows it).
    """
    if horizon < 1:
        raise InputError("horizon must be >= 1")
    if any(e <= 0 for e in eps_list):
        raise InputError("eps values must be positive")
    if (horizon + 1) ** 2 > budget:
        raise ResourceBudgetError(
            "covering at horizon %d may need %d pairwise distances, over the "
            "budget of %d; lower the horizon" % (horizon, (horizon + 1) ** 2, budget))
    feats = _envelope_features(spec, horizon, bank_count, point_count)
    counts = []
    for eps in eps_list:
        centers = feats[0][None, :]
        for t in range(1, horizon + 1):
            dists = np.abs(centers - feats[t][None, :]).sum(axis=1)
            if not np.any(dists <= eps):
                centers = np.vstack([centers, feats[t]])
        counts.append(centers.shape[0])
    truncation = 2.0 * (0.5 ** bank_count + 0.5 ** point_count)
    return CoveringProfile(int(horizon), tuple(float(e) for e in eps_list),
                           tuple(counts), bank_count, point_count, truncation)


def equicontinuity_probe(spec, delta_list, horizon, base_points=None):
    """Worst forward spread of pairs that start delta-close.

    For each delta, pairs a base set with copies offset by delta (shrunk
    by one part in 1e12 to keep the starting distance strictly below
    delta) and reports the max metric over all pairs and all times up to
    the horizon. Isometries return delta back; expanding maps saturate
    toward the diameter 1/2.
    """
    if horizon < 0:
        raise InputError("horizon must be >= 0")
    if any(d <= 0 or d >= 0.5 for d in delta_list):
        raise InputError("deltas must lie in (0, 0.5)")
    if base_points is None:
        count = 64 if spec.dimension == 1 else 8
        base_points = systems.equispaced_points(count, spec.dimension)
    base = np.asarray(base_points, dtype=np.float64)
    if base.ndim == 1:
        base = base[:, None]
    table = {}
    for delta in delta_list:
        partner = base.copy()
        partner[:, 0] = np.mod(partner[:, 0] + delta * (1.0 - 1e-12), 1.0)
        orb_a = systems.orbit_batch(spec, base, horizon)
        orb_b = systems.orbit_batch(spec, partner, horizon)
        diff = np.abs(orb_a - orb_b)
        np.minimum(diff, 1.0 - diff, out=diff)
        table[float(delta)] = float(diff.max(axis=2).max())
    return table


def tameness_to_csv(report, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["K", "defect"])
        for k in sorted(report.defect_per_k):
            writer.writerow([k, "%.17g" % report.defect_per_k[k]])


def covering_to_csv(profile, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["horizon", "epsilon", "count"])
        for eps, count in zip(profile.eps_list, profile.counts):
            writer.writerow([profile.horizon, "%.17g" % eps, count])
