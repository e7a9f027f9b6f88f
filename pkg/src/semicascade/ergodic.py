"""Ergodic averaging schedules and weak-star convergence diagnostics.

A schedule is a finite convex combination of transfer-operator powers.
Applying one to a cell measure never materializes matrix powers: a single
prefix walk mu, mu V, mu V^2, ... feeds every requested power. Weak-star
comparisons pair measures against a fixed finite bank of test functions
sampled at cell centers, so "distance" always means: max absolute pairing
difference over the bank.

Two convergence routes exist on purpose. The matrix route diagnoses the
sampled chain, whose averages always settle (finite stochastic matrices
have convergent Cesaro means), so it can only ever certify convergence at
a resolution. The exact-orbit route evaluates window averages of a test
function along an exact rational orbit (binary arithmetic for the
doubling map) and is the only honest way to exhibit non-convergence for
expanding maps; see exact_orbit_diagnostic.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import systems, ulam
from .errors import InputError, ResourceBudgetError

TWO_PI = 2.0 * math.pi

DEFAULT_TOL = 1e-2
## schedules whose telescoping bound exceeds this are too far from ergodic
## for a Cauchy test to mean anything (a single power has bound 2)
ERGODICITY_GATE = 0.25

DENSE_KERNEL_CELL_CAP = 1 << 10
KERNEL_STOP_RESIDUAL = 1e-13
KERNEL_PLATEAU_GRACE = 8


@dataclass(frozen=True)
class ErgodicSchedule:
    """Convex combination of powers: sum_k weights[k] * V^powers[k]."""

    powers: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.powers) != len(self.weights) or not self.powers:
            raise InputError("schedule needs matching nonempty powers and weights")
        if any(p < 0 for p in self.powers):
            raise InputError("powers must be nonnegative")
        if any(b <= a for a, b in zip(self.powers, self.powers[1:])):
            raise InputError("powers must be strictly increasing")
        if any(w < 0 for w in self.weights):
            raise InputError("weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise InputError("weights must sum to 1 within 1e-12")

    @property
    def max_power(self):
        return self.powers[-1]

    def label(self):
        if self.weights.count(self.weights[0]) == len(self.weights) and \
                self.powers == tuple(range(self.powers[0], self.powers[-1] + 1)):
            if self.powers[0] == 0:
                return "cesaro_%d" % len(self.powers)
            return "window_%d_%d" % (self.powers[0], len(self.powers))
        return "schedule_%d_terms" % len(self.powers)


def cesaro_schedule(n):
    """Powers 0..n-1, each weight 1/n."""
    if n < 1:
        raise InputError("cesaro length must be >= 1")
    return ErgodicSchedule(tuple(range(n)), (1.0 / n,) * n)


def window_schedule(start, length):
    """Powers start..start+length-1, each weight 1/length."""
    if length < 1:
        raise InputError("window length must be >= 1")
    if start < 0:
        raise InputError("window start must be >= 0")
    return ErgodicSchedule(tuple(range(start, start + length)), (1.0 / length,) * length)


def mix_schedule(a, s1, s2):
    """Convex mix a*s1 + (1-a)*s2 as a single schedule."""
    if not 0.0 <= a <= 1.0:
        raise InputError("mixing weight must lie in [0,1]")
    acc = {}
    for p, w in zip(s1.powers, s1.weights):
        acc[p] = acc.get(p, 0.0) + a * w
    for p, w in zip(s2.powers, s2.weights):
        acc[p] = acc.get(p, 0.0) + (1.0 - a) * w
    powers = tuple(sorted(acc))
    return ErgodicSchedule(powers, tuple(acc[p] for p in powers))


def telescoping_bound(sch):
    """Upper bound on the ergodicity defect for sup-normalized test functions.

    T(I-V) regroups into sum_p c_p V^p with c_p = w(p) - w(p-1) where w is
    the weight-by-power map; the pairing against any |x| <= 1 test function
    and a probability vector is at most sum |c_p|. Cesaro length n gives 2/n.
    """
    w = dict(zip(sch.powers, sch.weights))
    total = 0.0
    for p in range(sch.powers[0], sch.powers[-1] + 2):
        total += abs(w.get(p, 0.0) - w.get(p - 1, 0.0))
    return total


def _check_measure(tm, mu):
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (tm.n_cells,):
        raise InputError("measure vector must have length %d" % tm.n_cells)
    return mu


def apply_schedule(tm, sch, mu):
    """sum_k weights[k] * (mu V^powers[k]) via one prefix walk."""
    return apply_schedules_batch(tm, [sch], mu)[0]


def apply_schedules_batch(tm, schedules, mu):
    """Apply several schedules to one start measure, sharing the power walk."""
    mu = _check_measure(tm, mu)
    by_power = {}
    for i, sch in enumerate(schedules):
        for p, w in zip(sch.powers, sch.weights):
            by_power.setdefault(p, []).append((i, w))
    max_p = max(sch.max_power for sch in schedules)
    out = [np.zeros(tm.n_cells) for _ in schedules]
    cur = mu
    for p in range(max_p + 1):
        for i, w in by_power.get(p, ()):
            out[i] += w * cur
        if p < max_p:
            cur = ulam.apply_transfer(tm, cur)
    return out


def weakstar_distance(mu1, mu2, bank):
    """max over bank functions x of |<x, mu1 - mu2>|."""
    d = np.asarray(mu1, dtype=np.float64) - np.asarray(mu2, dtype=np.float64)
    if not bank:
        raise InputError("bank must be nonempty")
    return max(abs(float(np.dot(x, d))) for x in bank)


def ergodicity_defect(tm, sch, bank, probes):
    """max over bank x probes of |<x, T mu - T V mu>| for T = the schedule.

    T is linear, so T mu - T V mu = T(mu - V mu): one prefix walk on the
    signed difference per probe instead of two on measures.
    """
    if not bank or not probes:
        raise InputError("bank and probes must be nonempty")
    worst = 0.0
    for mu in probes:
        mu = _check_measure(tm, mu)
        nu = mu - ulam.apply_transfer(tm, mu)
        t_nu, = apply_schedules_batch(tm, [sch], nu)
        worst = max(worst, weakstar_distance(t_nu, np.zeros_like(t_nu), bank))
    return worst


def cesaro_defect_curve(tm, mu, bank, n_max):
    """Ergodicity defect of every Cesaro schedule n = 1..n_max, one shared walk.

    Runs the prefix walk once, accumulating both sum_{k<n} mu V^k and
    sum_{k<n} (mu V) V^k, and pairs their difference against the bank at
    every n. Returns an array of length n_max (index n-1 holds defect(n)).
    """
    mu = _check_measure(tm, mu)
    if n_max < 1:
        raise InputError("n_max must be >= 1")
    bank_mat = np.asarray(bank, dtype=np.float64)
    acc_mu = np.zeros(tm.n_cells)
    acc_vmu = np.zeros(tm.n_cells)
    cur = mu
    defects = np.empty(n_max)
    for n in range(1, n_max + 1):
        nxt = ulam.apply_transfer(tm, cur)
        acc_mu += cur
        acc_vmu += nxt
        diff = (acc_mu - acc_vmu) / n
        defects[n - 1] = np.max(np.abs(bank_mat.dot(diff)))
        cur = nxt
    return defects


# ---------------------------------------------------------------------------
# convergence diagnostics


@dataclass(frozen=True)
class ConvergenceReport:
    """Cauchy test of schedule outputs in the weak-star pairing.

    verdict: converged (all tail pairs <= tol), not_converged (some tail
    pair >= 10*tol), else inconclusive. The 10x gap is hysteresis: between
    tol and 10*tol the data neither certifies nor refutes at this
    resolution. Every report carries the tolerance it was computed under.
    """

    verdict: str
    tolerance: float
    schedule_labels: tuple
    tail_indices: tuple
    pairwise_defects: np.ndarray  # over tail indices
    limit: object  # measure vector when converged, else None
    cause: str
    max_tail_defect: float

    def as_jsonable(self):
        return {
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "schedule_labels": list(self.schedule_labels),
            "tail_indices": [int(i) for i in self.tail_indices],
            "pairwise_defects": [[float(v) for v in row] for row in self.pairwise_defects],
            "max_tail_defect": self.max_tail_defect,
            "cause": self.cause,
            "limit": None if self.limit is None else [float(v) for v in self.limit],
        }


def _tail_verdict(outputs, schedules, tol, distance):
    n_sched = len(schedules)
    q = max(2, -(-n_sched // 4))  # last quartile, at least two entries
    tail = tuple(range(n_sched - q, n_sched))
    defects = np.zeros((q, q))
    for a in range(q):
        for b in range(a + 1, q):
            d = distance(outputs[tail[a]], outputs[tail[b]])
            defects[a, b] = defects[b, a] = d
    worst = float(defects.max())
    if worst <= tol:
        verdict, cause = "converged", "all tail pairs within tolerance"
    elif worst >= 10.0 * tol:
        verdict, cause = "not_converged", "tail pair defect at 10x tolerance"
    else:
        verdict, cause = "inconclusive", "tail defects between tol and 10x tol"
    return verdict, cause, tail, defects, worst


def convergence_diagnostic(tm, schedules, mu0, bank, tol=DEFAULT_TOL,
                           gate=ERGODICITY_GATE):
    """Cauchy test of schedule outputs from one start measure.

    Schedules whose measured ergodicity defect exceeds the gate make the
    whole diagnostic inconclusive (the Cauchy question is only meaningful
    for near-ergodic schedules).
    """
    if not schedules:
        raise InputError("need at least one schedule")
    if len(schedules) < 2:
        raise InputError("a Cauchy test needs at least two schedules")
    mu0 = _check_measure(tm, mu0)
    labels = tuple(sch.label() for sch in schedules)
    nu = mu0 - ulam.apply_transfer(tm, mu0)
    zero = np.zeros(tm.n_cells)
    for t_nu, lab in zip(apply_schedules_batch(tm, schedules, nu), labels):
        defect = weakstar_distance(t_nu, zero, bank)
        if defect > gate:
            return ConvergenceReport(
                "inconclusive", float(tol), labels, (), np.zeros((0, 0)), None,
                "schedule %s has ergodicity defect %.3g above the gate %.3g"
                % (lab, defect, gate), float("nan"))
    outputs = apply_schedules_batch(tm, schedules, mu0)
    verdict, cause, tail, defects, worst = _tail_verdict(
        outputs, schedules, tol, lambda a, b: weakstar_distance(a, b, bank))
    limit = outputs[-1] if verdict == "converged" else None
    return ConvergenceReport(verdict, float(tol), labels, tail, defects,
                             limit, cause, worst)


def exact_orbit_schedule_averages(spec, point, schedules, functions):
    """Schedule averages of test functions along an exact orbit.

    functions: (name, callable) pairs taking (P, d) float arrays. Orbit
    points are carried in exact rational arithmetic and reduced mod 1
    exactly; only the final evaluation is floating point. Returns an
    (n_schedules, n_functions) array.
    """
    if not schedules:
        raise InputError("need at least one schedule")
    by_power = {}
    for i, sch in enumerate(schedules):
        for p, w in zip(sch.powers, sch.weights):
            by_power.setdefault(p, []).append((i, w))
    max_p = max(sch.max_power for sch in schedules)
    out = np.zeros((len(schedules), len(functions)))
    cur = point
    for p in range(max_p + 1):
        consumers = by_power.get(p)
        if consumers:
            coords = np.asarray([float(c) for c in cur.coords])[None, :]
            vals = np.asarray([fn(coords)[0] for _, fn in functions])
            for i, w in consumers:
                out[i] += w * vals
        if p < max_p:
            cur = systems.exact_step(spec, cur)
    return out


def exact_orbit_diagnostic(spec, point, schedules, functions, tol=DEFAULT_TOL,
                           gate=ERGODICITY_GATE):
    """Cauchy test of exact-orbit window averages.

    The matrix route cannot refuse convergence (finite chains always
    settle), so refutations for expanding maps run here: averages of the
    test functions along the exact orbit stand in for the measures, and
    the distance is the max difference across functions. The gate uses
    the analytic telescoping bound of each schedule.
    """
    if len(schedules) < 2:
        raise InputError("a Cauchy test needs at least two schedules")
    labels = tuple(sch.label() for sch in schedules)
    for sch, lab in zip(schedules, labels):
        bound = telescoping_bound(sch)
        if bound > gate:
            return ConvergenceReport(
                "inconclusive", float(tol), labels, (), np.zeros((0, 0)), None,
                "schedule %s has telescoping bound %.3g above the gate %.3g"
                % (lab, bound, gate), float("nan"))
    averages = exact_orbit_schedule_averages(spec, point, schedules, functions)
    verdict, cause, tail, defects, worst = _tail_verdict(
        list(averages), schedules, tol,
        lambda a, b: float(np.max(np.abs(a - b))))
    limit = averages[-1] if verdict == "converged" else None
    return ConvergenceReport(verdict, float(tol), labels, tail, defects,
                             limit, cause, worst)


# ---------------------------------------------------------------------------
# kernel projection


@dataclass(frozen=True)
class KernelEstimate:
    """Dense estimate of the projection commuting with the transfer matrix.

    Built by repeated pair-averaging: Q <- (Q + B Q)/2 with B squared each
    round, which represents the full Cesaro mean of length 2^rounds while
    paying only `rounds` dense multiplies. residual_vq = ||V Q - Q||_inf,
    residual_idem = ||Q Q - Q||_inf (max absolute row sums).
    """

    q: np.ndarray
    residual_vq: float
    residual_idem: float
    rounds: int
    represented_length: int
    stop_reason: str


def _inf_norm(mat):
    return float(np.max(np.abs(mat).sum(axis=1)))


def kernel_projection_estimate(tm, n):
    """Refine the averaging projection for at most n doubling rounds.

    n caps the number of rounds, not the represented averaging length
    (which is 2^rounds); refinement stops early once the residual bottoms
    out at float resolution. Never raises on non-stabilization: the best
    iterate seen is returned with its residuals.
    """
    if n < 1:
        raise InputError("need at least one refinement round")
    n_cells = tm.n_cells
    if n_cells > DENSE_KERNEL_CELL_CAP:
        raise ResourceBudgetError(
            "dense projection on %d cells exceeds the %d-cell cap; coarsen "
            "the partition" % (n_cells, DENSE_KERNEL_CELL_CAP))
    v = tm.matrix.toarray()
    q = np.eye(n_cells)
    b = v.copy()
    best_q, best_res, best_round = q, _inf_norm(v.dot(q) - q), 0
    prev_res = best_res
    rounds = 0
    stop = "round budget exhausted"
    while rounds < n:
        q = 0.5 * (q + b.dot(q))
        b = b.dot(b)
        rounds += 1
        res = _inf_norm(v.dot(q) - q)
        if res < best_res:
            best_q, best_res, best_round = q, res, rounds
        if res <= KERNEL_STOP_RESIDUAL:
            stop = "residual below stop threshold"
            break
        if rounds >= KERNEL_PLATEAU_GRACE and res >= prev_res:
            stop = "residual plateaued at float resolution"
            break
        prev_res = res
    idem = _inf_norm(best_q.dot(best_q) - best_q)
    return KernelEstimate(best_q, best_res, idem, best_round,
                          1 << best_round, stop)


# ---------------------------------------------------------------------------
# per-point limit measures


@dataclass(frozen=True)
class LimitMeasureResult:
    """Cesaro limit of a point mass, with a single-class concentration flag.

    ergodic is True when all but class_mass_slack of the averaged mass
    sits inside one terminal SCC; the slack absorbs the O(1/n) tail that
    finite averaging leaves on transient cells.
    """

    measure: np.ndarray
    ergodic: bool
    dominant_class: int
    mass_in_class: float
    route: str
    support_cells: np.ndarray


def limit_measure_per_point(tm, partition, spec, omega, n,
                            support_threshold=1e-12, class_mass_slack=1e-2,
                            minimal_report=None, exact_step_cap=100_000):
    """Average the orbit of a point mass and test single-class concentration.

    Exact rational points ride the exact backend when the family supports
    it: the orbit is followed until it cycles, and the returned measure is
    the uniform distribution over the cycle's cells (the true limit, no
    averaging error). Float points, or exact orbits that fail to cycle
    within exact_step_cap, use an n-step Cesaro prefix walk of the matrix.
    """
    from . import topology  # local import: topology builds on ulam, not vice versa

    if n < 1:
        raise InputError("need n >= 1")
    if minimal_report is None:
        minimal_report = topology.minimal_invariant_sets(
            topology.graph_from_transfer(tm))

    measure = None
    route = "matrix_cesaro"
    if isinstance(omega, systems.RationalPoint):
        cycle = _exact_cycle(spec, omega, exact_step_cap)
        if cycle is not None:
            cells = [partition.cell_of_rational(rp) for rp in cycle]
            measure = np.zeros(tm.n_cells)
            for c in cells:
                measure[c] += 1.0 / len(cells)
            route = "exact_cycle"
        else:
            omega = np.asarray(omega.as_floats())
    if measure is None:
        start = np.zeros(tm.n_cells)
        cells = partition.cell_of_points(np.atleast_2d(np.asarray(omega, dtype=np.float64)))
        start[int(cells[0])] = 1.0
        acc = np.zeros(tm.n_cells)
        cur = start
        for _ in range(n):
            acc += cur
            cur = ulam.apply_transfer(tm, cur)
        measure = acc / n

    class_mass = [(float(measure[cells].sum()), i)
                  for i, cells in enumerate(minimal_report.terminal_cells)]
    best_mass, best_idx = max(class_mass) if class_mass else (0.0, -1)
    flag = best_mass >= 1.0 - class_mass_slack
    dominant = minimal_report.terminal_scc_ids[best_idx] if best_idx >= 0 else -1
    support_cells = np.flatnonzero(measure > support_threshold)
    return LimitMeasureResult(measure, bool(flag), int(dominant),
                              best_mass, route, support_cells)


def _exact_cycle(spec, point, cap):
    """Forward-orbit cycle of an exact point, or None if unavailable."""
    from .errors import CapabilityError

    try:
        seen = {point: 0}
        trail = [point]
        cur = point
        for _ in range(cap):
            cur = systems.exact_step(spec, cur)
            if cur in seen:
                return trail[seen[cur]:]
            seen[cur] = len(trail)
            trail.append(cur)
    except CapabilityError:
        return None
    return None


def defects_to_csv(report, path):
    """Tail pairwise defect matrix with schedule labels as headers."""
    tail_labels = [report.schedule_labels[i] for i in report.tail_indices]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + tail_labels)
        for lab, row in zip(tail_labels, report.pairwise_defects):
            writer.writerow([lab] + ["%.17g" % v for v in row])
