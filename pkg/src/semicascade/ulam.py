"""Ulam-style discretization: partitions, sampled transfer matrices, test banks.

The space [0,1)^d is cut into m^d half-open cells. Each cell carries s
deterministic sample points: the corners of the closed cell first (the
lower-left corner is always first, so s=1 samples exactly the grid), then
the center, then a seeded Kronecker fill. Corner samples are taken on the
cell closure on purpose: fixed points sitting exactly on grid lines (the
repeller at 0, the attractor at 1/2 for even m) must show up in the sample
set or the sampled chain misses the transition into the cell that owns the
fixed point. The price is that a boundary corner is shared with the next
cell, so a map that permutes cells exactly acquires a 1/s echo entry for
s > 1; the interval-exact oracle in the tests quantifies this.

The transfer matrix is row-stochastic with entry (i, j) equal to the
fraction of cell i's samples that the map sends into cell j; the Koopman
action is its transpose. Measures on cells and cell functions are plain
numpy vectors of length n_cells.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import systems
from .errors import InputError, ResourceBudgetError

DEFAULT_SAMPLE_BUDGET = 1 << 24

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Partition:
    """Uniform grid partition of [0,1)^d with per-cell sample offsets."""

    dimension: int
    cells_per_axis: int
    samples_per_cell: int
    seed: int
    offsets: np.ndarray  # (s, d), offsets within the closed cell, in [0, width]

    @property
    def n_cells(self):
        return self.cells_per_axis**self.dimension

    @property
    def width(self):
        return 1.0 / self.cells_per_axis

    def lower_corners(self):
        m = self.cells_per_axis
        if self.dimension == 1:
            return (np.arange(m, dtype=np.float64) / m)[:, None]
        side = np.arange(m, dtype=np.float64) / m
        gx, gy = np.meshgrid(side, side, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])

    def centers(self):
        return self.lower_corners() + 0.5 * self.width

    def all_samples(self):
        """Sample points, cell-major: shape (n_cells * s, d), wrapped into [0,1)."""
        pts = self.lower_corners()[:, None, :] + self.offsets[None, :, :]
        pts = pts.reshape(-1, self.dimension)
        pts = np.mod(pts, 1.0)
        pts[pts >= 1.0] = 0.0
        return pts

    def cell_of_points(self, pts):
        """Cell index for each row of a (P, d) float array with coords in [0,1)."""
        pts = np.asarray(pts, dtype=np.float64)
        m = self.cells_per_axis
        idx = np.minimum((pts * m).astype(np.int64), m - 1)
        if self.dimension == 1:
            return idx[:, 0]
        return idx[:, 0] * m + idx[:, 1]

    def cell_of_rational(self, rp):
        m = self.cells_per_axis
        parts = [min(int(c * m), m - 1) for c in rp.coords]
        if self.dimension == 1:
            return parts[0]
        return parts[0] * m + parts[1]

    def cell_center(self, index):
        return self.centers()[index]


def _sample_offsets(dimension, s, width, seed):
    if dimension == 1:
        base = [0.0, width, 0.5 * width]
    else:
        base = [(0.0, 0.0), (width, 0.0), (0.0, width), (width, width),
                (0.5 * width, 0.5 * width)]
    offs = [np.atleast_1d(np.asarray(b, dtype=np.float64)) for b in base[:s]]
    need = s - len(offs)
    if need > 0:
        fill = systems.kronecker_points(need, dimension, seed=seed) * width
        offs.extend(fill)
    return np.asarray(offs, dtype=np.float64).reshape(s, dimension)


def build_partition(spec, cells_per_axis, samples_per_cell, seed=0,
                    budget=DEFAULT_SAMPLE_BUDGET):
    """Build the uniform partition with its deterministic sample layout.

    Parameters
    ----------
    spec : SystemSpec
        Determines the dimension.
    cells_per_axis : int
        m >= 1; the partition has m**d cells.
    samples_per_cell : int
        s >= 1; sample order is closed-cell corners, center, Kronecker fill.
    seed : int
        Shifts the Kronecker fill; everything else is seed-independent.
    budget : int
        Cap on m**d * s; exceeding it raises ResourceBudgetError.
    """
    m, s = int(cells_per_axis), int(samples_per_cell)
    if m < 1 or s < 1:
        raise InputError("need cells_per_axis >= 1 and samples_per_cell >= 1")
    total = (m**spec.dimension) * s
    if total > budget:
        raise ResourceBudgetError(
            "partition would carry %d sample points, over the budget of %d; "
            "lower cells_per_axis or samples_per_cell" % (total, budget)
        )
    offsets = _sample_offsets(spec.dimension, s, 1.0 / m, seed)
    return Partition(spec.dimension, m, s, int(seed), offsets)


@dataclass(frozen=True)
class TransferMatrix:
    """Sampled transfer matrix (row-stochastic CSR) tied to its inputs."""

    matrix: sp.csr_matrix
    partition: Partition
    spec: systems.SystemSpec

    @property
    def n_cells(self):
        return self.partition.n_cells


def build_transfer_matrix(partition, spec):
    """Row-stochastic sampled transfer matrix for (partition, spec).

    Entry (i, j) is the fraction of cell i's s samples whose image lies in
    cell j, so every row sums to 1 exactly up to float summation and
    entry (i, j) > 0 only if some sample of cell i maps into cell j.
    """
    if partition.dimension != spec.dimension:
        raise InputError("partition dimension %d does not match system dimension %d"
                         % (partition.dimension, spec.dimension))
    pts = partition.all_samples()
    images = systems.evaluate_map_batch(spec, pts)
    cols = partition.cell_of_points(images)
    n = partition.n_cells
    s = partition.samples_per_cell
    rows = np.repeat(np.arange(n, dtype=np.int64), s)
    mat = sp.coo_matrix((np.full(rows.shape, 1.0 / s), (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    return TransferMatrix(mat, partition, spec)


def apply_transfer(tm, mu):
    """Push a cell measure forward one step: returns mu @ M."""
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (tm.n_cells,):
        raise InputError("measure vector must have length %d" % tm.n_cells)
    return tm.matrix.T.dot(mu)


def apply_koopman(tm, x):
    """Pull a cell function back one step: returns M @ x."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (tm.n_cells,):
        raise InputError("cell function must have length %d" % tm.n_cells)
    return tm.matrix.dot(x)


# ---------------------------------------------------------------------------
# trigonometric test bank

def _bank_1d_terms():
    ## generator of (name, callable) on 1d coordinates, sup-norm <= 1
    yield "one", lambda t: np.ones_like(t)
    k = 1
    while True:
        yield "cos%d" % k, (lambda kk: lambda t: np.cos(TWO_PI * kk * t))(k)
        yield "sin%d" % k, (lambda kk: lambda t: np.sin(TWO_PI * kk * t))(k)
        k += 1


def _bank_2d_order(count):
    ## tensor pairs (i, j) of 1d indices, enumerated by (i+j, i); (0,0) first
    pairs = []
    total = 0
    while len(pairs) < count:
        for i in range(total + 1):
            pairs.append((i, total - i))
            if len(pairs) == count:
                break
        total += 1
    return pairs


def trig_bank(count, dimension):
    """First `count` bank functions as (name, callable-on-(P,d)-array) pairs.

    1d order: 1, cos(2 pi w), sin(2 pi w), cos(4 pi w), sin(4 pi w), ...
    2d: tensor products of the 1d terms enumerated diagonally. Every member
    has sup-norm <= 1, the first is the constant 1.
    """
    if count < 1:
        raise InputError("bank needs count >= 1")
    gen = _bank_1d_terms()
    if dimension == 1:
        terms = [next(gen) for _ in range(count)]
        return [(nm, (lambda f: lambda pts: f(np.asarray(pts)[..., 0]))(fn)) for nm, fn in terms]
    need = max(i for pair in _bank_2d_order(count) for i in pair) + 1
    terms = [next(gen) for _ in range(need)]
    out = []
    for i, j in _bank_2d_order(count):
        nmi, fi = terms[i]
        nmj, fj = terms[j]
        name = "%s*%s" % (nmi, nmj) if (i, j) != (0, 0) else "one"
        out.append((name, (lambda a, b: lambda pts: a(np.asarray(pts)[..., 0]) * b(np.asarray(pts)[..., 1]))(fi, fj)))
    return out


def sample_test_bank(partition, count):
    """Bank functions evaluated at cell centers: list of length-n_cells arrays.

    These are the fixed test functions that render weak-star comparisons
    finitely; pairing a cell measure with each of them and taking the max
    absolute difference is the package's weak-star distance.
    """
    centers = partition.centers()
    return [fn(centers) for _, fn in trig_bank(count, partition.dimension)]


def test_bank_names(count, dimension):
    return [nm for nm, _ in trig_bank(count, dimension)]


# ---------------------------------------------------------------------------
# exports


def matrix_to_dense_csv(tm, path):
    """Write the full matrix as a dense CSV (row per line); small m only."""
    dense = tm.matrix.toarray()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in dense:
            writer.writerow(["%.17g" % v for v in row])


def matrix_to_coo_csv(tm, path):
    """Write sparse coordinate triples (row, col, value), row-major order."""
    coo = tm.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "value"])
        for k in order:
            writer.writerow([int(coo.row[k]), int(coo.col[k]), "%.17g" % coo.data[k]])


def measure_to_csv(mu, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell", "weight"])
        for i, v in enumerate(np.asarray(mu)):
            writer.writerow([i, "%.17g" % v])
