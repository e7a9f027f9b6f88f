"""Bundled map families on the circle [0,1) and torus [0,1)^2.

Five families are bundled: an irrational/rational circle rotation, the
angle-doubling map, a north-south circle map with one repelling and one
attracting fixed point, a tent map, and an integer toral automorphism.
Float evaluation runs through the batch kernels; an exact-rational
backend (fractions.Fraction) covers the algebraic families so periodic
orbits and crafted binary points can be followed without roundoff.

Conventions
-----------
Points are numpy arrays of shape (d,) with coordinates in [0,1); the
metric is the wraparound max-metric, i.e. the max over coordinates of
min(|a-b|, 1-|a-b|). Exact points are `RationalPoint` instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import CapabilityError, InputError

#: (sqrt(5)-1)/2, the canonical irrational rotation angle used in tests
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

FAMILIES = ("circle_rotation", "doubling", "north_south", "tent", "toral_automorphism")


@dataclass(frozen=True)
class SystemSpec:
    """Immutable description of one bundled system.

    Parameters are stored as floats in `params`; when the family admits an
    exact backend and the parameters were given exactly, `exact_params`
    carries them as Fractions (integer matrix entries for the toral family).
    """

    family: str
    dimension: int
    params: tuple
    exact_params: tuple | None = None

    def describe(self):
        if self.family == "circle_rotation":
            return "circle_rotation(alpha=%r)" % (self.params[0],)
        if self.family == "doubling":
            return "doubling()"
        if self.family == "north_south":
            return "north_south(kappa=%r)" % (self.params[0],)
        if self.family == "tent":
            return "tent(slope=%r)" % (self.params[0],)
        return "toral_automorphism(%d,%d,%d,%d)" % self.params


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    return None


def circle_rotation(alpha) -> SystemSpec:
    """Rotation w -> w + alpha mod 1.

    Pass alpha as a Fraction (or "p/q" string) to enable the exact-rational
    backend; a plain float is treated as an irrational angle.
    """
    frac = _as_fraction(alpha)
    a = float(frac) if frac is not None else float(alpha)
    if not 0.0 < a < 1.0:
        raise InputError("rotation angle must lie in (0,1), got %r" % (alpha,))
    exact = (frac,) if frac is not None else None
    return SystemSpec("circle_rotation", 1, (a,), exact)


def doubling_map() -> SystemSpec:
    """Angle doubling w -> 2w mod 1."""
    return SystemSpec("doubling", 1, (), (Fraction(2),))


def north_south(kappa) -> SystemSpec:
    """w -> w + kappa*sin(2 pi w)/(2 pi) mod 1, kappa in (0,1).

    Two fixed points: 0 is repelling (derivative 1+kappa) and 1/2 is
    attracting (derivative 1-kappa); every other orbit flows monotonically
    from the repeller to the attractor.
    """
    k = float(kappa)
    if not 0.0 < k < 1.0:
        raise InputError("north_south kappa must lie in (0,1), got %r" % (kappa,))
    return SystemSpec("north_south", 1, (k,))


def tent_map(slope) -> SystemSpec:
    """w -> slope * min(w, 1-w), slope in (1, 2]."""
    frac = _as_fraction(slope)
    a = float(frac) if frac is not None else float(slope)
    if not 1.0 < a <= 2.0:
        raise InputError("tent slope must lie in (1,2], got %r" % (slope,))
    exact = (frac,) if frac is not None else None
    return SystemSpec("tent", 1, (a,), exact)


def toral_automorphism(m11, m12, m21, m22) -> SystemSpec:
    """(x,y) -> (m11 x + m12 y, m21 x + m22 y) mod 1 for an integer matrix with |det| = 1."""
    entries = (int(m11), int(m12), int(m21), int(m22))
    det = entries[0] * entries[3] - entries[1] * entries[2]
    if abs(det) != 1:
        raise InputError("toral matrix must have determinant +-1, got det=%d" % det)
    return SystemSpec("toral_automorphism", 2, entries, tuple(Fraction(e) for e in entries))


def cat_map() -> SystemSpec:
    return toral_automorphism(2, 1, 1, 1)


_FAMILY_CODE = {
    "circle_rotation": _kernels.ROTATION,
    "doubling": _kernels.DOUBLING,
    "north_south": _kernels.NORTH_SOUTH,
    "tent": _kernels.TENT,
}


def _family_par(spec):
    if spec.family == "circle_rotation":
        return spec.params[0]
    if spec.family == "doubling":
        return 0.0
    return spec.params[0]


def as_point(p, dimension):
    """Coerce scalars/sequences to a validated (d,) float array in [0,1)."""
    arr = np.atleast_1d(np.asarray(p, dtype=np.float64))
    if arr.shape != (dimension,):
        raise InputError("expected a point of dimension %d, got shape %r" % (dimension, arr.shape))
    if np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise InputError("coordinates must lie in [0,1), got %r" % (arr,))
    return arr


def evaluate_map(spec, p):
    """Apply the map once to a single point; returns a (d,) array."""
    pt = as_point(p, spec.dimension)
    return evaluate_map_batch(spec, pt[None, :])[0]


def evaluate_map_batch(spec, pts):
    """Apply the map once to points of shape (P, d); returns (P, d)."""
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != spec.dimension:
        raise InputError("expected points of shape (P, %d)" % spec.dimension)
    if spec.dimension == 1:
        out = _kernels.step_1d_numpy(_FAMILY_CODE[spec.family], _family_par(spec), pts[:, 0])
        return out[:, None]
    m11, m12, m21, m22 = spec.params
    return _kernels.step_2d_numpy(m11, m12, m21, m22, pts)


def metric(spec, p1, p2):
    """Wraparound max-metric between two points of the system's space."""
    a = as_point(p1, spec.dimension)
    b = as_point(p2, spec.dimension)
    d = np.abs(a - b)
    return float(np.max(np.minimum(d, 1.0 - d)))


def metric_pairwise(coords_a, coords_b):
    """Wraparound max-metric between rows of (P,d) and (Q,d) arrays; returns (P,Q)."""
    d = np.abs(coords_a[:, None, :] - coords_b[None, :, :])
    np.minimum(d, 1.0 - d, out=d)
    return d.max(axis=2)


def orbit(spec, p, n):
    """First n+1 orbit points of p under the map; returns shape (n+1, d)."""
    pt = as_point(p, spec.dimension)
    if n < 0:
        raise InputError("orbit length must be nonnegative")
    return orbit_batch(spec, pt[None, :], n)[:, 0, :]


def orbit_batch(spec, pts, n):
    """Orbits of several starting points at once; returns shape (n+1, P, d)."""
    pts = np.ascontiguousarray(np.asarray(pts, dtype=np.float64))
    if spec.dimension == 1:
        out = _kernels.orbit_batch_1d(_FAMILY_CODE[spec.family], _family_par(spec), pts[:, 0].copy(), n)
        return out[:, :, None]
    m11, m12, m21, m22 = (float(v) for v in spec.params)
    return _kernels.orbit_batch_2d(m11, m12, m21, m22, pts, n)


# ---------------------------------------------------------------------------
# exact rational backend


@dataclass(frozen=True)
class RationalPoint:
    """Exact point with Fraction coordinates in [0,1)."""

    coords: tuple

    def __post_init__(self):
        coords = tuple(Fraction(c) for c in self.coords)
        for c in coords:
            if not 0 <= c < 1:
                raise InputError("rational coordinates must lie in [0,1), got %s" % (c,))
        object.__setattr__(self, "coords", coords)

    @property
    def dimension(self):
        return len(self.coords)

    def as_floats(self):
        return np.array([float(c) for c in self.coords])


@dataclass(frozen=True)
class PeriodicOrbit:
    """One periodic orbit: its points in visiting order and its least period."""

    points: tuple
    period: int


def _exact_supported(spec):
    if spec.family in ("doubling", "toral_automorphism"):
        return True
    if spec.family in ("circle_rotation", "tent"):
        return spec.exact_params is not None
    return False


def exact_step(spec, rp):
    """One exact map step; only the algebraic families support this."""
    if not isinstance(rp, RationalPoint):
        raise InputError("exact_step expects a RationalPoint")
    if rp.dimension != spec.dimension:
        raise InputError("point dimension %d does not match system dimension %d" % (rp.dimension, spec.dimension))
    if not _exact_supported(spec):
        raise CapabilityError(
            "no exact backend for %s; use the float orbit or the transition-graph route" % spec.describe()
        )
    if spec.family == "circle_rotation":
        return RationalPoint(((rp.coords[0] + spec.exact_params[0]) % 1,))
    if spec.family == "doubling":
        return RationalPoint(((2 * rp.coords[0]) % 1,))
    if spec.family == "tent":
        x = rp.coords[0]
        return RationalPoint(((spec.exact_params[0] * min(x, 1 - x)) % 1,))
    m11, m12, m21, m22 = spec.exact_params
    x, y = rp.coords
    return RationalPoint(((m11 * x + m12 * y) % 1, (m21 * x + m22 * y) % 1))


def exact_orbit(spec, rp, n):
    """First n+1 exact orbit points; list of RationalPoint."""
    out = [rp]
    cur = rp
    for _ in range(n):
        cur = exact_step(spec, cur)
        out.append(cur)
    return out


def _orbit_of(spec, rp, cap):
    ## follow the exact orbit until it returns to its start; None if it does not
    ## close up within cap steps (then rp is not periodic with period <= cap)
    pts = [rp]
    cur = rp
    for _ in range(cap):
        cur = exact_step(spec, cur)
        if cur == rp:
            return pts
        pts.append(cur)
    return None


def _doubling_periodic(spec, max_period):
    seen = set()
    orbits = []
    for p in range(1, max_period + 1):
        den = 2**p - 1
        for k in range(den):
            pt = RationalPoint((Fraction(k, den),))
            if pt in seen:
                continue
            cycle = _orbit_of(spec, pt, p)
            if cycle is None:
                continue
            seen.update(cycle)
            if len(cycle) == p:
                orbits.append(PeriodicOrbit(tuple(cycle), p))
    return orbits


def _rotation_periodic(spec, max_period):
    q = spec.exact_params[0].denominator
    if q > max_period:
        return []
    ## every point is periodic with period q; report the canonical lattice
    ## orbit through 0, of which every other orbit is a translate
    start = RationalPoint((Fraction(0),))
    cycle = _orbit_of(spec, start, q)
    return [PeriodicOrbit(tuple(cycle), q)]


def _toral_periodic(spec, max_period):
    m11, m12, m21, m22 = (int(v) for v in spec.params)
    seen = set()
    orbits = []
    ap = np.eye(2, dtype=object)
    a = np.array([[m11, m12], [m21, m22]], dtype=object)
    for p in range(1, max_period + 1):
        ap = ap @ a
        m = ap - np.eye(2, dtype=object)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if det == 0:
            raise CapabilityError(
                "toral matrix has finite order: every point is periodic; use the transition-graph route"
            )
        ## solutions of (A^p - I)x = k, k integer, x in [0,1)^2: enumerate k
        ## over the image parallelogram's bounding box and invert exactly
        inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=object)
        corners = [inv @ np.array(c, dtype=object) for c in ((0, 0), (1, 0), (0, 1), (1, 1))]
        ## x = inv @ k / det must land in [0,1)^2, i.e. k in m @ [0,1)^2
        k_corners = [m @ np.array(c, dtype=object) for c in ((0, 0), (1, 0), (0, 1), (1, 1))]
        k0 = [min(c[i] for c in k_corners) for i in (0, 1)]
        k1 = [max(c[i] for c in k_corners) for i in (0, 1)]
        for ka in range(k0[0], k1[0] + 1):
            for kb in range(k0[1], k1[1] + 1):
                x = Fraction(inv[0, 0] * ka + inv[0, 1] * kb, det)
                y = Fraction(inv[1, 0] * ka + inv[1, 1] * kb, det)
                if not (0 <= x < 1 and 0 <= y < 1):
                    continue
                pt = RationalPoint((x % 1, y % 1))
                if pt in seen:
                    continue
                cycle = _orbit_of(spec, pt, p)
                if cycle is None:
                    continue
                seen.update(cycle)
                if len(cycle) == p:
                    orbits.append(PeriodicOrbit(tuple(cycle), p))
    return orbits


def periodic_orbits(spec, max_period):
    """All periodic orbits of least period <= max_period, exactly.

    Supported: doubling (period-p points are k/(2^p - 1)), hyperbolic toral
    automorphisms, and rotations by an exact rational p/q (for which every
    point has period q; the canonical lattice orbit through 0 is reported,
    every other orbit being a translate of it). Other families raise
    CapabilityError naming the graph fallback.
    """
    if max_period < 1:
        raise InputError("max_period must be >= 1")
    if spec.family == "doubling":
        return _doubling_periodic(spec, max_period)
    if spec.family == "toral_automorphism":
        return _toral_periodic(spec, max_period)
    if spec.family == "circle_rotation" and spec.exact_params is not None:
        return _rotation_periodic(spec, max_period)
    raise CapabilityError(
        "periodic_orbits has no exact backend for %s; fall back to minimal_invariant_sets "
        "on the transition graph" % spec.describe()
    )


def point_from_bits(bits):
    """Exact binary point 0.b1 b2 b3 ... as a Fraction, bits a string of 0/1."""
    num = 0
    for b in bits:
        num = (num << 1) | (1 if b == "1" else 0)
    return Fraction(num, 1 << len(bits))


# ---------------------------------------------------------------------------
# deterministic point sets


def equispaced_points(count, dimension):
    """count^dimension grid points (cell-center free, starts at 0)."""
    if dimension == 1:
        return (np.arange(count, dtype=np.float64) / count)[:, None]
    side = np.arange(count, dtype=np.float64) / count
    gx, gy = np.meshgrid(side, side, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


_KRONECKER_1D = 0.6180339887498949
_KRONECKER_2D = (0.7548776662466927, 0.5698402909980532)


def kronecker_points(count, dimension, seed=0):
    """Deterministic low-discrepancy points: fractional parts of j*alpha."""
    j = np.arange(1 + seed, count + 1 + seed, dtype=np.float64)
    if dimension == 1:
        return np.mod(j * _KRONECKER_1D, 1.0)[:, None]
    return np.column_stack([np.mod(j * _KRONECKER_2D[0], 1.0), np.mod(j * _KRONECKER_2D[1], 1.0)])


def systems_catalog():
    """Stable-ordered description of the bundled families for the CLI."""
    return [
        {
            "family": "circle_rotation",
            "dimension": 1,
            "params": {"alpha": "float or exact rational string in (0,1)"},
            "exact_backend": "rational alpha only",
            "description": "rotation w -> w + alpha mod 1",
        },
        {
            "family": "doubling",
            "dimension": 1,
            "params": {},
            "exact_backend": "yes",
            "description": "angle doubling w -> 2w mod 1",
        },
        {
            "family": "north_south",
            "dimension": 1,
            "params": {"kappa": "float in (0,1)"},
            "exact_backend": "no",
            "description": "w -> w + kappa*sin(2 pi w)/(2 pi); 0 repels, 1/2 attracts",
        },
        {
            "family": "tent",
            "dimension": 1,
            "params": {"slope": "float or exact rational string in (1,2]"},
            "exact_backend": "rational slope only",
            "description": "w -> slope*min(w, 1-w)",
        },
        {
            "family": "toral_automorphism",
            "dimension": 2,
            "params": {"matrix": "four integers m11,m12,m21,m22 with |det| = 1"},
            "exact_backend": "yes",
            "description": "integer matrix action on the 2-torus",
        },
    ]
