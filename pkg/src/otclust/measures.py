"""Weighted point measures, centroid sets, domains, and measure arithmetic.

An :class:`EmpiricalMeasure` is the dense side of the transport problem
(many weighted samples); a :class:`CentroidSet` is the sparse side (few
sites with prescribed capacities).  Both are immutable after construction
and safe to share across threads.
"""

from dataclasses import dataclass, field

import numpy as np

from otclust.errors import InvalidMeasureError
from otclust.geometry import is_convex_ccw, polygon_area

MASS_TOL = 1e-9  # capacities must match total mass this closely


def _frozen_f64(a, name, ndim):
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim != ndim:
        raise InvalidMeasureError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMeasureError(f"{name} contains non-finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Weighted point set: ``points`` is (n, dim), ``weights`` is (n,) > 0."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen_f64(self.points, "points", 2))
        object.__setattr__(self, "weights", _frozen_f64(self.weights, "weights", 1))
        if self.points.shape[0] == 0:
            raise InvalidMeasureError("measure needs at least one point")
        if self.points.shape[1] < 1:
            raise InvalidMeasureError("points need at least one coordinate")
        if self.weights.shape[0] != self.points.shape[0]:
            raise InvalidMeasureError(
                f"{self.weights.shape[0]} weights for {self.points.shape[0]} points"
            )
        if np.any(self.weights <= 0.0):
            raise InvalidMeasureError("all weights must be strictly positive")

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def size(self):
        return self.points.shape[0]

    @property
    def total_mass(self):
        return float(np.sum(self.weights))

    @classmethod
    def uniform(cls, points):
        """Measure with equal weight 1/n on each point."""
        pts = np.asarray(points, dtype=np.float64)
        n = pts.shape[0]
        return cls(pts, np.full(n, 1.0 / n))


@dataclass(frozen=True)
class CentroidSet:
    """Sparse target: ``positions`` is (k, dim), ``capacities`` is (k,) > 0.

    Capacities are the prescribed masses each site must absorb; they are
    validated against the paired measure's total mass at solve time.
    """

    positions: np.ndarray
    capacities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "positions", _frozen_f64(self.positions, "positions", 2))
        object.__setattr__(self, "capacities", _frozen_f64(self.capacities, "capacities", 1))
        if self.positions.shape[0] == 0:
            raise InvalidMeasureError("centroid set needs at least one site")
        if self.capacities.shape[0] != self.positions.shape[0]:
            raise InvalidMeasureError(
                f"{self.capacities.shape[0]} capacities for {self.positions.shape[0]} sites"
            )
        if np.any(self.capacities <= 0.0):
            raise InvalidMeasureError("all capacities must be strictly positive")
        seen = set()
        for row in self.positions:
            key = row.tobytes()
            if key in seen:
                raise InvalidMeasureError("centroid positions must be pairwise distinct")
            seen.add(key)

    @property
    def dim(self):
        return self.positions.shape[1]

    @property
    def k(self):
        return self.positions.shape[0]

    @classmethod
    def with_uniform_capacities(cls, positions):
        pos = np.asarray(positions, dtype=np.float64)
        k = pos.shape[0]
        return cls(pos, np.full(k, 1.0 / k))


@dataclass(frozen=True)
class Domain:
    """Support region of the dense measure.

    ``kind`` is one of ``convex-polygon-2d`` (CCW vertex list),
    ``axis-box`` (lo/hi per axis, any dimension), or ``discrete`` (no
    geometry, the measure's own atoms are the support).  ``density`` is
    ``uniform`` for geometric kinds and ``empirical`` for discrete.
    """

    kind: str
    density: str = "uniform"
    vertices: np.ndarray | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "convex-polygon-2d":
            verts = _frozen_f64(self.vertices, "vertices", 2)
            if verts.shape[1] != 2 or verts.shape[0] < 3:
                raise ValueError("polygon domain needs >= 3 two-dimensional vertices")
            if not is_convex_ccw([tuple(v) for v in verts]):
                raise ValueError("polygon domain must be convex and counterclockwise")
            object.__setattr__(self, "vertices", verts)
        elif self.kind == "axis-box":
            lo = _frozen_f64(self.lo, "lo", 1)
            hi = _frozen_f64(self.hi, "hi", 1)
            if lo.shape != hi.shape or np.any(lo >= hi):
                raise ValueError("axis box needs lo < hi per axis")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        elif self.kind == "discrete":
            if self.density != "empirical":
                raise ValueError("discrete domains are empirical by definition")
        else:
            raise ValueError(f"unknown domain kind: {self.kind!r}")

    @classmethod
    def polygon(cls, vertices):
        return cls(kind="convex-polygon-2d", vertices=np.asarray(vertices, dtype=np.float64))

    @classmethod
    def box(cls, lo, hi):
        return cls(kind="axis-box", lo=np.asarray(lo, np.float64), hi=np.asarray(hi, np.float64))

    @classmethod
    def unit_square(cls):
        return cls.polygon([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])

    @classmethod
    def discrete(cls):
        return cls(kind="discrete", density="empirical")

    def polygon_vertices(self):
        """Vertex tuples of the 2D region (boxes are converted)."""
        if self.kind == "convex-polygon-2d":
            return [tuple(v) for v in self.vertices]
        if self.kind == "axis-box" and self.lo.shape[0] == 2:
            (x0, y0), (x1, y1) = self.lo, self.hi
            return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        raise ValueError("domain has no 2D polygon geometry")

    @property
    def area(self):
        if self.kind == "axis-box":
            return float(np.prod(self.hi - self.lo))
        return polygon_area(self.polygon_vertices())

    @property
    def diameter(self):
        """Largest point-to-point extent; used to scale solver steps."""
        if self.kind == "axis-box":
            return float(np.linalg.norm(self.hi - self.lo))
        if self.kind == "convex-polygon-2d":
            v = self.vertices
            d2 = np.sum((v[:, None, :] - v[None, :, :]) ** 2, axis=-1)
            return float(np.sqrt(d2.max()))
        raise ValueError("discrete domain has no intrinsic diameter")


def bounding_domain(points, margin=0.05):
    """Axis box around the points, inflated by ``margin`` of the extent."""
    pts = np.asarray(points, dtype=np.float64)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    pad = (hi - lo) * margin
    pad = np.where(pad > 0, pad, 1e-6 + np.abs(lo) * 1e-9 + margin)
    return Domain.box(lo - pad, hi + pad)


def normalize(m: EmpiricalMeasure) -> EmpiricalMeasure:
    """Rescale weights to total mass one; points untouched.

    Raises :class:`InvalidMeasureError` when the total mass is not
    strictly positive.  Idempotent: already-normalized measures come back
    unchanged (same weight values).
    """
    total = float(np.sum(m.weights))
    if not np.isfinite(total) or total <= 0.0:
        raise InvalidMeasureError(f"total mass must be positive, got {total}")
    # Rescaled weights re-sum to 1 only up to round-off, so treat that
    # round-off band as already normalized; a second call is then a no-op.
    if abs(total - 1.0) <= 1e-12:
        return m
    return EmpiricalMeasure(m.points, m.weights / total)


def blend_measures(a, c, lam):
    """Convex combination ``(1 - lam) * a + lam * c`` of two weight vectors.

    Both inputs must be normalized to total mass one and of equal length;
    ``lam`` must lie in [0, 1].  The result is again a probability vector.
    """
    av = np.asarray(a, dtype=np.float64)
    cv = np.asarray(c, dtype=np.float64)
    if av.shape != cv.shape or av.ndim != 1:
        raise InvalidMeasureError(f"weight lists differ in shape: {av.shape} vs {cv.shape}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"blend coefficient must be in [0, 1], got {lam}")
    for name, vec in (("first", av), ("second", cv)):
        if abs(float(np.sum(vec)) - 1.0) > MASS_TOL:
            raise InvalidMeasureError(f"{name} weight list is not normalized")
    return (1.0 - lam) * av + lam * cv


def total_cost(m: EmpiricalMeasure, y: CentroidSet, plan, p=2):
    """Transport cost of a given plan: ``sum_i w_i * ||x_i - y_plan(i)||^p``.

    This is the cost of the plan as stated, not the optimal cost; at the
    optimum its ``p``-th root is the p-Wasserstein distance.
    """
    a = np.asarray(plan.assignment)
    if a.shape[0] != m.size:
        raise ValueError(f"plan covers {a.shape[0]} samples, measure has {m.size}")
    if a.size and (a.min() < 0 or a.max() >= y.k):
        raise ValueError("plan references a centroid index out of range")
    diffs = m.points - y.positions[a]
    dist = np.linalg.norm(diffs, axis=1)
    return float(np.sum(m.weights * dist**p))


def validate_pairing(m: EmpiricalMeasure, y: CentroidSet):
    """Check the transport problem is well-posed: equal dims, equal mass."""
    if m.dim != y.dim:
        raise InvalidMeasureError(f"dimension mismatch: measure {m.dim}, centroids {y.dim}")
    gap = abs(m.total_mass - float(np.sum(y.capacities)))
    if gap > MASS_TOL:
        raise InvalidMeasureError(
            f"capacities must sum to the measure's total mass (off by {gap:.3e})"
        )
