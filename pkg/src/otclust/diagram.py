"""Additively weighted (power) diagrams over convex 2D domains.

Each site j with offset h_j owns the region where its affine score
``<x, y_j> + h_j`` beats every other site's.  Cell boundaries are straight
lines, so each cell is the domain clipped by k-1 half-planes.  Shared
boundary segments ("facets") carry the pair of sites that generate them;
their lengths drive the curvature matrix of the balancing solvers.
"""

from dataclasses import dataclass

import numpy as np

from otclust.errors import DegenerateConfigurationError, UnsupportedModeError
from otclust.geometry import (
    DOMAIN_EDGE,
    clip_halfplane,
    polygon_area,
    polygon_centroid,
    segment_length,
)
from otclust.kernels import assign_and_masses

FACET_DROP_TOL = 1e-12  # facets shorter than this are treated as absent


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Unsplit sample-to-site map: ``assignment[i]`` is sample i's site.

    Every sample is sent whole to exactly one of ``k`` sites, so the plan
    together with the sample weights induces the per-site masses.
    """

    assignment: np.ndarray
    k: int

    def __post_init__(self):
        a = np.ascontiguousarray(self.assignment, dtype=np.int64)
        if a.ndim != 1:
            raise ValueError(f"assignment must be one index per sample, got shape {a.shape}")
        if self.k < 1:
            raise ValueError("plan needs at least one site")
        if a.size and (a.min() < 0 or a.max() >= self.k):
            raise ValueError(f"assignment indices must lie in [0, {self.k})")
        a.flags.writeable = False
        object.__setattr__(self, "assignment", a)

    @property
    def size(self):
        return self.assignment.shape[0]

    def __eq__(self, other):
        if not isinstance(other, TransportPlan):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.assignment, other.assignment)

    def __hash__(self):
        return hash((self.k, self.assignment.tobytes()))


def assign(m, y, h):
    """Send each sample to its best site under score ``<x, y_j> + h_j``.

    Ties go to the smallest site index, making the map deterministic.
    """
    off = np.ascontiguousarray(h, dtype=np.float64)
    if off.shape != (y.k,):
        raise ValueError(f"expected {y.k} offsets, got shape {off.shape}")
    if not np.all(np.isfinite(off)):
        raise ValueError("offsets must be finite")
    if m.dim != y.dim:
        raise ValueError(f"dimension mismatch: samples {m.dim}, sites {y.dim}")
    labels, _, _ = assign_and_masses(m.points, m.weights, y.positions, off)
    return TransportPlan(labels, y.k)


def cell_masses(plan, m):
    """Mass absorbed by each site: ``w_j = sum of weights assigned to j``."""
    if plan.size != m.size:
        raise ValueError(f"plan covers {plan.size} samples, measure has {m.size}")
    return np.bincount(plan.assignment, weights=m.weights, minlength=plan.k)


def cell_masses_continuous(diagram, domain):
    """Cell masses under uniform density: ``w_j = area(cell_j) / area``."""
    if domain.kind == "discrete":
        raise UnsupportedModeError("a discrete domain has no cell areas; use cell_masses")
    return diagram.areas() / domain.area


@dataclass(frozen=True)
class PowerCell:
    """One site's region: CCW vertices plus the neighbor behind each edge.

    ``edge_neighbors[t]`` labels the edge from ``vertices[t]`` to
    ``vertices[t+1]``: a site index, or ``DOMAIN_EDGE`` (-1) for a stretch
    of the domain boundary.  Empty cells have no vertices and area zero.
    """

    index: int
    vertices: tuple
    edge_neighbors: tuple
    area: float
    centroid: tuple | None

    @property
    def is_empty(self):
        return self.area <= 0.0


@dataclass(frozen=True)
class PowerDiagram:
    """All cells of one (positions, offsets) configuration.

    ``facets`` maps unordered site pairs ``(i, j)`` with ``i < j`` to
    boundary length; ``facet_segments`` maps the same pairs to the actual
    segments, used for local density estimates on sampled measures.  Each
    pair is measured once (from the lower-index cell) so the two sides of
    a wall agree exactly.
    """

    positions: np.ndarray
    offsets: np.ndarray
    cells: tuple
    facets: dict
    facet_segments: dict

    @property
    def k(self):
        return self.positions.shape[0]

    def areas(self):
        return np.array([c.area for c in self.cells], dtype=np.float64)

    def centroids(self):
        """(k, 2) cell centroids; empty cells fall back to their site."""
        out = np.array(self.positions, dtype=np.float64, copy=True)
        for c in self.cells:
            if c.centroid is not None:
                out[c.index] = c.centroid
        return out

    def neighbor_pairs(self):
        return sorted(self.facets.keys())


def power_radius_sq(positions, offsets):
    """Squared power radius ``|y_j|^2 + 2 h_j`` per site (may be negative)."""
    pos = np.asarray(positions, dtype=np.float64)
    off = np.asarray(offsets, dtype=np.float64)
    return np.sum(pos * pos, axis=1) + 2.0 * off


def build_power_diagram_2d(y, h, domain):
    """Cell geometry for a site set: thin wrapper over :func:`power_diagram`."""
    return power_diagram(y.positions, h, domain)


def power_diagram(positions, offsets, domain):
    """Clip every site's cell out of ``domain``.

    ``positions`` is (k, 2), ``offsets`` is (k,); the domain must expose
    2D polygon geometry.  Runs in O(k^2) clip operations, which is the
    regime the curvature-based solver lives in (k small).
    """
    pos = np.asarray(positions, dtype=np.float64)
    off = np.asarray(offsets, dtype=np.float64)
    if pos.ndim != 2 or pos.shape[1] != 2:
        raise DegenerateConfigurationError(
            f"cell geometry needs 2D sites, got shape {pos.shape}"
        )
    if off.shape != (pos.shape[0],):
        raise DegenerateConfigurationError(
            f"{off.shape} offsets for {pos.shape[0]} sites"
        )
    base_verts = domain.polygon_vertices()
    base_labels = [DOMAIN_EDGE] * len(base_verts)
    k = pos.shape[0]

    cells = []
    canon = {}   # facet data measured from the lower-index cell
    mirror = {}  # fallback: seen only from the higher-index cell
    for j in range(k):
        verts = list(base_verts)
        labels = list(base_labels)
        for i in range(k):
            if i == j:
                continue
            ax = pos[j, 0] - pos[i, 0]
            ay = pos[j, 1] - pos[i, 1]
            b = off[i] - off[j]
            verts, labels = clip_halfplane(verts, labels, ax, ay, b, i)
            if not verts:
                break
        if len(verts) < 3:
            cells.append(PowerCell(j, (), (), 0.0, None))
            continue
        area = polygon_area(verts)
        centroid = polygon_centroid(verts) if area > 0.0 else None
        cells.append(PowerCell(j, tuple(verts), tuple(labels), area, centroid))
        n = len(verts)
        for t in range(n):
            i = labels[t]
            if i < 0:
                continue
            seg = (verts[t], verts[(t + 1) % n])
            length = segment_length(*seg)
            if length <= 0.0:
                continue
            pair = (j, i) if j < i else (i, j)
            # canonical side of a wall is the lower-index cell's copy
            store = canon if j == pair[0] else mirror
            entry = store.setdefault(pair, [0.0, []])
            entry[0] += length
            entry[1].append(seg)

    facets = {}
    segments = {}
    for pair, (length, segs) in canon.items():
        if length >= FACET_DROP_TOL:
            facets[pair] = length
            segments[pair] = tuple(segs)
    for pair, (length, segs) in mirror.items():
        if pair not in canon and length >= FACET_DROP_TOL:
            facets[pair] = length
            segments[pair] = tuple(segs)

    return PowerDiagram(
        positions=pos,
        offsets=off,
        cells=tuple(cells),
        facets=facets,
        facet_segments=segments,
    )


def curvature_matrix(diagram, densities):
    """Second-derivative matrix of the balancing energy.

    ``densities[(i, j)]`` is the mass density along facet ``(i, j)``
    (constant rho in the uniform case, a local estimate on sampled data).
    Entry (i, j) is ``-density * facet_length / |y_j - y_i|``; diagonals
    make rows sum to zero, so the matrix is a weighted graph Laplacian:
    symmetric, positive semidefinite, with the constant vector in its
    null space.
    """
    k = diagram.k
    pos = diagram.positions
    H = np.zeros((k, k), dtype=np.float64)
    for (i, j), length in diagram.facets.items():
        gap = float(np.linalg.norm(pos[j] - pos[i]))
        if gap <= 0.0:
            raise DegenerateConfigurationError(f"coincident sites {i} and {j}")
        val = densities[(i, j)] * length / gap
        H[i, j] = -val
        H[j, i] = -val
        H[i, i] += val
        H[j, j] += val
    return H


def uniform_facet_densities(diagram, rho):
    """Constant density for every facet (uniform measures)."""
    return {pair: rho for pair in diagram.facets}


def empirical_facet_densities(diagram, points, weights, band):
    """Local mass density of a sampled measure along each facet.

    Estimates density as (weight within distance ``band`` of the facet's
    segments) / (2 * band * facet length): the mass of a band-shaped
    neighborhood divided by its area.  Facets in sample-free regions get
    density zero, which correctly flattens the curvature there.
    """
    pts = np.asarray(points, dtype=np.float64)
    wts = np.asarray(weights, dtype=np.float64)
    out = {}
    for pair, segs in diagram.facet_segments.items():
        total_len = diagram.facets[pair]
        near = np.zeros(pts.shape[0], dtype=bool)
        for (px, py), (qx, qy) in segs:
            dx = qx - px
            dy = qy - py
            denom = dx * dx + dy * dy
            if denom <= 0.0:
                continue
            t = ((pts[:, 0] - px) * dx + (pts[:, 1] - py) * dy) / denom
            t = np.clip(t, 0.0, 1.0)
            ex = pts[:, 0] - (px + t * dx)
            ey = pts[:, 1] - (py + t * dy)
            near |= ex * ex + ey * ey <= band * band
        mass = float(np.sum(wts[near]))
        out[pair] = mass / (2.0 * band * total_len)
    return out
