"""Capacity-constrained clustering and the unconstrained baseline.

The constrained method alternates two moves that each lower the same
objective (weighted squared distance of samples to their assigned sites):
re-solve the capacity-balanced transport for fixed sites, then move every
site to the weighted mean of its assigned samples.  Because both moves
are monotone the objective trace never increases, and because the
assignment comes from a finite set the alternation reaches a fixed point
in finitely many rounds.
"""

from dataclasses import dataclass

import numpy as np

from otclust.diagram import TransportPlan, cell_masses
from otclust.errors import (
    DegenerateClusterError,
    InvalidMeasureError,
    NonConvergenceError,
)
from otclust.measures import CentroidSet, EmpiricalMeasure, total_cost, validate_pairing
from otclust.solver import SolverConfig, solve_vot, solve_vot_gd

_LLOYD_MAX_ITER = 300


@dataclass(frozen=True)
class ClusteringConfig:
    """Outer-loop knobs; ``solver`` configures the inner balancing solves.

    ``mode`` picks the inner solver ("gd" works in any dimension and is
    the default; "newton" needs 2D).  The outer loop stops when the plan
    repeats, when no site moves more than ``outer_tol``, or after
    ``outer_max_iter`` rounds.  ``seed`` drives initial site placement
    when only a count is given.
    """

    solver: SolverConfig = SolverConfig()
    mode: str = "gd"
    outer_tol: float = 1e-7
    outer_max_iter: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("gd", "newton"):
            raise ValueError(f"mode must be 'gd' or 'newton', got {self.mode!r}")
        if self.outer_tol <= 0.0:
            raise ValueError("outer_tol must be positive")
        if self.outer_max_iter < 1:
            raise ValueError("outer_max_iter must be positive")


@dataclass(frozen=True)
class ClusteringResult:
    """Final sites, plan, offsets, and the per-round objective history.

    ``w2_estimate`` is the square root of the final objective — the
    transport estimate of the 2-Wasserstein distance between the samples
    and the weighted sites.  ``termination`` records which stopping rule
    fired: "plan-fixed-point", "displacement", or "outer-iteration-cap".
    """

    centroids: CentroidSet
    plan: TransportPlan
    h: np.ndarray
    w: np.ndarray
    objective_trace: tuple
    w2_estimate: float
    outer_iterations: int
    termination: str


def clustering_objective(m, y, plan):
    """Weighted squared-distance cost of a plan (the clustering energy)."""
    return total_cost(m, y, plan, p=2)


def update_centroids(m, plan, k):
    """Weighted mean of each cluster's samples; the optimal re-centering.

    Raises :class:`DegenerateClusterError` when a cluster holds no mass —
    callers that want self-healing behavior should re-seed such clusters
    (the outer loops here do).
    """
    if plan.size != m.size:
        raise ValueError(f"plan covers {plan.size} samples, measure has {m.size}")
    masses = np.bincount(plan.assignment, weights=m.weights, minlength=k)
    if np.any(masses <= 0.0):
        empty = int(np.flatnonzero(masses <= 0.0)[0])
        raise DegenerateClusterError(f"cluster {empty} received no mass")
    cols = [
        np.bincount(plan.assignment, weights=m.weights * m.points[:, i], minlength=k)
        for i in range(m.dim)
    ]
    return np.column_stack(cols) / masses[:, None]


def _update_with_recovery(m, plan, positions_old):
    """Re-center clusters; empty ones are re-seeded at the costliest sample.

    "Costliest" means largest weighted squared distance to its currently
    assigned site, so a dying cluster reappears where the fit is worst.
    The same sample is never used twice and never duplicates another site.
    """
    k = positions_old.shape[0]
    masses = np.bincount(plan.assignment, weights=m.weights, minlength=k)
    sums = [
        np.bincount(plan.assignment, weights=m.weights * m.points[:, i], minlength=k)
        for i in range(m.dim)
    ]
    positions = np.column_stack(sums)
    filled = masses > 0.0
    positions[filled] /= masses[filled, None]
    if np.all(filled):
        return positions

    diffs = m.points - positions_old[plan.assignment]
    residual = m.weights * np.einsum("ij,ij->i", diffs, diffs)
    order = np.argsort(-residual, kind="stable")
    taken = {positions[j].tobytes() for j in np.flatnonzero(filled)}
    cursor = 0
    for j in np.flatnonzero(~filled):
        while cursor < order.size and m.points[order[cursor]].tobytes() in taken:
            cursor += 1
        if cursor >= order.size:
            raise DegenerateClusterError("not enough distinct samples to re-seed empty clusters")
        positions[j] = m.points[order[cursor]]
        taken.add(positions[j].tobytes())
        cursor += 1
    return positions


def _voronoi_offsets(positions):
    """Offsets that turn the score rule into nearest-site assignment."""
    h = -0.5 * np.sum(positions * positions, axis=1)
    h -= h[-1]
    h[-1] = 0.0
    return h


def impm(m, y0, config=None):
    """Alternate capacity-balanced transport with re-centering to a fixed point.

    Starts from the sites and capacities in ``y0`` and keeps capacities
    fixed throughout.  The inner solves are warm-started from the previous
    offsets.  Returns a :class:`ClusteringResult` whose objective trace is
    nonincreasing.
    """
    cfg = config if config is not None else ClusteringConfig()
    validate_pairing(m, y0)
    solve = solve_vot if cfg.mode == "newton" else solve_vot_gd
    nu = np.asarray(y0.capacities, dtype=np.float64)
    positions = np.array(y0.positions, dtype=np.float64, copy=True)
    # Round one starts from the nearest-site partition (offsets -|y|^2/2 up
    # to the gauge pin).  Zero offsets would hand nearly all samples to the
    # most outward sites, which costs thousands of extra balancing steps.
    h = _voronoi_offsets(positions)
    accepted_plan = None
    trace = []
    termination = "outer-iteration-cap"
    outer_done = 0

    for outer in range(1, cfg.outer_max_iter + 1):
        sites = CentroidSet(positions, nu)
        try:
            result = solve(m, sites, cfg.solver, h0=h)
        except NonConvergenceError as err:
            # A warm start can inherit a boundary-degenerate offset pattern
            # from the previous round and park the descent there.  The
            # nearest-site initialization walks a fresh trajectory, so give
            # the round one cold attempt before giving up.
            cold = _voronoi_offsets(positions)
            if np.array_equal(cold, h):
                raise NonConvergenceError(
                    f"inner solve failed at outer round {outer}: {err}",
                    state=err.state,
                ) from err
            try:
                result = solve(m, sites, cfg.solver, h0=cold)
            except NonConvergenceError as err2:
                raise NonConvergenceError(
                    f"inner solve failed at outer round {outer}: {err2}",
                    state=err2.state,
                ) from err2
        h = result.h
        candidate = result.plan
        outer_done = outer

        if accepted_plan is not None:
            repeat = candidate == accepted_plan
            if not repeat:
                # Never let an approximate inner solve push the objective
                # up: keep the previous plan instead.  Deterministic
                # solves would then repeat forever, so this is a fixed
                # point too.
                if clustering_objective(m, sites, candidate) > trace[-1]:
                    repeat = True
            if repeat:
                termination = "plan-fixed-point"
                trace.append(trace[-1])
                break

        new_positions = _update_with_recovery(m, candidate, positions)
        displacement = float(np.max(np.linalg.norm(new_positions - positions, axis=1)))
        # Carry the offsets across the re-centering as power weights
        # (h + |y|^2/2), which keeps the cell boundaries in place while the
        # sites move: a far better warm start than the raw offsets when the
        # early rounds still displace sites a lot.
        h = h + 0.5 * (
            np.sum(positions * positions, axis=1)
            - np.sum(new_positions * new_positions, axis=1)
        )
        h -= h[-1]
        h[-1] = 0.0
        positions = new_positions
        trace.append(clustering_objective(m, CentroidSet(positions, nu), candidate))
        accepted_plan = candidate
        if displacement < cfg.outer_tol:
            termination = "displacement"
            break

    final_sites = CentroidSet(positions, nu)
    final_value = trace[-1]
    return ClusteringResult(
        centroids=final_sites,
        plan=accepted_plan,
        h=h,
        w=cell_masses(accepted_plan, m),
        objective_trace=tuple(trace),
        w2_estimate=float(np.sqrt(final_value)),
        outer_iterations=outer_done,
        termination=termination,
    )


def vwc(m, k=None, y0=None, config=None, nu=None):
    """Capacity-constrained clustering with free initialization.

    Give either a site count ``k`` (sites seeded by the weighted
    furthest-point rule with ``config.seed``) or explicit ``y0`` (a
    :class:`CentroidSet`, whose capacities are used, or a bare position
    array).  ``nu`` overrides the capacities; the default is uniform —
    every site must absorb an equal share of the total mass.
    """
    cfg = config if config is not None else ClusteringConfig()
    if y0 is None:
        if k is None:
            raise ValueError("provide either k or y0")
        rng = np.random.default_rng(cfg.seed)
        positions = _seed_positions(m, k, rng)
    elif isinstance(y0, CentroidSet):
        positions = y0.positions
        if nu is None:
            nu = y0.capacities
    else:
        positions = np.ascontiguousarray(y0, dtype=np.float64)
        if positions.ndim != 2:
            raise ValueError(f"y0 positions must be (k, dim), got shape {positions.shape}")
    count = positions.shape[0]
    if nu is None:
        nu = np.full(count, m.total_mass / count)
    return impm(m, CentroidSet(positions, nu), cfg)


def kmeans_pp(m, k, seed=0):
    """Unconstrained weighted k-means baseline (greedy seeding + re-centering).

    No capacity constraint: cluster masses land wherever the local optimum
    puts them.  The returned centroid set carries those achieved masses as
    its capacities, and the offsets are chosen so the power-score rule
    reproduces plain nearest-centroid assignment.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if k > m.size:
        raise ValueError(f"k={k} exceeds the sample count {m.size}")
    rng = np.random.default_rng(seed)
    positions = _seed_positions(m, k, rng)
    labels = _nearest_labels(m.points, positions)
    trace = []
    termination = "iteration-cap"
    for _ in range(_LLOYD_MAX_ITER):
        plan = TransportPlan(labels, k)
        had_empty = np.any(np.bincount(labels, minlength=k) == 0)
        positions = _update_with_recovery(m, plan, positions)
        new_labels = _nearest_labels(m.points, positions)
        trace.append(_objective_raw(m, positions, new_labels))
        if not had_empty and np.array_equal(new_labels, labels):
            termination = "assignment-fixed-point"
            break
        labels = new_labels

    plan = TransportPlan(labels, k)
    masses = cell_masses(plan, m)
    centroids = CentroidSet(positions, masses)
    h = -0.5 * np.sum(positions * positions, axis=1)
    h = h - h[-1]
    final_value = trace[-1]
    return ClusteringResult(
        centroids=centroids,
        plan=plan,
        h=h,
        w=masses,
        objective_trace=tuple(trace),
        w2_estimate=float(np.sqrt(final_value)),
        outer_iterations=len(trace),
        termination=termination,
    )


def _seed_positions(m, k, rng):
    """Weighted greedy seeding: masses times squared distance drive picks."""
    if k < 1:
        raise ValueError("k must be positive")
    total = m.total_mass
    base = m.weights / total
    first = int(rng.choice(m.size, p=base))
    chosen = [first]
    d2 = np.sum((m.points - m.points[first]) ** 2, axis=1)
    for _ in range(1, k):
        scores = base * d2
        norm = float(scores.sum())
        if norm <= 0.0:
            raise InvalidMeasureError(f"fewer than {k} distinct sample locations")
        idx = int(rng.choice(m.size, p=scores / norm))
        chosen.append(idx)
        d2 = np.minimum(d2, np.sum((m.points - m.points[idx]) ** 2, axis=1))
    return np.array(m.points[chosen], dtype=np.float64, copy=True)


def _nearest_labels(points, positions):
    """Plain nearest-site labels; ties go to the smallest index."""
    scores = points @ positions.T
    scores *= 2.0
    scores -= np.sum(positions * positions, axis=1)[None, :]
    return np.argmax(scores, axis=1).astype(np.int64)


def _objective_raw(m, positions, labels):
    diffs = m.points - positions[labels]
    return float(np.sum(m.weights * np.einsum("ij,ij->i", diffs, diffs)))
