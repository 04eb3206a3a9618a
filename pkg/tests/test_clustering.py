"""Capacity-constrained clustering loops and the unconstrained baseline."""

import itertools

import numpy as np
import pytest

from otclust.clustering import (
    ClusteringConfig,
    clustering_objective,
    impm,
    kmeans_pp,
    update_centroids,
    vwc,
)
from otclust.diagram import TransportPlan, assign, cell_masses
from otclust.errors import DegenerateClusterError
from otclust.measures import CentroidSet, EmpiricalMeasure
from otclust.solver import SolverConfig


def _two_blobs(rng, per=40, spread=0.1):
    a = rng.normal((-2.0, 0.0), spread, size=(per, 2))
    b = rng.normal((2.0, 0.0), spread, size=(per, 2))
    return np.vstack([a, b])


def _balanced_pair_optimum(pts):
    """Enumerate all half/half splits; centroids sit at the part means."""
    n = pts.shape[0]
    best = np.inf
    for comb in itertools.combinations(range(n), n // 2):
        labels = np.zeros(n, dtype=int)
        labels[list(comb)] = 1
        cost = 0.0
        for lbl in (0, 1):
            part = pts[labels == lbl]
            cost += float(np.sum((part - part.mean(axis=0)) ** 2)) / n
        best = min(best, cost)
    return best


class TestClusteringObjective:
    """Weighted squared-distance cost of a plan."""

    def test_zero_when_sites_cover_samples(self):
        pts = np.array([[0.0, 0.0], [1.0, 2.0], [3.0, 1.0]])
        m = EmpiricalMeasure.uniform(pts)
        y = CentroidSet.with_uniform_capacities(pts)
        plan = TransportPlan(np.arange(3), 3)
        assert clustering_objective(m, y, plan) == 0.0

    def test_single_site_gives_weighted_variance(self):
        rng = np.random.default_rng(5)
        pts = rng.random((30, 3))
        wts = rng.random(30) + 0.1
        wts /= wts.sum()
        m = EmpiricalMeasure(pts, wts)
        mean = wts @ pts
        y = CentroidSet([mean], [1.0])
        plan = TransportPlan(np.zeros(30, dtype=int), 1)
        expected = float(np.sum(wts[:, None] * (pts - mean) ** 2))
        assert clustering_objective(m, y, plan) == pytest.approx(expected, rel=1e-12)

    def test_square_corners_to_side_midpoints(self):
        pts = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        m = EmpiricalMeasure.uniform(pts)
        y = CentroidSet([[0.0, 0.5], [1.0, 0.5]], [0.5, 0.5])
        plan = TransportPlan(np.array([0, 0, 1, 1]), 2)
        assert clustering_objective(m, y, plan) == pytest.approx(0.25, abs=1e-15)


class TestUpdateCentroids:
    """Weighted re-centering."""

    def test_singletons_land_on_their_samples(self):
        pts = np.array([[0.5, 2.0], [-1.0, 3.0]])
        m = EmpiricalMeasure.uniform(pts)
        out = update_centroids(m, TransportPlan(np.array([0, 1]), 2), 2)
        assert np.array_equal(out, pts)

    def test_uniform_pair_gives_midpoint(self):
        m = EmpiricalMeasure.uniform([[0.0, 0.0], [2.0, 4.0]])
        out = update_centroids(m, TransportPlan(np.array([0, 0]), 1), 1)
        assert np.allclose(out, [[1.0, 2.0]], atol=1e-15)

    def test_weights_shift_the_mean(self):
        m = EmpiricalMeasure([[0.0, 0.0], [4.0, 0.0]], [0.25, 0.75])
        out = update_centroids(m, TransportPlan(np.array([0, 0]), 1), 1)
        assert np.allclose(out, [[3.0, 0.0]], atol=1e-15)

    def test_empty_cluster_raises(self):
        m = EmpiricalMeasure.uniform([[0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(DegenerateClusterError):
            update_centroids(m, TransportPlan(np.array([0, 0]), 2), 2)

    def test_plan_size_mismatch_raises(self):
        m = EmpiricalMeasure.uniform([[0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(ValueError):
            update_centroids(m, TransportPlan(np.array([0, 0, 0]), 1), 1)


class TestImpm:
    """The alternating transport/re-centering loop."""

    def test_sites_on_atoms_is_a_fixed_point(self):
        rng = np.random.default_rng(11)
        pts = rng.random((6, 2))
        m = EmpiricalMeasure.uniform(pts)
        y0 = CentroidSet.with_uniform_capacities(pts)
        res = impm(m, y0)
        assert res.outer_iterations == 1
        # Sites never move, so the displacement rule fires in round one
        # (the plan-repeat rule needs a second round to compare against).
        assert res.termination == "displacement"
        assert res.objective_trace[-1] == pytest.approx(0.0, abs=1e-15)
        assert np.allclose(res.centroids.positions, pts, atol=1e-12)

    def test_recovers_two_separated_blobs(self):
        rng = np.random.default_rng(13)
        pts = _two_blobs(rng)
        m = EmpiricalMeasure.uniform(pts)
        y0 = CentroidSet.with_uniform_capacities([[-0.5, 0.3], [0.5, -0.3]])
        res = impm(m, y0, ClusteringConfig(solver=SolverConfig(max_iter=20000)))
        means = np.array([pts[:40].mean(axis=0), pts[40:].mean(axis=0)])
        got = res.centroids.positions[np.argsort(res.centroids.positions[:, 0])]
        assert np.max(np.abs(got - means)) < 1e-6

    def test_balanced_pair_stays_above_enumerated_optimum(self):
        rng = np.random.default_rng(2025)
        pts = rng.random((8, 2)) * 2.0 - 1.0
        m = EmpiricalMeasure.uniform(pts)
        opt = _balanced_pair_optimum(pts)
        finals = []
        for s in range(10):
            init = np.random.default_rng(100 + s).random((2, 2)) * 2.0 - 1.0
            y0 = CentroidSet.with_uniform_capacities(init)
            cfg = ClusteringConfig(solver=SolverConfig(max_iter=20000), seed=s)
            res = impm(m, y0, cfg)
            finals.append(res.objective_trace[-1])
            assert res.objective_trace[-1] >= opt - 1e-12
        assert min(finals) == pytest.approx(opt, abs=1e-9)

    def test_objective_trace_is_monotone(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            pts = rng.random((60, 2)) * 2.0 - 1.0
            m = EmpiricalMeasure.uniform(pts)
            idx = rng.choice(60, size=3, replace=False)
            y0 = CentroidSet.with_uniform_capacities(pts[idx])
            cfg = ClusteringConfig(solver=SolverConfig(max_iter=20000), seed=seed)
            res = impm(m, y0, cfg)
            trace = np.array(res.objective_trace)
            assert np.all(np.diff(trace) <= 1e-12)
            assert res.termination in ("plan-fixed-point", "displacement")
            assert res.outer_iterations < 200

    def test_final_masses_respect_capacities(self):
        rng = np.random.default_rng(17)
        pts = rng.random((200, 2))
        m = EmpiricalMeasure.uniform(pts)
        y0 = CentroidSet.with_uniform_capacities(pts[rng.choice(200, 5, replace=False)])
        cfg = ClusteringConfig(solver=SolverConfig(max_iter=50000))
        res = impm(m, y0, cfg)
        resid = float(np.max(np.abs(res.w - y0.capacities)))
        assert resid <= max(cfg.solver.epsilon, 1.01 / 200)
        assert np.allclose(cell_masses(res.plan, m), res.w, atol=1e-15)

    def test_deterministic_reruns(self):
        rng = np.random.default_rng(19)
        pts = rng.random((80, 2))
        m = EmpiricalMeasure.uniform(pts)
        y0 = CentroidSet.with_uniform_capacities(pts[:4])
        cfg = ClusteringConfig(solver=SolverConfig(max_iter=20000), seed=3)
        a = impm(m, y0, cfg)
        b = impm(m, y0, cfg)
        assert np.array_equal(a.centroids.positions, b.centroids.positions)
        assert a.plan == b.plan
        assert a.objective_trace == b.objective_trace
        assert np.array_equal(a.h, b.h)

    def test_w2_estimate_is_sqrt_of_final_objective(self):
        rng = np.random.default_rng(23)
        pts = rng.random((50, 2))
        m = EmpiricalMeasure.uniform(pts)
        y0 = CentroidSet.with_uniform_capacities(pts[:3])
        res = impm(m, y0, ClusteringConfig(solver=SolverConfig(max_iter=20000)))
        assert res.w2_estimate == pytest.approx(np.sqrt(res.objective_trace[-1]), rel=1e-15)


class TestVwc:
    """Front door: seeding, capacity defaults, and overrides."""

    def test_site_per_sample_reaches_zero_objective(self):
        rng = np.random.default_rng(29)
        pts = rng.random((7, 2))
        m = EmpiricalMeasure.uniform(pts)
        res = vwc(m, y0=pts.copy())
        assert res.objective_trace[-1] == pytest.approx(0.0, abs=1e-12)
        assert res.w2_estimate == pytest.approx(0.0, abs=1e-6)

    def test_requires_k_or_y0(self):
        m = EmpiricalMeasure.uniform(np.random.default_rng(1).random((10, 2)))
        with pytest.raises(ValueError):
            vwc(m)

    def test_k_seeding_is_deterministic(self):
        rng = np.random.default_rng(31)
        pts = rng.random((120, 2))
        m = EmpiricalMeasure.uniform(pts)
        cfg = ClusteringConfig(solver=SolverConfig(max_iter=50000), seed=9)
        a = vwc(m, 6, config=cfg)
        b = vwc(m, 6, config=cfg)
        assert np.array_equal(a.centroids.positions, b.centroids.positions)
        assert a.plan == b.plan

    def test_uniform_capacities_by_default(self):
        rng = np.random.default_rng(37)
        pts = rng.random((90, 2))
        m = EmpiricalMeasure.uniform(pts)
        res = vwc(m, 3, config=ClusteringConfig(solver=SolverConfig(max_iter=50000)))
        counts = np.bincount(res.plan.assignment, minlength=3)
        assert counts.tolist() == [30, 30, 30]
        assert np.allclose(res.centroids.capacities, 1.0 / 3.0, atol=1e-15)

    def test_centroid_set_capacities_are_honored(self):
        rng = np.random.default_rng(41)
        pts = rng.random((100, 2))
        m = EmpiricalMeasure.uniform(pts)
        y0 = CentroidSet([[0.3, 0.5], [0.7, 0.5]], [0.25, 0.75])
        res = vwc(m, y0=y0, config=ClusteringConfig(solver=SolverConfig(max_iter=50000)))
        counts = np.bincount(res.plan.assignment, minlength=2)
        assert counts.tolist() == [25, 75]

    def test_nu_overrides_uniform_default(self):
        rng = np.random.default_rng(43)
        pts = rng.random((80, 2))
        m = EmpiricalMeasure.uniform(pts)
        res = vwc(
            m,
            y0=np.array([[0.3, 0.5], [0.7, 0.5]]),
            nu=np.array([0.25, 0.75]),
            config=ClusteringConfig(solver=SolverConfig(max_iter=50000)),
        )
        counts = np.bincount(res.plan.assignment, minlength=2)
        assert counts.tolist() == [20, 60]

    def test_not_worse_than_converged_baseline_at_its_own_masses(self):
        # Seed the constrained loop at a converged unconstrained solution
        # with capacities set to its achieved masses: the transport plan is
        # then the nearest-site assignment, so the objective cannot regress.
        rng = np.random.default_rng(47)
        pts = np.vstack(
            [
                rng.normal((0.0, 0.0), 0.3, size=(50, 2)),
                rng.normal((3.0, 1.0), 0.3, size=(30, 2)),
                rng.normal((1.0, 3.0), 0.3, size=(40, 2)),
            ]
        )
        m = EmpiricalMeasure.uniform(pts)
        base = kmeans_pp(m, 3, seed=0)
        res = vwc(
            m,
            y0=base.centroids,
            config=ClusteringConfig(solver=SolverConfig(max_iter=50000)),
        )
        assert res.objective_trace[-1] <= base.objective_trace[-1] + 1e-12


class TestKmeansPp:
    """Unconstrained baseline."""

    def test_single_cluster_is_weighted_mean(self):
        rng = np.random.default_rng(53)
        pts = rng.random((25, 2))
        wts = rng.random(25) + 0.1
        wts /= wts.sum()
        m = EmpiricalMeasure(pts, wts)
        res = kmeans_pp(m, 1)
        assert np.allclose(res.centroids.positions[0], wts @ pts, atol=1e-12)
        expected = float(np.sum(wts[:, None] * (pts - wts @ pts) ** 2))
        assert res.objective_trace[-1] == pytest.approx(expected, rel=1e-12)

    def test_site_per_sample_reaches_zero(self):
        rng = np.random.default_rng(59)
        pts = rng.random((9, 2))
        m = EmpiricalMeasure.uniform(pts)
        res = kmeans_pp(m, 9)
        assert res.objective_trace[-1] == pytest.approx(0.0, abs=1e-15)

    def test_recovers_two_separated_blobs(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            pts = _two_blobs(rng, per=30)
            m = EmpiricalMeasure.uniform(pts)
            res = kmeans_pp(m, 2, seed=seed)
            means = np.array([pts[:30].mean(axis=0), pts[30:].mean(axis=0)])
            got = res.centroids.positions[np.argsort(res.centroids.positions[:, 0])]
            assert np.max(np.abs(got - means)) < 1e-6, f"seed {seed}"

    def test_deterministic_for_fixed_seed(self):
        rng = np.random.default_rng(61)
        pts = rng.random((100, 3))
        m = EmpiricalMeasure.uniform(pts)
        a = kmeans_pp(m, 4, seed=7)
        b = kmeans_pp(m, 4, seed=7)
        assert np.array_equal(a.centroids.positions, b.centroids.positions)
        assert a.plan == b.plan

    def test_k_bounds_are_enforced(self):
        m = EmpiricalMeasure.uniform(np.random.default_rng(2).random((5, 2)))
        with pytest.raises(ValueError):
            kmeans_pp(m, 0)
        with pytest.raises(ValueError):
            kmeans_pp(m, 6)

    def test_capacities_are_achieved_masses(self):
        rng = np.random.default_rng(67)
        pts = rng.random((70, 2))
        m = EmpiricalMeasure.uniform(pts)
        res = kmeans_pp(m, 4, seed=1)
        assert np.allclose(res.centroids.capacities, cell_masses(res.plan, m), atol=1e-15)
        assert res.centroids.capacities.sum() == pytest.approx(1.0, abs=1e-12)

    def test_offsets_reproduce_nearest_assignment(self):
        rng = np.random.default_rng(71)
        pts = rng.random((60, 2))
        m = EmpiricalMeasure.uniform(pts)
        res = kmeans_pp(m, 5, seed=2)
        replayed = assign(m, res.centroids, res.h)
        assert replayed == res.plan
        assert res.h[-1] == 0.0

    def test_monotone_objective_trace(self):
        rng = np.random.default_rng(73)
        pts = rng.random((150, 2))
        m = EmpiricalMeasure.uniform(pts)
        res = kmeans_pp(m, 6, seed=3)
        trace = np.array(res.objective_trace)
        assert np.all(np.diff(trace) <= 1e-12)
        assert res.termination == "assignment-fixed-point"
