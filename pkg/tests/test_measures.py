"""Measure types, normalization, blending, and plan-cost bookkeeping."""

import numpy as np
import pytest

from otclust.diagram import TransportPlan
from otclust.errors import InvalidMeasureError
from otclust.measures import (
    CentroidSet,
    Domain,
    EmpiricalMeasure,
    blend_measures,
    bounding_domain,
    normalize,
    total_cost,
    validate_pairing,
)


class TestEmpiricalMeasure:
    """Construction rules and derived properties of weighted point sets."""

    def test_basic_fields(self):
        m = EmpiricalMeasure([[0.0, 0.0], [1.0, 2.0]], [0.25, 0.75])
        assert m.dim == 2
        assert m.size == 2
        assert m.total_mass == pytest.approx(1.0)

    def test_uniform_constructor(self):
        m = EmpiricalMeasure.uniform(np.zeros((4, 3)) + np.arange(4)[:, None])
        assert np.array_equal(m.weights, np.full(4, 0.25))
        assert m.dim == 3

    def test_weight_count_must_match(self):
        with pytest.raises(InvalidMeasureError):
            EmpiricalMeasure([[0.0], [1.0]], [1.0])

    def test_weights_must_be_positive(self):
        with pytest.raises(InvalidMeasureError):
            EmpiricalMeasure([[0.0], [1.0]], [1.0, 0.0])
        with pytest.raises(InvalidMeasureError):
            EmpiricalMeasure([[0.0], [1.0]], [1.0, -0.5])

    def test_rejects_empty_and_non_finite(self):
        with pytest.raises(InvalidMeasureError):
            EmpiricalMeasure(np.zeros((0, 2)), np.zeros(0))
        with pytest.raises(InvalidMeasureError):
            EmpiricalMeasure([[np.nan, 0.0]], [1.0])

    def test_arrays_are_frozen(self):
        m = EmpiricalMeasure([[0.0, 1.0]], [1.0])
        with pytest.raises(ValueError):
            m.points[0, 0] = 5.0
        with pytest.raises(ValueError):
            m.weights[0] = 2.0


class TestNormalize:
    """Weights rescale to total mass one; points never move."""

    def test_two_equal_weights(self):
        m = normalize(EmpiricalMeasure([[0.0], [1.0]], [2.0, 2.0]))
        assert np.array_equal(m.weights, [0.5, 0.5])

    def test_singleton_already_normalized(self):
        m = EmpiricalMeasure([[3.0]], [1.0])
        assert normalize(m) is m

    def test_division_by_total(self):
        m = normalize(EmpiricalMeasure([[0.0], [1.0], [2.0]], [1.0, 2.0, 5.0]))
        assert np.allclose(m.weights, [0.125, 0.25, 0.625], rtol=0, atol=1e-15)

    def test_idempotent_exactly(self):
        rng = np.random.default_rng(5)
        m = EmpiricalMeasure(rng.random((7, 2)), rng.random(7) + 0.1)
        once = normalize(m)
        twice = normalize(once)
        assert np.array_equal(once.weights, twice.weights)

    def test_sum_and_proportions(self):
        rng = np.random.default_rng(11)
        w = rng.random(20) + 0.05
        m = normalize(EmpiricalMeasure(rng.random((20, 3)), w))
        assert abs(float(np.sum(m.weights)) - 1.0) <= 1e-12
        assert np.allclose(m.weights / m.weights[0], w / w[0], rtol=1e-12)
        assert np.array_equal(m.points, m.points)


class TestBlendMeasures:
    """Convex combinations of two normalized weight vectors."""

    def test_endpoint_zero_returns_first(self):
        out = blend_measures([0.3, 0.7], [0.9, 0.1], 0.0)
        assert np.array_equal(out, [0.3, 0.7])

    def test_endpoint_one_returns_second(self):
        out = blend_measures([0.3, 0.7], [0.9, 0.1], 1.0)
        assert np.array_equal(out, [0.9, 0.1])

    def test_interior_combination(self):
        out = blend_measures([0.5, 0.5], [1.0, 0.0], 0.6)
        assert np.allclose(out, [0.8, 0.2], rtol=0, atol=1e-15)

    def test_output_is_probability_vector(self):
        rng = np.random.default_rng(3)
        a = rng.random(6)
        a /= a.sum()
        c = rng.random(6)
        c /= c.sum()
        for lam in np.linspace(0.0, 1.0, 9):
            out = blend_measures(a, c, float(lam))
            assert abs(float(np.sum(out)) - 1.0) <= 1e-12
            assert np.all(out >= 0.0)

    def test_length_mismatch_rejected(self):
        with pytest.raises(InvalidMeasureError):
            blend_measures([1.0], [0.5, 0.5], 0.5)

    def test_coefficient_range_enforced(self):
        with pytest.raises(ValueError):
            blend_measures([0.5, 0.5], [0.5, 0.5], 1.5)
        with pytest.raises(ValueError):
            blend_measures([0.5, 0.5], [0.5, 0.5], -0.1)

    def test_unnormalized_input_rejected(self):
        with pytest.raises(InvalidMeasureError):
            blend_measures([0.5, 0.6], [0.5, 0.5], 0.5)


class TestTotalCost:
    """Cost of a stated plan: weighted p-th powers of sample-site gaps."""

    def test_zero_at_coincident_site(self):
        m = EmpiricalMeasure([[2.0, 3.0]], [1.0])
        y = CentroidSet([[2.0, 3.0]], [1.0])
        plan = TransportPlan([0], 1)
        assert total_cost(m, y, plan) == 0.0

    def test_single_squared_distance(self):
        m = EmpiricalMeasure([[0.0, 0.0]], [1.0])
        y = CentroidSet([[3.0, 4.0]], [1.0])
        plan = TransportPlan([0], 1)
        assert total_cost(m, y, plan, p=2) == pytest.approx(25.0, abs=1e-12)

    def test_two_samples_one_site(self):
        m = EmpiricalMeasure([[0.0, 0.0], [2.0, 0.0]], [0.5, 0.5])
        y = CentroidSet([[1.0, 0.0]], [1.0])
        plan = TransportPlan([0, 0], 1)
        assert total_cost(m, y, plan, p=2) == pytest.approx(1.0, abs=1e-12)

    def test_translation_invariance_p2(self):
        rng = np.random.default_rng(17)
        pts = rng.random((30, 2))
        sites = rng.random((4, 2))
        wts = rng.random(30) + 0.1
        shift = np.array([13.5, -2.25])
        plan = TransportPlan(rng.integers(0, 4, size=30), 4)
        base = total_cost(
            EmpiricalMeasure(pts, wts), CentroidSet.with_uniform_capacities(sites), plan
        )
        moved = total_cost(
            EmpiricalMeasure(pts + shift, wts),
            CentroidSet.with_uniform_capacities(sites + shift),
            plan,
        )
        assert moved == pytest.approx(base, rel=1e-12)

    def test_index_out_of_range(self):
        m = EmpiricalMeasure([[0.0], [1.0]], [0.5, 0.5])
        y = CentroidSet([[0.0], [1.0]], [0.5, 0.5])
        wide = TransportPlan([0, 2], 3)
        with pytest.raises(ValueError):
            total_cost(m, y, wide)

    def test_plan_length_must_match(self):
        m = EmpiricalMeasure([[0.0], [1.0]], [0.5, 0.5])
        y = CentroidSet([[0.5]], [1.0])
        with pytest.raises(ValueError):
            total_cost(m, y, TransportPlan([0], 1))


class TestCentroidSet:
    """Sites with prescribed capacities; positions must be distinct."""

    def test_uniform_capacities(self):
        y = CentroidSet.with_uniform_capacities([[0.0, 0.0], [1.0, 1.0]])
        assert np.array_equal(y.capacities, [0.5, 0.5])
        assert y.k == 2
        assert y.dim == 2

    def test_duplicate_positions_rejected(self):
        with pytest.raises(InvalidMeasureError):
            CentroidSet([[1.0, 2.0], [1.0, 2.0]], [0.5, 0.5])

    def test_capacities_must_be_positive(self):
        with pytest.raises(InvalidMeasureError):
            CentroidSet([[0.0], [1.0]], [1.0, 0.0])

    def test_pairing_validation(self):
        m = EmpiricalMeasure.uniform(np.random.default_rng(0).random((10, 2)))
        good = CentroidSet([[0.2, 0.2], [0.8, 0.8]], [0.5, 0.5])
        validate_pairing(m, good)
        short = CentroidSet([[0.2, 0.2], [0.8, 0.8]], [0.5, 0.4])
        with pytest.raises(InvalidMeasureError):
            validate_pairing(m, short)
        three_d = CentroidSet([[0.2, 0.2, 0.2]], [1.0])
        with pytest.raises(InvalidMeasureError):
            validate_pairing(m, three_d)


class TestDomain:
    """Support regions: convex 2D polygons, axis boxes, discrete-only."""

    def test_unit_square(self):
        dom = Domain.unit_square()
        assert dom.area == pytest.approx(1.0, abs=1e-15)
        assert dom.diameter == pytest.approx(np.sqrt(2.0), rel=1e-15)
        assert dom.polygon_vertices()[0] == (0.0, 0.0)

    def test_clockwise_polygon_rejected(self):
        with pytest.raises(ValueError):
            Domain.polygon([(0, 0), (0, 1), (1, 1), (1, 0)])

    def test_nonconvex_polygon_rejected(self):
        with pytest.raises(ValueError):
            Domain.polygon([(0, 0), (2, 0), (1, 0.2), (0, 2)])

    def test_box_requires_lo_below_hi(self):
        dom = Domain.box([0.0, -1.0], [2.0, 1.0])
        assert dom.area == pytest.approx(4.0)
        with pytest.raises(ValueError):
            Domain.box([0.0, 1.0], [2.0, 1.0])

    def test_box_converts_to_polygon_in_2d(self):
        dom = Domain.box([0.0, 0.0], [2.0, 1.0])
        assert dom.polygon_vertices() == [(0, 0), (2, 0), (2, 1), (0, 1)]

    def test_discrete_domain_has_no_geometry(self):
        dom = Domain.discrete()
        with pytest.raises(ValueError):
            dom.polygon_vertices()
        with pytest.raises(ValueError):
            _ = dom.diameter

    def test_bounding_domain_contains_points(self):
        rng = np.random.default_rng(23)
        pts = rng.random((40, 3)) * 4.0 - 2.0
        dom = bounding_domain(pts)
        assert dom.kind == "axis-box"
        assert np.all(dom.lo < pts.min(axis=0))
        assert np.all(dom.hi > pts.max(axis=0))
