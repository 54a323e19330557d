import math
from fractions import Fraction

import numpy as np
import pytest

from fejerlab import (
    FIXTURES,
    LIMIT_HEIGHT,
    check_fejer_star,
    example_3_3,
    example_quasi2_not_star,
    example_remark_interior,
    fit_quasi_fejer,
    zigzag_arc_trace,
)

FROZEN_SEVEN = np.array(
    [
        [0.0, 2.0],
        [1.0, 2.0],
        [0.0, math.sqrt(3.0)],
        [0.5, math.sqrt(3.0)],
        [0.0, 1.5],
        [0.25, 1.5],
        [0.0, math.sqrt(1.8125)],
    ]
)


class TestZigzagTrace:
    def test_first_seven_iterates(self):
        X = zigzag_arc_trace(7).as_array()
        assert np.max(np.abs(X - FROZEN_SEVEN)) <= 1e-12

    def test_height_recursion(self):
        X = zigzag_arc_trace(64).as_array()
        b2 = X[::2, 1] ** 2
        assert np.isclose(b2[0], 4.0)
        assert np.isclose(b2[1], 3.0)
        assert np.isclose(b2[2], 2.25)
        for ell in range(20):
            assert np.isclose(b2[ell + 1], 4.0**-ell - 2.0 * 2.0**-ell + b2[ell])

    def test_height_limit(self):
        X = zigzag_arc_trace(63).as_array()
        assert abs(X[62, 1] ** 2 - 4.0 / 3.0) <= 1e-8
        assert abs(X[62, 1] - LIMIT_HEIGHT) <= 1e-8

    def test_height_monotone_and_above_one(self):
        beta = zigzag_arc_trace(80).as_array()[:, 1]
        assert np.all(np.diff(beta) <= 0.0)
        assert np.all(beta >= 1.0)

    def test_stays_outside_unit_ball_around_arc_center(self):
        X = zigzag_arc_trace(80).as_array()
        d = np.linalg.norm(X - np.array([1.0, 0.0]), axis=1)
        assert np.all(d >= 1.0 - 1e-15)

    def test_exact_coordinate_structure(self):
        X = zigzag_arc_trace(41).as_array()
        assert np.all(X[::2, 0] == 0.0)
        for ell in range(20):
            assert X[2 * ell + 1, 0] == 2.0**-ell

    def test_drop_steps_satisfy_recursion_exactly(self):
        # the stored doubles obey the squared-height drop inequality in
        # exact rational arithmetic, by construction of the rounding
        X = zigzag_arc_trace(40).as_array()
        for k in range(1, 39, 2):
            alpha, beta = Fraction(X[k, 0]), Fraction(X[k, 1])
            beta_next = Fraction(X[k + 1, 1])
            assert beta_next**2 <= alpha**2 - 2 * alpha + beta**2

    def test_distance_to_unit_anchor_never_increases(self):
        X = zigzag_arc_trace(60).as_array()
        d = np.linalg.norm(X - np.array([1.0, 0.0]), axis=1)
        assert np.all(np.diff(d) <= 1e-15)

    def test_length_validation(self):
        with pytest.raises(ValueError):
            zigzag_arc_trace(0)


class TestExample33Fixture:
    def test_anchor_sets_and_facts(self):
        fx = example_3_3(30)
        assert set(fx.anchor_sets) == {"M_sample", "convM_sample", "origin"}
        assert np.allclose(fx.analytic_facts["limit"].value, (0.0, LIMIT_HEIGHT))
        pts = fx.anchor_sets["M_sample"].points
        assert all(p[0] == 2.0**-l and p[1] == 0.0 for l, p in enumerate(pts))

    def test_hull_sample_stays_in_open_segment(self):
        fx = example_3_3(30, seed=7)
        for p in fx.anchor_sets["convM_sample"].points:
            assert 0.0 < p[0] <= 1.0
            assert p[1] == 0.0

    def test_seed_determinism(self):
        a = example_3_3(20, seed=3).anchor_sets["convM_sample"].points
        b = example_3_3(20, seed=3).anchor_sets["convM_sample"].points
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_expectations_hold(self):
        fx = example_3_3(60)
        for l, res in enumerate(check_fejer_star(fx.trace, fx.anchor_sets["M_sample"], tol=0.0)):
            assert res.n is not None and res.n <= 2 * l
        for res in check_fejer_star(fx.trace, fx.anchor_sets["convM_sample"], tol=0.0):
            assert res.n is not None
        assert check_fejer_star(fx.trace, fx.anchor_sets["origin"], tol=0.0)[0].n is None

    def test_validation(self):
        with pytest.raises(ValueError):
            example_3_3(10, num_anchor_points=0)


class TestRemarkFixture:
    def test_box_sample_geometry(self):
        fx = example_remark_interior(30, grid=5)
        pts = np.array(fx.anchor_sets["box_sample"].points)
        assert pts.shape == (25, 2)
        assert pts[:, 0].min() > 0.0
        assert pts[:, 0].max() == 1.0
        assert pts[:, 1].min() > -1.0
        assert pts[:, 1].max() == 0.0
        # the closed corner is included, the origin is a separate anchor set
        assert any(np.array_equal(p, (1.0, 0.0)) for p in pts)
        assert not any(np.array_equal(p, (0.0, 0.0)) for p in pts)

    def test_box_anchors_present_origin_absent(self):
        fx = example_remark_interior(60, grid=4)
        for res in check_fejer_star(fx.trace, fx.anchor_sets["box_sample"], tol=0.0):
            assert res.n is not None
        assert check_fejer_star(fx.trace, fx.anchor_sets["origin"], tol=0.0)[0].n is None

    def test_interior_point_present(self):
        fx = example_remark_interior(60)
        from fejerlab import AnchorSet

        res = check_fejer_star(fx.trace, AnchorSet((np.array([0.5, -0.5]),)), tol=0.0)[0]
        assert res.n is not None

    def test_validation(self):
        with pytest.raises(ValueError):
            example_remark_interior(10, grid=1)


class TestQuasi2Fixture:
    def test_segment_sample_geometry(self):
        fx = example_quasi2_not_star(30)
        pts = np.array(fx.anchor_sets["segment_sample"].points)
        assert pts.shape == (11, 2)
        assert pts[0, 0] == -1.0 and pts[-1, 0] == 0.0
        assert np.all(pts[:, 1] == 0.0)

    def test_summable_uniform_perturbation_but_no_origin_tail(self):
        fx = example_quasi2_not_star(200)
        fit = fit_quasi_fejer(fx.trace, fx.anchor_sets["segment_sample"], "II")
        assert np.isfinite(fit.uniform.partial_sum)
        assert fit.uniform.tail_ratio <= 0.05
        assert check_fejer_star(fx.trace, fx.anchor_sets["origin"], tol=0.0)[0].n is None

    def test_validation(self):
        with pytest.raises(ValueError):
            example_quasi2_not_star(3)


class TestRegistry:
    def test_fixture_names(self):
        assert set(FIXTURES) == {"3.3", "remark", "quasi2"}

    def test_registry_builds_fixtures(self):
        for name, builder in FIXTURES.items():
            fx = builder(12)
            assert len(fx.trace) == 12
            assert "origin" in fx.anchor_sets
