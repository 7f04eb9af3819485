"""Tests for domains, densities and reproducible point generation."""

import math

import numpy as np
import pytest

from gmq import (
    Ball,
    Box,
    BoxShell,
    PointSet,
    ProductMarginals,
    RejectionBudgetError,
    Uniform,
    WeightedRejection,
    derive_seed,
    load_points_csv,
    min_pairwise_distance,
    sample_points,
    save_points_csv,
    unit_box,
)


class TestDomains:
    def test_box_validation(self):
        with pytest.raises(ValueError):
            Box((0.0, 0.0), (1.0, 0.0))
        with pytest.raises(ValueError):
            Box((0.0,), (1.0, 1.0))

    def test_ball_validation(self):
        with pytest.raises(ValueError):
            Ball((0.0, 0.0), 0.0)

    def test_shell_validation(self):
        with pytest.raises(ValueError):
            BoxShell(unit_box(1), Box((0.2,), (0.8,)))  # d=1 disconnects
        with pytest.raises(ValueError):
            BoxShell(unit_box(2), Box((0.5, 0.5), (1.0, 1.0)))  # touches boundary

    def test_membership_is_strict(self):
        box = unit_box(2)
        pts = np.array([[0.0, 0.5], [0.5, 0.5], [1.0, 0.5]])
        assert list(box.contains(pts)) == [False, True, False]

    def test_shell_excludes_closed_inner_box(self):
        dom = BoxShell(unit_box(2), Box((0.25, 0.25), (0.75, 0.75)))
        pts = np.array([[0.5, 0.5], [0.25, 0.25], [0.1, 0.1]])
        assert list(dom.contains(pts)) == [False, False, True]

    def test_diameter(self):
        assert unit_box(2).diameter() == pytest.approx(math.sqrt(2.0))
        assert Ball((0.0,), 2.0).diameter() == 4.0


class TestSamplePoints:
    def test_deterministic_given_seed(self):
        a = sample_points(unit_box(2), Uniform(), 5, 42)
        b = sample_points(unit_box(2), Uniform(), 5, 42)
        assert np.array_equal(a.points, b.points)
        c = sample_points(unit_box(2), Uniform(), 5, 43)
        assert not np.array_equal(a.points, c.points)

    def test_quadrant_counts_follow_binomial_concentration(self):
        # each quadrant of the unit square is a p=1/4 binomial with n=10000:
        # expect 2500 +- 3*sqrt(10000*0.25*0.75)
        ps = sample_points(unit_box(2), Uniform(), 10000, 8)
        slack = 3.0 * math.sqrt(10000 * 0.25 * 0.75)
        for qx in (0, 1):
            for qy in (0, 1):
                inside = np.sum(
                    ((ps.points[:, 0] > 0.5) == bool(qx))
                    & ((ps.points[:, 1] > 0.5) == bool(qy))
                )
                assert abs(inside - 2500) <= slack

    def test_ball_membership(self):
        dom = Ball((1.0, -1.0, 0.5), 0.8)
        ps = sample_points(dom, Uniform(), 500, 3)
        radii = np.linalg.norm(ps.points - np.array(dom.center), axis=1)
        assert np.all(radii < dom.radius)

    def test_shell_membership(self):
        dom = BoxShell(unit_box(2), Box((0.3, 0.3), (0.7, 0.7)))
        ps = sample_points(dom, Uniform(), 400, 5)
        assert np.all(dom.contains(ps.points))

    def test_marginals_density_shapes_histogram(self):
        density = ProductMarginals(
            edges=(((0.0, 0.5, 1.0)), (0.0, 1.0)),
            weights=((3.0, 1.0), (1.0,)),
        )
        ps = sample_points(unit_box(2), Uniform(), 10, 1)  # smoke: uniform ok
        ps = sample_points(unit_box(2), density, 8000, 11)
        left = np.sum(ps.points[:, 0] < 0.5)
        # axis-0 mass split 3:1 -> expect ~6000 left
        assert abs(left - 6000) < 4 * math.sqrt(8000 * 0.75 * 0.25)

    def test_marginals_require_box(self):
        density = ProductMarginals(edges=((0.0, 1.0),), weights=((1.0,),))
        with pytest.raises(ValueError):
            sample_points(Ball((0.0,), 1.0), density, 5, 1)

    def test_rejection_density(self):
        density = WeightedRejection(weight=lambda p: p[:, 0], bound=1.0)
        ps = sample_points(unit_box(2), density, 4000, 13)
        # linear weight on [0,1] has mean 2/3
        assert abs(ps.points[:, 0].mean() - 2.0 / 3.0) < 0.02

    def test_rejection_budget_error(self):
        hopeless = WeightedRejection(
            weight=lambda p: np.zeros(p.shape[0]), bound=1.0,
            max_attempts_per_point=10,
        )
        with pytest.raises(RejectionBudgetError):
            sample_points(unit_box(2), hopeless, 5, 1)

    def test_n_must_be_positive(self):
        with pytest.raises(ValueError):
            sample_points(unit_box(1), Uniform(), 0, 1)


class TestMinPairwiseDistance:
    def test_duplicate_points_give_zero(self):
        ps = PointSet(np.array([[0.5, 0.5], [0.5, 0.5]]), seed=0)
        assert min_pairwise_distance(ps) == 0.0

    def test_three_four_five(self):
        ps = PointSet(np.array([[0.0, 0.0], [3.0, 4.0]]), seed=0)
        assert min_pairwise_distance(ps) == 5.0

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            min_pairwise_distance(PointSet(np.array([[0.0]]), seed=0))

    def test_random_draws_are_distinct(self):
        # a.s.-distinct sampling: strictly positive separation in 100 trials
        for trial in range(100):
            ps = sample_points(unit_box(2), Uniform(), 1000, derive_seed(123, trial))
            assert min_pairwise_distance(ps) > 0.0


class TestSeedDerivation:
    def test_deterministic_and_distinct(self):
        seeds = [derive_seed(99, t) for t in range(1000)]
        assert seeds == [derive_seed(99, t) for t in range(1000)]
        assert len(set(seeds)) == 1000

    def test_master_seed_matters(self):
        assert derive_seed(1, 0) != derive_seed(2, 0)


class TestPointSet:
    def test_subset_preserves_provenance(self):
        ps = sample_points(unit_box(3), Uniform(), 10, 17)
        sub = ps.subset(4)
        assert sub.n == 4 and sub.dim == 3
        assert np.array_equal(sub.points, ps.points[:4])
        assert sub.domain is ps.domain and sub.seed == ps.seed

    def test_points_are_immutable(self):
        ps = sample_points(unit_box(2), Uniform(), 3, 1)
        with pytest.raises(ValueError):
            ps.points[0, 0] = 99.0

    def test_csv_round_trip_is_exact(self, tmp_path):
        ps = sample_points(unit_box(3), Uniform(), 20, 12345)
        path = tmp_path / "points.csv"
        save_points_csv(ps, path)
        back = load_points_csv(path)
        assert back.seed == ps.seed
        assert back.dim == ps.dim and back.n == ps.n
        assert np.array_equal(back.points, ps.points)

    def test_csv_header_format(self, tmp_path):
        ps = sample_points(unit_box(2), Uniform(), 4, 9)
        path = tmp_path / "p.csv"
        save_points_csv(ps, path)
        first = path.read_text().splitlines()[0]
        assert first == "# dim=2,n=4,seed=9"
