"""Tests for the GMQ kernel family and its complex line extension."""

import cmath
import math

import numpy as np
import pytest

from gmq import (
    BranchViolationError,
    ComplexLine,
    KernelParams,
    branch_point,
    center_eval,
    complex_line_norm_sq,
    gmq_complex_line_eval,
    gmq_eval,
    gmq_order,
    validate_theorem_mode,
)


class TestKernelParams:
    def test_basic_construction(self):
        p = KernelParams(1.0, 2, 2.5)
        assert (p.epsilon, p.k, p.beta) == (1.0, 2, 2.5)
        assert p.order == 3

    @pytest.mark.parametrize(
        "eps,k,beta",
        [(0.0, 1, 0.5), (-1.0, 1, 0.5), (1.0, 0, 0.5), (1.0, -2, 0.5),
         (1.0, 33, 0.5), (1.0, 1, 0.0), (1.0, 1.5, 0.5)],
    )
    def test_rejects_bad_parameters(self, eps, k, beta):
        with pytest.raises(ValueError):
            KernelParams(eps, k, beta)

    def test_theorem_mode_accepts_noninteger_beta_above_one(self):
        validate_theorem_mode(KernelParams(1.0, 1, 1.5))
        validate_theorem_mode(KernelParams(0.5, 3, 2.3))

    @pytest.mark.parametrize("beta", [0.5, -0.5, 1.0, 2.0, 3.0, 2.0 + 5e-10])
    def test_theorem_mode_rejects(self, beta):
        with pytest.raises(ValueError):
            validate_theorem_mode(KernelParams(1.0, 1, beta))


class TestGmqEval:
    def test_value_at_zero_is_exactly_one(self):
        assert gmq_eval(KernelParams(1.0, 1, 0.5), 0.0) == 1.0
        for beta in (-0.5, 0.5, 1.5, 2.3):
            for k in (1, 2, 5):
                assert gmq_eval(KernelParams(0.7, k, beta), 0.0) == 1.0

    def test_hand_checked_values(self):
        assert gmq_eval(KernelParams(2.0, 1, 1.5), 1.0) == pytest.approx(
            5.0 * math.sqrt(5.0), rel=1e-14
        )
        assert gmq_eval(KernelParams(1.0, 2, 2.5), 1.0) == pytest.approx(
            2.0**2.5, rel=1e-14
        )

    def test_negative_radius_rejected(self):
        with pytest.raises(ValueError):
            gmq_eval(KernelParams(1.0, 1, 0.5), -1e-12)

    def test_range_for_positive_and_negative_beta(self):
        r = np.linspace(0.0, 10.0, 101)
        grow = gmq_eval(KernelParams(1.0, 2, 1.5), r)
        decay = gmq_eval(KernelParams(1.0, 2, -1.5), r)
        assert np.all(grow >= 1.0)
        assert np.all((decay > 0.0) & (decay <= 1.0))

    def test_strict_monotonicity(self):
        r = np.linspace(0.0, 4.0, 200)
        up = gmq_eval(KernelParams(1.3, 1, 0.5), r)
        down = gmq_eval(KernelParams(1.3, 1, -0.5), r)
        assert np.all(np.diff(up) > 0.0)
        assert np.all(np.diff(down) < 0.0)

    def test_scale_covariance(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            eps = float(rng.uniform(0.2, 3.0))
            k = int(rng.integers(1, 5))
            beta = float(rng.uniform(-2.0, 3.0)) or 0.5
            r = float(rng.uniform(0.0, 2.0))
            a = gmq_eval(KernelParams(eps, k, beta), r)
            b = gmq_eval(KernelParams(1.0, k, beta), eps * r)
            assert a == pytest.approx(b, rel=1e-13)


class TestGmqOrder:
    @pytest.mark.parametrize(
        "beta,expected", [(1.5, 2), (0.5, 1), (2.3, 3), (-0.5, 0), (-3.2, 0)]
    )
    def test_order(self, beta, expected):
        assert gmq_order(KernelParams(1.0, 1, beta)) == expected


class TestCenterEval:
    def test_at_center(self):
        p = KernelParams(1.0, 1, 1.5)
        assert center_eval(p, [0.3, 0.4], [0.3, 0.4]) == 1.0

    def test_three_four_five(self):
        p = KernelParams(1.0, 1, 0.5)
        assert center_eval(p, [0.0, 0.0], [3.0, 4.0]) == pytest.approx(
            math.sqrt(26.0), rel=1e-14
        )

    def test_symmetry(self):
        rng = np.random.default_rng(4)
        p = KernelParams(0.8, 2, 1.5)
        for _ in range(20):
            a, b = rng.random(3), rng.random(3)
            assert center_eval(p, a, b) == center_eval(p, b, a)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            center_eval(KernelParams(1, 1, 0.5), [0.0, 0.0], [0.0, 0.0, 0.0])


class TestComplexLine:
    def test_requires_unit_direction(self):
        with pytest.raises(ValueError):
            ComplexLine(np.zeros(2), np.array([1.0, 1.0]))

    def test_real_consistency(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            d = int(rng.integers(1, 5))
            base = rng.standard_normal(d)
            u = rng.standard_normal(d)
            u /= np.linalg.norm(u)
            center = rng.standard_normal(d)
            t = float(rng.uniform(-3, 3))
            line = ComplexLine(base, u)
            q = complex_line_norm_sq(line, t, center)
            expected = float(np.sum((base + t * u - center) ** 2))
            assert q.imag == 0.0
            assert q.real == pytest.approx(expected, abs=1e-12 * (1 + abs(expected)))

    def test_center_at_base_gives_z_squared(self):
        line = ComplexLine(np.array([1.0, 2.0]), np.array([0.0, 1.0]))
        z = 0.3 + 0.7j
        assert complex_line_norm_sq(line, z, np.array([1.0, 2.0])) == z * z

    def test_orthogonal_direction_drops_cross_term(self):
        base = np.array([0.0, 0.0])
        center = np.array([2.0, 0.0])
        u = np.array([0.0, 1.0])  # orthogonal to base - center
        z = 0.1 + 0.2j
        q = complex_line_norm_sq(ComplexLine(base, u), z, center)
        assert q == pytest.approx(z * z + 4.0)


class TestBranchPoint:
    def test_simple_cases(self):
        assert branch_point(KernelParams(1.0, 1, 1.5)) == pytest.approx(1j)
        assert branch_point(KernelParams(2.0, 1, 1.5)) == pytest.approx(0.5j)
        assert branch_point(KernelParams(1.0, 2, 1.5)) == pytest.approx(
            (math.sqrt(2) / 2) * (1 + 1j)
        )

    def test_defining_polynomial(self):
        for k in range(1, 7):
            for eps in (0.5, 1.0, 2.0):
                zs = branch_point(KernelParams(eps, k, 1.5))
                assert abs((eps * zs) ** (2 * k) + 1.0) <= 1e-14


class TestComplexLineEval:
    def test_real_axis_matches_real_evaluation(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            d = int(rng.integers(1, 4))
            eps = float(rng.uniform(0.3, 2.5))
            k = int(rng.integers(1, 4))
            beta = float(rng.choice([-0.5, 0.5, 1.5, 2.3, 2.5]))
            params = KernelParams(eps, k, beta)
            base = rng.standard_normal(d)
            u = rng.standard_normal(d)
            u /= np.linalg.norm(u)
            center = rng.standard_normal(d)
            t = float(rng.uniform(-2, 2))
            line = ComplexLine(base, u)
            val = gmq_complex_line_eval(params, line, t, center)
            ref = center_eval(params, base + t * u, center)
            assert val.imag == pytest.approx(0.0, abs=1e-12 * abs(ref))
            assert val.real == pytest.approx(ref, rel=1e-12)

    def test_branch_point_raises_with_center_at_base(self):
        for k in range(1, 7):
            for eps in (0.5, 1.0, 2.0):
                params = KernelParams(eps, k, 1.5)
                base = np.array([0.5, -0.2])
                line = ComplexLine(base, np.array([1.0, 0.0]))
                with pytest.raises(BranchViolationError) as err:
                    gmq_complex_line_eval(params, line, branch_point(params), base)
                assert abs(err.value.value) < 1e-10

    def test_finite_just_off_the_branch_point(self):
        for k in range(1, 7):
            for eps in (0.5, 1.0, 2.0):
                params = KernelParams(eps, k, 1.5)
                base = np.array([0.5, -0.2])
                line = ComplexLine(base, np.array([1.0, 0.0]))
                zs = branch_point(params)
                for fac in (1.0 + 1e-3, 1.0 - 1e-3):
                    val = gmq_complex_line_eval(params, line, zs * fac, base)
                    assert cmath.isfinite(val)

    def test_orthogonal_direction_at_branch_point_positive_real(self):
        # with u orthogonal to base - center and k = 1 the power argument is
        # eps^2 R^2 > 0, so the value is the real number (eps^2 R^2)^beta
        eps, beta = 1.3, 1.5
        params = KernelParams(eps, 1, beta)
        base = np.array([0.0, 0.0])
        center = np.array([0.7, 0.0])
        line = ComplexLine(base, np.array([0.0, 1.0]))
        val = gmq_complex_line_eval(params, line, branch_point(params), center)
        expected = (eps**2 * 0.49) ** beta
        assert val.imag == pytest.approx(0.0, abs=1e-12)
        assert val.real == pytest.approx(expected, rel=1e-12)
