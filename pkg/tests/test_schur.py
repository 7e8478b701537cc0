import math

import numpy as np
import pytest

from ncgl.errors import DomainError, StructureError
from ncgl.instances import stream
from ncgl.schur import (
    Pattern,
    interlace_pattern,
    interlace_t,
    matrix_p_norm,
    reversed_l_bound,
    reversed_l_pattern,
    schur_multiply,
    schur_norm_lower,
    triangular_pattern,
    triangular_projection,
    verify_reversed_L,
)


def _random_matrix(n, rng):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


class TestSchurMultiply:
    def test_all_ones(self):
        a = _random_matrix(4, stream(120))
        assert np.array_equal(schur_multiply(np.ones((4, 4)), a), a)

    def test_zero_pattern(self):
        a = _random_matrix(4, stream(121))
        assert np.abs(schur_multiply(np.zeros((4, 4)), a)).max() == 0.0

    def test_duality_identity(self):
        rng = stream(122)
        a, b = _random_matrix(5, rng), _random_matrix(5, rng)
        m = (rng.random((5, 5)) < 0.5).astype(float)
        lhs = np.trace(schur_multiply(m, a) @ b)
        rhs = np.trace(a @ schur_multiply(m.T, b))
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(StructureError):
            schur_multiply(np.ones((3, 3)), np.ones((4, 4)))


class TestTriangularProjection:
    def test_two_by_two(self):
        out = triangular_projection(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert np.array_equal(out, np.array([[1.0, 2.0], [0.0, 4.0]]))

    def test_fixed_point(self):
        a = np.triu(_random_matrix(5, stream(123)))
        assert np.array_equal(triangular_projection(a), a)

    def test_frobenius_contraction_attained(self):
        # at p = 2 the projection is a contraction, with equality on
        # upper-triangular input
        rng = stream(124)
        a = _random_matrix(6, rng)
        assert matrix_p_norm(triangular_projection(a), 2) <= matrix_p_norm(a, 2)
        u = np.triu(a)
        assert matrix_p_norm(triangular_projection(u), 2) == \
            pytest.approx(matrix_p_norm(u, 2))

    def test_agrees_with_pattern_multiplier(self):
        a = _random_matrix(7, stream(125))
        assert np.array_equal(triangular_projection(a),
                              schur_multiply(triangular_pattern(7), a))


class TestInterlace:
    def test_smallest_case(self):
        out = interlace_t(np.array([[3.5]]))
        assert np.array_equal(out, np.array([[0.0, 3.5], [0.0, 0.0]]))

    def test_norm_preservation(self):
        a = _random_matrix(4, stream(126))
        for p in (1.0, 2.0, 4.0, math.inf):
            assert matrix_p_norm(interlace_t(a), p) == pytest.approx(
                matrix_p_norm(a, p), rel=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 5, 8])
    def test_key_identity_exact(self, n):
        a = _random_matrix(n, stream(127, n))
        m = interlace_pattern(2 * n)
        assert np.array_equal(schur_multiply(m, interlace_t(a)),
                              interlace_t(triangular_projection(a)))

    def test_interlace_pattern_is_reversed_l(self):
        assert interlace_pattern(8).tag == "reversed-L"


class TestPatternValidation:
    def test_reversed_l_structure_enforced(self):
        bad = np.ones((3, 3))
        bad[0, 2] = 0.0  # breaks the hook structure
        with pytest.raises(StructureError):
            Pattern(bad, "reversed-L")

    def test_non_binary_rejected(self):
        with pytest.raises(DomainError):
            Pattern(0.5 * np.ones((2, 2)))

    def test_reversed_l_builder(self):
        pat = reversed_l_pattern([1, 0, 1], [0, 1, 1, 0])
        e = pat.entries
        assert e[0, 1] == e[1, 0] == 1.0  # m_2
        assert e[0, 2] == e[2, 1] == 0.0  # m_3
        assert e[3, 0] == e[1, 3] == 1.0  # m_4
        assert list(np.diag(e)) == [0.0, 1.0, 1.0, 0.0]


class TestNormLowerBounds:
    def test_all_ones_is_exactly_one(self):
        assert schur_norm_lower(np.ones((5, 5)), 3.0, budget=4,
                                restarts=1) == pytest.approx(1.0)

    def test_diagonal_pattern_at_most_one(self):
        rng = stream(128)
        diag = np.diag((rng.random(6) < 0.5).astype(float))
        lb = schur_norm_lower(diag, 4.0, budget=8, restarts=2)
        assert lb <= 1.0 + 1e-9

    def test_triangular_growth_in_p(self):
        pat = triangular_pattern(12)
        prev = None
        prev_val = 0.0
        for p in (4.0, 8.0, 16.0):
            val, arg = schur_norm_lower(pat, p, budget=12, restarts=2,
                                        starts=[prev] if prev is not None else None,
                                        return_argmax=True)
            assert val >= prev_val - 1e-9
            assert val <= reversed_l_bound(p)
            prev, prev_val = arg, val
        assert prev_val > 1.2  # really grows past the p = 2 value

    def test_localization_monotone_in_dimension(self):
        pat_small = triangular_pattern(6)
        pat_big = triangular_pattern(12)
        lb_small = schur_norm_lower(pat_small, 4.0, budget=12, restarts=2)
        lb_big = schur_norm_lower(pat_big, 4.0, budget=12, restarts=2)
        assert lb_big >= lb_small - 5e-3  # optimization noise allowance

    def test_duality_consistency(self):
        # neither lower bound may exceed the theorem's upper bound at the
        # other exponent (both are below the p >= 2 constant)
        rng = stream(129)
        pat = reversed_l_pattern(rng.integers(0, 2, size=5),
                                 rng.integers(0, 2, size=6))
        for p in (3.0, 4.0):
            q = p / (p - 1.0)
            ub = reversed_l_bound(p)
            assert schur_norm_lower(pat, p, budget=8, restarts=2) <= ub
            assert schur_norm_lower(pat, q, budget=8, restarts=2) <= ub

    def test_budget_validation(self):
        with pytest.raises(DomainError):
            schur_norm_lower(np.ones((3, 3)), 4.0, budget=0)


class TestReversedLTheorem:
    def test_all_ones_identity_trivial(self):
        pat = reversed_l_pattern([1] * 7, [1] * 8)
        rep = verify_reversed_L(pat, 4.0, trials=5, seed=0)
        assert rep.passed
        assert rep.meta["identity_dev"] < 1e-14

    def test_random_patterns_pass(self):
        rng = stream(130)
        for seed in range(5):
            pat = reversed_l_pattern(rng.integers(0, 2, size=7),
                                     rng.integers(0, 2, size=8))
            rep = verify_reversed_L(pat, 4.0, trials=20, seed=seed)
            assert rep.passed
            assert rep.meta["identity_dev"] < 1e-12

    def test_non_reversed_l_rejected(self):
        with pytest.raises(DomainError):
            verify_reversed_L(triangular_pattern(4), 4.0, trials=1)

    def test_identity_perfectly_reconstructs(self):
        # with every hook sign +1 the partner equals the martingale itself
        pat = reversed_l_pattern([1] * 5, [0, 1, 0, 1, 0, 1])
        rep = verify_reversed_L(pat, 4.0, trials=10, seed=3)
        assert rep.passed
