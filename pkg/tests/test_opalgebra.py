import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncgl.errors import DomainError, StructureError
from ncgl.instances import gaussian_hermitian, stream
from ncgl.opalgebra import (
    Interval,
    Projection,
    TracialAlgebra,
    func_calculus,
    min_eigenvalue,
    operator_norm,
    proj_meet,
    psd_sqrt,
    schatten_norm,
    spectral_projection,
    trace,
    trace_pair,
)


def alg1(d, w=1.0):
    return TracialAlgebra((d,), (w,))


class TestTrace:
    def test_identity_single_block(self):
        assert trace(alg1(3).identity()) == pytest.approx(3.0)

    def test_identity_two_weighted_blocks(self):
        alg = TracialAlgebra((2, 2), (0.5, 0.5))
        assert trace(alg.identity()) == pytest.approx(2.0)

    def test_matrix_unit(self):
        alg = alg1(2)
        e11 = np.zeros((2, 2))
        e11[0, 0] = 1.0
        assert trace(alg.operator([e11])) == pytest.approx(1.0)

    def test_hermitian_trace_is_float(self):
        x = gaussian_hermitian(alg1(4), stream(0))
        assert isinstance(trace(x), float)

    def test_shape_mismatch(self):
        with pytest.raises(StructureError):
            alg1(3).operator([np.zeros((2, 2))])


class TestSchattenNorm:
    def test_p1(self):
        x = alg1(2).operator([np.diag([3.0, -4.0])])
        assert schatten_norm(x, 1) == pytest.approx(7.0)

    def test_p2(self):
        x = alg1(2).operator([np.diag([3.0, -4.0])])
        assert schatten_norm(x, 2) == pytest.approx(5.0)

    def test_p_inf(self):
        x = alg1(2).operator([np.diag([3.0, -4.0])])
        assert schatten_norm(x, math.inf) == pytest.approx(4.0)

    def test_weights_enter(self):
        x = TracialAlgebra((1,), (0.25,)).operator([np.array([[2.0]])])
        assert schatten_norm(x, 2) == pytest.approx(np.sqrt(0.25 * 4.0))

    def test_inf_ignores_weights(self):
        x = TracialAlgebra((1,), (0.25,)).operator([np.array([[2.0]])])
        assert schatten_norm(x, math.inf) == pytest.approx(2.0)

    def test_quasi_norm_rejected(self):
        with pytest.raises(DomainError):
            schatten_norm(alg1(2).identity(), 0.5)

    def test_two_norm_squared_is_trace(self):
        rng = stream(1)
        alg = TracialAlgebra((3, 2), (1.0, 0.5))
        x = gaussian_hermitian(alg, rng)
        lhs = schatten_norm(x, 2) ** 2
        rhs = trace(x.adjoint() @ x)
        assert lhs == pytest.approx(rhs, rel=1e-10)


class TestSpectralProjection:
    def test_diagonal_below(self):
        a = alg1(2).operator([np.diag([0.5, 2.0])])
        e = spectral_projection(a, Interval.below(1.0))
        assert np.allclose(e.op.data[0], np.diag([1.0, 0.0]))

    def test_zero_operator_at_least_zero(self):
        e = spectral_projection(alg1(3).zero(), Interval.at_least(0.0))
        assert np.allclose(e.op.data[0], np.eye(3))

    def test_random_projection_properties(self):
        # independent oracle: the output must be idempotent and commute
        for seed in range(5):
            a = gaussian_hermitian(alg1(6), stream(2, seed))
            e = spectral_projection(a, Interval.below(0.2)).op
            assert operator_norm(e @ e - e) < 1e-9
            assert operator_norm(e @ a - a @ e) < 1e-9

    def test_complement_pair_is_exactly_identity(self):
        a = gaussian_hermitian(alg1(5), stream(3))
        lam = 0.1
        lo = spectral_projection(a, Interval.below(lam))
        hi = spectral_projection(a, Interval.at_least(lam))
        assert (lo.op + hi.op).allclose(a.algebra.identity(), 1e-12)

    def test_tie_rule_pushes_boundary_up(self):
        # an eigenvalue within the snap tolerance of an open upper endpoint
        # is excluded from (-inf, beta)
        a = alg1(2).operator([np.diag([1.0 - 1e-13, 0.0])])
        e = spectral_projection(a, Interval.below(1.0))
        assert np.allclose(e.op.data[0], np.diag([0.0, 1.0]))

    def test_non_hermitian_rejected(self):
        a = alg1(2).operator([np.array([[0.0, 1.0], [0.0, 0.0]])])
        with pytest.raises(DomainError):
            spectral_projection(a, Interval.below(0.0))


class TestFuncCalculus:
    def test_identity_function(self):
        a = gaussian_hermitian(alg1(4), stream(4))
        assert func_calculus(a, lambda t: t).allclose(a, 1e-12)

    def test_sqrt_diag(self):
        a = alg1(2).operator([np.diag([4.0, 9.0])])
        assert np.allclose(psd_sqrt(a).data[0], np.diag([2.0, 3.0]))

    def test_sqrt_square_back(self):
        for seed in range(5):
            g = gaussian_hermitian(alg1(5), stream(5, seed))
            a = g @ g  # PSD
            r = psd_sqrt(a)
            assert operator_norm(r @ r - a) < 1e-9 * (1 + operator_norm(a))

    def test_undefined_value_raises(self):
        a = alg1(2).operator([np.diag([1.0, -4.0])])
        with pytest.raises(DomainError):
            psd_sqrt(a)


def _subspace_intersection_dim(e, f):
    """SVD-based oracle for dim(range(e) & range(f)) on a single block."""
    def basis(p):
        eigs, vecs = np.linalg.eigh(p)
        return vecs[:, eigs > 0.5]

    u, v = basis(e), basis(f)
    if u.shape[1] == 0 or v.shape[1] == 0:
        return 0
    sv = np.linalg.svd(u.conj().T @ v, compute_uv=False)
    return int(np.sum(sv > 1.0 - 1e-8))


class TestProjMeet:
    def _random_projection(self, d, rank, rng):
        g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
        q = np.linalg.qr(g)[0]
        return q @ q.conj().T

    def test_meet_with_itself(self):
        rng = stream(6)
        alg = alg1(5)
        e = Projection(alg.operator([self._random_projection(5, 2, rng)]))
        assert proj_meet(e, e).allclose(e, 1e-9)

    def test_orthogonal_meet_is_zero(self):
        alg = alg1(2)
        e = Projection(alg.operator([np.diag([1.0, 0.0])]))
        f = Projection(alg.operator([np.diag([0.0, 1.0])]))
        assert proj_meet(e, f).op.entry_max() == 0.0

    def test_rank_matches_svd_oracle(self):
        alg = alg1(7)
        for seed in range(8):
            rng = stream(7, seed)
            be = self._random_projection(7, int(rng.integers(1, 6)), rng)
            bf = self._random_projection(7, int(rng.integers(1, 6)), rng)
            # force a shared direction half the time so the meet is nontrivial
            if seed % 2:
                shared = rng.standard_normal(7) + 1j * rng.standard_normal(7)
                shared /= np.linalg.norm(shared)
                be = np.linalg.qr(np.column_stack([shared, be]))[0][:, :4]
                be = be @ be.conj().T
                bf = np.linalg.qr(np.column_stack([shared, bf]))[0][:, :4]
                bf = bf @ bf.conj().T
            e = Projection(alg.operator([be]))
            f = Projection(alg.operator([bf]))
            m = proj_meet(e, f)
            assert m.rank() == _subspace_intersection_dim(be, bf)

    def test_meet_below_both(self):
        rng = stream(8)
        alg = alg1(6)
        e = Projection(alg.operator([self._random_projection(6, 4, rng)]))
        f = Projection(alg.operator([self._random_projection(6, 4, rng)]))
        m = proj_meet(e, f)
        assert min_eigenvalue(e.op - m.op) > -1e-9
        assert min_eigenvalue(f.op - m.op) > -1e-9
        assert proj_meet(f, e).allclose(m, 1e-9)


class TestTraceProperties:
    @settings(max_examples=25, derandomize=True)
    @given(st.integers(0, 10_000))
    def test_tracial_and_positive(self, seed):
        alg = TracialAlgebra((3, 2), (1.0, 0.25))
        rng = stream(9, seed)
        x = gaussian_hermitian(alg, rng)
        y = gaussian_hermitian(alg, rng)
        assert abs(trace_pair(x, y) - trace_pair(y, x)) < 1e-10
        assert trace(x.adjoint() @ x) >= -1e-12

    def test_faithful(self):
        alg = TracialAlgebra((3,), (0.5,))
        x = alg.zero()
        assert trace(x.adjoint() @ x) == 0.0
        assert operator_norm(x) <= 1e-8

    @settings(max_examples=25, derandomize=True)
    @given(st.integers(0, 10_000), st.sampled_from([(1.5, 3.0), (2.0, 2.0), (4.0, 4.0 / 3.0), (1.0, math.inf)]))
    def test_hoelder(self, seed, pq):
        p, q = pq
        alg = TracialAlgebra((3, 2), (1.0, 0.5))
        rng = stream(10, seed)
        x = gaussian_hermitian(alg, rng)
        y = gaussian_hermitian(alg, rng)
        lhs = abs(trace(x @ y))
        assert lhs <= schatten_norm(x, p) * schatten_norm(y, q) + 1e-8

    def test_linearity(self):
        alg = TracialAlgebra((2, 3), (1.0, 2.0))
        rng = stream(11)
        x = gaussian_hermitian(alg, rng)
        y = gaussian_hermitian(alg, rng)
        assert trace(x + y * 2.5) == pytest.approx(trace(x) + 2.5 * trace(y))


class TestProjectionType:
    def test_rejects_non_idempotent(self):
        with pytest.raises(DomainError):
            Projection(alg1(2).operator([np.diag([0.5, 1.0])]))

    def test_rejects_non_hermitian(self):
        with pytest.raises(DomainError):
            Projection(alg1(2).operator([np.array([[1.0, 0.3], [0.0, 0.0]])]))

    def test_interval_validation(self):
        with pytest.raises(DomainError):
            Interval(2.0, 1.0)
