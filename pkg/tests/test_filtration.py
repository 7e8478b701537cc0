import numpy as np
import pytest

from ncgl.errors import DomainError
from ncgl.filtration import (
    ce_oracle,
    cond_exp,
    conditioned_square_function,
    diagonal_p_function,
    lift_with_matrix_factor,
    make_filtration,
    martingale_from_diffs,
    martingale_from_final,
    rademacher_operator,
    sign_matrix_filtration,
    square_function,
    square_functions,
)
from ncgl.instances import gaussian_hermitian, stream
from ncgl.opalgebra import (
    min_eigenvalue,
    schatten_norm,
    trace,
    trace_pair,
)

FAMILIES = [
    ("corner", {"dim": 4}),
    ("rademacher", {"depth": 3}),
    ("rademacher", {"depth": 2, "matrix_dim": 2}),
    ("matrix_corner", {"outer_dim": 2, "dim": 3}),
    ("rademacher_corner", {"depth": 2, "matrix_dim": 2}),
    ("trivial_full", {"dims": (3,)}),
]


@pytest.fixture(scope="module", params=range(len(FAMILIES)), ids=lambda i: FAMILIES[i][0] + str(i))
def family(request):
    kind, params = FAMILIES[request.param]
    return make_filtration(kind, **params)


class TestConditionalExpectationAxioms:
    def test_axioms_on_samples(self, family):
        dev = family.validate(stream(20), samples=5)
        for key, val in dev.items():
            assert val < 1e-9, (family.label, key, val)

    def test_lp_contraction(self, family):
        rng = stream(21)
        for p in (1.0, 2.0, 4.0, np.inf):
            x = gaussian_hermitian(family.algebra, rng)
            for n in range(family.n_levels):
                assert schatten_norm(cond_exp(family, n, x), p) \
                    <= schatten_norm(x, p) + 1e-8

    def test_jensen(self, family):
        rng = stream(22)
        x = gaussian_hermitian(family.algebra, rng)
        for n in range(family.n_levels):
            ex = cond_exp(family, n, x)
            gap = cond_exp(family, n, x @ x) - ex @ ex
            assert min_eigenvalue(gap.symmetrized()) > -1e-9


class TestCornerFormula:
    def test_level_one_example(self):
        filt = make_filtration("corner", dim=3)
        a = filt.algebra.operator([np.array([[1.0, 2, 3], [4, 5, 6], [7, 8, 9]])])
        expected = np.diag([1.0, 7.0, 7.0])
        assert np.allclose(cond_exp(filt, 1, a).data[0], expected)

    def test_level_zero_example(self):
        filt = make_filtration("corner", dim=3)
        a = filt.algebra.operator([np.array([[1.0, 2, 3], [4, 5, 6], [7, 8, 9]])])
        assert np.allclose(cond_exp(filt, 0, a).data[0], 5.0 * np.eye(3))

    def test_top_level_is_identity(self):
        filt = make_filtration("corner", dim=3)
        x = gaussian_hermitian(filt.algebra, stream(23))
        assert cond_exp(filt, 3, x).allclose(x, 0.0)

    def test_level_out_of_range(self):
        filt = make_filtration("corner", dim=3)
        x = filt.algebra.identity()
        with pytest.raises(DomainError):
            cond_exp(filt, 4, x)

    def test_minus_one_aliases_zero(self):
        filt = make_filtration("corner", dim=3)
        x = gaussian_hermitian(filt.algebra, stream(24))
        assert cond_exp(filt, -1, x).allclose(cond_exp(filt, 0, x), 0.0)


class TestRademacherFamily:
    def test_block_count_and_weights(self):
        filt = make_filtration("rademacher", depth=3)
        assert filt.algebra.n_blocks == 8
        assert all(w == pytest.approx(1 / 8) for w in filt.algebra.weights)

    def test_level_two_averages_pairs(self):
        # classical conditional expectation oracle on the sign algebra
        filt = make_filtration("rademacher", depth=3)
        rng = stream(25)
        x = gaussian_hermitian(filt.algebra, rng)
        e2 = cond_exp(filt, 2, x)
        labels = filt.layout.atom_labels
        for i, lab in enumerate(labels):
            grp = [j for j, l2 in enumerate(labels) if l2[:2] == lab[:2]]
            expected = np.mean([x.data[j][0, 0] for j in grp])
            assert e2.data[i][0, 0] == pytest.approx(expected)

    def test_sign_operator_squares_to_identity(self):
        filt = make_filtration("rademacher", depth=3, matrix_dim=2)
        eps = rademacher_operator(filt, 1)
        assert (eps @ eps).allclose(filt.algebra.identity(), 0.0)
        assert trace(eps) == pytest.approx(0.0)

    def test_sign_mean_zero_before_its_level(self):
        filt = make_filtration("rademacher", depth=3)
        eps = rademacher_operator(filt, 2)
        assert cond_exp(filt, 2, eps).entry_max() < 1e-12
        assert cond_exp(filt, 3, eps).allclose(eps, 0.0)


class TestOracle:
    def test_matches_structured_map(self, family):
        rng = stream(26)
        for _ in range(25):
            n = int(rng.integers(0, family.n_levels))
            x = gaussian_hermitian(family.algebra, rng)
            assert (cond_exp(family, n, x) - ce_oracle(family, n, x)).entry_max() < 1e-9

    def test_trivial_level_returns_mean(self):
        filt = make_filtration("trivial_full", dims=(3,))
        x = gaussian_hermitian(filt.algebra, stream(27))
        expected = filt.algebra.identity() * (trace(x) / 3.0)
        assert (ce_oracle(filt, 0, x) - expected).entry_max() < 1e-12

    def test_full_level_returns_input(self):
        filt = make_filtration("trivial_full", dims=(3,))
        x = gaussian_hermitian(filt.algebra, stream(28))
        assert (ce_oracle(filt, 1, x) - x).entry_max() < 1e-12

    def test_singular_gram_raises(self):
        from ncgl.errors import NumericalRankError

        filt = make_filtration("trivial_full", dims=(3,))
        lvl = filt.levels[0]

        class Degenerate:
            def apply(self, x):
                return lvl.apply(x)

            def range_basis(self, alg):
                b = lvl.range_basis(alg)
                return b + b  # duplicated spanning set: singular Gram matrix

        broken = type(filt)(filt.algebra, filt.layout, filt.descriptors,
                            (Degenerate(),) + filt.levels[1:], filt.label)
        x = gaussian_hermitian(filt.algebra, stream(280))
        with pytest.raises(NumericalRankError):
            ce_oracle(broken, 0, x)


class TestMartingale:
    def test_from_final_satisfies_invariants(self):
        filt = make_filtration("corner", dim=4)
        m = martingale_from_final(filt, gaussian_hermitian(filt.algebra, stream(29)),
                                  validate=True)
        for n in range(m.N):
            drift = (cond_exp(filt, n, m.values[n + 1]) - m.values[n]).entry_max()
            assert drift < 1e-9

    def test_constant_when_final_in_bottom_level(self):
        filt = make_filtration("corner", dim=4)
        f = cond_exp(filt, 0, gaussian_hermitian(filt.algebra, stream(30)))
        m = martingale_from_final(filt, f)
        for v in m.values:
            assert v.allclose(f, 1e-12)

    def test_corner_unit_final_matches_hand_formula(self):
        # final operator e_{N,N}: levels average the trailing diagonal
        d = 4
        filt = make_filtration("corner", dim=d)
        e = np.zeros((d, d))
        e[d - 1, d - 1] = 1.0
        m = martingale_from_final(filt, filt.algebra.operator([e]))
        for k in range(d):
            expected = np.zeros((d, d))
            for j in range(k, d):
                expected[j, j] = 1.0 / (d - k)
            assert np.allclose(m.values[k].data[0], expected), k

    def test_diff_orthogonality(self):
        filt = make_filtration("rademacher_corner", depth=2, matrix_dim=2)
        m = martingale_from_final(filt, gaussian_hermitian(filt.algebra, stream(31)))
        for i in range(m.N + 1):
            for j in range(i):
                assert abs(trace_pair(m.diffs[i].adjoint(), m.diffs[j])) < 1e-9

    def test_from_diffs_validates(self):
        filt = make_filtration("corner", dim=3)
        bad = [gaussian_hermitian(filt.algebra, stream(32)) for _ in range(4)]
        with pytest.raises(DomainError):
            martingale_from_diffs(filt, bad)


class TestSquareFunctions:
    def test_one_step_is_modulus(self):
        # for a single-level filtration, S_0 = |x_0|
        from ncgl.filtration import AlgebraLayout, Filtration, Full
        from ncgl.opalgebra import TracialAlgebra, operator_abs

        alg = TracialAlgebra((3,), (1.0,))
        filt = Filtration.build(alg, AlgebraLayout(((),), (3,)), (Full(),))
        m = martingale_from_final(filt, gaussian_hermitian(alg, stream(33)))
        assert (square_function(m) - operator_abs(m.final)).entry_max() < 1e-10

    def test_diagonal_matches_classical(self):
        filt = make_filtration("rademacher", depth=4)
        m = martingale_from_final(filt, gaussian_hermitian(filt.algebra, stream(34)))
        s = square_function(m)
        diffs = np.array([[d.data[b][0, 0].real for b in range(16)]
                          for d in m.diffs])
        classical = np.sqrt((diffs**2).sum(axis=0))
        got = np.array([s.data[b][0, 0].real for b in range(16)])
        assert np.allclose(got, classical, atol=1e-12)

    def test_two_norm_identity(self):
        filt = make_filtration("corner", dim=4)
        m = martingale_from_final(filt, gaussian_hermitian(filt.algebra, stream(35)))
        s = square_function(m)
        assert trace(s @ s) == pytest.approx(
            sum(schatten_norm(d, 2) ** 2 for d in m.diffs))

    def test_conditioned_square_uses_alias_at_zero(self):
        filt = make_filtration("corner", dim=3)
        m = martingale_from_final(filt, gaussian_hermitian(filt.algebra, stream(36)))
        s = conditioned_square_function(m)
        assert s.hermitian and min_eigenvalue(s) > -1e-10

    def test_triple_shapes(self):
        filt = make_filtration("corner", dim=3)
        m = martingale_from_final(filt, gaussian_hermitian(filt.algebra, stream(37)))
        S, s, z = square_functions(m, 4.0)
        assert min_eigenvalue(z) > -1e-10
        with pytest.raises(DomainError):
            diagonal_p_function(m, 1.5)


class TestLiftedFiltrations:
    def test_matrix_lift_axioms(self):
        base = make_filtration("corner", dim=3)
        big = lift_with_matrix_factor(base, 2)
        dev = big.validate(stream(38), samples=4)
        assert max(dev.values()) < 1e-9

    def test_sign_matrix_axioms(self):
        base = make_filtration("corner", dim=2)
        big = sign_matrix_filtration(3, 2, base)
        dev = big.validate(stream(39), samples=4)
        assert max(dev.values()) < 1e-9
        assert big.algebra.n_blocks == 4
        assert big.algebra.dims[0] == 6
