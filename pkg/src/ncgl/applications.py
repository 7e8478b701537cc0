"""Burkholder-Gundy, transform, Stein/Doob, tangent-sequence and refined-Doob
verifications, together with the matrix embeddings they are proved through.

All `verify_*` functions compute both sides of the final inequality with the
constants assembled exactly as in the underlying proofs and report the
margin; the `*_embed` constructors build the enlarged-algebra instances and
assert their structural identities on the spot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .filtration import (
    Filtration,
    Martingale,
    cond_exp,
    lift_with_matrix_factor,
    make_filtration,
    martingale_from_diffs,
    sign_matrix_filtration,
    square_function,
)
from .instances import gaussian_hermitian, stream
from .opalgebra import (
    Interval,
    Operator,
    cluster_eigenvalues,
    min_eigenvalue,
    operator_abs,
    operator_norm,
    psd_sqrt,
    schatten_norm,
    spectral_projection,
    trace,
    trace_pair,
)
from .reports import VerifyReport

__all__ = [
    "EmbeddedInstance",
    "bg_embed",
    "bg_constant_norm_by_square",
    "bg_constant_square_by_norm",
    "verify_bg",
    "BGReports",
    "interp_bound",
    "transform_constant",
    "verify_transform",
    "doob_embed",
    "dual_doob_constant",
    "stein_constant",
    "verify_dual_doob",
    "verify_stein",
    "check_tangent",
    "tangent_moment_deviation",
    "tangent_counterexample",
    "CounterexampleReport",
    "counterexample_pair",
    "dominated_constant",
    "verify_dominated",
    "positive_tangent_constant",
    "verify_positive_tangent",
    "refined_doob_constant",
    "refined_doob",
]


# ---------------------------------------------------------------------------
# constants, assembled from the proofs
# ---------------------------------------------------------------------------


def _moment_factor(p: float) -> float:
    """12p / (1 - (1+1/p)^{2-p})^{1/2}, the simplified moment constant."""
    if not (p > 2):
        raise DomainError("this constant needs p > 2")
    return 12.0 * p / math.sqrt(1.0 - (1.0 + 1.0 / p) ** (2.0 - p))


def bg_constant_norm_by_square(p: float) -> float:
    """Constant in ||y_N||_p <= C ||S_N(y)||_p (1 at p = 2)."""
    if p < 2:
        raise DomainError("needs p >= 2")
    if p == 2:
        return 1.0
    return math.sqrt(2.0) * _moment_factor(p)


def bg_constant_square_by_norm(p: float) -> float:
    """Constant in ||S_N(x)||_p <= C ||x_N||_p (1 at p = 2)."""
    if p < 2:
        raise DomainError("needs p >= 2")
    if p == 2:
        return 1.0
    return (
        _moment_factor(p)
        * math.sqrt(1.0 + 2.0 ** (2.0 - 4.0 / p))
        * (1.0 + 2.0 ** (p - 2.0)) ** (1.0 / p)
    )


def transform_constant(p: float) -> float:
    """Constant for martingale transforms at p >= 2 (1 at p = 2)."""
    if p < 2:
        raise DomainError("needs p >= 2")
    if p == 2:
        return 1.0
    return _moment_factor(p) * math.sqrt(1.0 + 2.0 ** (2.0 - 4.0 / p))


def dominated_constant(p: float) -> float:
    """Constant for conditionally dominated martingales (Theorem on tangent
    differences); same assembly as the transform constant."""
    return transform_constant(p)


def dual_doob_constant(p: float) -> float:
    """Constant for || sum E_n(u_n) ||_p <= C || sum u_n ||_p, p >= 1.

    p = 1 is an exact trace identity (constant 1); for p > 1 the moment bound
    is applied at exponent 2p on the enlarged algebra and squared, picking up
    the 2^{1/2} from x = z and 2^{1/(2p)} from the interpolation step.
    """
    if p < 1:
        raise DomainError("needs p >= 1")
    if p == 1:
        return 1.0
    q = 2.0 * p
    return (math.sqrt(2.0) * _moment_factor(q) * 2.0 ** (1.0 / q)) ** 2


def stein_constant(p: float) -> float:
    """Constant for the conditioned square-function bound at p >= 2."""
    if p < 2:
        raise DomainError("needs p >= 2")
    return math.sqrt(dual_doob_constant(p / 2.0))


def positive_tangent_constant(p: float, kappa: float = 1.0) -> float:
    """Constant for sums of tangent positive operators.

    For p > 2 the triangle-inequality route gives 1 + (1+kappa) C_p with C_p
    the dominated-martingale constant; for 1 <= p <= 2 the square-function
    route runs through both Burkholder-Gundy directions at exponent 2p.
    """
    if p < 1:
        raise DomainError("needs p >= 1")
    if p >= 2:
        return 1.0 + (1.0 + kappa) * dominated_constant(p)
    q = 2.0 * p
    return (
        bg_constant_square_by_norm(q)
        * dominated_constant(q) * math.sqrt(kappa)
        * bg_constant_norm_by_square(q)
    ) ** 2


def refined_doob_constant(p: float) -> float:
    """Constant for || sum E_{n-1}(u_n) ||_p <= c_p || sum u_n ||_p, adapted u.

    For p >= 2: (1 + 3 C_p)/2 with C_p the tangent positive-sum constant; for
    1 <= p < 2 the plain dual-Doob constant is used.
    """
    if p < 1:
        raise DomainError("needs p >= 1")
    if p < 2:
        return dual_doob_constant(p)
    return (1.0 + 3.0 * positive_tangent_constant(p)) / 2.0


# ---------------------------------------------------------------------------
# embeddings
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EmbeddedInstance:
    """An enlarged-algebra instance together with its structural pieces."""

    big_algebra: object
    big_filtration: Filtration
    y: Martingale
    x_tilde: object  # Martingale or Operator
    z: Operator | None
    provenance: str
    extras: dict = field(default_factory=dict)


def _outer_unit(i: int, j: int, outer: int) -> np.ndarray:
    e = np.zeros((outer, outer), dtype=complex)
    e[i, j] = 1.0
    return e


def _embed_outer(big_filt: Filtration, outer: int, i: int, j: int,
                 base_op: Operator, sign_coord: int | None = None) -> Operator:
    """e_{ij} (x) [sign] (x) base_op on the lifted algebra."""
    unit = _outer_unit(i, j, outer)
    blocks = []
    labels = big_filt.layout.atom_labels
    n_base_blocks = len(base_op.data)
    if n_base_blocks not in (1, big_filt.algebra.n_blocks):
        raise DomainError("base operator does not match the lifted block layout")
    for b in range(big_filt.algebra.n_blocks):
        base_block = base_op.data[b if n_base_blocks > 1 else 0]
        m = np.kron(unit, base_block)
        if sign_coord is not None:
            m = m * float(labels[b][sign_coord])
        blocks.append(m)
    return big_filt.algebra.operator(blocks)


def bg_embed(x: Martingale) -> EmbeddedInstance:
    """Embed a martingale into M_{N+2} (x) M so its square function becomes a
    corner of the modulus of a bigger self-adjoint martingale.

    Asserts y_n^2 >= e_{11} (x) S_n^2(x) and dy_n^2 = (dx~_n)^2 on the spot.
    """
    if not x.is_selfadjoint():
        raise DomainError("the embedding needs a self-adjoint martingale")
    N = x.N
    outer = N + 2
    big = lift_with_matrix_factor(x.filtration, outer)
    dys = []
    dxts = []
    for n, dx in enumerate(x.diffs):
        dys.append(_embed_outer(big, outer, 0, n + 1, dx)
                   + _embed_outer(big, outer, n + 1, 0, dx))
        dxts.append(_embed_outer(big, outer, 0, 0, dx)
                    + _embed_outer(big, outer, n + 1, n + 1, dx))
    y = martingale_from_diffs(big, dys, validate=False)
    x_tilde = martingale_from_diffs(big, dxts, validate=False)

    # structural identities
    running = x.algebra.zero()
    for n, dx in enumerate(x.diffs):
        running = running + dx @ dx
        corner = _embed_outer(big, outer, 0, 0, running.symmetrized())
        gap = (y.values[n] @ y.values[n]).symmetrized() - corner
        scale = 1.0 + operator_norm(y.values[n]) ** 2
        if min_eigenvalue(gap) < -1e-9 * scale:
            raise DomainError("embedding identity y_n^2 >= e11 (x) S_n^2 failed")
        dd = (dys[n] @ dys[n] - dxts[n] @ dxts[n]).entry_max()
        if dd > 1e-10 * scale:
            raise DomainError("embedding identity dy_n^2 = dx~_n^2 failed")
    return EmbeddedInstance(big.algebra, big, y, x_tilde, None, "bg",
                            {"base": x})


def doob_embed(u: list[Operator], filtration: Filtration) -> EmbeddedInstance:
    """Embed a (not necessarily adapted) positive sequence for Doob/Stein.

    Builds M_{N+2} (x) L^inf(signs) (x) M with dy_k = (e_{1,k+2}+e_{k+2,1})
    (x) eps_k (x) E_k(u_k)^{1/2} and x_N = z_N the block diagonal of square
    roots; asserts y_N^2 >= e11 (x) 1 (x) sum E_n(u_n) and the conditional
    identity for dy_k^2.
    """
    if not u:
        raise DomainError("need at least one operator")
    scale = 1.0 + max(operator_norm(ui) for ui in u)
    for ui in u:
        if not ui.hermitian or min_eigenvalue(ui) < -1e-10 * scale:
            raise DomainError("doob_embed needs positive operators")
    N = len(u) - 1
    outer = N + 2
    big = sign_matrix_filtration(outer, N + 1, filtration)

    ident_base = filtration.algebra.identity()
    x_big = _embed_outer(big, outer, 0, 0, psd_sqrt(_sum_ops(u).symmetrized()))
    dys = []
    ceus = []
    for k, uk in enumerate(u):
        ceu = cond_exp(filtration, k, uk).symmetrized()
        ceus.append(ceu)
        root = psd_sqrt(ceu)
        dys.append(_embed_outer(big, outer, 0, k + 1, root, sign_coord=k)
                   + _embed_outer(big, outer, k + 1, 0, root, sign_coord=k))
        x_big = x_big + _embed_outer(big, outer, k + 1, k + 1, psd_sqrt(uk))
    y = martingale_from_diffs(big, dys, validate=False)

    # dy_k^2 equals the big conditional expectation of (e11+e_{k+2,k+2}) (x) u_k
    for k, uk in enumerate(u):
        lhs = (dys[k] @ dys[k]).symmetrized()
        probe = (_embed_outer(big, outer, 0, 0, uk)
                 + _embed_outer(big, outer, k + 1, k + 1, uk))
        rhs = cond_exp(big, k, probe)
        if (lhs - rhs).entry_max() > 1e-10 * scale:
            raise DomainError("embedding identity for dy_k^2 failed")
    corner = _embed_outer(big, outer, 0, 0, _sum_ops(ceus).symmetrized())
    gap = (y.final @ y.final).symmetrized() - corner
    if min_eigenvalue(gap) < -1e-9 * (1.0 + operator_norm(y.final) ** 2):
        raise DomainError("embedding identity y_N^2 >= e11 (x) sum E_n(u_n) failed")
    return EmbeddedInstance(big.algebra, big, y, x_big, x_big, "doob",
                            {"u": tuple(u), "conditional": tuple(ceus)})


def _sum_ops(ops) -> Operator:
    acc = ops[0]
    for o in ops[1:]:
        acc = acc + o
    return acc


# ---------------------------------------------------------------------------
# Burkholder-Gundy and transforms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BGReports:
    norm_by_square: VerifyReport
    square_by_norm: VerifyReport
    interpolation: VerifyReport

    def all_passed(self) -> bool:
        return (self.norm_by_square.passed and self.square_by_norm.passed
                and self.interpolation.passed)


def interp_bound(m: Martingale, p: float) -> VerifyReport:
    """(sum_k ||dx_k||_p^p)^{1/p} <= 2^{1-2/p} ||x_N||_p."""
    if p < 2:
        raise DomainError("the interpolation bound needs p >= 2")
    lhs = sum(schatten_norm(d, p) ** p for d in m.diffs) ** (1.0 / p)
    const = 2.0 ** (1.0 - 2.0 / p)
    rhs = const * schatten_norm(m.final, p)
    return VerifyReport.compare(lhs, rhs, const, {"p": p})


def verify_bg(x: Martingale, p: float) -> BGReports:
    """Both Burkholder-Gundy directions plus the interpolation inequality."""
    if p < 2:
        raise DomainError("the square-function bounds need p >= 2")
    s = square_function(x)
    nx = schatten_norm(x.final, p)
    ns = schatten_norm(s, p)
    c1 = bg_constant_norm_by_square(p)
    c2 = bg_constant_square_by_norm(p)
    r1 = VerifyReport.compare(nx, c1 * ns, c1, {"p": p, "direction": "norm<=C*S"})
    r2 = VerifyReport.compare(ns, c2 * nx, c2, {"p": p, "direction": "S<=C*norm"})
    return BGReports(r1, r2, interp_bound(x, p))


def verify_transform(x: Martingale, v, p: float,
                     n_dual_samples: int = 20, seed: int = 0) -> VerifyReport:
    """Martingale transform dy_n = v_n dx_n with scalar multipliers in [-1,1].

    For p >= 2 the transform bound is checked directly; for 1 < p < 2 only
    the duality pairing |tau(y_N w)| <= C_{p'} ||x_N||_p ||w||_{p'} is checked
    on seeded samples (flagged in the report metadata).
    """
    v = [float(c) for c in v]
    if len(v) != x.N + 1:
        raise DomainError("one multiplier per martingale step expected")
    if any(abs(c) > 1.0 + 1e-12 for c in v):
        raise DomainError("multipliers must lie in [-1, 1]")
    if p <= 1:
        raise DomainError("needs p > 1")
    dys = [d * c for d, c in zip(x.diffs, v)]
    y = martingale_from_diffs(x.filtration, dys, validate=False)
    if p >= 2:
        const = transform_constant(p)
        lhs = schatten_norm(y.final, p)
        rhs = const * schatten_norm(x.final, p)
        return VerifyReport.compare(lhs, rhs, const, {"p": p, "mode": "direct"})
    p_dual = p / (p - 1.0)
    const = transform_constant(p_dual)
    rng = stream(seed, 4242)
    lhs = 0.0
    for _ in range(n_dual_samples):
        w = gaussian_hermitian(x.algebra, rng)
        lhs = max(lhs, abs(float(trace_pair(y.final, w).real))
                  / max(schatten_norm(w, p_dual), 1e-300))
    rhs = const * schatten_norm(x.final, p)
    return VerifyReport.compare(lhs, rhs, const,
                                {"p": p, "mode": "duality-sampled",
                                 "samples": n_dual_samples})


# ---------------------------------------------------------------------------
# Stein and dual Doob
# ---------------------------------------------------------------------------


def verify_dual_doob(u: list[Operator], filtration: Filtration,
                     p: float) -> VerifyReport:
    """|| sum E_n(u_n) ||_p <= C_p || sum u_n ||_p for positive u_n, p >= 1."""
    scale = 1.0 + max(operator_norm(ui) for ui in u)
    for ui in u:
        if not ui.hermitian or min_eigenvalue(ui) < -1e-10 * scale:
            raise DomainError("dual Doob needs positive operators")
    if p < 1:
        raise DomainError("needs p >= 1")
    const = dual_doob_constant(p)
    ce = [cond_exp(filtration, n, ui) for n, ui in enumerate(u)]
    lhs = schatten_norm(_sum_ops(ce), p)
    rhs = const * schatten_norm(_sum_ops(u), p)
    return VerifyReport.compare(lhs, rhs, const, {"p": p})


def verify_stein(u: list[Operator], filtration: Filtration,
                 p: float) -> VerifyReport:
    """|| (sum |E_n(u_n)|^2)^{1/2} ||_p <= C_p || (sum |u_n|^2)^{1/2} ||_p."""
    if p < 2:
        raise DomainError("the duality range p < 2 is out of numerical scope")
    const = stein_constant(p)
    sq_ce = _sum_ops([
        (lambda e: (e.adjoint() @ e))(cond_exp(filtration, n, ui))
        for n, ui in enumerate(u)
    ])
    sq_u = _sum_ops([ui.adjoint() @ ui for ui in u])
    lhs = schatten_norm(psd_sqrt(sq_ce.symmetrized()), p)
    rhs = const * schatten_norm(psd_sqrt(sq_u.symmetrized()), p)
    return VerifyReport.compare(lhs, rhs, const, {"p": p})


# ---------------------------------------------------------------------------
# tangency
# ---------------------------------------------------------------------------


def _check_adapted(seq, filtration: Filtration, name: str) -> None:
    for n, a in enumerate(seq):
        if not a.hermitian:
            raise DomainError(f"{name}_{n} is not Hermitian")
        scale = 1.0 + operator_norm(a)
        if (cond_exp(filtration, n, a) - a).entry_max() > 1e-9 * scale:
            raise DomainError(f"{name}_{n} is not adapted")


def check_tangent(a, b, filtration: Filtration,
                  tol: float = 1e-8) -> tuple[bool, float]:
    """Tangency of two adapted Hermitian sequences.

    For every step n, the union spectrum of a_n and b_n is clustered (merging
    eigenvalues closer than the clustering rule allows) and the conditional
    expectations of the cluster indicators are compared; the sequences are
    tangent when the worst deviation stays below `tol`.
    """
    if len(a) != len(b):
        raise DomainError("sequences must have the same length")
    _check_adapted(a, filtration, "a")
    _check_adapted(b, filtration, "b")
    worst = 0.0
    for n, (an, bn) in enumerate(zip(a, b)):
        scale = max(operator_norm(an), operator_norm(bn))
        eigs = np.concatenate([
            np.concatenate([np.linalg.eigvalsh(0.5 * (blk + blk.conj().T))
                            for blk in op.data])
            for op in (an, bn)
        ])
        for cluster in cluster_eigenvalues(eigs, scale):
            window = Interval(float(cluster.min()), float(cluster.max()), True, True)
            ia = spectral_projection(an, window).op
            ib = spectral_projection(bn, window).op
            dev = operator_norm(cond_exp(filtration, n - 1, ia)
                                - cond_exp(filtration, n - 1, ib))
            worst = max(worst, dev)
    return bool(worst <= tol), float(worst)


def tangent_moment_deviation(a, b, filtration: Filtration) -> float:
    """Cross-validation of tangency through conditional moments.

    Compares E_{n-1}(a_n^m) and E_{n-1}(b_n^m) for m up to the number of
    spectral clusters minus one, normalized by the m-th power of the scale.
    """
    worst = 0.0
    for n, (an, bn) in enumerate(zip(a, b)):
        scale = 1.0 + max(operator_norm(an), operator_norm(bn))
        eigs = np.concatenate([
            np.concatenate([np.linalg.eigvalsh(0.5 * (blk + blk.conj().T))
                            for blk in op.data])
            for op in (an, bn)
        ])
        n_clusters = len(cluster_eigenvalues(eigs, scale))
        pa = an.algebra.identity()
        pb = bn.algebra.identity()
        for m in range(1, n_clusters):
            pa = pa @ an
            pb = pb @ bn
            dev = operator_norm(cond_exp(filtration, n - 1, pa)
                                - cond_exp(filtration, n - 1, pb))
            worst = max(worst, dev / scale ** m)
    return float(worst)


# ---------------------------------------------------------------------------
# the weak-type / L^p counterexample
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CounterexampleReport:
    N: int
    p: float
    weak_y: float            # tau(I_{[1,inf)}(|y_N|))
    l1_x: float              # tau(|x_N|)
    p_norm_y: float
    p_norm_x: float
    expected_weak: float     # N + 1
    expected_l1: float       # 2 sqrt(N)
    ratio: float             # (N+1) / (2 sqrt(N))


def counterexample_pair(N: int) -> tuple[Martingale, Martingale, Filtration]:
    """The tangent martingale pair of the weak-type counterexample.

    dx_n = eps_n (x) (e_{1,n+1} + e_{n+1,1}),  dy_n = eps_n (x) (e_{11} +
    e_{n+1,n+1}) on L^inf(signs) (x) M_{N+1}; intended for moderate N.
    """
    if N > 11:
        raise DomainError("full martingale storage is limited to N <= 11; "
                          "tangent_counterexample handles larger N")
    filt = make_filtration("rademacher", depth=N, matrix_dim=N + 1)
    alg = filt.algebra
    labels = filt.layout.atom_labels
    d = N + 1
    dxs, dys = [], []
    zero = alg.zero()
    dxs.append(zero)
    dys.append(zero)
    for n in range(1, N + 1):
        bx, by = [], []
        for lab in labels:
            s = float(lab[n - 1])
            mx = np.zeros((d, d), dtype=complex)
            mx[0, n] = s
            mx[n, 0] = s
            my = np.zeros((d, d), dtype=complex)
            my[0, 0] = s
            my[n, n] = s
            bx.append(mx)
            by.append(my)
        dxs.append(alg.operator(bx))
        dys.append(alg.operator(by))
    x = martingale_from_diffs(filt, dxs, validate=False)
    y = martingale_from_diffs(filt, dys, validate=False)
    return x, y, filt


def _counterexample_finals(N: int) -> tuple[Operator, Operator]:
    """Final operators x_N, y_N of the pair, built in one stacked allocation.

    Equivalent to summing the differences of :func:`counterexample_pair`,
    but without materializing the 2(N+1) intermediate martingale levels,
    which matters once the sign algebra has thousands of blocks.
    """
    filt = make_filtration("rademacher", depth=N, matrix_dim=N + 1)
    alg = filt.algebra
    eps = np.asarray(filt.layout.atom_labels, dtype=float)  # (blocks, N)
    blocks = eps.shape[0]
    d = N + 1
    x_stack = np.zeros((blocks, d, d), dtype=complex)
    x_stack[:, 0, 1:] = eps
    x_stack[:, 1:, 0] = eps
    y_stack = np.zeros((blocks, d, d), dtype=complex)
    y_stack[:, 0, 0] = eps.sum(axis=1)
    idx = np.arange(1, d)
    y_stack[:, idx, idx] = eps
    return alg.operator(list(x_stack)), alg.operator(list(y_stack))


def tangent_counterexample(N: int, p: float) -> CounterexampleReport:
    """Evaluate the weak-type and L^p quantities of the counterexample pair.

    All four quantities are computed by blockwise eigensolves of the actual
    final operators; N must be odd and at most 13 (2^N sign blocks).
    """
    if N % 2 == 0:
        raise DomainError("the construction needs N odd")
    if not 1 <= N <= 13:
        raise DomainError("N must lie in 1..13")
    x_final, y_final = _counterexample_finals(N)
    abs_y = operator_abs(y_final)
    weak = trace(spectral_projection(abs_y, Interval.at_least(1.0)).op)
    l1 = trace(operator_abs(x_final))
    return CounterexampleReport(
        N=N,
        p=float(p),
        weak_y=float(weak),
        l1_x=float(l1),
        p_norm_y=schatten_norm(y_final, p),
        p_norm_x=schatten_norm(x_final, p),
        expected_weak=float(N + 1),
        expected_l1=2.0 * math.sqrt(N),
        ratio=(N + 1) / (2.0 * math.sqrt(N)),
    )


# ---------------------------------------------------------------------------
# dominated and tangent verifications
# ---------------------------------------------------------------------------


def verify_dominated(x: Martingale, y: Martingale, p: float,
                     kappa: float = 1.0) -> VerifyReport:
    """||y_N||_p <= C_p kappa ||x_N||_p under conditional square domination
    E_{n-1}(dy_n^2) <= E_{n-1}(dx_n^2) and ||dy_n||_p <= kappa ||dx_n||_p."""
    if p < 2:
        raise DomainError("fails for p < 2; needs p >= 2")
    if kappa < 1:
        raise DomainError("kappa must be at least 1")
    hyp_ok = True
    filt = x.filtration
    for n in range(x.N + 1):
        gap = cond_exp(filt, n - 1,
                       (x.diffs[n] @ x.diffs[n] - y.diffs[n] @ y.diffs[n]).symmetrized())
        scale = 1.0 + operator_norm(x.diffs[n]) ** 2
        if min_eigenvalue(gap) < -1e-8 * scale:
            hyp_ok = False
        if schatten_norm(y.diffs[n], p) > kappa * schatten_norm(x.diffs[n], p) \
                * (1.0 + 1e-8) + 1e-12:
            hyp_ok = False
    const = dominated_constant(p) * kappa if p > 2 else kappa
    lhs = schatten_norm(y.final, p)
    rhs = const * schatten_norm(x.final, p)
    return VerifyReport.compare(
        lhs, rhs, const,
        {"p": p, "kappa": kappa,
         "hypothesis": "verified" if hyp_ok else "unverified"})


def verify_positive_tangent(u, v, filtration: Filtration, p: float,
                            kappa: float = 1.0,
                            relaxed: bool = False) -> VerifyReport:
    """|| sum v_n ||_p <= C_p || sum u_n ||_p for tangent positive sequences.

    With `relaxed=True` only the first-moment identity, the conditional
    square domination and the kappa-norm comparison are required (v_n may be
    merely self-adjoint); otherwise full tangency is checked.
    """
    if p < 1:
        raise DomainError("needs p >= 1")
    scale = 1.0 + max(operator_norm(ui) for ui in u)
    for ui in u:
        if not ui.hermitian or min_eigenvalue(ui) < -1e-10 * scale:
            raise DomainError("the u_n must be positive")
    if relaxed:
        hyp_ok = True
        for n, (un, vn) in enumerate(zip(u, v)):
            first = (cond_exp(filtration, n - 1, vn - un)).entry_max()
            sq = cond_exp(filtration, n - 1,
                          (un @ un - vn @ vn).symmetrized())
            if first > 1e-8 * scale or min_eigenvalue(sq) < -1e-8 * scale ** 2:
                hyp_ok = False
            if schatten_norm(vn, p) > kappa * schatten_norm(un, p) * (1 + 1e-8):
                hyp_ok = False
        hyp = "relaxed-verified" if hyp_ok else "unverified"
    else:
        ok, dev = check_tangent(u, v, filtration)
        hyp = "tangent" if ok else "unverified"
    const = positive_tangent_constant(p, kappa)
    lhs = schatten_norm(_sum_ops(v), p)
    rhs = const * schatten_norm(_sum_ops(u), p)
    return VerifyReport.compare(lhs, rhs, const,
                                {"p": p, "kappa": kappa, "hypothesis": hyp})


def refined_doob(u, filtration: Filtration, p: float) -> VerifyReport:
    """|| sum E_{n-1}(u_n) ||_p <= c_p || sum u_n ||_p for adapted positive u."""
    if p < 1:
        raise DomainError("needs p >= 1")
    scale = 1.0 + max(operator_norm(ui) for ui in u)
    for n, ui in enumerate(u):
        if not ui.hermitian or min_eigenvalue(ui) < -1e-10 * scale:
            raise DomainError("refined Doob needs positive operators")
        if (cond_exp(filtration, n, ui) - ui).entry_max() > 1e-9 * scale:
            raise DomainError("refined Doob needs an adapted sequence")
    const = refined_doob_constant(p)
    ce = [cond_exp(filtration, n - 1, ui) for n, ui in enumerate(u)]
    lhs = schatten_norm(_sum_ops(ce), p)
    rhs = const * schatten_norm(_sum_ops(u), p)
    return VerifyReport.compare(lhs, rhs, const, {"p": p})
