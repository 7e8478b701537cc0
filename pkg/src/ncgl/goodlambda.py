"""Good-lambda testing conditions and the core distribution/moment bounds.

A triple (x_N, y, z_N) -- a self-adjoint martingale flanked by two
self-adjoint operators -- either satisfies the trace testing conditions or it
does not; when it does, the trace inequality

    tau((I - R_N)(y_N - I)^2) <= 2 tau((I - R_N)(x_N^2 + z_N^2))

holds for the level-1 Cuculescu sequence R, the tail bound

    tau(I - Q_N) <= 4 (beta-1)^{-2} tau((I - R_N)(x_N^2 + z_N^2))

holds for every beta > 1, and for p > 2 the weak maximal operators obey the
explicit moment estimates that combine into

    ||y_N||_p <= C_{p,B} (||x_N||_p^2 + ||z_N||_p^2)^{1/2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cuculescu import cuculescu_q, cuculescu_r, weak_max
from .errors import DomainError
from .filtration import Martingale, cond_exp
from .instances import gaussian_hermitian, stream
from .opalgebra import (
    Interval,
    Operator,
    Projection,
    min_eigenvalue,
    operator_norm,
    schatten_norm,
    spectral_projection,
    trace,
    trace_pair,
)
from .reports import VerifyReport, report_tolerance

__all__ = [
    "Triple",
    "check_testing",
    "check_strong_testing",
    "hypothesis_status",
    "verify_core",
    "verify_tail",
    "verify_good_hom",
    "moment_constant",
    "verify_moment",
    "MomentReports",
]


@dataclass(frozen=True, eq=False)
class Triple:
    """(x_N, y, z_N) on one filtered algebra; x_N, z_N and all y_n Hermitian."""

    x: Operator
    y: Martingale
    z: Operator

    def __post_init__(self):
        if not (self.x.hermitian and self.z.hermitian):
            raise DomainError("x_N and z_N must be Hermitian")
        if not self.y.is_selfadjoint():
            raise DomainError("y must be a self-adjoint martingale")
        if self.x.algebra.dims != self.y.algebra.dims or \
           self.z.algebra.dims != self.y.algebra.dims:
            raise DomainError("triple members live on different algebras")

    @property
    def filtration(self):
        return self.y.filtration

    @property
    def algebra(self):
        return self.y.algebra

    def scale(self, mu: float) -> "Triple":
        return Triple(self.x * mu, self.y.scale(mu), self.z * mu)


# ---------------------------------------------------------------------------
# testing conditions
# ---------------------------------------------------------------------------


def check_testing(
    t: Triple,
    seed: int = 0,
    n_random: int = 50,
    beta_for_q: float = 2.0,
) -> tuple[bool, float, float]:
    """Check the two trace testing conditions of the triple.

    Condition (i) is the exact double-sum domination by tau((I-R_N) x_N^2).
    Condition (ii) quantifies over all projections in the level subalgebras;
    it is sampled over a structured family (identity, the R_j and Q_j for
    j <= k, and seeded random spectral projections in the range of E_k), so a
    pass here is a "sampled-pass", not a certificate.  Returns
    (passed, slack_i, slack_ii) where the slacks are the worst margins seen.
    """
    y = t.y
    seq = cuculescu_r(y, 1.0)
    qseq = cuculescu_q(y, beta_for_q)
    ident = t.algebra.identity()

    x_sq = (t.x @ t.x).symmetrized()
    z_sq = (t.z @ t.z).symmetrized()
    dy_sq = [(d @ d).symmetrized() for d in y.diffs]

    # (i)
    double_sum = 0.0
    for n in range(y.N + 1):
        d_n = seq.R(n - 1).op - seq.R(n).op
        if d_n.entry_max() == 0.0:
            continue
        r_prev = seq.R(n - 1).op
        for k in range(n + 1, y.N + 1):
            inner = y.diffs[k] @ r_prev @ y.diffs[k]
            double_sum += float(trace_pair(inner, d_n).real)
    rhs_i = float(trace_pair(x_sq, ident - seq.final().op).real)
    slack_i = rhs_i - double_sum
    pass_i = slack_i >= -report_tolerance(rhs_i)

    # (ii): sampled projections in the range of E_k
    rng = stream(seed, 7701)
    slack_ii = math.inf
    pass_ii = True
    for k in range(y.N + 1):
        w = z_sq - dy_sq[k]
        candidates: list[Projection] = [Projection(ident, check=False)]
        candidates += [seq.R(j) for j in range(k + 1)]
        candidates += [qseq.R(j) for j in range(k + 1)]
        for _ in range(n_random):
            h = cond_exp(t.filtration, k, gaussian_hermitian(t.algebra, rng))
            lo, hi = -operator_norm(h), operator_norm(h)
            cut = float(rng.uniform(lo, hi)) if hi > lo else 0.0
            candidates.append(spectral_projection(h, Interval.at_least(cut)))
        for p in candidates:
            gain = float(trace_pair(w, p.op).real)
            ref = float(trace_pair(z_sq, p.op).real)
            slack_ii = min(slack_ii, gain)
            if gain < -report_tolerance(ref):
                pass_ii = False
    return bool(pass_i and pass_ii), float(slack_i), float(slack_ii)


def check_strong_testing(t: Triple) -> tuple[bool, float, float]:
    """PSD form of the testing conditions, checked for every level k.

    Returns (passed, margin_x, margin_z): the minimum eigenvalues of
    E_k(x_N^2) - sum_{m>k} E_k(dy_m^2) and E_k(z_N^2) - dy_k^2 over k; both
    must be >= -1e-8.
    """
    y = t.y
    filt = t.filtration
    x_sq = (t.x @ t.x).symmetrized()
    z_sq = (t.z @ t.z).symmetrized()
    dy_sq = [(d @ d).symmetrized() for d in y.diffs]

    suffix = t.algebra.zero()
    suffixes = [suffix]  # suffixes[j] = sum_{m > N-j} dy_m^2, built backwards
    for m in range(y.N, 0, -1):
        suffix = suffix + dy_sq[m]
        suffixes.append(suffix)
    suffixes = suffixes[::-1]  # suffixes[k] = sum_{m>k} dy_m^2

    margin_x = math.inf
    margin_z = math.inf
    for k in range(y.N + 1):
        gap_x = cond_exp(filt, k, x_sq - suffixes[k])
        margin_x = min(margin_x, min_eigenvalue(gap_x))
        gap_z = cond_exp(filt, k, z_sq) - dy_sq[k]
        margin_z = min(margin_z, min_eigenvalue(gap_z))
    passed = margin_x >= -1e-8 and margin_z >= -1e-8
    return bool(passed), float(margin_x), float(margin_z)


def hypothesis_status(t: Triple, seed: int = 0) -> str:
    """'strong-pass' (certificate), 'sampled-pass', or 'unverified'."""
    if check_strong_testing(t)[0]:
        return "strong-pass"
    if check_testing(t, seed=seed)[0]:
        return "sampled-pass"
    return "unverified"


# ---------------------------------------------------------------------------
# the two distribution inequalities
# ---------------------------------------------------------------------------


def _rhs_weight(t: Triple, proj: Operator) -> float:
    x_sq = (t.x @ t.x).symmetrized()
    z_sq = (t.z @ t.z).symmetrized()
    return float(trace_pair(x_sq + z_sq, proj).real)


def verify_core(t: Triple, level: float = 1.0,
                hypothesis: str | None = None) -> VerifyReport:
    """tau((I-R_N)(y_N - level)^2) <= 2 tau((I-R_N)(x_N^2 + z_N^2))."""
    seq = cuculescu_r(t.y, level)
    ident = t.algebra.identity()
    tail = ident - seq.final().op
    dev = t.y.final - ident * level
    lhs = float(trace_pair(dev @ tail @ dev, ident).real)
    rhs = 2.0 * _rhs_weight(t, tail)
    meta = {"level": level,
            "hypothesis": hypothesis if hypothesis is not None
            else hypothesis_status(t)}
    return VerifyReport.compare(lhs, rhs, 2.0, meta)


def verify_tail(t: Triple, beta: float, level: float = 1.0,
                hypothesis: str | None = None) -> VerifyReport:
    """tau(I - Q_N^{level*beta}) <= 4 ((beta-1) level)^{-2} tau((I-R_N^{level})
    (x_N^2 + z_N^2)); at level = 1 this is the plain tail bound."""
    if not (beta > 1):
        raise DomainError("beta must exceed 1")
    if not (level > 0):
        raise DomainError("the level must be positive")
    # the threshold ratio beta exceeds 1; the absolute cut beta*level may not
    qseq = cuculescu_r(t.y, beta * level)
    rseq = cuculescu_r(t.y, level)
    ident = t.algebra.identity()
    lhs = trace(ident - qseq.final().op)
    const = 4.0 / ((beta - 1.0) * level) ** 2
    rhs = const * _rhs_weight(t, ident - rseq.final().op)
    meta = {"beta": beta, "level": level,
            "hypothesis": hypothesis if hypothesis is not None
            else hypothesis_status(t)}
    return VerifyReport.compare(lhs, rhs, const, meta)


def verify_good_hom(t: Triple, B: float, k: int,
                    hypothesis: str | None = None) -> VerifyReport:
    """Homogenized tail bound on the corrected projections at scale B^k.

    tau(P_N^{B^{k+2}} - P_N^{B^{k+1}})
        <= 4 B^{-2k} (B-1)^{-2} tau((I - P_N^{B^k})(x_N^2 + z_N^2)).
    """
    from .cuculescu import corrected_p

    cp = corrected_p(t.y, B, k_min=k, final_only=True)
    N = t.y.N
    lhs = trace(cp.P(N, k + 2).op - cp.P(N, k + 1).op)
    const = 4.0 * B ** (-2.0 * k) / (B - 1.0) ** 2
    rhs = const * _rhs_weight(t, t.algebra.identity() - cp.P(N, k).op)
    meta = {"B": B, "k": k,
            "hypothesis": hypothesis if hypothesis is not None
            else hypothesis_status(t)}
    return VerifyReport.compare(lhs, rhs, const, meta)


# ---------------------------------------------------------------------------
# moment estimates
# ---------------------------------------------------------------------------


def moment_constant(p: float, B: float) -> tuple[float, float]:
    """(C_{p,B}, simplified 12p bound) for the final moment inequality."""
    if not (p > 2):
        raise DomainError("the moment bound needs p > 2")
    if not (B > 1):
        raise DomainError("the base B must exceed 1")
    first = (2.0 * p * B ** (p - 1.0) * (B - 1.0) / (1.0 - B ** (-p))) ** (1.0 / p)
    second = 2.0 * B ** (p / 2.0) / ((B - 1.0) * math.sqrt(1.0 - B ** (2.0 - p)))
    c_pb = first * second
    simplified = 12.0 * p / math.sqrt(1.0 - (1.0 + 1.0 / p) ** (2.0 - p))
    return float(c_pb), float(simplified)


@dataclass(frozen=True, eq=False)
class MomentReports:
    """Sub-reports of the moment verification: a_N^+, a_N^-, final bounds."""

    max_plus: VerifyReport
    max_minus: VerifyReport
    moment: VerifyReport
    moment_simplified: VerifyReport
    weak_plus: object = None
    weak_minus: object = None

    def all_passed(self) -> bool:
        return (self.max_plus.passed and self.max_minus.passed
                and self.moment.passed and self.moment_simplified.passed)


def verify_moment(t: Triple, p: float, B: float | None = None,
                  hypothesis: str | None = None) -> MomentReports:
    """Verify the weak-maximal and final moment bounds at exponent p > 2.

    B defaults to 1 + 1/p, the choice under which C_{p,B} collapses to the
    simplified 12p bound.  The strong testing conditions are scale invariant,
    so the mu = 1 hypothesis check covers every rescaled level.
    """
    if not (p > 2):
        raise DomainError("the moment bound needs p > 2")
    if B is None:
        B = 1.0 + 1.0 / p
    if not (B > 1):
        raise DomainError("the base B must exceed 1")
    hyp = hypothesis if hypothesis is not None else hypothesis_status(t)

    hyp_norm = math.sqrt(schatten_norm(t.x, p) ** 2 + schatten_norm(t.z, p) ** 2)
    max_const = 2.0 * B ** (p / 2.0) / ((B - 1.0) * math.sqrt(1.0 - B ** (2.0 - p)))
    c_pb, simplified = moment_constant(p, B)

    wm_plus = weak_max(t.y, B, "+")
    wm_minus = weak_max(t.y, B, "-")
    meta = {"p": p, "B": B, "hypothesis": hyp}

    rep_plus = VerifyReport.compare(
        schatten_norm(wm_plus.operator, p), max_const * hyp_norm, max_const,
        {**meta, "side": "+"},
    )
    rep_minus = VerifyReport.compare(
        schatten_norm(wm_minus.operator, p), max_const * hyp_norm, max_const,
        {**meta, "side": "-"},
    )
    y_norm = schatten_norm(t.y.final, p)
    rep_final = VerifyReport.compare(
        y_norm, c_pb * hyp_norm, c_pb, {**meta, "bound": "C_pB"},
    )
    rep_simple = VerifyReport.compare(
        y_norm, simplified * hyp_norm, simplified, {**meta, "bound": "12p"},
    )
    return MomentReports(rep_plus, rep_minus, rep_final, rep_simple,
                         weak_plus=wm_plus, weak_minus=wm_minus)
