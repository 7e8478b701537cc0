"""Schur (entrywise) multipliers on finite Schatten classes.

Patterns are 0/1 matrices; the reversed-L family (constant on L-shaped
hooks) is the one carrying a sharp O(p) multiplier bound, proved through the
corner-filtration martingale of the multiplied matrix and its sign-flipped
tangent partner.  Exact multiplier norms are not computable, so the module
only certifies lower bounds (attained ratios) and checks them against the
theorem's upper bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .applications import dominated_constant
from .errors import DomainError, StructureError
from .filtration import make_filtration, martingale_from_final
from .instances import stream
from .reports import VerifyReport

__all__ = [
    "Pattern",
    "reversed_l_pattern",
    "triangular_pattern",
    "interlace_pattern",
    "schur_multiply",
    "triangular_projection",
    "interlace_t",
    "matrix_p_norm",
    "schur_norm_lower",
    "verify_reversed_L",
    "reversed_l_bound",
]


@dataclass(frozen=True, eq=False)
class Pattern:
    """0/1 multiplier pattern with a structural tag."""

    entries: np.ndarray
    tag: str = "custom"

    def __post_init__(self):
        e = np.asarray(self.entries)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise StructureError("patterns must be square")
        if not np.all((e == 0) | (e == 1)):
            raise DomainError("pattern entries must be 0 or 1")
        object.__setattr__(self, "entries", e.astype(float))
        if self.tag == "reversed-L":
            _check_reversed_l(self.entries)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def _check_reversed_l(e: np.ndarray) -> None:
    # off-diagonal entries must depend on max(i, j) only
    n = e.shape[0]
    for k in range(1, n):
        row = e[k, :k]
        col = e[:k, k]
        if not (np.all(row == row[0]) and np.all(col == row[0])):
            raise StructureError("not a reversed-L pattern")


def reversed_l_pattern(m_off, n_diag) -> Pattern:
    """Pattern with off-diagonal hooks m_2..m_N and diagonal n_1..n_N."""
    n_diag = [int(v) for v in n_diag]
    m_off = [int(v) for v in m_off]
    n = len(n_diag)
    if len(m_off) != n - 1:
        raise StructureError("need N-1 hook values for an N x N pattern")
    e = np.zeros((n, n))
    for i in range(n):
        e[i, i] = n_diag[i]
        for j in range(n):
            if i != j:
                e[i, j] = m_off[max(i, j) - 1]
    return Pattern(e, "reversed-L")


def triangular_pattern(n: int) -> Pattern:
    return Pattern(np.triu(np.ones((n, n))), "triangular")


def interlace_pattern(n2: int) -> Pattern:
    """The even/odd reversed-L pattern satisfying m * t(A) = t(T(A))."""
    if n2 % 2:
        raise DomainError("the interlacing pattern has even dimension")
    hooks = [1 if (k + 2) % 2 == 0 else 0 for k in range(n2 - 1)]
    diag = [1 if (k + 1) % 2 == 0 else 0 for k in range(n2)]
    return reversed_l_pattern(hooks, diag)


def _pattern_matrix(m) -> np.ndarray:
    if isinstance(m, Pattern):
        return m.entries
    return np.asarray(m)


def schur_multiply(m, a: np.ndarray) -> np.ndarray:
    """Entrywise (Hadamard) product m * a."""
    mm = _pattern_matrix(m)
    a = np.asarray(a)
    if mm.shape != a.shape:
        raise StructureError("pattern and matrix shapes differ")
    return mm * a


def triangular_projection(a: np.ndarray) -> np.ndarray:
    """Keep the upper triangle (diagonal included), zero the rest."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise StructureError("need a square matrix")
    return np.triu(a)


def interlace_t(a: np.ndarray) -> np.ndarray:
    """Interlace zero rows/columns: entry (i, j) lands at (2i, 2j+1), 0-based.

    A leading zero column is inserted in front, so a 1 x 1 matrix [alpha]
    becomes [[0, alpha], [0, 0]]; p-norms are unchanged.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise StructureError("need a square matrix")
    n = a.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=a.dtype)
    out[0::2, 1::2] = a
    return out


def matrix_p_norm(a: np.ndarray, p: float) -> float:
    """Schatten p-norm of a plain matrix (usual trace)."""
    if p != math.inf and p < 1:
        raise DomainError("needs p >= 1")
    sv = np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)
    if p == math.inf:
        return float(sv.max()) if sv.size else 0.0
    return float(np.sum(sv**p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# numerical lower bounds on multiplier norms
# ---------------------------------------------------------------------------


def _ratio(m: np.ndarray, a: np.ndarray, p: float) -> float:
    na = matrix_p_norm(a, p)
    if na < 1e-300:
        return 0.0
    return matrix_p_norm(m * a, p) / na


def _fd_norm_gradient(x: np.ndarray, p: float, h: float,
                      mask: np.ndarray | None = None) -> np.ndarray:
    """Forward finite-difference gradient of ||x||_p over real/imag entries.

    Entries where `mask` is False are known not to move the norm and are
    skipped; perturbed copies are decomposed in one batched SVD call.
    """
    n = x.shape[0]
    if mask is None:
        idx = [(i, j) for i in range(n) for j in range(n)]
    else:
        idx = [tuple(ij) for ij in np.argwhere(mask)]
    if not idx:
        return np.zeros_like(x)
    stack = np.repeat(x[None, :, :], 2 * len(idx), axis=0)
    for t, (i, j) in enumerate(idx):
        stack[2 * t, i, j] += h
        stack[2 * t + 1, i, j] += 1j * h
    sv = np.linalg.svd(stack, compute_uv=False)
    vals = np.sum(sv**p, axis=1) ** (1.0 / p)
    base = matrix_p_norm(x, p)
    g = np.zeros_like(x)
    for t, (i, j) in enumerate(idx):
        g[i, j] = (vals[2 * t] - base) / h + 1j * (vals[2 * t + 1] - base) / h
    return g


def _fd_gradient(m: np.ndarray, a: np.ndarray, p: float, h: float) -> np.ndarray:
    """Finite-difference gradient of the ratio ||m*a||_p / ||a||_p.

    Assembled by the quotient rule from the two norm gradients; the numerator
    only responds to entries where the pattern is nonzero.
    """
    den = matrix_p_norm(a, p)
    num = matrix_p_norm(m * a, p)
    g_num = m * _fd_norm_gradient(m * a, p, h, mask=(m != 0))
    g_den = _fd_norm_gradient(a, p, h)
    return (g_num * den - num * g_den) / den**2


def _hilbert_start(n: int) -> np.ndarray:
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    return (1.0 / (i - j + 0.5)).astype(complex)


def schur_norm_lower(m, p: float, budget: int = 40, restarts: int = 3,
                     seed: int = 0, starts=None,
                     return_argmax: bool = False):
    """Certified lower bound on the S^p -> S^p norm of a multiplier.

    Maximizes ||m*a||_p / ||a||_p by normalized finite-difference gradient
    ascent (step 1e-6 ||a||_2) from `restarts` seeded random starts plus one
    deterministic Cauchy-kernel start; the returned value is an attained
    ratio, hence a genuine lower bound.
    """
    if budget <= 0:
        raise DomainError("the iteration budget must be positive")
    if not (1.0 < p < math.inf):
        raise DomainError("needs 1 < p < inf")
    mm = _pattern_matrix(m).astype(float)
    n = mm.shape[0]
    rng = stream(seed, 3301)
    start_list = [
        _hilbert_start(n),
    ]
    for _ in range(max(restarts, 0)):
        start_list.append(rng.standard_normal((n, n))
                          + 1j * rng.standard_normal((n, n)))
    if starts is not None:
        start_list.extend(np.asarray(s, dtype=complex) for s in starts)

    best_val = 0.0
    best_arg = start_list[0]
    for a0 in start_list:
        a = a0 / max(np.linalg.norm(a0), 1e-300)
        val = _ratio(mm, a, p)
        lr = 0.5
        for _ in range(budget):
            h = 1e-6 * np.linalg.norm(a)
            g = _fd_gradient(mm, a, p, h)
            gn = np.linalg.norm(g)
            if gn < 1e-14:
                break
            cand = a + lr * np.linalg.norm(a) * g / gn
            cand_val = _ratio(mm, cand, p)
            if cand_val > val:
                a, val = cand, cand_val
                lr = min(lr * 1.3, 1.0)
            else:
                lr *= 0.5
                if lr < 1e-6:
                    break
        if val > best_val:
            best_val, best_arg = val, a
    if return_argmax:
        return float(best_val), best_arg
    return float(best_val)


# ---------------------------------------------------------------------------
# the reversed-L theorem
# ---------------------------------------------------------------------------


def reversed_l_bound(p: float) -> float:
    """(1 + C_p)/2 with C_p the dominated-martingale constant."""
    return (1.0 + dominated_constant(p)) / 2.0


def verify_reversed_L(m: Pattern, p: float, trials: int = 200,
                      seed: int = 0) -> VerifyReport:
    """Check ||m*a||_p <= (1+C_p)/2 ||a||_p on random self-adjoint matrices.

    For each trial the corner-filtration martingale (a_n) of a is built, the
    hook signs gamma_k = 2 m_k - 1 produce the tangent partner (b_n) by
    conjugating each difference with diag(1,..,gamma_k,..,1), and the exact
    identity m_unit * a = (a_N + b_N)/2 is asserted before the norm bound
    (m_unit is the pattern with its diagonal reset to ones, as in the
    diagonal-splitting reduction).
    """
    if m.tag != "reversed-L":
        raise DomainError("needs a reversed-L pattern")
    if p < 2:
        raise DomainError("the direct verification needs p >= 2")
    n = m.size
    filt = make_filtration("corner", dim=n)
    alg = filt.algebra
    m_unit = m.entries.copy()
    np.fill_diagonal(m_unit, 1.0)
    hooks = np.array([m.entries[k, 0] for k in range(1, n)])  # m_2..m_N
    gammas = 2.0 * hooks - 1.0

    const = reversed_l_bound(p)
    rng = stream(seed, 5501)
    worst_ratio = 0.0
    worst_identity = 0.0
    for _ in range(max(trials, 1)):
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        a = (g + g.conj().T) / 2.0
        mart = martingale_from_final(filt, alg.operator([a]))
        b_final = mart.diffs[0].data[0].copy()
        for k in range(1, n + 1):
            da = mart.diffs[k].data[0]
            if k >= 2:
                d = np.ones(n)
                d[k - 1] = gammas[k - 2]
                db = (d[:, None] * da) * d[None, :]
            else:
                db = da
            b_final = b_final + db
        identity_dev = np.abs(m_unit * a - (a + b_final) / 2.0).max()
        worst_identity = max(worst_identity, float(identity_dev))
        scale = 1.0 + np.abs(a).max()
        if identity_dev > 1e-12 * scale:
            raise DomainError("the martingale splitting identity failed")
        ratio = _ratio(m.entries, a, p)
        worst_ratio = max(worst_ratio, ratio)
    return VerifyReport.compare(
        worst_ratio, const, const,
        {"p": p, "trials": trials, "identity_dev": worst_identity},
    )
