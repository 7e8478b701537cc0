"""Seeded random instance generation.

Every randomized verification in the package draws its inputs here, from
complex-Gaussian Hermitian ensembles over a named, stable generator, so a
(seed, trial) pair pins the instance exactly.
"""

from __future__ import annotations

import numpy as np

from .filtration import (
    Filtration,
    Martingale,
    cond_exp,
    make_filtration,
    martingale_from_diffs,
    martingale_from_final,
    rademacher_operator,
)
from .opalgebra import Operator, TracialAlgebra, operator_norm, psd_sqrt, schatten_norm

__all__ = [
    "stream",
    "gaussian_hermitian",
    "gaussian_psd",
    "random_martingale",
    "strong_triple_parts",
    "triple_family",
    "FAMILY_TEMPLATES",
    "arrow_martingale_pair",
    "classical_tangent_positive_pair",
    "adapted_psd_sequence",
    "arrow_squared_positive_pair",
]


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, key...) built on Philox counters."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1),
                                spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def gaussian_hermitian(
    alg: TracialAlgebra, rng: np.random.Generator, scale: float = 1.0
) -> Operator:
    blocks = []
    for d in alg.dims:
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        blocks.append(scale * (g + g.conj().T) / 2.0)
    return alg.operator(blocks)


def gaussian_psd(
    alg: TracialAlgebra, rng: np.random.Generator, scale: float = 1.0
) -> Operator:
    blocks = []
    for d in alg.dims:
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        g = g / np.sqrt(2.0 * d)
        blocks.append(scale * (g @ g.conj().T))
    return alg.operator(blocks)


def random_martingale(
    filtration: Filtration,
    rng: np.random.Generator,
    sup_norm: float | None = None,
    p_norm: tuple[float, float] | None = None,
) -> Martingale:
    """Martingale of a Gaussian Hermitian draw, optionally norm-normalized."""
    f = gaussian_hermitian(filtration.algebra, rng)
    if sup_norm is not None:
        f = f * (sup_norm / max(operator_norm(f), 1e-12))
    elif p_norm is not None:
        p, target = p_norm
        f = f * (target / max(schatten_norm(f, p), 1e-12))
    return martingale_from_final(filtration, f)


def strong_triple_parts(
    filtration: Filtration, rng: np.random.Generator
) -> tuple[Operator, Martingale, Operator]:
    """(x_N, y, z_N) built to satisfy the strong testing conditions.

    y is a Gaussian martingale with sup norm drawn in [0.5, 4] so that the
    level-1 projection machinery is exercised nontrivially; x and z are square
    roots of sum(dy_k^2) plus independent PSD bumps, which dominate the
    required conditional sums termwise.
    """
    y = random_martingale(filtration, rng, sup_norm=float(rng.uniform(0.5, 4.0)))
    sq = filtration.algebra.zero()
    for d in y.diffs:
        sq = sq + d @ d
    sq = sq.symmetrized()
    bump_x = float(rng.uniform(0.0, 1.0))
    bump_z = float(rng.uniform(0.0, 1.0))
    x = psd_sqrt((sq + gaussian_psd(filtration.algebra, rng, bump_x)).symmetrized())
    z = psd_sqrt((sq + gaussian_psd(filtration.algebra, rng, bump_z)).symmetrized())
    return x, y, z


# Rotating population of small filtration families for the bulk criteria:
# total dimension <= 16 and at most 6 levels each.
FAMILY_TEMPLATES: tuple[tuple[str, dict], ...] = (
    ("corner", {"dim": 4}),
    ("rademacher", {"depth": 3}),
    ("rademacher", {"depth": 2, "matrix_dim": 2}),
    ("matrix_corner", {"outer_dim": 2, "dim": 3}),
    ("rademacher_corner", {"depth": 2, "matrix_dim": 2}),
    ("trivial_full", {"dims": (3,)}),
)

_FAMILY_CACHE: dict = {}


def triple_family(index: int) -> Filtration:
    """Deterministic rotation through the small family templates."""
    kind, params = FAMILY_TEMPLATES[index % len(FAMILY_TEMPLATES)]
    key = (kind, tuple(sorted(params.items())))
    if key not in _FAMILY_CACHE:
        _FAMILY_CACHE[key] = make_filtration(kind, **params)
    return _FAMILY_CACHE[key]


def arrow_martingale_pair(
    dim: int, rng: np.random.Generator
) -> tuple[Martingale, Martingale, tuple[int, ...]]:
    """A corner-filtration martingale and its hook-sign-flipped tangent twin.

    The differences of any corner-filtration martingale are arrow matrices
    (one off-diagonal hook plus a trace-balanced diagonal); flipping the hook
    of step k by a sign gamma_k is a diagonal unitary conjugation, so the two
    martingales have conditionally identical spectral data step by step.
    """
    filt = make_filtration("corner", dim=dim)
    a = martingale_from_final(filt, gaussian_hermitian(filt.algebra, rng))
    gammas = tuple(int(g) for g in rng.choice((-1, 1), size=dim + 1))
    db = [a.diffs[0]]
    for k in range(1, dim + 1):
        da = a.diffs[k].data[0]
        if k >= 2 and gammas[k] == -1:
            d = np.ones(dim)
            d[k - 1] = -1.0
            db.append(filt.algebra.operator([(d[:, None] * da) * d[None, :]]))
        else:
            db.append(a.diffs[k])
    b = martingale_from_diffs(filt, db, validate=False)
    return a, b, gammas


def classical_tangent_positive_pair(
    depth: int, matrix_dim: int, rng: np.random.Generator
) -> tuple[list[Operator], list[Operator], Filtration]:
    """Tangent positive sequences (1 ± eps_n) w_n with predictable PSD w_n."""
    filt = make_filtration("rademacher", depth=depth, matrix_dim=matrix_dim)
    ident = filt.algebra.identity()
    u0 = cond_exp(filt, 0, gaussian_psd(filt.algebra, rng))
    us, vs = [u0], [u0]
    for n in range(1, depth + 1):
        w = cond_exp(filt, n - 1, gaussian_psd(filt.algebra, rng))
        eps = rademacher_operator(filt, n - 1)
        us.append(((ident + eps) @ w).symmetrized())
        vs.append(((ident - eps) @ w).symmetrized())
    return us, vs, filt


def adapted_psd_sequence(
    filtration: Filtration, rng: np.random.Generator, steps: int | None = None
) -> list[Operator]:
    """Adapted positive operators u_n = E_n(PSD draw)."""
    steps = filtration.n_levels if steps is None else steps
    return [
        cond_exp(filtration, n, gaussian_psd(filtration.algebra, rng))
        for n in range(steps)
    ]


def arrow_squared_positive_pair(
    dim: int, rng: np.random.Generator
) -> tuple[list[Operator], list[Operator], Filtration]:
    """Tangent positive sequences from squared arrow differences.

    With (da_k) the differences of a corner martingale and (db_k) their
    hook-sign conjugates, the squares da_k^2 and db_k^2 = S_k da_k^2 S_k are
    adapted, positive and tangent.
    """
    a, b, _ = arrow_martingale_pair(dim, rng)
    u = [(d @ d).symmetrized() for d in a.diffs]
    v = [(d @ d).symmetrized() for d in b.diffs]
    return u, v, a.filtration
