"""Structured filtrations, conditional expectations and martingales.

Four families cover everything downstream: the matrix-corner filtration, the
classical sign (Rademacher) algebra, their tensors, and trivial-to-full
two-level filtrations.  Every structured conditional expectation is double
checked against an independent Gram-projection oracle.
"""

import numpy as np

from ncgl import (
    ce_oracle,
    cond_exp,
    make_filtration,
    martingale_from_final,
    schatten_norm,
    square_functions,
    trace,
)
from ncgl.instances import gaussian_hermitian, stream

# the corner filtration on M_4: level k keeps the k x k corner and averages
# the remaining diagonal
filt = make_filtration("corner", dim=4)
a = filt.algebra.operator([np.arange(16.0).reshape(4, 4)])
print("corner E_1 of a 4x4 counting matrix:")
print(cond_exp(filt, 1, a).data[0].real)

# the Gram-projection oracle solves <basis_i, basis_j> c = <basis_i, x>
# directly; it must agree with the structured formulas
rng = stream(3)
worst = 0.0
for fam in ("corner", "rademacher", "matrix_corner"):
    params = {"corner": {"dim": 4}, "rademacher": {"depth": 3},
              "matrix_corner": {"outer_dim": 2, "dim": 3}}[fam]
    f = make_filtration(fam, **params)
    for _ in range(20):
        n = int(rng.integers(0, f.n_levels))
        x = gaussian_hermitian(f.algebra, rng)
        worst = max(worst, (cond_exp(f, n, x) - ce_oracle(f, n, x)).entry_max())
print(f"worst structured-vs-oracle deviation over 60 draws: {worst:.2e}")

# a martingale is the sequence of conditional expectations of its final value
m = martingale_from_final(filt, gaussian_hermitian(filt.algebra, stream(4)))
print("martingale levels:", m.N + 1)
drift = max((cond_exp(filt, n, m.values[n + 1]) - m.values[n]).entry_max()
            for n in range(m.N))
print(f"martingale property drift: {drift:.2e}")

# square functions: S_N, its conditioned version, and the diagonal p-function
S, s, z = square_functions(m, p=4.0)
print("||x_N||_2 =", round(schatten_norm(m.final, 2), 6),
      " ||S_N||_2 =", round(schatten_norm(S, 2), 6),
      " (equal by orthogonality of differences)")
print("tau(S^2) - sum ||dx_k||_2^2 =",
      f"{trace(S @ S) - sum(schatten_norm(d, 2)**2 for d in m.diffs):.2e}")
