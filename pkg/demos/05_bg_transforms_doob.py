"""Burkholder-Gundy, martingale transforms, dual Doob and Stein bounds.

The square-function estimates flow through a matrix embedding: the square
function of x becomes a corner of the modulus of a bigger self-adjoint
martingale on M_{N+2} (x) M.  Transforms and the Doob/Stein pair then follow
with constants of the right order in p.
"""

from ncgl import (
    bg_embed,
    doob_embed,
    make_filtration,
    schatten_norm,
    verify_bg,
    verify_dual_doob,
    verify_stein,
    verify_transform,
)
from ncgl.instances import gaussian_psd, random_martingale, stream

filt = make_filtration("corner", dim=5)
m = random_martingale(filt, stream(8))

# the embedding and its structural identities (asserted on construction)
inst = bg_embed(m)
p = 4.0
lhs = schatten_norm(inst.x_tilde.final, p) ** p
rhs = schatten_norm(m.final, p) ** p + sum(schatten_norm(d, p) ** p
                                           for d in m.diffs)
print(f"embedding trace identity: {lhs:.6f} = {rhs:.6f}")

for p in (2.0, 3.0, 8.0):
    reps = verify_bg(m, p)
    print(f"p={p}: ||y||<={reps.norm_by_square.constant:.1f}*||S||  "
          f"margin {reps.norm_by_square.margin:.3f} | "
          f"||S||<={reps.square_by_norm.constant:.1f}*||y|| "
          f"margin {reps.square_by_norm.margin:.3f} | "
          f"interp margin {reps.interpolation.margin:.3f}")

# transforms: multiplying differences by signs keeps the p-norm comparable
v = [(-1.0) ** n for n in range(m.N + 1)]
rep = verify_transform(m, v, 4.0)
print(f"alternating transform at p=4: {rep.lhs:.4f} <= {rep.rhs:.4f}")

# dual Doob / Stein for a non-adapted positive sequence
base = make_filtration("corner", dim=3)
rng = stream(9)
u = [gaussian_psd(base.algebra, rng) for _ in range(4)]
inst = doob_embed(u, base)
print("Doob embedding lives on", inst.big_algebra.n_blocks,
      "blocks of dimension", inst.big_algebra.dims[0])
for p in (1.0, 3.0):
    rep = verify_dual_doob(u, base, p)
    print(f"dual Doob p={p}: {rep.lhs:.4f} <= {rep.rhs:.4f} "
          f"(constant {rep.constant:.3g})")
rep = verify_stein(u, base, 4.0)
print(f"Stein p=4: {rep.lhs:.4f} <= {rep.rhs:.4f} (constant {rep.constant:.3g})")
