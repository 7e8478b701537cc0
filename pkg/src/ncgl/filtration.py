"""Structured filtrations, conditional expectations and martingales.

Supported filtration levels are built from four structured ingredients:

* ``Trivial``      -- x maps to tau(x)/tau(I) * I,
* ``Full``         -- the identity map,
* ``Corner(k)``    -- the corner conditional expectation on a matrix factor
                      (upper-left k x k corner kept, remaining diagonal
                      replaced by its mean, everything else zeroed),
* ``RademacherAverage(n)`` -- averaging over classical sign-pattern blocks
                      that agree on the first n sign coordinates,

and their tensor combinations (``Tensor``).  Every level is compiled into a
concrete map consisting of a per-block factor action plus a weighted average
over groups of classical blocks, together with a spanning basis of its range
used by the independent Gram-projection oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DomainError, NumericalRankError, StructureError
from .opalgebra import Operator, TracialAlgebra, psd_power, psd_sqrt, trace

__all__ = [
    "Trivial",
    "Full",
    "Corner",
    "RademacherAverage",
    "Tensor",
    "AlgebraLayout",
    "Filtration",
    "Martingale",
    "make_filtration",
    "cond_exp",
    "ce_oracle",
    "martingale_from_final",
    "martingale_from_diffs",
    "square_functions",
    "square_function",
    "conditioned_square_function",
    "diagonal_p_function",
    "rademacher_operator",
    "lift_with_matrix_factor",
    "sign_matrix_filtration",
]


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Trivial:
    """x -> tau(x)/tau(I) * I."""


@dataclass(frozen=True)
class Full:
    """Identity map."""


@dataclass(frozen=True)
class Corner:
    """Corner conditional expectation at level k on a matrix factor."""

    k: int


@dataclass(frozen=True)
class RademacherAverage:
    """Average over blocks agreeing on the first n classical sign coordinates."""

    n: int


@dataclass(frozen=True)
class Tensor:
    """One descriptor per layout factor (classical factor first, if any)."""

    factors: tuple


@dataclass(frozen=True)
class AlgebraLayout:
    """How an algebra's blocks decompose into classical atoms and matrix factors.

    ``atom_labels`` has one hashable label per block (sign tuples for
    Rademacher factors, a single ``()`` when there is no classical part);
    ``factor_dims`` are the matrix tensor-factor dimensions whose product is
    the common block dimension.
    """

    atom_labels: tuple
    factor_dims: tuple[int, ...]


# ---------------------------------------------------------------------------
# compiled levels
# ---------------------------------------------------------------------------


def _matrix_units(d: int) -> list[np.ndarray]:
    units = []
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            units.append(e)
    return units


def _factor_range_basis(op) -> list[np.ndarray]:
    kind = op[0]
    if kind == "full":
        return _matrix_units(op[1])
    if kind == "trivial":
        return [np.eye(op[1], dtype=complex)]
    if kind == "corner":
        d, k = op[1], op[2]
        basis = []
        for i in range(k):
            for j in range(k):
                e = np.zeros((d, d), dtype=complex)
                e[i, j] = 1.0
                basis.append(e)
        if k < d:
            tail = np.zeros((d, d), dtype=complex)
            for j in range(k, d):
                tail[j, j] = 1.0
            basis.append(tail)
        return basis
    raise StructureError(f"unknown factor op {op!r}")


def _apply_factor_op(mat: np.ndarray, dims: Sequence[int], axis: int, op) -> np.ndarray:
    """Apply one factor action to a block matrix of shape (prod(dims),) ** 2."""
    kind = op[0]
    if kind == "full":
        return mat
    pre = int(np.prod(dims[:axis], dtype=int))
    d = dims[axis]
    post = int(np.prod(dims[axis + 1 :], dtype=int))
    t = mat.reshape(pre, d, post, pre, d, post)
    out = np.zeros_like(t)
    if kind == "trivial":
        diag = np.einsum("ajbcjd->abcd", t) / d
        idx = np.arange(d)
        out[:, idx, :, :, idx, :] = diag[None]
    elif kind == "corner":
        k = op[2]
        out[:, :k, :, :, :k, :] = t[:, :k, :, :, :k, :]
        if k < d:
            tail = np.einsum("ajbcjd->abcd", t[:, k:, :, :, k:, :]) / (d - k)
            idx = np.arange(k, d)
            out[:, idx, :, :, idx, :] = tail[None]
    else:
        raise StructureError(f"unknown factor op {op!r}")
    return out.reshape(mat.shape)


@dataclass(frozen=True, eq=False)
class _StructuredLevel:
    """Per-block factor maps followed by weighted averaging over block groups."""

    groups: tuple[tuple[int, ...], ...]
    factor_dims: tuple[int, ...]
    factor_ops: tuple

    def apply(self, x: Operator) -> Operator:
        alg = x.algebra
        mapped = []
        for b in x.data:
            m = b
            for axis, op in enumerate(self.factor_ops):
                m = _apply_factor_op(m, self.factor_dims, axis, op)
            mapped.append(m)
        out: list = [None] * alg.n_blocks
        for grp in self.groups:
            wsum = sum(alg.weights[b] for b in grp)
            avg = sum(alg.weights[b] * mapped[b] for b in grp) / wsum
            for b in grp:
                out[b] = avg
        return alg.operator(out)

    def range_basis(self, alg: TracialAlgebra) -> list[Operator]:
        factor_bases = [_factor_range_basis(op) for op in self.factor_ops]
        mat_basis = [
            reduce(np.kron, combo)
            for combo in itertools.product(*factor_bases)
        ]
        ops = []
        for grp in self.groups:
            for m in mat_basis:
                blocks = [
                    m if b in grp else np.zeros((alg.dims[b],) * 2, dtype=complex)
                    for b in range(alg.n_blocks)
                ]
                ops.append(alg.operator(blocks))
        return ops


@dataclass(frozen=True, eq=False)
class _TrivialLevel:
    def apply(self, x: Operator) -> Operator:
        alg = x.algebra
        c = trace(x) / alg.trace_identity()
        return alg.identity() * c

    def range_basis(self, alg: TracialAlgebra) -> list[Operator]:
        return [alg.identity()]


@dataclass(frozen=True, eq=False)
class _FullLevel:
    def apply(self, x: Operator) -> Operator:
        return x

    def range_basis(self, alg: TracialAlgebra) -> list[Operator]:
        ops = []
        for b, d in enumerate(alg.dims):
            for m in _matrix_units(d):
                blocks = [
                    m if bb == b else np.zeros((alg.dims[bb],) * 2, dtype=complex)
                    for bb in range(alg.n_blocks)
                ]
                ops.append(alg.operator(blocks))
        return ops


# ---------------------------------------------------------------------------
# filtration
# ---------------------------------------------------------------------------


def _compile_descriptor(desc, layout: AlgebraLayout, n_blocks: int):
    if isinstance(desc, Trivial):
        return _TrivialLevel()
    if isinstance(desc, Full):
        return _FullLevel()
    singletons = tuple((b,) for b in range(n_blocks))
    all_full = tuple(("full", d) for d in layout.factor_dims)
    if isinstance(desc, Corner):
        if len(layout.factor_dims) != 1:
            raise StructureError("Corner on a multi-factor layout needs Tensor")
        d = layout.factor_dims[0]
        if not 0 <= desc.k <= d:
            raise DomainError("corner index out of range")
        return _StructuredLevel(
            singletons, layout.factor_dims, (("corner", d, desc.k),)
        )
    if isinstance(desc, RademacherAverage):
        groups = _prefix_groups(layout.atom_labels, desc.n)
        return _StructuredLevel(groups, layout.factor_dims, all_full)
    if isinstance(desc, Tensor):
        mat_descs = list(desc.factors)
        groups = singletons
        if mat_descs and isinstance(mat_descs[0], RademacherAverage):
            groups = _prefix_groups(layout.atom_labels, mat_descs[0].n)
            mat_descs = mat_descs[1:]
        if len(mat_descs) != len(layout.factor_dims):
            raise StructureError("one tensor factor per matrix factor expected")
        ops = []
        for d, sub in zip(layout.factor_dims, mat_descs):
            if isinstance(sub, Full):
                ops.append(("full", d))
            elif isinstance(sub, Trivial):
                ops.append(("trivial", d))
            elif isinstance(sub, Corner):
                if not 0 <= sub.k <= d:
                    raise DomainError("corner index out of range")
                ops.append(("corner", d, sub.k))
            else:
                raise StructureError(f"unsupported tensor factor {sub!r}")
        return _StructuredLevel(groups, layout.factor_dims, tuple(ops))
    raise StructureError(f"unknown descriptor {desc!r}")


def _prefix_groups(labels, n: int):
    buckets: dict = {}
    for b, lab in enumerate(labels):
        buckets.setdefault(tuple(lab[:n]), []).append(b)
    return tuple(tuple(v) for v in buckets.values())


@dataclass(frozen=True, eq=False)
class Filtration:
    """Ordered family E_0 <= E_1 <= ... <= E_N of conditional expectations."""

    algebra: TracialAlgebra
    layout: AlgebraLayout
    descriptors: tuple
    levels: tuple
    label: str = ""
    _oracle_cache: dict = field(default_factory=dict, repr=False)

    @staticmethod
    def build(
        algebra: TracialAlgebra,
        layout: AlgebraLayout,
        descriptors: Sequence,
        label: str = "",
    ) -> "Filtration":
        if len(layout.atom_labels) != algebra.n_blocks:
            raise StructureError("one atom label per block expected")
        block_dim = int(np.prod(layout.factor_dims, dtype=int))
        if any(d != block_dim for d in algebra.dims):
            if not all(isinstance(d, (Trivial, Full)) for d in descriptors):
                raise StructureError("structured levels need uniform block dims")
        levels = tuple(
            _compile_descriptor(d, layout, algebra.n_blocks) for d in descriptors
        )
        if not levels:
            raise StructureError("a filtration needs at least one level")
        return Filtration(algebra, layout, tuple(descriptors), levels, label)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def N(self) -> int:
        return len(self.levels) - 1

    def validate(self, rng: np.random.Generator, samples: int = 6) -> dict:
        """Run the conditional-expectation axioms on random samples.

        Returns the worst deviation observed for each axiom; the caller
        decides on tolerances.
        """
        from .instances import gaussian_hermitian  # local import, no cycle at runtime
        from .opalgebra import min_eigenvalue

        alg = self.algebra
        ident = alg.identity()
        dev = {k: 0.0 for k in
               ("unital", "trace", "idempotent", "commute", "positive",
                "hermitian", "bimodule")}

        def _upd(key, val):
            dev[key] = max(dev[key], float(val))

        for n, lvl in enumerate(self.levels):
            en_i = lvl.apply(ident)
            _upd("unital", (en_i - ident).entry_max())
            for _ in range(samples):
                x = gaussian_hermitian(alg, rng)
                ex = lvl.apply(x)
                _upd("trace", abs(trace(ex) - trace(x)))
                _upd("idempotent", (lvl.apply(ex) - ex).entry_max())
                _upd("hermitian", (ex - ex.adjoint()).entry_max())
                psd = x @ x
                _upd("positive", max(0.0, -min_eigenvalue(lvl.apply(psd))))
                a = lvl.apply(gaussian_hermitian(alg, rng))
                b = lvl.apply(gaussian_hermitian(alg, rng))
                _upd("bimodule", (lvl.apply(a @ x @ b) - a @ ex @ b).entry_max())
            for m in range(self.n_levels):
                if m == n:
                    continue
                lo = self.levels[min(m, n)]
                x = gaussian_hermitian(alg, rng)
                _upd("commute",
                     (self.levels[m].apply(lvl.apply(x)) - lo.apply(x)).entry_max())
        return dev


def cond_exp(filtration: Filtration, n: int, x: Operator) -> Operator:
    """Apply E_n; n = -1 is aliased to level 0."""
    if n == -1:
        n = 0
    if not 0 <= n < filtration.n_levels:
        raise DomainError(f"level {n} outside 0..{filtration.N}")
    if x.algebra.dims != filtration.algebra.dims:
        raise StructureError("operator does not live on the filtration's algebra")
    return filtration.levels[n].apply(x)


def ce_oracle(filtration: Filtration, n: int, x: Operator) -> Operator:
    """Trace-orthogonal projection of x onto the range of E_n.

    Independent of :func:`cond_exp`: builds the Gram system of a spanning
    basis of the range subalgebra in the inner product <a, b> = tau(a* b) and
    solves it directly.
    """
    if n == -1:
        n = 0
    if not 0 <= n < filtration.n_levels:
        raise DomainError(f"level {n} outside 0..{filtration.N}")
    alg = filtration.algebra
    sqw = [np.sqrt(w) for w in alg.weights]

    def vec(op: Operator) -> np.ndarray:
        return np.concatenate([s * b.ravel() for s, b in zip(sqw, op.data)])

    cached = filtration._oracle_cache.get(n)
    if cached is None:
        basis = filtration.levels[n].range_basis(alg)
        V = np.column_stack([vec(op) for op in basis])
        G = V.conj().T @ V
        eigs = np.linalg.eigvalsh(G)
        if eigs.min() <= 1e-12 * max(eigs.max(), 1.0):
            raise NumericalRankError("Gram matrix of the range basis is singular")
        cached = (basis, V, G)
        filtration._oracle_cache[n] = cached
    basis, V, G = cached
    coeff = np.linalg.solve(G, V.conj().T @ vec(x))
    out = alg.zero()
    for c, op in zip(coeff, basis):
        out = out + op * complex(c)
    return out


# ---------------------------------------------------------------------------
# named filtration families
# ---------------------------------------------------------------------------


def _sign_patterns(depth: int) -> tuple:
    return tuple(itertools.product((1, -1), repeat=depth))


def make_filtration(kind: str, **params) -> Filtration:
    """Construct one of the supported structured filtration families.

    kinds:
      - ``trivial_full``: two levels (normalized trace, identity) on an
        arbitrary algebra; params ``dims``, ``weights``.
      - ``corner``: the matrix-corner filtration on M_d; param ``dim``.
      - ``rademacher``: depth-m sign algebra tensor a full matrix factor;
        params ``depth``, ``matrix_dim`` (default 1).
      - ``rademacher_corner``: sign algebra tensor a corner-filtered matrix
        factor, levels advance both; params ``depth``, ``matrix_dim``.
      - ``matrix_corner``: M_m tensor corner-filtered M_d (first factor always
        full); params ``outer_dim``, ``dim``.
    """
    if kind == "trivial_full":
        dims = tuple(params.get("dims", (2,)))
        weights = tuple(params.get("weights", (1.0,) * len(dims)))
        alg = TracialAlgebra(dims, weights)
        layout = AlgebraLayout(((),) * len(dims), (dims[0],))
        return Filtration.build(alg, layout, (Trivial(), Full()),
                                label=f"trivial_full{dims}")
    if kind == "corner":
        d = int(params["dim"])
        weight = float(params.get("weight", 1.0))
        alg = TracialAlgebra((d,), (weight,))
        layout = AlgebraLayout(((),), (d,))
        descs = tuple(Corner(k) for k in range(d + 1))
        return Filtration.build(alg, layout, descs, label=f"corner(M_{d})")
    if kind == "rademacher":
        depth = int(params["depth"])
        d = int(params.get("matrix_dim", 1))
        labels = _sign_patterns(depth)
        alg = TracialAlgebra((d,) * len(labels), (2.0**-depth,) * len(labels))
        layout = AlgebraLayout(labels, (d,))
        descs = tuple(
            Tensor((RademacherAverage(n), Full())) for n in range(depth + 1)
        )
        return Filtration.build(alg, layout, descs,
                                label=f"rademacher(depth={depth},M_{d})")
    if kind == "rademacher_corner":
        depth = int(params["depth"])
        d = int(params["matrix_dim"])
        labels = _sign_patterns(depth)
        alg = TracialAlgebra((d,) * len(labels), (2.0**-depth,) * len(labels))
        layout = AlgebraLayout(labels, (d,))
        n_levels = max(depth, d) + 1
        descs = tuple(
            Tensor((RademacherAverage(min(n, depth)), Corner(min(n, d))))
            for n in range(n_levels)
        )
        return Filtration.build(alg, layout, descs,
                                label=f"rademacher_corner(depth={depth},M_{d})")
    if kind == "matrix_corner":
        m = int(params["outer_dim"])
        d = int(params["dim"])
        alg = TracialAlgebra((m * d,), (1.0,))
        layout = AlgebraLayout(((),), (m, d))
        descs = tuple(Tensor((Full(), Corner(k))) for k in range(d + 1))
        return Filtration.build(alg, layout, descs,
                                label=f"matrix_corner(M_{m}xM_{d})")
    raise DomainError(f"unknown filtration kind {kind!r}")


def lift_with_matrix_factor(base: Filtration, outer_dim: int,
                            label: str = "") -> Filtration:
    """Tensor a full (unfiltered) M_outer factor onto every level of `base`.

    The lifted level n is id_{M_outer} (x) E_n; blocks keep their weights and
    classical labels, dimensions multiply by outer_dim.
    """
    alg = base.algebra
    big = TracialAlgebra(tuple(outer_dim * d for d in alg.dims), alg.weights)
    layout = AlgebraLayout(base.layout.atom_labels,
                           (outer_dim,) + base.layout.factor_dims)
    outer_full = ("full", outer_dim)
    levels = []
    for lvl in base.levels:
        if isinstance(lvl, _FullLevel):
            levels.append(_FullLevel())
        elif isinstance(lvl, _TrivialLevel):
            groups = (tuple(range(alg.n_blocks)),)
            ops = (outer_full,) + tuple(("trivial", d) for d in base.layout.factor_dims)
            levels.append(_StructuredLevel(groups, layout.factor_dims, ops))
        elif isinstance(lvl, _StructuredLevel):
            levels.append(_StructuredLevel(
                lvl.groups, layout.factor_dims, (outer_full,) + lvl.factor_ops))
        else:
            raise StructureError("cannot lift this level type")
    descs = tuple(("lifted", outer_dim, d) for d in base.descriptors)
    return Filtration(big, layout, descs, tuple(levels),
                      label or f"M_{outer_dim}(x){base.label}")


def _base_factor_ops(base: Filtration, n: int):
    """Per-factor actions of base level n (base must have no classical mixing)."""
    lvl = base.levels[n]
    dims = base.layout.factor_dims
    if isinstance(lvl, _FullLevel):
        return tuple(("full", d) for d in dims)
    if isinstance(lvl, _TrivialLevel):
        return tuple(("trivial", d) for d in dims)
    if isinstance(lvl, _StructuredLevel):
        if any(len(g) != 1 for g in lvl.groups):
            raise StructureError("base level mixes classical blocks")
        return lvl.factor_ops
    raise StructureError("unsupported base level")


def sign_matrix_filtration(outer_dim: int, depth: int, base: Filtration,
                           label: str = "") -> Filtration:
    """Filtration on M_outer (x) L^inf({-1,1}^depth) (x) base.

    Level k (0 <= k < depth) is full on the outer factor, conditions on the
    first k+1 sign coordinates, and applies the base level-k expectation on
    the matrix part.  The base algebra must be a single block.
    """
    if base.algebra.n_blocks != 1:
        raise StructureError("the doob-style embedding needs a one-block base")
    if depth > base.n_levels:
        raise StructureError("base filtration is too short")
    d_base = base.algebra.dims[0]
    labels = _sign_patterns(depth)
    big = TracialAlgebra((outer_dim * d_base,) * len(labels),
                         (base.algebra.weights[0] * 2.0 ** -depth,) * len(labels))
    layout = AlgebraLayout(labels, (outer_dim,) + base.layout.factor_dims)
    levels = []
    for k in range(depth):
        groups = _prefix_groups(labels, k + 1)
        ops = (("full", outer_dim),) + tuple(_base_factor_ops(base, k))
        levels.append(_StructuredLevel(groups, layout.factor_dims, ops))
    descs = tuple(("sign_matrix", outer_dim, k) for k in range(depth))
    return Filtration(big, layout, descs, tuple(levels),
                      label or f"M_{outer_dim}(x)Omega_{depth}(x){base.label}")


def rademacher_operator(filtration: Filtration, j: int) -> Operator:
    """The j-th sign variable as a block-diagonal +-1 operator."""
    alg = filtration.algebra
    blocks = []
    for b, lab in enumerate(filtration.layout.atom_labels):
        if j >= len(lab):
            raise DomainError(f"sign coordinate {j} not present")
        blocks.append(float(lab[j]) * np.eye(alg.dims[b], dtype=complex))
    return alg.operator(blocks)


# ---------------------------------------------------------------------------
# martingales
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Martingale:
    """Adapted sequence x_0..x_N with x_n = E_n(x_N), plus its differences."""

    filtration: Filtration
    values: tuple[Operator, ...]
    diffs: tuple[Operator, ...]

    @property
    def N(self) -> int:
        return len(self.values) - 1

    @property
    def final(self) -> Operator:
        return self.values[-1]

    @property
    def algebra(self) -> TracialAlgebra:
        return self.filtration.algebra

    def is_selfadjoint(self) -> bool:
        return all(v.hermitian for v in self.values)

    def __neg__(self) -> "Martingale":
        return Martingale(
            self.filtration,
            tuple(-v for v in self.values),
            tuple(-d for d in self.diffs),
        )

    def scale(self, c: float) -> "Martingale":
        return Martingale(
            self.filtration,
            tuple(v * c for v in self.values),
            tuple(d * c for d in self.diffs),
        )


def _check_martingale(filtration: Filtration, values, tol: float = 1e-9) -> None:
    scale = 1.0 + max(v.entry_max() for v in values)
    for n, v in enumerate(values):
        if (cond_exp(filtration, n, v) - v).entry_max() > tol * scale:
            raise DomainError(f"value at level {n} is not adapted")
        if n + 1 < len(values):
            drift = (cond_exp(filtration, n, values[n + 1]) - v).entry_max()
            if drift > tol * scale:
                raise DomainError(f"martingale property fails at level {n}")


def martingale_from_final(
    filtration: Filtration, f: Operator, validate: bool = False
) -> Martingale:
    """The martingale x_n = E_n(f)."""
    values = tuple(cond_exp(filtration, n, f) for n in range(filtration.n_levels))
    diffs = (values[0],) + tuple(
        values[n] - values[n - 1] for n in range(1, len(values))
    )
    if validate:
        _check_martingale(filtration, values)
    return Martingale(filtration, values, diffs)


def martingale_from_diffs(
    filtration: Filtration, diffs: Sequence[Operator], validate: bool = True
) -> Martingale:
    """Partial sums of a difference sequence, validated as a martingale."""
    if len(diffs) != filtration.n_levels:
        raise StructureError("one difference per filtration level expected")
    values = [diffs[0]]
    for d in diffs[1:]:
        values.append(values[-1] + d)
    if validate:
        _check_martingale(filtration, values)
    return Martingale(filtration, tuple(values), tuple(diffs))


# ---------------------------------------------------------------------------
# square functions
# ---------------------------------------------------------------------------


def square_function(m: Martingale) -> Operator:
    """S_N = (sum_k dx_k* dx_k)^(1/2)."""
    acc = m.algebra.zero()
    for d in m.diffs:
        acc = acc + d.adjoint() @ d
    return psd_sqrt(acc.symmetrized())


def conditioned_square_function(m: Martingale) -> Operator:
    """s_N = (sum_k E_{k-1} |dx_k|^2)^(1/2), with E_{-1} aliased to E_0."""
    acc = m.algebra.zero()
    for k, d in enumerate(m.diffs):
        acc = acc + cond_exp(m.filtration, k - 1, d.adjoint() @ d)
    return psd_sqrt(acc.symmetrized())


def diagonal_p_function(m: Martingale, p: float) -> Operator:
    """z_N = (sum_k |dx_k|^p)^(1/p)."""
    if p < 2:
        raise DomainError("the diagonal p-function needs p >= 2")
    acc = m.algebra.zero()
    for d in m.diffs:
        acc = acc + psd_power(psd_sqrt((d.adjoint() @ d).symmetrized()), p)
    return psd_power(acc.symmetrized(), 1.0 / p)


def square_functions(m: Martingale, p: float):
    """(S_N, s_N, z_N) of a martingale."""
    return (
        square_function(m),
        conditioned_square_function(m),
        diagonal_p_function(m, p),
    )
