"""Operator-valued integrands ``G: [0, T] -> L(R^m, R^d)`` on a grid.

A :class:`ProcessSpec` is a rule; :func:`materialize` turns it into an
:class:`OperatorProcess` for one Brownian path.  Transformations
(:func:`restrict`, :func:`truncate_basis`, :func:`smooth`) return new
processes and never modify their input.

Every integral in the package samples ``G`` at the left endpoint of each
cell, so ``values[N]`` (the node at ``T``) never enters a sum over ``[0, T]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .exceptions import AlignmentError, EvaluationError, InvalidArgumentError
from .grid import BrownianBundle, TimeGrid

__all__ = [
    "ProcessSpec",
    "OperatorProcess",
    "materialize",
    "restrict",
    "truncate_basis",
    "smooth",
]

KINDS = ("deterministic", "adapted", "nonadapted")

# evaluator(t, W) -> array of shape (len(t), d, m); ``t`` holds the nodes to evaluate
Evaluator = Callable[[np.ndarray, BrownianBundle], np.ndarray]


@dataclass(frozen=True)
class ProcessSpec:
    """Rule for an integrand.

    ``kind`` says what the evaluator may read: ``deterministic`` ignores the
    path, ``adapted`` reads ``W`` only up to the evaluation node, and
    ``nonadapted`` may read the whole path.  A spec that blows up like
    ``(T - t)^(-singular_exponent)`` at the horizon sets that exponent; such
    specs are never evaluated at ``t = T``.
    """

    kind: str
    evaluator: Evaluator = field(repr=False)
    d: int = 1
    m: int = 1
    singular_exponent: float = 0.0
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.d < 1 or self.m < 1:
            raise InvalidArgumentError("process dimensions d and m must be >= 1")
        if self.singular_exponent < 0:
            raise InvalidArgumentError("singular_exponent must be >= 0")

    @property
    def adapted(self) -> bool:
        return self.kind != "nonadapted"

    @property
    def singular(self) -> bool:
        return self.singular_exponent > 0


@dataclass(frozen=True, eq=False)
class OperatorProcess:
    """Grid samples ``values[j] = G(t_j)`` of shape ``(K, d, m)``.

    ``K`` is ``N + 1`` for processes on ``[0, T]`` and ``grid.n_nodes`` for
    processes living on the extended grid (output of :func:`smooth`).
    """

    grid: TimeGrid
    values: np.ndarray = field(repr=False)
    adapted: bool = True
    singular_exponent: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3:
            raise InvalidArgumentError(f"process values must have shape (K, d, m), got {v.shape}")
        if not self.grid.N + 1 <= v.shape[0] <= self.grid.n_nodes:
            raise InvalidArgumentError(
                f"process has {v.shape[0]} nodes; expected between N+1={self.grid.N + 1} "
                f"and {self.grid.n_nodes}"
            )
        if v is self.values and v.flags.writeable:
            v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def m(self) -> int:
        return self.values.shape[2]

    @property
    def n_cells(self) -> int:
        return self.values.shape[0] - 1

    @property
    def singular(self) -> bool:
        return self.singular_exponent > 0

    def _new(self, values, **changes) -> "OperatorProcess":
        return replace(self, values=values, **changes)

    def __add__(self, other: "OperatorProcess") -> "OperatorProcess":
        if not isinstance(other, OperatorProcess):
            return NotImplemented
        if other.values.shape != self.values.shape:
            raise InvalidArgumentError("cannot add processes of different shapes")
        return self._new(
            self.values + other.values,
            adapted=self.adapted and other.adapted,
            singular_exponent=max(self.singular_exponent, other.singular_exponent),
        )

    def __mul__(self, c: float) -> "OperatorProcess":
        if not np.isscalar(c):
            return NotImplemented
        return self._new(self.values * float(c))

    __rmul__ = __mul__

    def left_multiply(self, A: np.ndarray) -> "OperatorProcess":
        """``A G`` for a fixed ``d' x d`` matrix ``A``."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.shape[1] != self.d:
            raise InvalidArgumentError(f"matrix with {A.shape[1]} columns cannot act on R^{self.d}")
        return self._new(np.einsum("ed,jdk->jek", A, self.values))

    def scale_by(self, b: np.ndarray) -> "OperatorProcess":
        """Pointwise product ``b(t_j) G(t_j)`` with a scalar grid function ``b``."""
        b = np.asarray(b, dtype=float)
        if b.shape != (self.values.shape[0],):
            raise InvalidArgumentError(f"grid function must have shape ({self.values.shape[0]},)")
        return self._new(self.values * b[:, None, None])

    def hs_squared(self) -> np.ndarray:
        """Squared Hilbert-Schmidt (Frobenius) norm at every node."""
        return np.einsum("jdk,jdk->j", self.values, self.values)


def materialize(spec: ProcessSpec, W: BrownianBundle) -> OperatorProcess:
    """Evaluate ``spec`` on the nodes ``t_0 .. t_N`` of ``W``'s grid.

    Singular specs are evaluated on ``t_0 .. t_{N-1}`` only; the node at ``T``
    is stored as zero and carries no weight in any left-point sum.
    """
    if spec.m != W.m:
        raise InvalidArgumentError(
            f"process acts on R^{spec.m} but the noise has m={W.m} coordinates"
        )
    grid = W.grid
    N = grid.N
    count = N if spec.singular else N + 1
    t = grid.nodes[:count]
    vals = np.asarray(spec.evaluator(t, W), dtype=float)
    if vals.shape != (count, spec.d, spec.m):
        raise InvalidArgumentError(
            f"evaluator {spec.name or ''} returned shape {vals.shape}, "
            f"expected {(count, spec.d, spec.m)}"
        )
    bad = ~np.isfinite(vals).all(axis=(1, 2))
    if bad.any():
        j = int(np.argmax(bad))
        raise EvaluationError(
            f"process {spec.name or spec.kind} is not finite at node {j} (t={t[j]:.17g})"
        )
    if spec.singular:
        vals = np.concatenate([vals, np.zeros((1, spec.d, spec.m))])
    return OperatorProcess(grid, vals, adapted=spec.adapted, singular_exponent=spec.singular_exponent)


def restrict(G: OperatorProcess, a_idx: int, b_idx: int) -> OperatorProcess:
    """``1_[t_a, t_b) G``: zero every node outside ``a_idx <= j < b_idx``."""
    if not 0 <= a_idx <= b_idx <= G.n_cells:
        raise InvalidArgumentError(
            f"restrict needs 0 <= a_idx <= b_idx <= {G.n_cells}, got ({a_idx}, {b_idx})"
        )
    v = np.zeros_like(G.values)
    v[a_idx:b_idx] = G.values[a_idx:b_idx]
    return G._new(v)


def truncate_basis(G: OperatorProcess, n: int) -> OperatorProcess:
    """Compose with the projection onto the first ``n`` basis vectors of R^m."""
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"basis cutoff must be a positive integer, got {n!r}")
    if n >= G.m:
        return G
    v = G.values.copy()
    v[:, :, int(n):] = 0.0
    return G._new(v)


def smooth(G: OperatorProcess, n: int, basis: int | None = None) -> OperatorProcess:
    """Causal moving average ``G_n = n 1_[0,1/n] * (1_[0,T] P_n G)``.

    On the grid, with ``L = N / (n T)`` steps per shift,

        G_n(t_i) = n dt * sum_{j : 0 <= i - j < L, j < N} P G(t_j)

    which is the integrand for which the left-point Ito sum over the extended
    grid reproduces :func:`forward_approx` exactly.  ``basis`` overrides the
    projection rank (default ``n``).  The result lives on the full extended
    grid and vanishes from node ``N + L - 1`` on.
    """
    grid = G.grid
    L = grid.lag(n)
    if G.n_cells < grid.N:
        raise InvalidArgumentError("smooth expects a process on [0, T]")
    G = truncate_basis(G, n if basis is None else basis)
    N = grid.N
    g = G.values[:N]
    csum = np.zeros((N + 1,) + g.shape[1:])
    np.cumsum(g, axis=0, out=csum[1:])
    i = np.arange(grid.n_nodes)
    hi = np.minimum(i, N - 1) + 1
    lo = np.clip(i - L + 1, 0, N)
    lo = np.minimum(lo, hi)
    out = (csum[hi] - csum[lo]) * (n * grid.dt)
    return OperatorProcess(grid, out, adapted=G.adapted, singular_exponent=0.0)
