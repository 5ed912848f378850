"""Discrete Ito integrals, forward-integral approximants and tail integrals.

All sums use left-point cells on the grid of ``W``.  The forward approximant

    I^-(G, n) = sum_{k <= n} n int_0^T G(s) h_k (W(s + 1/n) h_k - W(s) h_k) ds

is discretized with the same cells, with the shift ``1/n`` an exact number
of steps ``L``, so that it equals the Ito sum of the smoothed integrand
``smooth(G, n)`` over the extended grid as an identity of finite sums.

Path-valued results are built from one cumulative sum of per-cell
contributions and the scalar results are read off its last entry, so a path
and its terminal value agree bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import AdaptednessError, InvalidArgumentError
from .grid import BrownianBundle, TimeGrid
from .processes import OperatorProcess

__all__ = [
    "VectorPath",
    "ito_integral",
    "ito_path",
    "forward_approx",
    "forward_path",
    "tail_integrals",
    "ito_increments",
    "forward_increments",
]


@dataclass(frozen=True, eq=False)
class VectorPath:
    """Grid samples ``values[i] = f(t_i)`` of an R^d-valued path, shape ``(K, d)``."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise InvalidArgumentError(f"path values must have shape (K, d), got {v.shape}")
        if v is self.values and v.flags.writeable:
            v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def __sub__(self, other: "VectorPath") -> "VectorPath":
        if self.values.shape != other.values.shape:
            raise InvalidArgumentError("paths have different shapes")
        return VectorPath(self.grid, self.values - other.values)

    def __add__(self, other: "VectorPath") -> "VectorPath":
        if self.values.shape != other.values.shape:
            raise InvalidArgumentError("paths have different shapes")
        return VectorPath(self.grid, self.values + other.values)

    def __mul__(self, c: float) -> "VectorPath":
        return VectorPath(self.grid, self.values * float(c))

    __rmul__ = __mul__


def _check_dims(G: OperatorProcess, W: BrownianBundle):
    if G.m != W.m:
        raise InvalidArgumentError(f"process acts on R^{G.m} but the noise has m={W.m}")
    if G.grid != W.grid:
        raise InvalidArgumentError("process and noise live on different grids")


def _prefix(contrib: np.ndarray) -> np.ndarray:
    out = np.zeros((contrib.shape[0] + 1, contrib.shape[1]))
    np.cumsum(contrib, axis=0, out=out[1:])
    return out


def ito_increments(G: OperatorProcess, W: BrownianBundle) -> np.ndarray:
    """Per-cell terms ``G(t_j) (W(t_{j+1}) - W(t_j))`` for every cell of ``G``."""
    _check_dims(G, W)
    if not G.adapted:
        raise AdaptednessError(
            "the Ito integral needs an adapted integrand; use forward_approx for nonadapted ones"
        )
    cells = G.n_cells
    dW = W.increments(1, cells)
    return np.einsum("jdk,jk->jd", G.values[:cells], dW)


def ito_path(G: OperatorProcess, W: BrownianBundle) -> VectorPath:
    """``J(G)(t_i) = sum_{j < i} G(t_j) dW_j`` for every node of ``G``."""
    return VectorPath(W.grid, _prefix(ito_increments(G, W)))


def ito_integral(G: OperatorProcess, W: BrownianBundle) -> np.ndarray:
    """Left-point Ito sum over all cells of ``G``.

    For a process on ``[0, T]`` this is ``I(G)``; for a smoothed process on
    the extended grid it is the Ito integral up to ``T + lookahead``.
    """
    return ito_path(G, W).values[-1].copy()


def forward_increments(G: OperatorProcess, W: BrownianBundle, n: int, basis: int | None = None) -> np.ndarray:
    """Per-cell terms ``n dt sum_k G(t_j) h_k (W(t_j + 1/n) - W(t_j)) h_k``, j < N.

    ``basis`` sets the number of basis directions summed (default ``n``,
    saturating at ``m``).
    """
    _check_dims(G, W)
    grid = W.grid
    L = grid.lag(n)
    N = grid.N
    if G.n_cells < N:
        raise InvalidArgumentError("forward integrands must be sampled on [0, T]")
    rank = min(n if basis is None else basis, W.m)
    if rank < 1:
        raise InvalidArgumentError("basis cutoff must be >= 1")
    shifted = W.increments(L, N)[:, :rank]
    return np.einsum("jdk,jk->jd", G.values[:N, :, :rank], shifted) * (n * grid.dt)


def forward_path(G: OperatorProcess, W: BrownianBundle, n: int, basis: int | None = None) -> VectorPath:
    """``J^-(G, n)(t_i) = I^-(1_[0, t_i] G, n)`` for ``i = 0 .. N``."""
    return VectorPath(W.grid, _prefix(forward_increments(G, W, n, basis)))


def forward_approx(G: OperatorProcess, W: BrownianBundle, n: int, basis: int | None = None) -> np.ndarray:
    """Regularized forward integral ``I^-(G, n)``; ``G`` need not be adapted."""
    return forward_path(G, W, n, basis).values[-1].copy()


def tail_integrals(G: OperatorProcess, W: BrownianBundle) -> VectorPath:
    """``s_i -> I(1_[s_i, T] G)`` as ``I(G) - J(G)(s_i)``."""
    J = ito_path(G, W).values
    return VectorPath(W.grid, J[-1] - J)
