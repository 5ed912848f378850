"""Integration by parts with smooth-in-time, possibly nonadapted multipliers.

For an adapted integrand ``G`` and a multiplier ``M`` that is C^1 on
``[0, T)`` with ``||M'(t)|| <= C (T - t)^{-delta}``, ``delta < 3/2``,

    int_0^T M(s) G(s) d^-W(s) = M(0) I(G) + int_0^T M'(s) I(1_[s,T] G) ds.

The right-hand side only needs Ito integrals of ``G``, so it can be
evaluated even when ``M`` looks into the future of the noise.  The outer
``ds`` integral is done with the singular factor ``(T - s)^{-delta}``
integrated exactly on every cell and the remaining factor of ``M'`` sampled
at the left endpoint.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import EvaluationError, InvalidArgumentError, UnsupportedRegimeError
from .grid import BrownianBundle, TimeGrid
from .integrals import (
    VectorPath,
    forward_approx,
    forward_path,
    ito_integral,
    tail_integrals,
)
from .norms import unit_cell_integrals
from .processes import OperatorProcess

__all__ = [
    "MultiplierSpec",
    "multiply",
    "deterministic_ibp_residual",
    "stochastic_ibp_rhs",
    "ibp_residual",
    "discrete_ibp_residual",
    "regime",
]

# evaluator(t, W) -> array (len(t), d_out, d); W may be None for W-independent multipliers
MatrixEvaluator = Callable[[np.ndarray, BrownianBundle], np.ndarray]


@dataclass(frozen=True)
class MultiplierSpec:
    """Operator-valued multiplier ``M`` together with its analytic derivative.

    ``delta`` is the blow-up exponent of ``M'`` at ``T``.  ``depends_on_noise``
    is False for deterministic multipliers; ``adapted`` may be False.
    """

    evaluator: MatrixEvaluator = field(repr=False)
    derivative: MatrixEvaluator = field(repr=False)
    d_out: int = 1
    d: int = 1
    delta: float = 0.0
    adapted: bool = True
    depends_on_noise: bool = False
    name: str = ""

    def __post_init__(self):
        if self.delta < 0:
            raise InvalidArgumentError(f"delta must be >= 0, got {self.delta}")

    def _eval(self, fn, grid: TimeGrid, W: BrownianBundle | None, what: str) -> np.ndarray:
        t = grid.nodes[: grid.N]  # never at t = T
        vals = np.asarray(fn(t, W), dtype=float)
        if vals.shape != (grid.N, self.d_out, self.d):
            raise InvalidArgumentError(
                f"multiplier {what} returned shape {vals.shape}, expected {(grid.N, self.d_out, self.d)}"
            )
        bad = ~np.isfinite(vals).all(axis=(1, 2))
        if bad.any():
            j = int(np.argmax(bad))
            raise EvaluationError(f"multiplier {what} not finite at node {j} (t={t[j]:.17g})")
        return vals

    def values(self, grid: TimeGrid, W: BrownianBundle | None = None) -> np.ndarray:
        """``M(t_j)`` for ``j < N``."""
        return self._eval(self.evaluator, grid, W, "M")

    def derivative_values(self, grid: TimeGrid, W: BrownianBundle | None = None) -> np.ndarray:
        """``M'(t_j)`` for ``j < N``."""
        return self._eval(self.derivative, grid, W, "M'")


def regime(M: MultiplierSpec, p: float | None = None) -> str:
    """``"supported"`` when a sufficient condition for ``MG`` to be weakly
    ``L^2`` holds (``delta < 1``, or ``delta < 3/2 - 1/p`` for ``L^p``
    integrands), else ``"unsupported"``."""
    if M.delta < 1:
        return "supported"
    if p is not None and p > 2 and M.delta < 1.5 - 1.0 / p:
        return "supported"
    return "unsupported"


def multiply(M: MultiplierSpec, G: OperatorProcess, W: BrownianBundle) -> OperatorProcess:
    """Materialize ``M G`` on ``[0, T)``; the node at ``T`` is left at zero."""
    if M.d != G.d:
        raise InvalidArgumentError(f"multiplier acts on R^{M.d}, process takes values in R^{G.d}")
    grid = G.grid
    N = grid.N
    Mv = M.values(grid, W)
    out = np.zeros((N + 1, M.d_out, G.m))
    out[:N] = np.einsum("jed,jdk->jek", Mv, G.values[:N])
    return OperatorProcess(grid, out, adapted=G.adapted and M.adapted)


def deterministic_ibp_residual(M: MultiplierSpec, f: VectorPath, a_idx: int, b_idx: int) -> float:
    """``|| int_a^b M f ds - M(a) F(a) - int_a^b M'(s) F(s) ds ||`` with
    ``F(t) = int_t^b f``, all integrals as left-point sums."""
    if M.depends_on_noise:
        raise InvalidArgumentError("deterministic integration by parts needs a W-independent multiplier")
    if M.delta != 0:
        raise InvalidArgumentError("deterministic integration by parts needs delta = 0")
    grid = f.grid
    if not 0 <= a_idx < b_idx <= grid.N:
        raise InvalidArgumentError(f"need 0 <= a_idx < b_idx <= N, got ({a_idx}, {b_idx})")
    dt = grid.dt
    fv = f.values[a_idx:b_idx]
    Mv = M.values(grid)[a_idx:b_idx]
    Mp = M.derivative_values(grid)[a_idx:b_idx]
    lhs = np.einsum("jed,jd->e", Mv, fv) * dt
    F = np.cumsum((fv * dt)[::-1], axis=0)[::-1]  # F(t_j) = sum_{i >= j} f_i dt
    rhs = Mv[0] @ F[0] + np.einsum("jed,jd->e", Mp, F) * dt
    return float(np.linalg.norm(lhs - rhs))


def _outer_weights(grid: TimeGrid, delta: float, tail_exponent: float) -> np.ndarray:
    """Weights ``w_j`` with ``int_0^T M'(s) h(s) ds ~ sum_j M'(t_j) h(t_j) w_j``.

    ``w_j = (T - t_j)^delta int_cell (T - s)^{-delta} ds``.  On the last cell
    the tail integral is modelled as decaying like ``(T - s)^tail_exponent``,
    which keeps the weight finite for ``delta >= 1``.
    """
    N, dt = grid.N, grid.dt
    if delta == 0:
        return np.full(N, dt)
    dist = np.arange(N, 0, -1, dtype=float)
    w = dist**delta * unit_cell_integrals(N, delta)[::-1] * dt
    denom = 1.0 - delta + tail_exponent
    if denom <= 0:
        raise InvalidArgumentError(
            f"final-cell weight diverges: need 1 - delta + tail_exponent > 0 "
            f"(delta={delta}, tail_exponent={tail_exponent})"
        )
    w[-1] = dt / denom
    return w


def stochastic_ibp_rhs(
    M: MultiplierSpec,
    G: OperatorProcess,
    W: BrownianBundle,
    tail_exponent: float = 0.5,
    beta: float | None = None,
    p: float | None = None,
) -> np.ndarray:
    """``M(0) I(G) + int_0^T M'(s) I(1_[s,T] G) ds`` for adapted ``G``.

    ``tail_exponent`` is the decay rate assumed for ``I(1_[s,T] G)`` on the
    final cell.  Passing ``beta`` and ``p`` checks the exponent condition
    ``beta - 1/p - delta + 1 > 0`` and warns when it fails.
    """
    if M.delta >= 1.5:
        raise InvalidArgumentError(f"multiplier singularity delta={M.delta} must be < 3/2")
    if beta is not None and p is not None and beta - 1.0 / p - M.delta + 1.0 <= 0:
        warnings.warn(
            f"beta - 1/p - delta + 1 = {beta - 1.0 / p - M.delta + 1.0:.3g} <= 0: "
            "the integration-by-parts formula is not guaranteed for these exponents",
            RuntimeWarning,
            stacklevel=2,
        )
    if M.d != G.d:
        raise InvalidArgumentError(f"multiplier acts on R^{M.d}, process takes values in R^{G.d}")
    grid = W.grid
    N = grid.N
    I = ito_integral(G, W)
    tails = tail_integrals(G, W).values[:N]
    M0 = M.values(grid, W)[0]
    Mp = M.derivative_values(grid, W)
    w = _outer_weights(grid, M.delta, tail_exponent)
    return M0 @ I + np.einsum("jed,jd,j->e", Mp, tails, w)


def _relative(lhs: np.ndarray, rhs: np.ndarray) -> float:
    floor = np.finfo(float).tiny
    return float(np.linalg.norm(lhs - rhs) / (np.linalg.norm(rhs) + floor))


def ibp_residual(
    M: MultiplierSpec,
    G: OperatorProcess,
    W: BrownianBundle,
    n: int,
    p: float | None = None,
    allow_unsupported: bool = False,
    tail_exponent: float = 0.5,
) -> float:
    """Relative gap between ``I^-(M G, n)`` and the integration-by-parts
    right-hand side.  Tends to zero as ``n`` grows in the supported regime."""
    if regime(M, p) == "unsupported":
        msg = (
            f"delta={M.delta} is outside the known sufficient conditions "
            "(delta < 1, or delta < 3/2 - 1/p for L^p integrands)"
        )
        if not allow_unsupported:
            raise UnsupportedRegimeError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    lhs = forward_approx(multiply(M, G, W), W, n)
    rhs = stochastic_ibp_rhs(M, G, W, tail_exponent=tail_exponent)
    return _relative(lhs, rhs)


def discrete_ibp_residual(M: MultiplierSpec, G: OperatorProcess, W: BrownianBundle, n: int) -> float:
    """Relative gap in the fixed-``n`` identity

        I^-(M G, n) = M(0) I^-(G, n) + int_0^T M'(s) I^-(1_[s,T] G, n) ds.

    Unlike :func:`ibp_residual` there is no ``n -> oo`` limit involved, so
    what remains is quadrature error only; zero up to rounding when ``M`` is
    constant.  Works for nonadapted ``G`` too.
    """
    if M.d != G.d:
        raise InvalidArgumentError(f"multiplier acts on R^{M.d}, process takes values in R^{G.d}")
    grid = W.grid
    N = grid.N
    lhs = forward_approx(multiply(M, G, W), W, n)
    J = forward_path(G, W, n).values
    tails = (J[-1] - J)[:N]
    M0 = M.values(grid, W)[0]
    Mp = M.derivative_values(grid, W)
    w = _outer_weights(grid, M.delta, 0.5)
    rhs = M0 @ J[-1] + np.einsum("jed,jd,j->e", Mp, tails, w)
    return _relative(lhs, rhs)
