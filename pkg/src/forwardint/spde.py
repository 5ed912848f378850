"""Linear equations ``dU = A(t) U dt + G(t) dW`` with random adapted drift.

The mild solution is written through the evolution family ``S(t, s)`` of
``A`` as the forward stochastic convolution

    U(t) = S(t, 0) I(1_[0,t] G) - int_0^t S(t, s) A(s) I(1_[s,t] G) ds,

which only involves Ito integrals of ``G`` even though ``S(t, s)`` depends
on the noise after ``s``.  An Euler-Maruyama scheme serves as the
independent oracle wherever both apply.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .exceptions import EvaluationError, InvalidArgumentError, OutOfRangeError, StabilityError
from .grid import BrownianBundle, TimeGrid
from .integrals import VectorPath, ito_path
from .processes import OperatorProcess

__all__ = [
    "DriftSpec",
    "EvolutionFamily",
    "build_family",
    "forward_convolution",
    "euler_maruyama",
    "weak_solution_residual",
]

OVERFLOW_GUARD = 1e150

# evaluator(t, W) -> (len(t), d, d); must read W only up to each node
DriftEvaluator = Callable[[np.ndarray, BrownianBundle], np.ndarray]


@dataclass(frozen=True)
class DriftSpec:
    """Matrix drift ``A(t)``.  ``commuting`` promises that all values of
    ``A`` commute, which allows the exact exponential of the integrated
    drift; ``stability_bound`` bounds the spectral radius of ``A``."""

    evaluator: DriftEvaluator = field(repr=False)
    d: int = 1
    commuting: bool = False
    stability_bound: float = 0.0
    name: str = ""

    def values(self, grid: TimeGrid, W: BrownianBundle) -> np.ndarray:
        """``A(t_j)`` for the cells ``j < N``."""
        t = grid.nodes[: grid.N]
        A = np.asarray(self.evaluator(t, W), dtype=float)
        if A.shape != (grid.N, self.d, self.d):
            raise InvalidArgumentError(
                f"drift {self.name} returned shape {A.shape}, expected {(grid.N, self.d, self.d)}"
            )
        bad = ~np.isfinite(A).all(axis=(1, 2))
        if bad.any():
            j = int(np.argmax(bad))
            raise EvaluationError(f"drift {self.name} not finite at node {j} (t={t[j]:.17g})")
        return A


@dataclass(frozen=True, eq=False)
class EvolutionFamily:
    """``S(t_i, t_j)`` for ``j <= i <= N``.

    ``cell_exps[j] = exp(A(t_j) dt)``.  Without ``cumulative`` the family
    is the ordered product ``cell_exps[i-1] ... cell_exps[j]``; with it
    (commuting drifts) ``S(t_i, t_j) = exp(C_i - C_j)`` where
    ``C_i = sum_{l < i} A(t_l) dt``.
    """

    grid: TimeGrid
    drift: np.ndarray = field(repr=False)
    cell_exps: np.ndarray = field(repr=False)
    cumulative: np.ndarray | None = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return self.cell_exps.shape[1]

    def __call__(self, i: int, j: int) -> np.ndarray:
        N = self.grid.N
        if not 0 <= j <= i <= N:
            raise OutOfRangeError(f"need 0 <= j <= i <= N for S(t_i, t_j), got ({i}, {j})")
        if i == j:
            return np.eye(self.d)
        if self.cumulative is not None:
            return expm(self.cumulative[i] - self.cumulative[j])
        S = self.cell_exps[j].copy()
        for l in range(j + 1, i):
            S = self.cell_exps[l] @ S
        return S

    def from_origin(self) -> np.ndarray:
        """``S(t_i, 0)`` for ``i = 0 .. N``, shape ``(N + 1, d, d)``."""
        out = np.empty((self.grid.N + 1, self.d, self.d))
        out[0] = np.eye(self.d)
        for i in range(self.grid.N):
            out[i + 1] = self.cell_exps[i] @ out[i]
        return out

    def to_terminal(self) -> np.ndarray:
        """``S(T, t_j)`` for ``j = 0 .. N``, shape ``(N + 1, d, d)``."""
        N = self.grid.N
        out = np.empty((N + 1, self.d, self.d))
        out[N] = np.eye(self.d)
        for j in range(N - 1, -1, -1):
            out[j] = out[j + 1] @ self.cell_exps[j]
        return out


def build_family(A: DriftSpec, grid: TimeGrid, W: BrownianBundle) -> EvolutionFamily:
    """Per-cell exponentials of ``A`` on ``W``'s grid (first-order Magnus)."""
    if grid != W.grid:
        raise InvalidArgumentError("drift grid and noise grid differ")
    vals = A.values(grid, W)
    exps = expm(vals * grid.dt)
    cumulative = None
    if A.commuting:
        cumulative = np.zeros((grid.N + 1, A.d, A.d))
        np.cumsum(vals * grid.dt, axis=0, out=cumulative[1:])
    return EvolutionFamily(grid, vals, exps, cumulative)


def _check_process(A: DriftSpec, G: OperatorProcess, W: BrownianBundle):
    if G.d != A.d:
        raise InvalidArgumentError(f"drift acts on R^{A.d}, process takes values in R^{G.d}")
    if G.m != W.m:
        raise InvalidArgumentError(f"process acts on R^{G.m} but the noise has m={W.m}")


def forward_convolution(A: DriftSpec, G: OperatorProcess, W: BrownianBundle,
                        family: EvolutionFamily | None = None) -> VectorPath:
    """Forward stochastic convolution at every node ``t_0 .. t_N``.

    With ``J`` the Ito path of ``G``,

        U_i = S(i, 0) J_i - sum_{j < i} S(i, j) A_j (J_i - J_j) dt
            = S(i, 0) J_i - P_i J_i + q_i,

    where ``P_i = sum_{j<i} S(i, j) A_j dt`` and
    ``q_i = sum_{j<i} S(i, j) A_j J_j dt`` obey one-step recursions through
    the cell exponentials, so the whole path costs O(N d^3).
    """
    _check_process(A, G, W)
    grid = W.grid
    N, dt = grid.N, grid.dt
    fam = build_family(A, grid, W) if family is None else family
    J = ito_path(G, W).values[: N + 1]
    S0 = fam.from_origin()
    d = A.d
    P = np.zeros((N + 1, d, d))
    q = np.zeros((N + 1, d))
    for i in range(N):
        E, Ai = fam.cell_exps[i], fam.drift[i]
        P[i + 1] = E @ (P[i] + Ai * dt)
        q[i + 1] = E @ (q[i] + (Ai @ J[i]) * dt)
    U = np.einsum("ied,id->ie", S0 - P, J) + q
    return VectorPath(grid, U)


def euler_maruyama(A: DriftSpec, G: OperatorProcess, W: BrownianBundle) -> VectorPath:
    """``U_{j+1} = U_j + A(t_j) U_j dt + G(t_j) dW_j`` from ``U_0 = 0``."""
    _check_process(A, G, W)
    if not G.adapted:
        raise InvalidArgumentError("Euler-Maruyama needs an adapted diffusion coefficient")
    grid = W.grid
    N, dt = grid.N, grid.dt
    if A.stability_bound * dt > 2.0:
        warnings.warn(
            f"dt * |A| = {A.stability_bound * dt:.3g} > 2: explicit steps may be unstable",
            RuntimeWarning,
            stacklevel=2,
        )
    Av = A.values(grid, W)
    noise = np.einsum("jdk,jk->jd", G.values[:N], W.increments(1, N))
    U = np.zeros((N + 1, A.d))
    for j in range(N):
        U[j + 1] = U[j] + (Av[j] @ U[j]) * dt + noise[j]
        if not np.all(np.abs(U[j + 1]) < OVERFLOW_GUARD):
            raise StabilityError(
                f"Euler-Maruyama blew up at step {j + 1} (dt={dt:.3g}); use a finer grid"
            )
    return VectorPath(grid, U)


def weak_solution_residual(A: DriftSpec, G: OperatorProcess, W: BrownianBundle,
                           U: VectorPath | None = None) -> float:
    """``max_k max_i |<U_i, e_k> - sum_{j<i} <A_j U_j, e_k> dt - <J_i, e_k>|``.

    The coordinate functionals ``e_k`` test the integral form of the
    equation; the value shrinks as the grid is refined.
    """
    _check_process(A, G, W)
    grid = W.grid
    N, dt = grid.N, grid.dt
    if U is None:
        U = forward_convolution(A, G, W)
    u = U.values[: N + 1]
    Av = A.values(grid, W)
    drift = np.zeros((N + 1, A.d))
    np.cumsum(np.einsum("jed,jd->je", Av, u[:N]) * dt, axis=0, out=drift[1:])
    J = ito_path(G, W).values[: N + 1]
    return float(np.max(np.abs(u - drift - J)))
