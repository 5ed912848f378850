"""Path-regularity norms on grid data.

Vector paths: ``L^p``, the fractional Sobolev (Gagliardo) seminorm
``W^{alpha,p}`` and the Hoelder seminorm ``C^alpha``.  Operator processes:
weighted Hilbert-Schmidt ``L^2`` norms (the gamma-norm of a Hilbert-space
valued process) and the ``V^{beta,p}`` norm

    ||G||_{V^{beta,p}}^p = int_0^T ( int_0^t (t-r)^{-2 beta} ||G(r)||_HS^2 dr )^{p/2} dt.

Processes are treated as piecewise constant on cells ``[r_j, r_{j+1})``.
Weakly singular kernels are integrated exactly over every cell.  A process
flagged with ``singular_exponent = g`` is treated as
``||G(r)||_HS^2 = c(r) (T - r)^{-2g}`` with ``c`` slowly varying: ``c`` is
sampled at left endpoints and the power factor is integrated exactly, which
yields ``inf`` exactly when the continuous norm diverges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError
from .integrals import VectorPath
from .processes import OperatorProcess

__all__ = [
    "NormSpec",
    "lp_norm",
    "sobolev_seminorm",
    "sobolev_norm",
    "holder_seminorm",
    "hs_gamma_norm",
    "v_norm",
    "v_norm_weighted",
]


@dataclass(frozen=True)
class NormSpec:
    alpha: float
    p: float
    beta: float

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise InvalidArgumentError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.p < 1:
            raise InvalidArgumentError(f"p must be >= 1, got {self.p}")
        if not 0 <= self.beta < 0.5:
            raise InvalidArgumentError(f"beta must lie in [0, 1/2), got {self.beta}")

    def convergence_violations(self) -> list[str]:
        """Problems that rule these exponents out for a convergence study."""
        if not 0 < self.alpha < self.beta < 0.5:
            return [f"0 < alpha < beta < 1/2 required (alpha={self.alpha}, beta={self.beta})"]
        return []

    @property
    def holder_exponent(self) -> float:
        """Hoelder exponent ``alpha - 1/p`` reached through the Sobolev embedding."""
        return self.alpha - 1.0 / self.p


def unit_cell_integrals(count: int, q: float) -> np.ndarray:
    """``w[k] = int_k^{k+1} u^{-q} du`` for ``k = 0 .. count-1``.

    ``w[0]`` is ``inf`` when ``q >= 1``.  Differences of powers are formed
    through ``expm1``/``log1p`` so far cells keep full relative precision.
    """
    k = np.arange(count, dtype=float)
    w = np.empty(count)
    e = 1.0 - q
    if count == 0:
        return w
    w[0] = np.inf if e <= 0 else 1.0 / e
    kk = k[1:]
    if e == 0:
        w[1:] = np.log1p(1.0 / kk)
    else:
        w[1:] = kk**e * np.expm1(e * np.log1p(1.0 / kk)) / e
    return w


def _path_values(f) -> tuple[np.ndarray, float, int]:
    if isinstance(f, VectorPath):
        return f.values, f.grid.dt, f.grid.N
    raise InvalidArgumentError("expected a VectorPath")


def _pair_norms(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a - b
    if diff.shape[1] == 1:
        return np.abs(diff[:, 0])
    return np.sqrt(np.einsum("id,id->i", diff, diff))


def lp_norm(f: VectorPath, p: float) -> float:
    """``(sum_{j<N} ||f(t_j)||^p dt)^{1/p}``, Euclidean norm on R^d."""
    if p < 1:
        raise InvalidArgumentError(f"p must be >= 1, got {p}")
    v, dt, N = _path_values(f)
    x = _pair_norms(v[:N], np.zeros_like(v[:N]))
    return float((np.sum(x**p) * dt) ** (1.0 / p))


def sobolev_seminorm(f: VectorPath, alpha: float, p: float) -> float:
    """Gagliardo seminorm over ordered off-diagonal node pairs of ``[0, T)``:

        (sum_{i != j} ||f(t_i) - f(t_j)||^p |t_i - t_j|^{-alpha p - 1} dt^2)^{1/p}

    The diagonal is omitted, so for smooth ``f`` the value approaches the
    continuous seminorm from below.  Cost is O(N^2); the loop runs over lags
    in a fixed order so results do not depend on scheduling.
    """
    if not 0 < alpha < 1:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    if p < 1:
        raise InvalidArgumentError(f"p must be >= 1, got {p}")
    v, dt, N = _path_values(f)
    v = v[:N]
    sums = np.empty(N - 1)
    for k in range(1, N):
        sums[k - 1] = np.sum(_pair_norms(v[k:], v[:-k]) ** p)
    lags = np.arange(1, N, dtype=float) * dt
    total = 2.0 * np.sum(sums * lags ** (-alpha * p - 1.0)) * dt * dt
    return float(total ** (1.0 / p))


def sobolev_norm(f: VectorPath, alpha: float, p: float) -> float:
    """Full ``W^{alpha,p}`` norm: ``lp_norm + sobolev_seminorm``."""
    return lp_norm(f, p) + sobolev_seminorm(f, alpha, p)


def holder_seminorm(f: VectorPath, alpha: float) -> float:
    """``max_{i<j} ||f(t_j) - f(t_i)|| / |t_j - t_i|^alpha`` over the nodes of ``[0, T]``."""
    if not 0 < alpha <= 1:
        raise InvalidArgumentError(f"alpha must lie in (0, 1], got {alpha}")
    v, dt, N = _path_values(f)
    v = v[: N + 1]
    best = 0.0
    for k in range(1, N + 1):
        best = max(best, float(np.max(_pair_norms(v[k:], v[:-k]))) / (k * dt) ** alpha)
    return best


def _check_beta(beta: float):
    if not 0 <= beta < 0.5:
        raise InvalidArgumentError(
            f"weight exponent beta must lie in [0, 1/2) for the norm to be finite, got {beta}"
        )


def _cell_hs_squared(G: OperatorProcess) -> np.ndarray:
    """Per-cell squared HS norms on ``[0, T)``; singular factor averaged exactly."""
    N = G.grid.N
    g = G.hs_squared()[:N]
    if not G.singular:
        return g
    q = 2.0 * G.singular_exponent
    dist = np.arange(N, 0, -1, dtype=float)  # (T - r_j) / dt
    avg = unit_cell_integrals(N, q)[::-1]     # dt^q/dt * int_cell (T - r)^-q dr
    with np.errstate(invalid="ignore"):
        out = g * dist**q * avg
    out[g == 0] = 0.0
    return out


def hs_gamma_norm(G: OperatorProcess, a_idx: int, b_idx: int, weight_beta: float, t_idx: int) -> float:
    """``(int_{t_a}^{t_b} (t - r)^{-2 beta} ||G(r)||_HS^2 dr)^{1/2}`` with ``t = t_{t_idx}``.

    The weight is integrated exactly on each cell; ``beta = 0`` gives the
    plain ``L^2`` Hilbert-Schmidt norm of ``1_[t_a, t_b) G``.
    """
    _check_beta(weight_beta)
    N = G.grid.N
    if not 0 <= a_idx <= b_idx <= t_idx <= N:
        raise InvalidArgumentError(
            f"need 0 <= a_idx <= b_idx <= t_idx <= N, got ({a_idx}, {b_idx}, {t_idx})"
        )
    if a_idx == b_idx:
        return 0.0
    dt = G.grid.dt
    g = _cell_hs_squared(G)[a_idx:b_idx]
    w = unit_cell_integrals(t_idx - a_idx, 2.0 * weight_beta)
    lag_index = t_idx - np.arange(a_idx, b_idx) - 1
    total = np.sum(g * w[lag_index]) * dt ** (1.0 - 2.0 * weight_beta)
    return float(np.sqrt(total))


def v_norm(G: OperatorProcess, beta: float, p: float) -> float:
    """``V^{beta,p}`` norm.

    The inner weighted integrals at every ``t_i`` form a causal convolution
    of the cell norms with the exact kernel weights.  Regular processes use
    an outer sum over ``t_1 .. t_N``.  Singular processes replace the outer
    sum by factored cells: the inner integral behaves like
    ``(T - t)^{-kappa/p}`` with ``kappa = p (beta + g - 1/2)`` and that power
    is integrated exactly, giving ``inf`` for ``kappa >= 1``.
    """
    _check_beta(beta)
    if p < 1:
        raise InvalidArgumentError(f"p must be >= 1, got {p}")
    N = G.grid.N
    dt = G.grid.dt
    g = _cell_hs_squared(G)
    kernel = unit_cell_integrals(N, 2.0 * beta) * dt ** (1.0 - 2.0 * beta)
    if not G.singular:
        inner = np.convolve(g, kernel)[:N]  # inner[i-1] at t_i, i = 1..N
        return float((np.sum(inner ** (p / 2.0)) * dt) ** (1.0 / p))
    kappa = p * (beta + G.singular_exponent - 0.5)
    inner = np.zeros(N)  # inner[i] at t_i, i = 0..N-1
    inner[1:] = np.convolve(g[: N - 1], kernel[: N - 1])[: N - 1]
    dist = np.arange(N, 0, -1, dtype=float)
    outer_w = unit_cell_integrals(N, kappa)[::-1]
    terms = inner ** (p / 2.0) * dist**kappa * outer_w
    terms[inner == 0] = 0.0
    return float((np.sum(terms) * dt) ** (1.0 / p))


def v_norm_weighted(G: OperatorProcess, beta: float) -> float:
    """``V^{beta,2}`` norm through its Fubini form

        ((1 - 2 beta)^{-1} int_0^T ||G(r)||_HS^2 (T - r)^{1 - 2 beta} dr)^{1/2}.

    For regular processes the cell weights are ``dt (T - r_j)^{1 - 2 beta}``,
    the exact telescoped sums of the inner kernel weights used by
    :func:`v_norm`, so both routes agree up to rounding.  Singular processes
    get the exact cell integrals of ``(T - r)^{1 - 2 beta - 2 g}``.
    """
    _check_beta(beta)
    N = G.grid.N
    dt = G.grid.dt
    dist = np.arange(N, 0, -1, dtype=float)
    e = 1.0 - 2.0 * beta
    g = G.hs_squared()[:N]
    if not G.singular:
        total = np.sum(g * (dist * dt) ** e) * dt / e
        return float(np.sqrt(total))
    gam2 = 2.0 * G.singular_exponent
    w = unit_cell_integrals(N, gam2 - e)[::-1]
    with np.errstate(invalid="ignore"):
        terms = g * dist**gam2 * w
    terms[g == 0] = 0.0
    total = np.sum(terms) * dt ** (1.0 + e) / e
    return float(np.sqrt(total))
