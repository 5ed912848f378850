"""Uniform time grids and reproducible truncated cylindrical Brownian motion.

The noise ``W`` on ``H = R^m`` is realized through its coordinates
``W(t) h_k``, k = 1..m, which are independent scalar Brownian motions.
Paths are stored as values (not increments) on a grid that extends past the
horizon ``T`` by ``lookahead_steps`` cells, so that the shifted lookups
``W(t + 1/n) - W(t)`` needed by the forward integral are plain array reads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exceptions import AlignmentError, InvalidArgumentError, OutOfRangeError

__all__ = [
    "TimeGrid",
    "BrownianBundle",
    "make_grid",
    "required_lookahead",
    "sample_brownian",
    "shifted_increment",
    "auxiliary_generator",
]

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_j = j * T / N`` for ``j = 0 .. N + lookahead_steps``."""

    T: float
    N: int
    lookahead_steps: int = 0

    def __post_init__(self):
        if not np.isfinite(self.T) or self.T <= 0:
            raise InvalidArgumentError(f"horizon T must be positive, got {self.T!r}")
        if int(self.N) != self.N or self.N < 2:
            raise InvalidArgumentError(f"N must be an integer >= 2, got {self.N!r}")
        if int(self.lookahead_steps) != self.lookahead_steps or self.lookahead_steps < 0:
            raise InvalidArgumentError(
                f"lookahead_steps must be a nonnegative integer, got {self.lookahead_steps!r}"
            )
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "lookahead_steps", int(self.lookahead_steps))

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def n_nodes(self) -> int:
        """Number of nodes on the extended grid."""
        return self.N + self.lookahead_steps + 1

    @cached_property
    def nodes(self) -> np.ndarray:
        j = np.arange(self.n_nodes, dtype=float)
        t = j * self.T / self.N
        t[self.N] = self.T
        t.flags.writeable = False
        return t

    def lag(self, n: int) -> int:
        """Number of steps in the regularization shift ``1/n``.

        Raises :class:`AlignmentError` unless ``N / (n T)`` is a positive
        integer that the lookahead covers.
        """
        L = _aligned_lag(self.T, self.N, n)
        if L > self.lookahead_steps:
            raise AlignmentError(
                f"n={n} needs a lookahead of {L} steps past T, grid has {self.lookahead_steps}"
            )
        return L

    def with_lookahead(self, lookahead_steps: int) -> "TimeGrid":
        return TimeGrid(self.T, self.N, lookahead_steps)


def _aligned_lag(T: float, N: int, n: int) -> int:
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"regularization index n must be a positive integer, got {n!r}")
    exact = N / (n * T)
    L = int(round(exact))
    if L < 1 or abs(exact - L) > 1e-9 * max(1.0, exact):
        raise AlignmentError(
            f"n={n} is not aligned with the grid: N/(n*T) = {exact:.12g} "
            f"must be a positive integer (N={N}, T={T:g})"
        )
    return L


def make_grid(T: float, N: int, lookahead_steps: int = 0) -> TimeGrid:
    return TimeGrid(T, N, lookahead_steps)


def required_lookahead(T: float, N: int, n_values) -> int:
    """Smallest lookahead that covers the shift of every ``n`` in ``n_values``."""
    if not n_values:
        return 0
    return max(_aligned_lag(T, N, n) for n in n_values)


@dataclass(frozen=True, eq=False)
class BrownianBundle:
    """``m`` independent scalar Brownian paths on an extended grid.

    ``values[j, k]`` is ``W(t_j) h_{k+1}``; row 0 is identically zero.
    """

    grid: TimeGrid
    m: int
    values: np.ndarray = field(repr=False)
    seed: int = 0
    stream_id: int = 0

    def increments(self, lag: int = 1, cells: int | None = None) -> np.ndarray:
        """``values[j + lag] - values[j]`` for ``j < cells`` (default: all that fit)."""
        K = self.values.shape[0]
        if cells is None:
            cells = K - lag
        if lag < 0 or cells < 0 or cells + lag > K:
            raise OutOfRangeError(
                f"increments with lag {lag} over {cells} cells exceed the {K}-node grid"
            )
        return self.values[lag:cells + lag] - self.values[:cells]

    def terminal(self) -> np.ndarray:
        """``W(T) h_k`` for all k."""
        return self.values[self.grid.N]

    def with_values(self, values: np.ndarray) -> "BrownianBundle":
        """Copy with replaced path values (used to probe adaptedness)."""
        v = np.array(values, dtype=float)
        v.flags.writeable = False
        return BrownianBundle(self.grid, self.m, v, self.seed, self.stream_id)


def _generator(seed: int, stream_id: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & _SEED_MASK, spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.Philox(ss))


def auxiliary_generator(seed: int, stream_id: int) -> np.random.Generator:
    """Generator for non-Brownian randomness of replicate ``stream_id``.

    Keyed apart from the Brownian stream so that drawing random test inputs
    never shifts the noise of the same replicate.
    """
    ss = np.random.SeedSequence(int(seed) & _SEED_MASK, spawn_key=(int(stream_id), 1))
    return np.random.Generator(np.random.Philox(ss))


def sample_brownian(grid: TimeGrid, m: int, seed: int, stream_id: int = 0) -> BrownianBundle:
    """Sample the first ``m`` coordinates of a cylindrical Brownian motion.

    Randomness comes from a counter-based Philox stream keyed by
    ``(seed, stream_id)``, so replicate ``r`` is reproducible on its own and
    independent of how many other replicates run, or in which order.
    """
    if int(m) != m or m < 1:
        raise InvalidArgumentError(f"basis truncation m must be a positive integer, got {m!r}")
    m = int(m)
    rng = _generator(seed, stream_id)
    steps = rng.standard_normal((grid.n_nodes - 1, m))
    steps *= np.sqrt(grid.dt)
    values = np.empty((grid.n_nodes, m))
    values[0] = 0.0
    np.cumsum(steps, axis=0, out=values[1:])
    values.flags.writeable = False
    return BrownianBundle(grid, m, values, int(seed), int(stream_id))


def shifted_increment(W: BrownianBundle, k: int, j: int, lag: int) -> float:
    """``W(t_j + lag dt) h_k - W(t_j) h_k`` with ``k`` counted from 1."""
    if not 1 <= k <= W.m:
        raise OutOfRangeError(f"basis index k={k} outside 1..{W.m}")
    last = W.values.shape[0] - 1
    if j < 0 or lag < 0 or j + lag > last:
        raise OutOfRangeError(f"node {j} + lag {lag} is past the extended grid (last node {last})")
    return float(W.values[j + lag, k - 1] - W.values[j, k - 1])
