"""Named process, multiplier and drift presets selectable from a config file.

Each preset declares its parameters as ``name -> (type, default)`` so the
config parser can reject unknown keys and fill defaults.  Types are
``"float"``, ``"int"``, ``"floats"`` (comma list) or a tuple of allowed
strings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .calculus import MultiplierSpec
from .exceptions import InvalidArgumentError
from .grid import BrownianBundle
from .processes import ProcessSpec
from .spde import DriftSpec, build_family

__all__ = [
    "Preset",
    "PROCESS_PRESETS",
    "MULTIPLIER_PRESETS",
    "DRIFT_PRESETS",
    "make_process",
    "make_multiplier",
    "make_drift",
    "resolve_params",
]


@dataclass(frozen=True)
class Preset:
    name: str
    params: dict
    build: Callable
    description: str = ""


def resolve_params(preset: Preset, given: dict | None) -> dict:
    """Defaults overlaid with ``given``; unknown keys are an error."""
    given = dict(given or {})
    unknown = sorted(set(given) - set(preset.params))
    if unknown:
        raise InvalidArgumentError(f"preset {preset.name!r} has no parameter(s) {', '.join(unknown)}")
    out = {k: default for k, (_, default) in preset.params.items()}
    out.update(given)
    return out


def _rect_eye(d: int, m: int) -> np.ndarray:
    return np.eye(d, m)


def _stack(scalar: np.ndarray, B: np.ndarray) -> np.ndarray:
    return scalar[:, None, None] * B[None, :, :]


# -- processes: build(params, T, m) -> ProcessSpec ---------------------------

def _constant(p, T, m):
    B = p["c"] * _rect_eye(p["d"], m)
    return ProcessSpec("deterministic", lambda t, W: _stack(np.ones(len(t)), B), p["d"], m, name="constant")


def _linear(p, T, m):
    B = _rect_eye(p["d"], m)
    return ProcessSpec("deterministic", lambda t, W: _stack(np.asarray(t), B), p["d"], m, name="linear")


def _brownian_adapted(p, T, m):
    B = _rect_eye(p["d"], m)

    def ev(t, W: BrownianBundle):
        return _stack(W.values[: len(t), 0], B)

    return ProcessSpec("adapted", ev, p["d"], m, name="brownian_adapted")


def _brownian_terminal(p, T, m):
    B = _rect_eye(p["d"], m)

    def ev(t, W: BrownianBundle):
        return _stack(np.full(len(t), W.terminal()[0]), B)

    return ProcessSpec("nonadapted", ev, p["d"], m, name="brownian_terminal")


def _power_singular(p, T, m):
    eps = p["eps"]
    if eps < 0:
        raise InvalidArgumentError(f"eps must be >= 0, got {eps}")
    B = _rect_eye(p["d"], m)
    gamma = 0.5 + eps

    def ev(t, W):
        return _stack((T - np.asarray(t)) ** (-gamma), B)

    return ProcessSpec("deterministic", ev, p["d"], m, singular_exponent=gamma, name="power_singular")


def _matrix_random(p, T, m):
    rng = np.random.default_rng(p["seed"])
    B0 = rng.standard_normal((p["d"], m))
    B1 = rng.standard_normal((p["d"], m))

    def ev(t, W):
        t = np.asarray(t)
        return B0[None] + np.sin(2 * np.pi * t / T)[:, None, None] * B1[None]

    return ProcessSpec("deterministic", ev, p["d"], m, name="matrix_random")


def _matrix_adapted(p, T, m):
    rng = np.random.default_rng(p["seed"])
    B0 = rng.standard_normal((p["d"], m))
    B1 = rng.standard_normal((p["d"], m))

    def ev(t, W: BrownianBundle):
        w = W.values[: len(t)]  # node j reads W only through row j
        return B0[None] + B1[None] * np.tanh(w)[:, None, :]

    return ProcessSpec("adapted", ev, p["d"], m, name="matrix_adapted")


PROCESS_PRESETS = {
    "constant": Preset("constant", {"c": ("float", 1.0), "d": ("int", 1)}, _constant,
                       "G = c times the rectangular identity"),
    "linear": Preset("linear", {"d": ("int", 1)}, _linear, "G(t) = t times the rectangular identity"),
    "brownian_adapted": Preset("brownian_adapted", {"d": ("int", 1)}, _brownian_adapted,
                               "G(t) = W(t)h_1, adapted"),
    "brownian_terminal": Preset("brownian_terminal", {"d": ("int", 1)}, _brownian_terminal,
                                "G(t) = W(T)h_1, nonadapted"),
    "power_singular": Preset("power_singular", {"eps": ("float", 0.2), "d": ("int", 1)}, _power_singular,
                             "G(t) = (T - t)^(-1/2 - eps), singular at T"),
    "matrix_random": Preset("matrix_random", {"d": ("int", 3), "seed": ("int", 0)}, _matrix_random,
                            "deterministic d x m matrix B0 + sin(2 pi t/T) B1"),
    "matrix_adapted": Preset("matrix_adapted", {"d": ("int", 3), "seed": ("int", 0)}, _matrix_adapted,
                             "adapted d x m matrix B0 + B1 * tanh(W(t))"),
}


# -- drifts: build(params, d) -> DriftSpec -----------------------------------

def _const_drift(A: np.ndarray, name: str, commuting: bool = True) -> DriftSpec:
    bound = float(np.max(np.abs(np.linalg.eigvals(A)))) if A.size else 0.0
    return DriftSpec(lambda t, W: np.broadcast_to(A, (len(t),) + A.shape).copy(),
                     A.shape[0], commuting, bound, name)


def _zero(p, d):
    return _const_drift(np.zeros((d, d)), "zero")


def _scalar(p, d):
    return _const_drift(p["a"] * np.eye(d), "scalar")


def _diagonal(p, d):
    vals = list(p["values"])
    if len(vals) != d:
        raise InvalidArgumentError(f"diagonal drift needs {d} values, got {len(vals)}")
    return _const_drift(np.diag(vals), "diagonal")


def _stiff(p, d):
    lam = p["lam"]
    if lam <= 0:
        raise InvalidArgumentError(f"stiffness lam must be positive, got {lam}")
    rates = np.geomspace(1.0, lam, d) if d > 1 else np.array([lam])
    return _const_drift(-np.diag(rates), "stiff")


def _random_adapted(p, d):
    a = p["a"]

    def ev(t, W: BrownianBundle):
        s = a * np.tanh(W.values[: len(t), 0])
        return s[:, None, None] * np.eye(d)[None]

    return DriftSpec(ev, d, True, abs(a), "random_adapted")


DRIFT_PRESETS = {
    "zero": Preset("zero", {}, _zero, "A = 0"),
    "scalar": Preset("scalar", {"a": ("float", -1.0)}, _scalar, "A = a Id"),
    "diagonal": Preset("diagonal", {"values": ("floats", (-1.0,))}, _diagonal, "A = diag(values)"),
    "stiff": Preset("stiff", {"lam": ("float", 100.0)}, _stiff,
                    "A = -diag(1 .. lam), geometrically spaced"),
    "random_adapted": Preset("random_adapted", {"a": ("float", -1.0)}, _random_adapted,
                             "A(t) = a tanh(W(t)h_1) Id, adapted and bounded"),
}


# -- multipliers: build(params, T, d, drift) -> MultiplierSpec ---------------

def _const_mult(p, T, d, drift):
    C = p["c"] * np.eye(d)
    zero = np.zeros((d, d))
    return MultiplierSpec(
        lambda t, W: np.broadcast_to(C, (len(t), d, d)).copy(),
        lambda t, W: np.broadcast_to(zero, (len(t), d, d)).copy(),
        d, d, 0.0, True, False, "constant",
    )


def _terminal_functional(p, T, d, drift):
    phi = {"identity": lambda x: x, "tanh": np.tanh}[p["phi"]]

    def ev(t, W: BrownianBundle):
        return np.broadcast_to(phi(W.terminal()[0]) * np.eye(d), (len(t), d, d)).copy()

    return MultiplierSpec(ev, lambda t, W: np.zeros((len(t), d, d)), d, d, 0.0,
                          False, True, "terminal_functional")


def _singular_power(p, T, d, drift):
    delta = p["delta"]
    if not 0 <= delta < 1.5:
        raise InvalidArgumentError(f"delta must lie in [0, 3/2), got {delta}")
    eye = np.eye(d)
    if delta == 1.0:
        f = lambda t: np.log(T - t)
        fp = lambda t: -1.0 / (T - t)
    else:
        f = lambda t: (T - t) ** (1.0 - delta)
        fp = lambda t: -(1.0 - delta) * (T - t) ** (-delta)
    return MultiplierSpec(
        lambda t, W: _stack(f(np.asarray(t)), eye),
        lambda t, W: _stack(fp(np.asarray(t)), eye),
        d, d, delta, True, False, f"singular_power({delta:g})",
    )


def _evolution_family(p, T, d, drift: DriftSpec):
    if drift is None:
        raise InvalidArgumentError("the evolution_family multiplier needs a drift preset")
    if drift.d != d:
        raise InvalidArgumentError(f"drift acts on R^{drift.d}, process on R^{d}")

    def ev(t, W: BrownianBundle):
        fam = build_family(drift, W.grid, W)
        return fam.to_terminal()[: len(t)]

    def dev(t, W: BrownianBundle):
        fam = build_family(drift, W.grid, W)
        S = fam.to_terminal()[: len(t)]
        return -np.einsum("jab,jbc->jac", S, fam.drift[: len(t)])

    return MultiplierSpec(ev, dev, d, d, 0.0, False, True, "evolution_family")


MULTIPLIER_PRESETS = {
    "constant": Preset("constant", {"c": ("float", 1.0)}, _const_mult, "M = c Id"),
    "terminal_functional": Preset("terminal_functional", {"phi": (("identity", "tanh"), "identity")},
                                  _terminal_functional, "M = phi(W(T)h_1) Id, nonadapted"),
    "singular_power": Preset("singular_power", {"delta": ("float", 0.75)}, _singular_power,
                             "M(s) = (T - s)^(1 - delta) Id (log for delta = 1)"),
    "evolution_family": Preset("evolution_family", {}, _evolution_family,
                               "M(s) = S(T, s) of the configured drift, nonadapted"),
}


def _lookup(table: dict, kind: str, name: str) -> Preset:
    if name not in table:
        raise InvalidArgumentError(f"unknown {kind} preset {name!r}; choose from {', '.join(table)}")
    return table[name]


def make_process(name: str, params: dict | None, T: float, m: int) -> ProcessSpec:
    pre = _lookup(PROCESS_PRESETS, "process", name)
    return pre.build(resolve_params(pre, params), T, m)


def make_drift(name: str, params: dict | None, d: int) -> DriftSpec:
    pre = _lookup(DRIFT_PRESETS, "drift", name)
    return pre.build(resolve_params(pre, params), d)


def make_multiplier(name: str, params: dict | None, T: float, d: int,
                    drift: DriftSpec | None = None) -> MultiplierSpec:
    pre = _lookup(MULTIPLIER_PRESETS, "multiplier", name)
    return pre.build(resolve_params(pre, params), T, d, drift)
