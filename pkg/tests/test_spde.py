import numpy as np
import pytest
from scipy.linalg import expm

from forwardint import (
    DriftSpec,
    EvaluationError,
    OperatorProcess,
    StabilityError,
    build_family,
    euler_maruyama,
    forward_convolution,
    ito_path,
    make_grid,
    materialize,
    sample_brownian,
    weak_solution_residual,
)
from forwardint.exceptions import OutOfRangeError
from forwardint.presets import make_drift, make_process


def _setup(N=256, m=1, seed=0):
    g = make_grid(1.0, N)
    return g, sample_brownian(g, m, seed)


def test_family_zero_drift():
    g, W = _setup(64)
    fam = build_family(make_drift("zero", {}, 2), g, W)
    for i, j in [(0, 0), (10, 3), (64, 0)]:
        assert np.array_equal(fam(i, j), np.eye(2))


def test_family_scalar_and_diagonal():
    g, W = _setup(64)
    fam = build_family(make_drift("scalar", {"a": -0.7}, 1), g, W)
    assert fam(40, 8)[0, 0] == pytest.approx(np.exp(-0.7 * 32 * g.dt), rel=1e-13)
    fam = build_family(make_drift("diagonal", {"values": [-1.0, 2.0]}, 2), g, W)
    S = fam(50, 10)
    tau = 40 * g.dt
    assert np.allclose(S, np.diag([np.exp(-tau), np.exp(2 * tau)]), rtol=1e-13, atol=0)


def _rotating_drift(d=2):
    # non-commuting adapted drift
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    D = np.diag([-1.0, -0.5])

    def ev(t, W):
        w = W.values[: len(t), 0]
        return D[None] + np.sin(w)[:, None, None] * J[None] + t[:, None, None] * np.array([[0, 0], [1.0, 0]])[None]

    return DriftSpec(ev, 2, commuting=False, stability_bound=3.0, name="rotating")


def test_family_cocycle_and_identity():
    g, W = _setup(128)
    for drift in (_rotating_drift(), make_drift("random_adapted", {"a": -2.0}, 2)):
        fam = build_family(drift, g, W)
        assert np.array_equal(fam(17, 17), np.eye(2))
        lhs = fam(100, 40) @ fam(40, 5)
        rhs = fam(100, 5)
        assert np.linalg.norm(lhs - rhs) <= 1e-8 * np.linalg.norm(rhs)
    with pytest.raises(OutOfRangeError):
        fam(3, 5)


def test_family_backward_derivative():
    g, W = _setup(512)
    drift = _rotating_drift()
    fam = build_family(drift, g, W)
    A = drift.values(g, W)
    i, j = 400, 200
    diff = (fam(i, j + 1) - fam(i, j)) / g.dt
    assert np.linalg.norm(diff + fam(i, j) @ A[j]) < 10 * g.dt * 10


def test_family_helpers_agree():
    g, W = _setup(64)
    fam = build_family(_rotating_drift(), g, W)
    S0 = fam.from_origin()
    ST = fam.to_terminal()
    assert np.allclose(S0[30], fam(30, 0), rtol=1e-13)
    assert np.allclose(ST[12], fam(64, 12), rtol=1e-13)


def test_nonfinite_drift():
    g, W = _setup(16)
    bad = DriftSpec(lambda t, W: np.full((len(t), 1, 1), np.inf))
    with pytest.raises(EvaluationError):
        build_family(bad, g, W)


def test_zero_drift_collapse():
    g, W = _setup(256, m=2)
    G = materialize(make_process("matrix_adapted", {"d": 2}, 1.0, 2), W)
    zero = make_drift("zero", {}, 2)
    U = forward_convolution(zero, G, W)
    assert np.array_equal(U.values, ito_path(G, W).values)


def test_zero_process():
    g, W = _setup()
    G = OperatorProcess(g, np.zeros((g.N + 1, 1, 1)))
    A = make_drift("scalar", {"a": -1.0}, 1)
    assert np.all(forward_convolution(A, G, W).values == 0)
    assert np.all(euler_maruyama(A, G, W).values == 0)


def test_euler_zero_drift_is_brownian():
    g, W = _setup()
    G = materialize(make_process("constant", {}, 1.0, 1), W)
    U = euler_maruyama(make_drift("zero", {}, 1), G, W)
    assert np.allclose(U.values[:, 0], W.values[:, 0], atol=1e-13)


def test_forward_convolution_matches_direct_sum():
    g, W = _setup(64, m=1)
    drift = _rotating_drift()
    G = materialize(make_process("matrix_adapted", {"d": 2}, 1.0, 1), W)
    U = forward_convolution(drift, G, W).values
    fam = build_family(drift, g, W)
    J = ito_path(G, W).values
    A = drift.values(g, W)
    for i in (0, 1, 17, 64):
        direct = fam(i, 0) @ J[i] - sum(fam(i, j) @ A[j] @ (J[i] - J[j]) * g.dt for j in range(i))
        assert np.allclose(U[i], direct, rtol=1e-11, atol=1e-13)


def test_ou_cross_validation():
    g, W = _setup(2**12, seed=3)
    G = materialize(make_process("constant", {}, 1.0, 1), W)
    A = make_drift("scalar", {"a": -1.0}, 1)
    U, V = forward_convolution(A, G, W).values, euler_maruyama(A, G, W).values
    assert np.max(np.abs(U - V)) / np.max(np.abs(V)) < 0.05


def test_stiff_drift_is_stable():
    g, W = _setup(2**10, seed=1)
    G = materialize(make_process("constant", {"d": 3}, 1.0, 1), W)
    A = make_drift("stiff", {"lam": 200.0}, 3)
    U = forward_convolution(A, G, W).values
    assert np.all(np.isfinite(U))


def test_euler_overflow_guard():
    g, W = _setup(16)
    G = materialize(make_process("constant", {}, 1.0, 1), W)
    A = make_drift("scalar", {"a": -1e40}, 1)
    with pytest.warns(RuntimeWarning), pytest.raises(StabilityError):
        euler_maruyama(A, G, W)


def test_weak_solution_residual_shrinks():
    A = make_drift("random_adapted", {"a": -1.5}, 1)
    spec = make_process("constant", {}, 1.0, 1)
    res = {}
    for N in (256, 512, 1024, 2048):
        vals = []
        for r in range(10):
            g = make_grid(1.0, N)
            W = sample_brownian(g, 1, 17, r)
            vals.append(weak_solution_residual(A, materialize(spec, W), W))
        res[N] = np.median(vals)
    assert res[512] <= 0.5 * res[256] * 1.2
    assert res[2048] < res[256] / 4
