import math

import numpy as np
import pytest

from forwardint import ConfigError, InvalidArgumentError
from forwardint.experiments import (
    ExperimentConfig,
    config_violations,
    config_warnings,
    run_convergence,
    run_experiment,
    run_ibp,
    run_identity_suite,
    run_norms,
    run_spde,
    summarize,
    with_overrides,
)


def _cfg(kind, **kw):
    base = dict(N=256, n_list=(4, 8, 16), replicates=4)
    base.update(kw)
    return ExperimentConfig(kind, **base)


def test_summarize_examples():
    s = summarize([3.0, 1.0, 2.0])
    assert (s.median, s.mean, s.count) == (2.0, 2.0, 3)
    assert s.q10 == pytest.approx(1.2) and s.q90 == pytest.approx(2.8)
    s = summarize([1.0] * 4)
    assert s.median == s.q10 == s.q90 == 1.0
    # lower median for even counts
    assert summarize([0.0, 10.0]).median == 0.0
    with pytest.raises(InvalidArgumentError):
        summarize([])


def test_config_defaults_per_kind():
    assert ExperimentConfig("converge").process == "brownian_adapted"
    assert ExperimentConfig("identities").process == "matrix_adapted"
    assert ExperimentConfig("ibp").process == "constant"
    cfg = ExperimentConfig("converge", process_params={})
    assert cfg.process_params == {"d": 1}


def test_config_violations_collects_everything():
    bad = ExperimentConfig("converge", T=-1.0, alpha=0.45, beta=0.3, replicates=0, m=0)
    msgs = config_violations(bad)
    assert len(msgs) >= 3
    assert any("grid.T" in m for m in msgs) and any("replicates" in m for m in msgs)
    assert config_violations(ExperimentConfig("nonsense")) != []
    msgs = config_violations(ExperimentConfig("converge", alpha=0.4, beta=0.3))
    assert any("alpha < beta" in m for m in msgs)
    msgs = config_violations(ExperimentConfig("converge", N=100, n_list=(3,)))
    assert any("n_list" in m for m in msgs)
    msgs = config_violations(ExperimentConfig("converge", process="brownian_terminal"))
    assert any("adapted" in m for m in msgs)
    msgs = config_violations(ExperimentConfig("ibp", process="nope"))
    assert any("unknown preset" in m for m in msgs)


def test_unsupported_regime_needs_flag():
    kw = dict(multiplier="singular_power", multiplier_params={"delta": 1.2}, p=2.0)
    assert any("allow_unsupported" in m for m in config_violations(ExperimentConfig("ibp", **kw)))
    cfg = ExperimentConfig("ibp", allow_unsupported=True, **kw)
    assert config_violations(cfg) == []
    assert any("unsupported" in w for w in config_warnings(cfg))


def test_runner_kind_mismatch():
    with pytest.raises(InvalidArgumentError):
        run_ibp(_cfg("converge"))
    with pytest.raises(ConfigError):
        run_convergence(_cfg("converge", alpha=0.45, beta=0.3))


def test_convergence_records():
    rep = run_convergence(_cfg("converge"))
    assert [r.replicate for r in rep.records] == [0, 1, 2, 3]
    assert [s.n for s in rep.summaries] == [4, 8, 16]
    assert all(s.count == 4 for s in rep.summaries)
    assert all(math.isfinite(r.v_norm) for r in rep.records)
    assert rep.summaries[-1].median < rep.summaries[0].median


@pytest.mark.parametrize("kind", ["converge", "ibp", "spde", "norms", "identities"])
def test_thread_count_does_not_change_results(kind):
    cfg = _cfg(kind)
    a, b = run_experiment(cfg, threads=1), run_experiment(cfg, threads=4)
    for ra, rb in zip(a.records, b.records):
        assert ra.errors == rb.errors
        assert ra.metrics == rb.metrics
        assert ra.v_norm == rb.v_norm or (np.isnan(ra.v_norm) and np.isnan(rb.v_norm))


def test_replicates_are_prefix_stable_and_independent():
    small = run_convergence(_cfg("converge", replicates=2))
    large = run_convergence(_cfg("converge", replicates=4))
    assert [r.errors for r in small.records] == [r.errors for r in large.records[:2]]
    assert large.records[0].errors != large.records[1].errors
    other = run_convergence(_cfg("converge", replicates=2, seed=7))
    assert other.records[0].errors != small.records[0].errors


def test_nonfinite_v_norm_flagged_and_excluded():
    cfg = _cfg("norms", process="power_singular", process_params={"eps": 0.35}, beta=0.2, p=2.0)
    rep = run_norms(cfg)
    assert all("nonfinite_v_norm" in r.flags for r in rep.records)
    assert rep.summaries == []


def test_spde_and_ibp_run():
    rep = run_spde(_cfg("spde", drift="scalar"))
    assert all(set(r.metrics) == {"abs_gap", "weak_residual"} for r in rep.records)
    assert rep.summaries[0].n == 0 and rep.summaries[0].median < 0.2
    rep = run_ibp(_cfg("ibp", multiplier="singular_power"))
    assert len(rep.summaries) == 3


def test_identity_suite_passes():
    rep = run_identity_suite(_cfg("identities", m=2, N=1024))
    assert rep.passed, rep.checks
    assert set(rep.checks) >= {"fubini", "linearity", "hille", "locality"}


def test_with_overrides():
    cfg = _cfg("converge")
    assert with_overrides(cfg) is cfg
    assert with_overrides(cfg, replicates=None, seed=3).seed == 3
