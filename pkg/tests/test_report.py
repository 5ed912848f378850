import json
import math
import os

import pytest

from forwardint.experiments import ExperimentConfig, ReplicateRecord, run_convergence, summarize, _finish
from forwardint.report import ERRORS_HEADER, SUMMARY_HEADER, emit_report


def _small_report():
    cfg = ExperimentConfig("converge", N=128, n_list=(4, 8), replicates=2)
    return run_convergence(cfg)


def test_files_and_rows(tmp_path):
    rep = _small_report()
    paths = emit_report(rep, tmp_path)
    assert set(paths) == {"run.json", "errors.csv", "summary.csv", "plot.dat"}
    rows = (tmp_path / "errors.csv").read_text().splitlines()
    assert rows[0] == ERRORS_HEADER and len(rows) == 1 + 2 * 2
    summ = (tmp_path / "summary.csv").read_text().splitlines()
    assert summ[0] == SUMMARY_HEADER and len(summ) == 3
    plot = (tmp_path / "plot.dat").read_text().splitlines()
    assert plot[0].startswith("#") and len(plot) == 3
    assert not [f for f in os.listdir(tmp_path) if f.startswith(".")]


def test_summary_matches_records(tmp_path):
    rep = _small_report()
    emit_report(rep, tmp_path)
    for line in (tmp_path / "summary.csv").read_text().splitlines()[1:]:
        n, median, *_ = line.split(",")
        expect = summarize([r.errors[int(n)] for r in rep.records]).median
        assert float(median) == expect  # 17 digits round-trip exactly


def test_json_content(tmp_path):
    rep = _small_report()
    emit_report(rep, tmp_path)
    data = json.loads((tmp_path / "run.json").read_text())
    assert data["schema_version"] == 1
    assert data["config"]["kind"] == "converge"
    assert data["config"]["n_list"] == [4, 8]
    assert [r["replicate"] for r in data["records"]] == [0, 1]
    assert data["records"][0]["stream_id"] == 0


def test_nonfinite_values_are_strings(tmp_path):
    cfg = ExperimentConfig("norms", N=64, n_list=(4,), replicates=1)
    rec = ReplicateRecord(0, 0, {0: 0.5}, float("inf"), ("nonfinite_v_norm",), {"x": float("nan")})
    emit_report(_finish(cfg, [rec], 0.0), tmp_path)
    data = json.loads((tmp_path / "run.json").read_text())
    assert data["records"][0]["v_norm"] == "inf"
    assert data["records"][0]["metrics"]["x"] == "nan"
    row = (tmp_path / "errors.csv").read_text().splitlines()[1]
    assert row == "0,0,0.5,inf,nonfinite_v_norm"


def test_byte_identical_reemit(tmp_path):
    rep = _small_report()
    emit_report(rep, tmp_path / "a")
    emit_report(rep, tmp_path / "b")
    for name in ("errors.csv", "summary.csv", "plot.dat", "run.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_unwritable_target(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_report(_small_report(), blocker)
