"""Persist a :class:`RunReport` as JSON, CSV and a plot-ready data file.

Files written to ``out_dir``:

``run.json``
    the full report (config echo, records, summaries, checks).
``errors.csv``
    ``replicate,n,error_norm,v_norm,flags``, one row per replicate and ``n``.
``summary.csv``
    ``n,median,mean,q10,q90,count``.
``plot.dat``
    ``n median`` pairs separated by whitespace.

Floats are written with 17 significant digits (``inf``/``nan`` spelled out,
and quoted in JSON).  Each file is written to a temporary name in the same
directory and renamed into place, so readers never see a partial file.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

from .experiments import RunReport

__all__ = ["emit_report", "report_to_dict", "ERRORS_HEADER", "SUMMARY_HEADER"]

ERRORS_HEADER = "replicate,n,error_norm,v_norm,flags"
SUMMARY_HEADER = "n,median,mean,q10,q90,count"


def _f(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _json(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _f(obj) if math.isfinite(obj) else json.dumps(_f(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _json(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return _json(obj.item(), indent)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def report_to_dict(report: RunReport) -> dict:
    return {
        "schema_version": report.schema_version,
        "config": report.config.to_dict(),
        "wall_clock_seconds": report.wall_clock,
        "records": [
            {
                "replicate": rec.replicate,
                "stream_id": rec.stream_id,
                "errors": {str(n): e for n, e in sorted(rec.errors.items())},
                "v_norm": rec.v_norm,
                "flags": list(rec.flags),
                "metrics": dict(rec.metrics),
            }
            for rec in report.records
        ],
        "summaries": [vars(s) for s in report.summaries],
        "checks": report.checks,
        "warnings": list(report.warnings),
    }


def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def errors_csv(report: RunReport) -> str:
    lines = [ERRORS_HEADER]
    for rec in report.records:
        flags = ";".join(rec.flags)
        for n, e in sorted(rec.errors.items()):
            lines.append(f"{rec.replicate},{n},{_f(e)},{_f(rec.v_norm)},{flags}")
    return "\n".join(lines) + "\n"


def summary_csv(report: RunReport) -> str:
    lines = [SUMMARY_HEADER]
    for s in report.summaries:
        lines.append(f"{s.n},{_f(s.median)},{_f(s.mean)},{_f(s.q10)},{_f(s.q90)},{s.count}")
    return "\n".join(lines) + "\n"


def plot_dat(report: RunReport) -> str:
    lines = ["# n median"]
    lines += [f"{s.n} {_f(s.median)}" for s in report.summaries]
    return "\n".join(lines) + "\n"


def emit_report(report: RunReport, out_dir) -> dict:
    """Write the four report files; returns ``{name: path}``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "run.json": _json(report_to_dict(report)) + "\n",
        "errors.csv": errors_csv(report),
        "summary.csv": summary_csv(report),
        "plot.dat": plot_dat(report),
    }
    paths = {}
    for name, text in files.items():
        _atomic_write(out / name, text)
        paths[name] = out / name
    return paths
