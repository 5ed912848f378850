"""Command line interface: ``forwardint run|validate|presets|version``.

Exit codes: 0 success, 1 invalid configuration, 2 failure while running or
writing results, 3 an identity-suite check exceeded its threshold.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .config import DEFAULTS, load_config
from .exceptions import ConfigError, ForwardIntError
from .experiments import config_violations, config_warnings, run_experiment, with_overrides
from .presets import DRIFT_PRESETS, MULTIPLIER_PRESETS, PROCESS_PRESETS
from .report import emit_report

EXIT_OK, EXIT_CONFIG, EXIT_RUN, EXIT_CHECK = 0, 1, 2, 3
OUT_ENV = "FORWARDINT_OUT"
DEFAULT_OUT = "forwardint-out"


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="forwardint", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config")
    run.add_argument("--out", help=f"output directory (default: config out_dir, ${OUT_ENV}, ./{DEFAULT_OUT})")
    run.add_argument("--replicates", type=_positive_int)
    run.add_argument("--seed", type=int)
    run.add_argument("--threads", type=_positive_int, default=1,
                     help="worker threads for replicates; results do not depend on it")

    val = sub.add_parser("validate", help="check a config file and list every problem")
    val.add_argument("config")

    sub.add_parser("presets", help="list process, multiplier and drift presets")
    sub.add_parser("version", help="print the package version")
    return ap


def _err(msg: str):
    print(msg, file=sys.stderr)


def _load(path: str):
    try:
        return load_config(path)
    except ConfigError as exc:
        _err(f"{path}: invalid configuration")
        for v in exc.violations:
            _err(f"  {v}")
    except OSError as exc:
        _err(f"{path}: cannot read config: {exc}")
    return None


def cmd_validate(args) -> int:
    cfg = _load(args.config)
    if cfg is None:
        return EXIT_CONFIG
    for w in config_warnings(cfg):
        _err(f"warning: {w}")
    print(f"{args.config}: ok (kind={cfg.kind}, N={cfg.N}, replicates={cfg.replicates})")
    return EXIT_OK


def _out_dir(args, cfg) -> str:
    return args.out or cfg.out_dir or os.environ.get(OUT_ENV) or DEFAULT_OUT


def cmd_run(args) -> int:
    cfg = _load(args.config)
    if cfg is None:
        return EXIT_CONFIG
    cfg = with_overrides(cfg, replicates=args.replicates, seed=args.seed)
    bad = config_violations(cfg)
    if bad:
        for v in bad:
            _err(f"  {v}")
        return EXIT_CONFIG
    out = _out_dir(args, cfg)
    try:
        report = run_experiment(cfg, threads=args.threads)
        emit_report(report, out)
    except (ForwardIntError, ArithmeticError, OSError) as exc:
        _err(f"run failed: {type(exc).__name__}: {exc}")
        return EXIT_RUN
    for w in report.warnings:
        _err(f"warning: {w}")
    print(f"{cfg.kind}: {cfg.replicates} replicates in {report.wall_clock:.2f}s, results in {out}")
    print(f"{'n':>6} {'median':>12} {'q10':>12} {'q90':>12}")
    for s in report.summaries:
        print(f"{s.n:>6} {s.median:12.4e} {s.q10:12.4e} {s.q90:12.4e}")
    failed = [name for name, c in report.checks.items() if not c["passed"]]
    for name, c in report.checks.items():
        status = "PASS" if c["passed"] else "FAIL"
        print(f"{status} {name}: max residual {c['max_residual']:.3e} (threshold {c['threshold']:.0e})")
    return EXIT_CHECK if failed else EXIT_OK


def cmd_presets(args) -> int:
    for title, table in (("process", PROCESS_PRESETS), ("multiplier", MULTIPLIER_PRESETS),
                         ("drift", DRIFT_PRESETS)):
        print(f"[{title}]")
        for pre in table.values():
            params = ", ".join(f"{k}={v[1]!r}" for k, v in pre.params.items())
            print(f"  {pre.name:<20} {pre.description}" + (f"  ({params})" if params else ""))
    print("[defaults]")
    for k, v in DEFAULTS.items():
        print(f"  {k} = {v}")
    return EXIT_OK


def cmd_version(args) -> int:
    print(f"forwardint {__version__}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "validate": cmd_validate, "presets": cmd_presets, "version": cmd_version}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
