"""Sectioned ``key = value`` configuration files.

::

    [grid]
    T = 1.0
    N = 4096
    [noise]
    m = 1
    seed = 12345
    [process]
    preset = brownian_adapted
    [multiplier]
    preset = singular_power
    delta = 0.75
    [drift]
    preset = zero
    [norms]
    alpha = 0.3
    p = 4
    beta = 0.4
    [run]
    kind = converge
    n_list = 4, 8, 16, 32, 64
    replicates = 200
    out_dir = results
    allow_unsupported = false

Lines starting with ``#`` or ``;`` are comments.  Numbers use ``.`` as the
decimal separator regardless of locale.  Keys other than ``preset`` in the
preset sections are parameters of the chosen preset.
"""

from __future__ import annotations

import re

from .exceptions import ConfigError
from .experiments import DEFAULT_N, ExperimentConfig, config_violations
from .presets import DRIFT_PRESETS, MULTIPLIER_PRESETS, PROCESS_PRESETS

__all__ = ["parse_config", "render_config", "load_config", "DEFAULTS"]

_INT = re.compile(r"[+-]?\d+\Z")
_FLOAT = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?\Z")
_SECTION = re.compile(r"\[\s*([A-Za-z_]\w*)\s*\]\Z")
_KEY = re.compile(r"[A-Za-z_]\w*\Z")

# section -> key -> (config field, type)
FIELDS = {
    "grid": {"T": ("T", "float"), "N": ("N", "int")},
    "noise": {"m": ("m", "int"), "seed": ("seed", "int")},
    "norms": {"alpha": ("alpha", "float"), "p": ("p", "float"), "beta": ("beta", "float")},
    "run": {
        "kind": ("kind", "str"),
        "n_list": ("n_list", "ints"),
        "replicates": ("replicates", "int"),
        "out_dir": ("out_dir", "str"),
        "allow_unsupported": ("allow_unsupported", "bool"),
    },
}
PRESET_SECTIONS = {
    "process": PROCESS_PRESETS,
    "multiplier": MULTIPLIER_PRESETS,
    "drift": DRIFT_PRESETS,
}

# Defaults applied when a key is absent.  ``N`` and ``process.preset`` depend
# on ``run.kind``; see ``DEFAULT_N`` and ``experiments.DEFAULT_PROCESS``.
DEFAULTS = {
    "grid.T": 1.0,
    "grid.N": "1024 for converge/norms, 4096 otherwise",
    "noise.m": 1,
    "noise.seed": 12345,
    "process.preset": "brownian_adapted for converge, matrix_adapted for identities, constant otherwise",
    "multiplier.preset": "constant",
    "drift.preset": "zero",
    "norms.alpha": 0.3,
    "norms.p": 4.0,
    "norms.beta": 0.4,
    "run.n_list": "4, 8, 16, 32, 64",
    "run.replicates": 100,
    "run.out_dir": "(empty: --out, then $FORWARDINT_OUT, then ./forwardint-out)",
    "run.allow_unsupported": False,
}


def _convert(raw: str, typ, where: str, errors: list):
    def bad(what):
        errors.append(f"{where}: expected {what}, got {raw!r}")

    if typ == "str":
        return raw
    if isinstance(typ, tuple):
        if raw not in typ:
            return bad("one of " + ", ".join(typ))
        return raw
    if typ == "int":
        if not _INT.match(raw):
            return bad("an integer")
        return int(raw)
    if typ == "float":
        if not _FLOAT.match(raw):
            return bad("a decimal number")
        return float(raw)
    if typ == "bool":
        low = raw.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        return bad("true or false")
    if typ in ("ints", "floats"):
        parts = [s.strip() for s in raw.split(",") if s.strip()]
        pat, conv = (_INT, int) if typ == "ints" else (_FLOAT, float)
        if not parts or not all(pat.match(s) for s in parts):
            return bad("a comma-separated list of " + ("integers" if typ == "ints" else "numbers"))
        return tuple(conv(s) for s in parts)
    raise AssertionError(typ)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    errors: list[str] = []
    entries: dict[str, dict[str, tuple[str, int, int, int]]] = {}
    section = None
    bad_section = False  # keys under a rejected header are not reported again
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#;":
            continue
        col = len(line) - len(line.lstrip()) + 1
        if stripped.startswith("["):
            m = _SECTION.match(stripped)
            if not m:
                errors.append(f"line {lineno}, column {col}: malformed section header {stripped!r}")
                section, bad_section = None, True
                continue
            section, bad_section = m.group(1), False
            if section not in FIELDS and section not in PRESET_SECTIONS:
                errors.append(f"line {lineno}, column {col}: unknown section [{section}]")
                section, bad_section = None, True
            elif section in entries:
                errors.append(f"line {lineno}, column {col}: section [{section}] repeated")
            else:
                entries[section] = {}
            continue
        if "=" not in stripped:
            errors.append(f"line {lineno}, column {col}: expected 'key = value'")
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        vcol = len(line) - len(line.partition("=")[2].lstrip()) + 1
        if not _KEY.match(key):
            errors.append(f"line {lineno}, column {col}: invalid key {key!r}")
            continue
        if section is None:
            if not bad_section:
                errors.append(f"line {lineno}, column {col}: key {key!r} before any section header")
            continue
        if key in entries[section]:
            errors.append(f"line {lineno}, column {col}: key {key!r} repeated in [{section}]")
            continue
        entries[section][key] = (value.strip(), lineno, vcol, col)

    values: dict = {}
    for sec, keys in FIELDS.items():
        for key, (raw, lineno, vcol, kcol) in entries.get(sec, {}).items():
            if key not in keys:
                errors.append(f"line {lineno}, column {kcol}: unknown key {key!r} in [{sec}]")
                continue
            fname, typ = keys[key]
            v = _convert(raw, typ, f"line {lineno}, column {vcol}: {sec}.{key}", errors)
            if v is not None:
                values[fname] = v
    for sec, table in PRESET_SECTIONS.items():
        given = dict(entries.get(sec, {}))
        pre_entry = given.pop("preset", None)
        if pre_entry is None:
            name = ""
            if given:
                errors.append(f"[{sec}] has parameters but no preset")
                continue
        else:
            name = pre_entry[0]
            if name not in table:
                errors.append(
                    f"line {pre_entry[1]}, column {pre_entry[2]}: unknown {sec} preset {name!r}; "
                    f"choose from {', '.join(table)}"
                )
                continue
        params = {}
        if name:
            schema = table[name].params
            for key, (raw, lineno, vcol, kcol) in given.items():
                if key not in schema:
                    errors.append(f"line {lineno}, column {kcol}: unknown key {key!r} for {sec} preset {name!r}")
                    continue
                v = _convert(raw, schema[key][0], f"line {lineno}, column {vcol}: {sec}.{key}", errors)
                if v is not None:
                    params[key] = v
            values[sec] = name
            values[f"{sec}_params"] = params
    if "kind" not in values:
        errors.append("[run] kind is required")
    if errors:
        raise ConfigError(errors)
    if "N" not in values and values["kind"] in DEFAULT_N:
        values["N"] = DEFAULT_N[values["kind"]]
    cfg = ExperimentConfig(**values)
    bad = config_violations(cfg)
    if bad:
        raise ConfigError(bad)
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def render_config(cfg: ExperimentConfig) -> str:
    """Text that :func:`parse_config` turns back into ``cfg``."""
    lines = []
    for sec, keys in FIELDS.items():
        if sec == "run":
            continue
        lines.append(f"[{sec}]")
        for key, (fname, _) in keys.items():
            lines.append(f"{key} = {_fmt(getattr(cfg, fname))}")
    for sec in PRESET_SECTIONS:
        lines.append(f"[{sec}]")
        lines.append(f"preset = {getattr(cfg, sec)}")
        for key, v in getattr(cfg, f"{sec}_params").items():
            lines.append(f"{key} = {_fmt(v)}")
    lines.append("[run]")
    for key, (fname, _) in FIELDS["run"].items():
        lines.append(f"{key} = {_fmt(getattr(cfg, fname))}")
    return "\n".join(lines) + "\n"
