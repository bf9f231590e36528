"""Command-line driver: one subcommand per experiment, key = value config files.

    tfedno dno-convergence --preset fig3 --out results/
    tfedno epsilon-study --config my.cfg --out results/ --threads 1

Writes ``<experiment>.csv``, ``<experiment>.schema.json`` and
``<experiment>.summary.json`` into the output directory.  Exit status is 0 on
success, 1 on runtime failure, divergence or a failed invariant, and 2 on a
malformed config (nothing is written in that case).
"""
from __future__ import annotations

import argparse
import ast
import configparser
import csv
import dataclasses
import json
import math
import sys
import time
from importlib import resources
from pathlib import Path

from threadpoolctl import threadpool_limits

from .experiments import EXPERIMENTS, ExperimentResult

PRESETS = {
    "fig1a": "zernike-convergence",
    "fig1b": "rough-convergence",
    "fig2": "bessel-compare",
    "poisson": "poisson-test",
    "fig3": "dno-convergence",
    "fig4": "epsilon-study",
    "fig5": "waterwave-sim",
    "selftest": "selftest",
}
DEFAULT_PRESET = {exp: name for name, exp in PRESETS.items()}

# tuple-valued fields: "pairs" holds a list of pairs, the rest are flat
PAIR_LISTS = {"pairs", "cases"}
POSITIVE_INTS = {"M", "N", "J", "K", "steps", "snapshot_every", "nodes_per_piece", "fit_from"}
POSITIVE_FLOATS = {"h", "dt", "g"}


class ConfigError(ValueError):
    pass


def read_config_text(text: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    extra = [name for name in parser.sections() if name != "config"]
    if extra:
        raise ConfigError(f"section headers are not allowed: [{extra[0]}]")
    return dict(parser["config"])


def _literal(key, raw):
    try:
        return ast.literal_eval(raw.strip())
    except (ValueError, SyntaxError) as exc:
        raise ConfigError(f"{key}: cannot parse value {raw!r}") from exc


def _number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _coerce(key, value, kind):
    """Check a literal against the field's annotated kind: int, float, bool or tuple."""
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected True or False")
        return value
    if kind == "int":
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{key}: expected an integer")
        return value
    if kind == "float":
        if not _number(value):
            raise ConfigError(f"{key}: expected a number")
        return float(value)
    items = value if isinstance(value, (tuple, list)) else (value,)
    if key in PAIR_LISTS:
        if items and not isinstance(items[0], (tuple, list)):
            items = (items,)
        if not items or not all(isinstance(it, (tuple, list)) and len(it) == 2 and all(map(_number, it)) for it in items):
            raise ConfigError(f"{key}: expected pairs like (3, 2), (5, 1)")
        return tuple(tuple(it) for it in items)
    if not items or not all(map(_number, items)):
        raise ConfigError(f"{key}: expected a comma-separated list of numbers")
    return tuple(items)


def build_config(values: dict, experiment: str | None = None):
    """Turn raw key/value strings into the experiment's config dataclass."""
    values = dict(values)
    name = values.pop("experiment", None)
    if name is None:
        raise ConfigError("missing required field 'experiment'")
    name = _literal("experiment", name) if name[:1] in "\"'" else name.strip()
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}")
    if experiment is not None and name != experiment:
        raise ConfigError(f"config is for {name!r}, not {experiment!r}")
    cls, _ = EXPERIMENTS[name]
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(values) - set(fields))
    if unknown:
        raise ConfigError(f"unknown field(s) for {name}: {', '.join(unknown)}")
    kwargs = {}
    for key, f in fields.items():
        if key not in values:
            if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
                raise ConfigError(f"missing required field {key!r}")
            continue
        kwargs[key] = _coerce(key, _literal(key, values[key]), str(f.type))
    cfg = cls(**kwargs)
    for key in POSITIVE_INTS & set(fields):
        if getattr(cfg, key) < 1:
            raise ConfigError(f"{key} must be at least 1")
    for key in POSITIVE_FLOATS & set(fields):
        v = getattr(cfg, key)
        if not (math.isfinite(v) and v > 0):
            raise ConfigError(f"{key} must be positive")
    return name, cfg


def preset_text(preset: str) -> str:
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    return resources.files("tfedno").joinpath("presets", f"{preset}.cfg").read_text()


def _fmt(v):
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj


def write_outputs(out: Path, name: str, cfg, result: ExperimentResult):
    out.mkdir(parents=True, exist_ok=True)
    table = out / f"{name}.csv"
    with table.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(result.columns)
        for row in result.rows:
            w.writerow([_fmt(v) for v in row])
    schema = {
        "table": table.name,
        "experiment": name,
        "float_format": "17 significant digits",
        "columns": [{"name": c, "description": result.descriptions.get(c, "")} for c in result.columns],
    }
    for extra, desc in result.extra_files.items():
        schema.setdefault("extra_files", {})[extra] = desc
    (out / f"{name}.schema.json").write_text(json.dumps(schema, indent=2, sort_keys=True) + "\n")
    summary = {"experiment": name, "config": _jsonable(dataclasses.asdict(cfg)), "ok": bool(result.ok),
               "results": _jsonable(result.summary)}
    (out / f"{name}.summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return table


def run(name, cfg, out: Path) -> ExperimentResult:
    _, fn = EXPERIMENTS[name]
    if name == "waterwave-sim":
        out.mkdir(parents=True, exist_ok=True)
        result = fn(cfg, trajectory_path=out / f"{name}.trajectory.csv")
        result.extra_files[f"{name}.trajectory.csv"] = (
            "coefficients of eta and q at each snapshot; columns t, field, m, n, re, im; "
            "the first line is a '#' comment holding the run config as JSON"
        )
        return result
    return fn(cfg)


def _common_options():
    # SUPPRESS defaults let the options appear before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--config", type=Path, default=argparse.SUPPRESS, help="key = value config file")
    src.add_argument("--preset", default=argparse.SUPPRESS, help=f"shipped config: {', '.join(PRESETS)}")
    common.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="output directory (default results/)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="cap on BLAS threads")
    return common


def make_parser():
    common = _common_options()
    p = argparse.ArgumentParser(
        prog="tfedno",
        description="Spectral DNO experiments on the cylinder.",
        parents=[common],
        epilog="With --preset or --config the subcommand may be omitted.",
    )
    sub = p.add_subparsers(dest="experiment")
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    config = getattr(args, "config", None)
    preset = getattr(args, "preset", None)
    out = getattr(args, "out", Path("results"))
    threads = getattr(args, "threads", None)
    try:
        if config is not None and preset is not None:
            raise ConfigError("give either --config or --preset, not both")
        if config is not None:
            try:
                text = config.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
        elif preset is not None or args.experiment is not None:
            text = preset_text(preset or DEFAULT_PRESET[args.experiment])
        else:
            raise ConfigError("give a subcommand, --config or --preset")
        name, cfg = build_config(read_config_text(text), args.experiment)
        if threads is not None and threads < 1:
            raise ConfigError("--threads must be at least 1")
        if out.exists() and not out.is_dir():
            raise ConfigError(f"--out {out} is not a directory")
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"tfedno: error: {exc}", file=sys.stderr)
        return 2

    start = time.perf_counter()
    try:
        if threads is not None:
            with threadpool_limits(limits=threads):
                result = run(name, cfg, out)
        else:
            result = run(name, cfg, out)
        table = write_outputs(out, name, cfg, result)
    except Exception as exc:  # runtime failure: report and exit 1
        print(f"tfedno: {name} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - start
    status = "PASS" if result.ok else "FAIL"
    print(f"{name}: {status} ({elapsed:.1f} s) -> {table}")
    return 0 if result.ok else 1


if __name__ == "__main__":
    sys.exit(main())
