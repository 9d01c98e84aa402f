"""Command-line experiment runner.

    tmss run <experiment> [--out DIR] [--format csv|json] [--config FILE] [--seed N]
                          [--set key=value ...] [--<key> value ...]

Parameters come from the experiment defaults, then the experiment's section
of an INI config file, then command-line overrides. Without ``--config`` the
file ``tmss.ini`` in the directory named by ``TMSS_CONFIG_DIR`` is used when
present. Exit codes: 0 success, 2 configuration error, 3 numerical guard.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import EXPERIMENTS, ConfigError, kernel_implementation
from .fock import CutoffError, NonHermitianError, NormDriftError, TruncationWarning
from .ion import CutoffOverflowError
from .states import DegenerateStateError

CONFIG_ENV = "TMSS_CONFIG_DIR"
CONFIG_NAME = "tmss.ini"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

NUMERICAL_ERRORS = (CutoffOverflowError, NormDriftError, NonHermitianError, CutoffError, TruncationWarning)

log = logging.getLogger("tmss")


def format_value(x) -> str:
    """CSV cell: 15 significant digits, empty for undefined values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return ""
        if x == 0.0:
            return "0"
        return format(x, ".15g")
    return str(x)


def json_value(x):
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return None
        return float(format(x, ".15g"))
    return str(x)


def write_table(path: Path, columns, rows, fmt: str) -> Path:
    if fmt == "csv":
        out = path.with_suffix(".csv")
        lines = [",".join(columns)]
        lines += [",".join(format_value(v) for v in row) for row in rows]
        out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        out = path.with_suffix(".json")
        records = [{c: json_value(v) for c, v in zip(columns, row)} for row in rows]
        out.write_text(json.dumps(records, indent=1) + "\n", encoding="utf-8")
    return out


def load_config(path: Path | None, experiment: str) -> dict[str, str]:
    """Key-value pairs of ``[experiment]``; unknown section names are rejected."""
    if path is None:
        env = os.environ.get(CONFIG_ENV)
        if not env:
            return {}
        path = Path(env) / CONFIG_NAME
        if not path.is_file():
            return {}
    if not Path(path).is_file():
        raise ConfigError(f"config file {path} not found")
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    for section in parser.sections():
        if section not in EXPERIMENTS:
            raise ConfigError(f"unknown section [{section}] in {path}")
    if not parser.has_section(experiment):
        return {}
    return dict(parser.items(experiment))


def parse_overrides(extra: list[str], sets: list[str]) -> dict[str, str]:
    out = {}
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"option {tok} needs a value")
            value = extra[i + 1]
            i += 2
        out[key.replace("-", "_")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tmss", description="Two-mode squeezed state experiments", allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"tmss {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment", allow_abbrev=False)
    run.add_argument("experiment", choices=sorted(EXPERIMENTS))
    run.add_argument("--out", type=Path, default=None, help="output directory (default out/<experiment>)")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--config", type=Path, default=None)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    run.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("list", help="list experiments and their parameters")
    return parser


def _diagnostic(kind: str, message: str):
    print(json.dumps({"status": "error", "kind": kind, "message": message}), file=sys.stderr)


def run_experiment(name: str, overrides: dict, out: Path, fmt: str, seed: int, config_path=None) -> dict:
    """Run ``name`` and write its tables plus ``run.json``; returns the manifest."""
    exp = EXPERIMENTS[name]
    cfg = exp.resolve(overrides)
    rng = np.random.default_rng(seed)
    with warnings.catch_warnings():
        warnings.simplefilter("error", TruncationWarning)
        tables = exp.run(cfg, rng)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for table, (cols, rows) in tables.items():
        files.append(write_table(out / table, cols, rows, fmt).name)
    manifest = {
        "experiment": name,
        "version": __version__,
        "format": fmt,
        "seed": seed,
        "config_file": str(config_path) if config_path else None,
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.items()},
        "kernel": kernel_implementation(),
        "files": files,
    }
    (out / "run.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    if args.command == "list":
        for name, exp in EXPERIMENTS.items():
            print(f"{name}: {exp.description}")
            for key, (kind, default) in exp.params.items():
                print(f"    {key} ({kind}) = {default}")
        return EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        overrides = load_config(args.config, args.experiment)
        overrides.update(parse_overrides(extra, args.set))
        out = args.out if args.out is not None else Path("out") / args.experiment
        run_experiment(args.experiment, overrides, out, args.format, args.seed, args.config)
    except (ConfigError, DegenerateStateError) as exc:
        _diagnostic("config", str(exc))
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        _diagnostic(type(exc).__name__, str(exc))
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
