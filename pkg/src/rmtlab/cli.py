"""Command-line batch runner: rmt-lab run | list-experiments | validate-config | profile-info."""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
import time
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from . import __version__
from .errors import ConfigInvalid, RmtError
from .experiments.common import resolve_threads
from .experiments.registry import EXPERIMENTS
from .profiles import profile_from_spec


def load_schema() -> dict:
    return json.loads(resources.files("rmtlab").joinpath("schema/config.schema.json").read_text())


def _error_key(err: jsonschema.ValidationError) -> str:
    if err.validator == "required":
        # message is "'<name>' is a required property"
        missing = [k for k in err.validator_value if k not in (err.instance or {})]
        if missing:
            return ".".join([*map(str, err.absolute_path), missing[0]])
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        if extra:
            return ".".join([*map(str, err.absolute_path), extra[0]])
    return ".".join(map(str, err.absolute_path)) or "<root>"


def validate_config(cfg) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigInvalid("<root>", "config must be a JSON object")
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(cfg), key=lambda e: (len(list(e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        raise ConfigInvalid(_error_key(err), err.message)
    return cfg


def read_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid("<file>", f"invalid JSON: {exc}") from exc
    return validate_config(cfg)


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def run_config(cfg: dict, out_dir, seed=None, threads=None):
    """Run one validated config and write report.json, cells.csv, manifest.json."""
    cfg = validate_config(dict(cfg))
    if seed is not None:
        cfg["seed"] = int(seed)
    n_threads = resolve_threads(threads if threads is not None else cfg.get("threads"))
    runner, _ = EXPERIMENTS[cfg["experiment"]]
    t0 = time.perf_counter()
    report = runner(cfg, int(cfg["seed"]), n_threads)
    elapsed = time.perf_counter() - t0
    report.wall_clock = elapsed
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    # single writer after reduction
    (out / "cells.csv").write_text(report.cells_csv())
    (out / "report.json").write_text(json.dumps(report.to_json(), indent=2, sort_keys=True))
    manifest = {"seed": int(cfg["seed"]), "config_hash": config_hash(cfg), "config": cfg,
                "experiment": cfg["experiment"], "threads": n_threads,
                "wall_clock": {cfg["experiment"]: elapsed},
                "versions": {"rmtlab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                             "python": platform.python_version()}}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rmt-lab", description="Random-matrix experiment runner")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--threads", type=int)
    r.add_argument("--out")
    sub.add_parser("list-experiments", help="list registered experiments")
    v = sub.add_parser("validate-config", help="check a config against the schema")
    v.add_argument("--config", required=True)
    pi = sub.add_parser("profile-info", help="print M, C_inf, C_sup and delta+- for a profile")
    src = pi.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="config whose 'profile' entry is used")
    src.add_argument("--profile", help="profile spec as inline JSON")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-experiments":
            for name, (_, desc) in EXPERIMENTS.items():
                print(f"{name}\t{desc}")
            return 0
        if args.command == "validate-config":
            cfg = read_config(args.config)
            print(f"ok: {cfg['experiment']}")
            return 0
        if args.command == "profile-info":
            if args.profile:
                spec = json.loads(args.profile)
            else:
                cfg = read_config(args.config)
                if "profile" not in cfg:
                    raise ConfigInvalid("profile", "config has no profile")
                spec = cfg["profile"]
            try:
                prof = profile_from_spec(spec)
            except (KeyError, ValueError, TypeError) as exc:
                raise ConfigInvalid("profile", str(exc)) from exc
            print(json.dumps(prof.summary(), indent=2, sort_keys=True))
            return 0
        if args.command == "run":
            cfg = read_config(args.config)
            out = args.out or cfg.get("output") or "rmt-lab-out"
            report = run_config(cfg, out, seed=args.seed, threads=args.threads)
            for name, rule in report.rules.items():
                print(f"{'PASS' if rule['passed'] else 'FAIL'} {name}: {rule['value']}")
            return 0 if report.passed else 2
    except ConfigInvalid as exc:
        print(f"ConfigInvalid: {exc}", file=sys.stderr)
        return 1
    except (RmtError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
