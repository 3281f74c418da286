"""Command-line runner for the scenario catalog.

    dampwave list [--json]
    dampwave run CONFIG.yaml [--out DIR] [--parallel N] [--seed S]

A config file names one scenario and optional parameter overrides::

    scenario: thm1.1-1d
    params:
      fit_window: [20, 200]

The merged configuration (defaults plus overrides) is echoed into
``summary.json`` so every run is self-describing.  The exit status is 0 iff
all gated checks pass.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import yaml

from . import __version__
from .reporting import write_csv, write_summary
from .scenarios import CATALOG, catalog, run_scenario

log = logging.getLogger("dampwave")

EXIT_OK, EXIT_CHECKS_FAILED, EXIT_BAD_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


def load_config(path: Path) -> dict:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}")
    if not isinstance(raw, dict) or "scenario" not in raw:
        raise ConfigError(f"{path}: expected a mapping with a 'scenario' key")
    unknown = set(raw) - {"scenario", "params", "out"}
    if unknown:
        raise ConfigError(f"{path}: unknown top-level keys {sorted(unknown)}")
    name = raw["scenario"]
    if name not in CATALOG:
        raise ConfigError(f"unknown scenario {name!r}; known scenarios: {', '.join(CATALOG)}")
    params = raw.get("params") or {}
    if not isinstance(params, dict):
        raise ConfigError(f"{path}: 'params' must be a mapping")
    _check_keys(params, CATALOG[name].defaults, "params")
    return {"scenario": name, "params": params, "out": raw.get("out")}


def _check_keys(over: dict, base: dict, where: str):
    for k, v in over.items():
        if k not in base:
            raise ConfigError(f"{where}.{k}: not a parameter of this scenario (known: {sorted(base)})")
        if isinstance(v, dict) and isinstance(base[k], dict):
            _check_keys(v, base[k], f"{where}.{k}")


def cmd_list(args) -> int:
    entries = catalog()
    if args.json:
        print(json.dumps(entries, indent=2))
    else:
        width = max(len(e["name"]) for e in entries)
        for e in entries:
            print(f"{e['name']:<{width}}  {e['anchor']}  [{', '.join(e['modules'])}]")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    name = cfg["scenario"]
    params = dict(cfg["params"])
    if args.seed is not None:
        if "seed" not in CATALOG[name].defaults:
            log.warning("scenario %s draws no random data; --seed is recorded only", name)
        else:
            params["seed"] = args.seed
    out = Path(args.out or cfg["out"] or "runs") / name
    out.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(out / "run.log", mode="w")
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log.addHandler(handler)
    try:
        log.info("dampwave %s scenario %s", __version__, name)
        result = run_scenario(name, params, workers=args.parallel)
        for msg in result.log:
            log.info(msg)
        for table, cols in result.tables.items():
            write_csv(out / f"{table}.csv", cols, result.footers.get(table, ""))
        write_summary(
            out / "summary.json",
            name,
            result.config,
            result.checks,
            {"seed": args.seed, "log": result.log, "passed": result.passed},
        )
        for c in result.checks:
            tag = "PASS" if c.passed else "FAIL"
            line = f"{tag} {c.id}: {c.value} ({c.threshold}){'' if c.gated else ' [not gated]'}"
            log.info(line)
            print(line)
        log.info("elapsed %.1f s", result.elapsed)
        print(f"{name}: {'all gated checks passed' if result.passed else 'FAILED'}; outputs in {out}")
    finally:
        log.removeHandler(handler)
        handler.close()
    return EXIT_OK if result.passed else EXIT_CHECKS_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dampwave", description="Damped-wave diffusion-phenomenon experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    pl = sub.add_parser("list", help="show the scenario catalog")
    pl.add_argument("--json", action="store_true", help="machine-readable catalog")
    pl.set_defaults(func=cmd_list)
    pr = sub.add_parser("run", help="run the scenario named in a YAML config")
    pr.add_argument("config", type=Path)
    pr.add_argument("--out", type=Path, default=None, help="output directory (default: runs/)")
    pr.add_argument("--parallel", type=int, default=1, help="worker threads for independent checks")
    pr.add_argument("--seed", type=int, default=None, help="override the data seed")
    pr.set_defaults(func=cmd_run)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    log.setLevel(logging.INFO)
    log.propagate = False
    if not any(getattr(h, "_console", False) for h in log.handlers):
        console = logging.StreamHandler(sys.stderr)
        console.setLevel(logging.WARNING)
        console.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
        console._console = True
        log.addHandler(console)
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
