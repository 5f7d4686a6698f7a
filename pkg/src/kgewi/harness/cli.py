"""Command-line entry point: ``kgewi <subcommand> --config FILE``.

Exit status is 0 on success, 2 for configuration or usage errors, 3 when any
run blew up (its record carries ``h1_error = inf``) and 1 for I/O failures.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from .. import __version__
from ..kernels import BACKEND
from .config import ConfigError, RunConfig, load_config
from .reference import compute_reference, reference_path
from .studies import (
    WORKERS_ENV,
    records_to_csv,
    run_energy_trace,
    run_solve,
    run_spatial_study,
    run_stability_study,
    run_temporal_study,
    traces_to_csv,
    worker_count,
)

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_UNSTABLE = 0, 1, 2, 3

SUBCOMMANDS = {
    "solve": "integrate each configured method once and compare with the reference",
    "temporal": "time-step refinement study, optionally along an epsilon ladder",
    "spatial": "mesh refinement study over [study] h_values",
    "stability": "fixed time step over [study] h_values",
    "energy": "energy trace for each method over the time-step ladder",
    "reference": "build (or confirm the cache of) the reference solution",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kgewi", description="Klein-Gordon exponential wave integrator harness")
    p.add_argument("--version", action="version", version=f"kgewi {__version__}")
    sub = p.add_subparsers(dest="command", metavar="subcommand", required=True)
    for name, help_ in SUBCOMMANDS.items():
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.add_argument("--config", "-c", required=True, help="INI-style run configuration")
        sp.add_argument("--csv", help="override [output] csv")
        sp.add_argument("--json", help="override [output] json")
        sp.add_argument("--cache-dir", help="override [reference] cache_dir")
        sp.add_argument("--regenerate", action="store_true", help="rebuild the reference even on a cache hit")
        sp.add_argument("--workers", type=int,
                        help=f"worker processes (default: ${WORKERS_ENV} or 1)")
    return p


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _json_float(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return None
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def _check_writable(path: str | None):
    if path is None:
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise OSError(f"output directory {parent} is not writable")


def _write(path: str | None, text: str):
    if path is not None:
        Path(path).write_text(text)


def _summary(command, config, records, started, extra=None) -> str:
    doc = {
        "kgewi_version": __version__,
        "backend": BACKEND,
        "command": command,
        "started": started,
        "finished": _now(),
        "config": config.as_dict(),
        "records": [{k: _json_float(v) for k, v in r.as_dict().items()} for r in records],
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2) + "\n"


def _execute(args, config: RunConfig) -> int:
    started = _now()
    workers = args.workers if args.workers is not None else worker_count()
    extra = {}
    trace_text = None
    if args.command == "reference":
        if not config.reference:
            raise ConfigError("reference generation disabled in [reference] enabled")
        rows = []
        for eps, _ in config.epsilon_ladder():
            existed = reference_path(config, eps).exists()
            ref = compute_reference(config, eps, regenerate=args.regenerate)
            status = "cache hit" if ref.cache_hit else ("regenerated" if existed else "computed")
            print(f"epsilon={eps!r}: {status}: {ref.path}")
            rows.append({"epsilon": eps, "path": str(ref.path), "status": status,
                         "problem_hash": ref.metadata["problem_hash"]})
        _write(config.json, json.dumps({"kgewi_version": __version__, "command": "reference",
                                        "started": started, "finished": _now(),
                                        "config": config.as_dict(), "references": rows}, indent=2) + "\n")
        return EXIT_OK
    if args.regenerate and config.reference:
        for eps, _ in config.epsilon_ladder():
            compute_reference(config, eps, regenerate=True)
    if args.command == "solve":
        records = run_solve(config, workers)
    elif args.command == "temporal":
        records = run_temporal_study(config, workers)
    elif args.command == "spatial":
        records = run_spatial_study(config, workers)
    elif args.command == "stability":
        records = run_stability_study(config, workers)
    else:
        records, traces = run_energy_trace(config, workers)
        trace_text = traces_to_csv(traces)
    table = records_to_csv(records)
    if config.csv is not None:
        _write(config.csv, table)
        if trace_text is not None:
            trace_path = str(Path(config.csv).with_suffix("")) + ".trace.csv"
            _write(trace_path, trace_text)
            extra["trace_csv"] = trace_path
    else:
        sys.stdout.write(table)
    _write(config.json, _summary(args.command, config, records, started, extra))
    unstable = [r for r in records if math.isinf(r.h1_error)]
    for r in unstable:
        print(f"unstable: {r.method}{r.order} epsilon={r.epsilon!r} tau={r.tau!r} h={r.h!r}", file=sys.stderr)
    return EXIT_UNSTABLE if unstable else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        config = load_config(args.config)
        overrides = {k: v for k, v in (("csv", args.csv), ("json", args.json),
                                        ("cache_dir", args.cache_dir)) if v is not None}
        if overrides:
            config = config.replace(**overrides)
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers must be >= 1")
    except ConfigError as exc:
        print(f"kgewi: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _check_writable(config.csv)
        _check_writable(config.json)
        return _execute(args, config)
    except ConfigError as exc:
        print(f"kgewi: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"kgewi: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
