"""Command-line runner: `bohmstat run <config.json>` and
`bohmstat list-experiments`.

Exit codes: 0 success, 2 configuration/validation error, 3 a built-in
numerical check failed.  Every run leaves a manifest.json next to its outputs
with the config echo, seed, wall time, sha256 of every emitted file, and the
headline metrics; re-running the same config and seed reproduces the metrics
and hashes bit-identically.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

from . import __version__
from .configio import EXPERIMENTS_META, load_config, validate_config
from .errors import ConfigError
from .experiments import RUNNERS


def _json_default(obj):
    import numpy as np

    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _resolve_threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("BOHM_THREADS")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError("BOHM_THREADS", f"not an integer: {env!r}") from exc
    return None


def _apply_threads(k):
    if k is None:
        return
    if k < 1:
        raise ConfigError("--threads", "must be >= 1")
    os.environ.setdefault("NUMBA_NUM_THREADS", str(k))
    try:
        import numba

        numba.set_num_threads(k)
    except Exception:
        pass  # numpy fallback build: thread cap is advisory only


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        name = validate_config(cfg)
        _apply_threads(_resolve_threads(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError:
        print(f"config error: {args.config}: no such file", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    outdir = args.output or cfg.get("output_dir") or "."
    os.makedirs(outdir, exist_ok=True)
    start = time.perf_counter()
    try:
        result = RUNNERS[name](cfg, outdir, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    wall = time.perf_counter() - start
    manifest = {
        "experiment": name,
        "version": __version__,
        "seed": seed,
        "config": cfg,
        "wall_time_s": wall,
        "files": {f: _sha256(os.path.join(outdir, f)) for f in result.files},
        "metrics": result.metrics,
        "checks": result.checks,
        "status": "ok" if result.passed else "check_failed",
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True, default=_json_default)
    for key, ok in sorted(result.checks.items()):
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {key}")
    for key, val in result.metrics.items():
        print(f"  {key} = {val}")
    if not result.passed:
        print(f"{name}: numerical check failed", file=sys.stderr)
        return 3
    return 0


def cmd_list(args) -> int:
    width = max(len(n) for n in EXPERIMENTS_META)
    for name in sorted(EXPERIMENTS_META):
        desc, required = EXPERIMENTS_META[name]
        print(f"{name:<{width}}  {desc}  [sections: {', '.join(required)}]")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bohmstat",
        description="probability-current statistical mechanics experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run one experiment from a JSON config")
    run_p.add_argument("config", help="path to the experiment config")
    run_p.add_argument("--output", help="output directory (overrides config)")
    run_p.add_argument("--seed", type=int, help="seed override (64-bit)")
    run_p.add_argument("--threads", type=int,
                       help="thread cap (fallback: BOHM_THREADS)")
    run_p.set_defaults(func=cmd_run)
    list_p = sub.add_parser("list-experiments",
                            help="table of experiments and config sections")
    list_p.set_defaults(func=cmd_list)
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
