"""Disk cache for the full-resolution characteristic-function runs used by the acceptance suite.

The cache key combines the run configuration with a hash of the numerical
source modules (docstrings and comments stripped), so any change to the
numerics forces a recomputation.  Run ``python3 tests/fullrun_cache.py`` to
fill the cache ahead of ``pytest``.
"""

from __future__ import annotations

import ast
import hashlib
import json
import sys
import time
from pathlib import Path

import polaron_fcs
from polaron_fcs.config import RunConfig
from polaron_fcs.evolve import CFGrid, sample_cf
from polaron_fcs.generator import build_context
from polaron_fcs.system import Frame

NUMERIC_MODULES = ("specfun", "bath", "system", "generator", "_kernels", "evolve")
CACHE_ROOT = Path(__file__).resolve().parent.parent / ".cache" / "acceptance"


def _strip_docstrings(tree):
    for node in ast.walk(tree):
        if isinstance(node, (ast.Module, ast.FunctionDef, ast.ClassDef, ast.AsyncFunctionDef)):
            body = node.body
            if body and isinstance(body[0], ast.Expr) and isinstance(getattr(body[0], "value", None), ast.Constant) \
                    and isinstance(body[0].value.value, str):
                node.body = body[1:] or [ast.Pass()]
    return tree


def source_fingerprint():
    pkg = Path(polaron_fcs.__file__).parent
    h = hashlib.sha256()
    for name in NUMERIC_MODULES:
        tree = _strip_docstrings(ast.parse((pkg / f"{name}.py").read_text()))
        h.update(ast.dump(tree).encode())
    return h.hexdigest()[:16]


def cache_key(cfg: RunConfig, frame: Frame):
    payload = json.dumps({"cfg": cfg.to_dict(), "frame": frame.value, "src": source_fingerprint()},
                         sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:20]


def full_config(threads=1):
    cfg = RunConfig()
    cfg.run.threads = threads
    return cfg


def cached_cf(cfg: RunConfig, frame, compute=True):
    """CFGrid for ``cfg`` in ``frame``, computed once and stored under .cache/acceptance."""
    frame = Frame.parse(frame)
    path = CACHE_ROOT / cache_key(cfg, frame) / f"cf_{frame.value}.csv"
    if path.exists():
        return CFGrid.from_csv(path), 0.0
    if not compute:
        return None, 0.0
    start = time.perf_counter()
    ctx = build_context(cfg.protocol, cfg.bath, frame, n_points=cfg.run.table_points)
    grid = sample_cf(cfg.cf.eta_max, cfg.cf.delta_eta, ctx, cfg.solver, threads=cfg.run.threads)
    elapsed = time.perf_counter() - start
    grid.metadata["wall_seconds"] = elapsed
    path.parent.mkdir(parents=True, exist_ok=True)
    grid.to_csv(path)
    return CFGrid.from_csv(path), elapsed


if __name__ == "__main__":
    config = full_config()
    for fr in (Frame.POLARON, Frame.WEAK):
        _, seconds = cached_cf(config, fr)
        print(f"{fr.value}: {seconds:.1f} s", flush=True)
    sys.exit(0)
