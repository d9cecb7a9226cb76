"""Versioned on-disk cache for sweeps and potential profiles.

A cache file is a JSON document::

    {"schema": "fourierdirac-cache", "version": 1, "payload": "dets",
     "kind": "cos", "n": 64, "precision": "auto", "grid_hash": "...",
     "columns": {"a": [...], ...}}

Floats are written with ``repr`` and therefore reload bit-identically. Loading
refuses a different schema version and, when the caller states what it
expects, a different kind, node count or grid hash.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .specfun import gauss_legendre

SCHEMA = "fourierdirac-cache"
SCHEMA_VERSION = 1
CACHE_ENV = "FOURIERDIRAC_CACHE_DIR"

__all__ = [
    "SCHEMA_VERSION",
    "CACHE_ENV",
    "CacheError",
    "grid_hash",
    "cache_store",
    "cache_load",
    "default_cache_dir",
    "cache_path",
]


class CacheError(ValueError):
    """Corrupt, incompatible or mismatched cache file."""


def grid_hash(n: int | None, params: Sequence[float], precision="auto") -> str:
    """Hash of the quadrature rule, the parameter grid and the precision policy."""
    h = hashlib.sha256()
    if n is None:
        h.update(b"nodes=auto;")
    else:
        h.update(f"nodes={int(n)};".encode())
        h.update(gauss_legendre(int(n)).digest.encode())
    h.update(f"precision={precision};".encode())
    h.update(np.ascontiguousarray(params, dtype="<f8").tobytes())
    return h.hexdigest()[:16]


def default_cache_dir() -> Path | None:
    value = os.environ.get(CACHE_ENV, "").strip()
    return Path(value) if value else None


def cache_path(directory: str | os.PathLike, payload: str, kind: str, ghash: str) -> Path:
    return Path(directory) / f"{payload}-{kind}-{ghash}.json"


def cache_store(path: str | os.PathLike, payload: str, kind: str, n: int | None,
                params: Sequence[float], columns: Mapping[str, Sequence[float]],
                precision="auto") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "schema": SCHEMA,
        "version": SCHEMA_VERSION,
        "payload": payload,
        "kind": kind,
        "n": None if n is None else int(n),
        "precision": str(precision),
        "grid_hash": grid_hash(n, params, precision),
        "params": [float(x) for x in params],
        "columns": {k: [float(x) for x in v] for k, v in columns.items()},
    }
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(doc))
    os.replace(tmp, path)
    return path


def cache_load(path: str | os.PathLike, payload: str | None = None, kind: str | None = None,
               n: int | None | str = "any", params: Sequence[float] | None = None,
               precision="auto") -> dict[str, np.ndarray]:
    """Columns of a cache file, after validating its header.

    ``n='any'`` skips the node check; otherwise the stored node count (``None``
    for the automatic rule) must match, as must the grid hash when ``params``
    is given.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CacheError(f"cannot read cache file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise CacheError(f"{path} is not a fourierdirac cache file")
    if doc.get("version") != SCHEMA_VERSION:
        raise CacheError(
            f"cache schema version {doc.get('version')} is not supported (expected {SCHEMA_VERSION}); "
            "delete the file to recompute")
    if payload is not None and doc.get("payload") != payload:
        raise CacheError(f"cache holds {doc.get('payload')!r}, expected {payload!r}")
    if kind is not None and doc.get("kind") != kind:
        raise CacheError(f"cache kind {doc.get('kind')!r} does not match {kind!r}")
    if n != "any" and doc.get("n") != (None if n is None else int(n)):
        raise CacheError(f"cache node count {doc.get('n')} does not match {n}")
    stored = doc.get("params")
    try:
        recomputed = grid_hash(doc.get("n"), stored, doc.get("precision", "auto"))
    except (TypeError, ValueError) as exc:
        raise CacheError(f"corrupt cache header in {path}") from exc
    if recomputed != doc.get("grid_hash"):
        raise CacheError(f"corrupt cache file {path}: grid hash does not match its parameters")
    if params is not None and grid_hash(doc.get("n"), params, precision) != doc["grid_hash"]:
        raise CacheError("grid-hash mismatch: refusing to mix sweeps on different grids")
    columns = doc.get("columns")
    if not isinstance(columns, dict):
        raise CacheError(f"corrupt cache file {path}: no columns")
    return {k: np.asarray(v, dtype=float) for k, v in columns.items()}
