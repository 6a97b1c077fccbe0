"""Euclidean distances between reduced feature vectors."""

from __future__ import annotations

import hashlib
import math
import struct
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

CACHE_MAGIC = b"RTCPDIST"
CACHE_VERSION = 1
_HEADER = struct.Struct("<8sIQ")


def euclidean(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return math.sqrt(float(np.sum((a - b) ** 2)))


def pairwise(X: np.ndarray) -> np.ndarray:
    """Full m x m distance matrix between the rows of ``X``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError(f"need at least 2 row vectors, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError("input contains non-finite values")
    d = cdist(X, X, metric="euclidean")
    np.fill_diagonal(d, 0.0)
    d.setflags(write=False)
    return d


def content_key(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def save_matrix(d: np.ndarray, path: str | Path) -> None:
    d = np.ascontiguousarray(d, dtype="<f8")
    m = d.shape[0]
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, m))
        fh.write(d.tobytes(order="C"))
    tmp.replace(path)


def load_matrix(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, m = _HEADER.unpack(header)
        if magic != CACHE_MAGIC or version != CACHE_VERSION:
            raise ValueError(f"{path}: not a distance cache (magic={magic!r}, version={version})")
        body = fh.read()
    if len(body) != m * m * 8:
        raise ValueError(f"{path}: expected {m * m * 8} bytes of data, got {len(body)}")
    d = np.frombuffer(body, dtype="<f8").reshape(m, m).astype(float)
    d.setflags(write=False)
    return d


def cached_pairwise(X: np.ndarray, cache_dir: str | Path, key: str) -> np.ndarray:
    """``pairwise(X)`` memoized on disk under ``key`` (a corpus content hash)."""
    path = Path(cache_dir) / f"{key}.dist"
    if path.exists():
        d = load_matrix(path)
        if d.shape[0] == len(X):
            return d
    d = pairwise(X)
    Path(cache_dir).mkdir(parents=True, exist_ok=True)
    save_matrix(d, path)
    return d
