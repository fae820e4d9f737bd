"""On-disk cache for reference solutions, keyed by a content hash.

The directory comes from ``HERMITE_NLS_CACHE`` (default ``.cache/`` in the
working directory).  Writes go to a temporary file first and are renamed
into place, so concurrent readers never see partial files.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from pathlib import Path

import numpy as np

__all__ = ["CACHE_ENV", "cache_dir", "cache_key", "load_array", "store_array"]

CACHE_ENV = "HERMITE_NLS_CACHE"


def cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV) or Path.cwd() / ".cache")


def cache_key(*parts: str) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part.encode())
        h.update(b"\0")
    return h.hexdigest()[:32]


def load_array(key: str) -> np.ndarray | None:
    path = cache_dir() / f"ref-{key}.npy"
    if not path.exists():
        return None
    try:
        return np.load(path, allow_pickle=False)
    except (OSError, ValueError):
        return None


def store_array(key: str, arr: np.ndarray) -> Path:
    directory = cache_dir()
    directory.mkdir(parents=True, exist_ok=True)
    final = directory / f"ref-{key}.npy"
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".npy")
    try:
        with os.fdopen(fd, "wb") as fh:
            np.save(fh, arr, allow_pickle=False)
        os.replace(tmp, final)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return final
