"""Content-addressed on-disk cache for embedding vectors.

One file per (model_name, text-hash) key. Each record carries its own CRC32
so a corrupted row is detected before use. Writes go through a temp file and
os.replace, so concurrent readers never see a partial record; in-process
duplicate fetches for one key are coalesced with per-key locks.
"""

from __future__ import annotations

import os
import re
import struct
import threading
import zlib
from pathlib import Path

import numpy as np


class CacheCorruption(Exception):
    pass


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name) or "_"


class VectorCache:
    def __init__(self, root) -> None:
        self.root = Path(root)
        self._locks: dict[tuple[str, bytes], threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _path(self, model_name: str, key: bytes) -> Path:
        hexkey = key.hex()
        return self.root / _slug(model_name) / hexkey[:2] / f"{hexkey}.vec"

    def key_lock(self, model_name: str, key: bytes) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault((model_name, key), threading.Lock())

    def get(self, model_name: str, key: bytes) -> np.ndarray | None:
        path = self._path(model_name, key)
        try:
            blob = path.read_bytes()
        except FileNotFoundError:
            return None
        if len(blob) < 8:
            raise CacheCorruption(f"truncated cache record {path}")
        (dim,) = struct.unpack_from("<I", blob, 0)
        payload = blob[4:-4]
        (crc,) = struct.unpack_from("<I", blob, len(blob) - 4)
        if len(payload) != 4 * dim or zlib.crc32(payload) != crc:
            raise CacheCorruption(f"checksum mismatch in cache record {path}")
        return np.frombuffer(payload, dtype="<f4").copy()

    def put(self, model_name: str, key: bytes, vector: np.ndarray) -> None:
        payload = np.ascontiguousarray(vector, dtype="<f4").tobytes()
        blob = struct.pack("<I", len(vector)) + payload + struct.pack("<I", zlib.crc32(payload))
        path = self._path(model_name, key)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(f".tmp{os.getpid()}.{threading.get_ident()}")
        tmp.write_bytes(blob)
        os.replace(tmp, path)
