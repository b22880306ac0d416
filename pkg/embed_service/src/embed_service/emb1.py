"""Writer for the EMB1 embedding-dump format consumed by the pipeline's
file provider.

Layout:
  bytes  0..15   magic+version header (b"EMB1" + version byte + zero padding)
  bytes 16..19   dim, u32 little-endian
  bytes 20..27   n_rows, u64 little-endian
  then n_rows records of (32-byte SHA-256 text key, dim float32 little-endian)
  trailing CRC32 (u32 LE) over everything before it
"""

from __future__ import annotations

import hashlib
import struct
import zlib

import numpy as np

MAGIC = b"EMB1" + bytes([1]) + b"\x00" * 11
KEY_BYTES = 32


def text_key(text: str) -> bytes:
    return hashlib.sha256(text.encode("utf-8")).digest()


def write_emb1(path, keys: list[bytes], vectors: np.ndarray) -> None:
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    if vectors.ndim != 2 or len(keys) != vectors.shape[0]:
        raise ValueError("keys and vectors misaligned")
    crc = 0
    with open(path, "wb") as fh:
        def put(chunk: bytes):
            nonlocal crc
            crc = zlib.crc32(chunk, crc)
            fh.write(chunk)

        put(MAGIC)
        put(struct.pack("<I", vectors.shape[1]))
        put(struct.pack("<Q", vectors.shape[0]))
        for key, row in zip(keys, vectors):
            if len(key) != KEY_BYTES:
                raise ValueError("key hash must be 32 bytes")
            put(key)
            put(row.tobytes())
        fh.write(struct.pack("<I", crc))
