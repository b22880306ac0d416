"""EMB1 binary embedding file format.

Layout:
  bytes  0..15   magic+version header (b"EMB1" + version byte + zero padding)
  bytes 16..19   dim, u32 little-endian
  bytes 20..27   n_rows, u64 little-endian
  then n_rows records of (32-byte key hash, dim float32 little-endian)
  trailing CRC32 (u32 LE) over everything before it
"""

from __future__ import annotations

import hashlib
import struct
import zlib

import numpy as np

MAGIC = b"EMB1" + bytes([1]) + b"\x00" * 11
KEY_BYTES = 32


class Emb1Error(Exception):
    pass


def text_key(text: str) -> bytes:
    """32-byte content hash identifying a text row."""
    return hashlib.sha256(text.encode("utf-8")).digest()


def write_emb1(path, keys: list[bytes], vectors: np.ndarray) -> None:
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    if vectors.ndim != 2 or len(keys) != vectors.shape[0]:
        raise Emb1Error("keys and vectors misaligned")
    dim = vectors.shape[1]
    crc = 0
    with open(path, "wb") as fh:
        def put(chunk: bytes):
            nonlocal crc
            crc = zlib.crc32(chunk, crc)
            fh.write(chunk)

        put(MAGIC)
        put(struct.pack("<I", dim))
        put(struct.pack("<Q", vectors.shape[0]))
        for key, row in zip(keys, vectors):
            if len(key) != KEY_BYTES:
                raise Emb1Error("key hash must be 32 bytes")
            put(key)
            put(row.tobytes())
        fh.write(struct.pack("<I", crc))


def read_emb1(path) -> tuple[list[bytes], np.ndarray]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 4 + 8 + 4:
        raise Emb1Error("file truncated")
    if blob[:4] != MAGIC[:4]:
        raise Emb1Error("bad magic; not an EMB1 file")
    body, trailer = blob[:-4], blob[-4:]
    if zlib.crc32(body) != struct.unpack("<I", trailer)[0]:
        raise Emb1Error("CRC32 mismatch; file corrupted")
    dim = struct.unpack_from("<I", body, 16)[0]
    n_rows = struct.unpack_from("<Q", body, 20)[0]
    rec = KEY_BYTES + 4 * dim
    offset = 28
    if len(body) != offset + rec * n_rows:
        raise Emb1Error("record section length mismatch")
    keys: list[bytes] = []
    vectors = np.empty((n_rows, dim), dtype=np.float32)
    for i in range(n_rows):
        keys.append(body[offset:offset + KEY_BYTES])
        vectors[i] = np.frombuffer(
            body, dtype="<f4", count=dim, offset=offset + KEY_BYTES
        )
        offset += rec
    return keys, vectors
