"""On-disk eigen-cache.

File layout (all little-endian):

    4 bytes   magic b"DKEC"
    uint32    format version
    64 bytes  ASCII hex fingerprint (sha256 of model parameters and sector)
    uint64    dimension d
    d    x f8 energies
    d*d  x f8 eigenvectors, column-major
"""
from __future__ import annotations

import logging
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from ..spectral import EigenDecomposition

log = logging.getLogger(__name__)

MAGIC = b"DKEC"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sI64sQ")


class CacheCorrupt(ValueError):
    pass


def encode(decomp: EigenDecomposition) -> bytes:
    key = decomp.fingerprint.encode("ascii")
    if len(key) != 64:
        raise ValueError("fingerprint must be a 64-character hex digest")
    d = decomp.dim
    head = _HEADER.pack(MAGIC, FORMAT_VERSION, key, d)
    energies = np.ascontiguousarray(decomp.energies, dtype="<f8").tobytes()
    vectors = np.asarray(decomp.vectors, dtype="<f8").tobytes(order="F")
    return head + energies + vectors


def decode(blob: bytes, expect_key: str | None = None) -> EigenDecomposition:
    if len(blob) < _HEADER.size:
        raise CacheCorrupt("file shorter than header")
    magic, version, key, d = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CacheCorrupt(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CacheCorrupt(f"unsupported cache version {version}")
    key = key.decode("ascii")
    if expect_key is not None and key != expect_key:
        raise CacheCorrupt("fingerprint mismatch")
    need = _HEADER.size + 8 * (d + d * d)
    if len(blob) != need:
        raise CacheCorrupt(f"payload length {len(blob)} != expected {need}")
    off = _HEADER.size
    energies = np.frombuffer(blob, dtype="<f8", count=d, offset=off).astype(float)
    vectors = np.frombuffer(blob, dtype="<f8", count=d * d, offset=off + 8 * d)
    vectors = vectors.reshape((d, d), order="F").astype(float)
    return EigenDecomposition(energies, vectors, key)


def spot_check(decomp: EigenDecomposition, pairs: int = 5, tol: float = 1e-9) -> bool:
    """Orthonormality on a few vector pairs chosen deterministically from the fingerprint."""
    if decomp.dim == 0 or not np.all(np.isfinite(decomp.energies)):
        return False
    rng = np.random.default_rng(int(decomp.fingerprint[:8] or "0", 16))
    V = decomp.vectors
    for _ in range(pairs):
        a, b = rng.integers(decomp.dim, size=2)
        want = 1.0 if a == b else 0.0
        if abs(V[:, a] @ V[:, b] - want) > tol or abs(V[:, a] @ V[:, a] - 1.0) > tol:
            return False
    return True


class EigenCache:
    def __init__(self, directory):
        self.directory = Path(directory)
        self.hits = 0
        self.misses = 0

    def path(self, key: str) -> Path:
        return self.directory / f"{key[:40]}.dkec"

    def get(self, key: str) -> EigenDecomposition | None:
        p = self.path(key)
        if not p.exists():
            self.misses += 1
            return None
        try:
            decomp = decode(p.read_bytes(), expect_key=key)
        except CacheCorrupt as exc:
            log.warning("discarding corrupt cache file %s: %s", p, exc)
            self.misses += 1
            return None
        if not spot_check(decomp):
            log.warning("discarding cache file %s: orthonormality spot check failed", p)
            self.misses += 1
            return None
        self.hits += 1
        return decomp

    def put(self, decomp: EigenDecomposition):
        self.directory.mkdir(parents=True, exist_ok=True)
        target = self.path(decomp.fingerprint)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(encode(decomp))
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
