"""Counter-based random streams.

Every random decision in the package comes from a :class:`RngStream`.  A
stream is a 128-bit key; word ``i`` of the stream is a fixed mixing function of
``(key, i)``, so any range of words can be produced directly, in any order, by
any number of workers, with identical results.

Key derivation: ``blake2b(repr(parent key) | label, digest_size=16)``.
Word function: ``z = i * 0x9E3779B97F4A7C15 + key_lo`` (mod 2^64), then the
SplitMix64 finalizer, xor ``key_hi``, and the finalizer again.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _finalize(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def derive_key(*parts: int | str | bytes) -> bytes:
    h = hashlib.blake2b(digest_size=16)
    for part in parts:
        if isinstance(part, int):
            data = b"i" + part.to_bytes(16, "little", signed=True)
        elif isinstance(part, str):
            data = b"s" + part.encode()
        else:
            data = b"b" + bytes(part)
        h.update(struct.pack("<I", len(data)) + data)
    return h.digest()


@dataclass(frozen=True)
class RngStream:
    key: bytes

    def __post_init__(self) -> None:
        if len(self.key) != 16:
            raise ValueError("stream key must be 16 bytes")

    @classmethod
    def from_seed(cls, master_seed: int, label: str = "") -> "RngStream":
        return cls(derive_key(master_seed, label))

    def child(self, *labels: int | str) -> "RngStream":
        return RngStream(derive_key(self.key, *labels))

    def words(self, start: int, count: int) -> np.ndarray:
        """Words ``start .. start+count-1`` as uint64."""
        return self.words_at(np.arange(count, dtype=np.uint64) + np.uint64(start))

    def words_at(self, counters) -> np.ndarray:
        lo, hi = struct.unpack("<QQ", self.key)
        z = np.asarray(counters, dtype=np.uint64) * _GOLDEN + np.uint64(lo)
        z = _finalize(z) ^ np.uint64(hi)
        return _finalize(z)

    def field_elements(self, start: int, count: int, m: int) -> np.ndarray:
        """Uniform m-bit values: the top m bits of each word."""
        return self.words(start, count) >> np.uint64(64 - m)

    def bits(self, start: int, count: int) -> np.ndarray:
        return (self.words(start, count) >> np.uint64(63)).astype(bool)

    def generator(self) -> np.random.Generator:
        """A numpy Philox generator keyed by this stream, for sampling that is
        not naturally random-access (subset draws, shuffles)."""
        lo, hi = struct.unpack("<QQ", self.key)
        return np.random.Generator(np.random.Philox(key=np.array([lo, hi], dtype=np.uint64)))


def trial_stream(master_seed: int, cell: int, trial: int) -> RngStream:
    """Per-trial stream ``mix(master, cell, trial)`` used by the experiment runner."""
    return RngStream(derive_key(master_seed, "trial", cell, trial))
