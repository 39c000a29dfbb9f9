"""Deterministic randomness for the simulator.

The paper's parties hold true private randomness; the simulator substitutes
a documented seed tree so every run is reproducible from (config, master
seed). A master seed expands to per-party / per-trial streams via

    stream(label) = SHA-256(master || 0x00 || label || counter)

in counter mode. Labels are path-like, e.g. ``"run3/alice"``.
"""

from __future__ import annotations

import hashlib

from .bits import BitString


def derive_seed(master: bytes, label: str) -> bytes:
    return hashlib.sha256(master + b"\x00" + label.encode()).digest()


class BitStream:
    """SHA-256 counter-mode bit source; deterministic given (master, label)."""

    def __init__(self, master: bytes, label: str = ""):
        self._key = derive_seed(master, label)
        self._counter = 0
        self._buf = 0
        self._nbits = 0

    def _refill(self):
        block = hashlib.sha256(self._key + self._counter.to_bytes(8, "big")).digest()
        self._counter += 1
        self._buf = (self._buf << 256) | int.from_bytes(block, "big")
        self._nbits += 256

    def take_int(self, nbits: int) -> int:
        while self._nbits < nbits:
            self._refill()
        self._nbits -= nbits
        v = self._buf >> self._nbits
        self._buf &= (1 << self._nbits) - 1
        return v

    def take(self, nbits: int) -> BitString:
        return BitString(self.take_int(nbits), nbits)

    def randrange(self, n: int) -> int:
        """Uniform int in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("empty range")
        nbits = (n - 1).bit_length() or 1
        while True:
            v = self.take_int(nbits)
            if v < n:
                return v

    def sample(self, population: int, count: int) -> list:
        """Sorted random ``count``-subset of range(population)."""
        if count > population:
            raise ValueError("sample larger than population")
        chosen: set = set()
        while len(chosen) < count:
            chosen.add(self.randrange(population))
        return sorted(chosen)


def parse_master_seed(hexseed: str) -> bytes:
    hexseed = hexseed.removeprefix("0x")
    if len(hexseed) % 2:
        hexseed = "0" + hexseed
    return bytes.fromhex(hexseed)
