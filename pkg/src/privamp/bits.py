"""Bit vectors and small binary-field arithmetic.

Everything downstream (extractors, MACs, condensers, protocol payloads)
is built on :class:`BitString`. Bit 0 is the leftmost bit of the string
as written, and hex serialization packs bits MSB-first, zero-padding the
low-order positions of the final byte.
"""

from __future__ import annotations

from dataclasses import dataclass

# Smallest irreducible polynomial of each degree, as coefficient bitmasks
# (0x7 = x^2 + x + 1). Fixed so tags and field products are reproducible
# across implementations; the same table appears in the README.
GF2_MODULI = {
    1: 0x2,
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x83,
    8: 0x11B,
    9: 0x203,
    10: 0x409,
    11: 0x805,
    12: 0x1009,
    13: 0x201B,
    14: 0x4021,
    15: 0x8003,
    16: 0x1002B,
}


class BitError(ValueError):
    """Raised on length/width mismatches and out-of-range accesses."""


class BitString:
    """Immutable fixed-length bit vector backed by an int.

    The integer value reads the bits MSB-first: ``BitString.from_str("10")``
    has value 2 and ``b[0] == 1``.
    """

    __slots__ = ("_val", "_len")

    def __init__(self, value: int, length: int):
        if length < 0:
            raise BitError("negative length")
        if value < 0 or value >> length:
            raise BitError(f"value {value} does not fit in {length} bits")
        self._val = value
        self._len = length

    @classmethod
    def from_str(cls, s: str) -> "BitString":
        s = s.strip()
        if s and set(s) - {"0", "1"}:
            raise BitError(f"not a bit string: {s!r}")
        return cls(int(s, 2) if s else 0, len(s))

    @classmethod
    def from_bits(cls, bits) -> "BitString":
        v = 0
        n = 0
        for b in bits:
            v = (v << 1) | (b & 1)
            n += 1
        return cls(v, n)

    @classmethod
    def zeros(cls, length: int) -> "BitString":
        return cls(0, length)

    @classmethod
    def from_hex(cls, hexstr: str, length: int) -> "BitString":
        nbytes = (length + 7) // 8
        if len(hexstr) != 2 * nbytes:
            raise BitError(f"hex length {len(hexstr)} does not match {length} bits")
        packed = int(hexstr, 16) if hexstr else 0
        pad = 8 * nbytes - length
        if packed & ((1 << pad) - 1):
            raise BitError("nonzero padding bits in hex serialization")
        return cls(packed >> pad, length)

    @property
    def value(self) -> int:
        return self._val

    def to_int(self) -> int:
        return self._val

    def to_hex(self) -> str:
        nbytes = (self._len + 7) // 8
        pad = 8 * nbytes - self._len
        return format(self._val << pad, f"0{2 * nbytes}x") if nbytes else ""

    def bits(self) -> tuple[int, ...]:
        return tuple((self._val >> (self._len - 1 - i)) & 1 for i in range(self._len))

    def __len__(self) -> int:
        return self._len

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self._len:
            raise BitError(f"bit index {i} out of range for length {self._len}")
        return (self._val >> (self._len - 1 - i)) & 1

    def slice(self, start: int, stop: int) -> "BitString":
        """Bits ``start..stop-1`` (0 = leftmost)."""
        if not 0 <= start <= stop <= self._len:
            raise BitError(f"slice [{start}:{stop}] out of range for length {self._len}")
        width = stop - start
        return BitString((self._val >> (self._len - stop)) & ((1 << width) - 1), width)

    def concat(self, other: "BitString") -> "BitString":
        return BitString((self._val << other._len) | other._val, self._len + other._len)

    def xor(self, other: "BitString") -> "BitString":
        if self._len != other._len:
            raise BitError("unequal lengths")
        return BitString(self._val ^ other._val, self._len)

    def flip(self, i: int) -> "BitString":
        self[i]  # range check
        return BitString(self._val ^ (1 << (self._len - 1 - i)), self._len)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitString)
            and self._len == other._len
            and self._val == other._val
        )

    def __hash__(self) -> int:
        return hash((self._val, self._len))

    def __str__(self) -> str:
        return format(self._val, f"0{self._len}b") if self._len else ""

    def __repr__(self) -> str:
        return f"BitString('{self}')"


def concat_all(parts) -> BitString:
    v = 0
    n = 0
    for p in parts:
        v = (v << len(p)) | p.value
        n += len(p)
    return BitString(v, n)


def ip(x: BitString, y: BitString) -> int:
    """GF(2) inner product of two equal-length bit strings."""
    if len(x) != len(y):
        raise BitError("unequal lengths")
    return (x.value & y.value).bit_count() & 1


def ip_int(x: int, y: int) -> int:
    return (x & y).bit_count() & 1


def poly_mul(a: int, b: int) -> int:
    """Carry-less (GF(2)[x]) product of coefficient bitmasks."""
    r = 0
    while a:
        if a & 1:
            r ^= b
        a >>= 1
        b <<= 1
    return r


def poly_mod(a: int, m: int) -> int:
    ml = m.bit_length()
    while True:
        shift = a.bit_length() - ml
        if shift < 0:
            return a
        a ^= m << shift


def gf_mul_int(a: int, b: int, width: int) -> int:
    """Product in GF(2^width) under the published modulus for that width."""
    try:
        mod = GF2_MODULI[width]
    except KeyError:
        raise BitError(f"no published modulus for width {width} (1..16)") from None
    return poly_mod(poly_mul(a, b), mod)


@dataclass(frozen=True)
class FieldElem:
    """Element of GF(2^width); leftmost bit is the top coefficient."""

    value: int
    width: int

    def __post_init__(self):
        if self.width not in GF2_MODULI:
            raise BitError(f"no published modulus for width {self.width} (1..16)")
        if self.value < 0 or self.value >> self.width:
            raise BitError(f"value {self.value} does not fit in {self.width} bits")

    @classmethod
    def from_bitstring(cls, b: BitString) -> "FieldElem":
        return cls(b.value, len(b))

    def to_bitstring(self) -> BitString:
        return BitString(self.value, self.width)

    def __add__(self, other: "FieldElem") -> "FieldElem":
        if self.width != other.width:
            raise BitError("width mismatch")
        return FieldElem(self.value ^ other.value, self.width)

    __xor__ = __add__


def gf_mul(a: FieldElem, b: FieldElem) -> FieldElem:
    if a.width != b.width:
        raise BitError("width mismatch")
    return FieldElem(gf_mul_int(a.value, b.value, a.width), a.width)


def gf_pow(a: FieldElem, e: int) -> FieldElem:
    r = FieldElem(1, a.width)
    base = a
    while e:
        if e & 1:
            r = gf_mul(r, base)
        base = gf_mul(base, base)
        e >>= 1
    return r
