"""Pluggable primitive registry and desk-scale instantiations.

Each black-box role the protocols invoke (strong extractor, two-source
extractor, non-malleable extractor, MAC, somewhere condenser, edit code)
is an interface plus a small concrete instantiation whose defining
property is measured by the oracle, never assumed. Certification runs
before any protocol use ("certify then use").
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .bits import BitError, BitString, GF2_MODULI, gf_mul_int
from . import dist as oracle


class PrimitiveError(ValueError):
    pass


def _largest_field_width(m: int) -> int:
    """Largest divisor of m that fits the published modulus table."""
    for w in range(min(m, 16), 0, -1):
        if m % w == 0 and w in GF2_MODULI:
            return w
    raise PrimitiveError(f"no usable field width for output length {m}")


# ---------------------------------------------------------------------------
# Strong seeded extractor: Toeplitz-style universal hash.


class ToeplitzExt:
    """Universal-hash extractor with a sliding-window (Toeplitz) matrix.

    The seed fills the n+m-1 bit diagonal vector; a seed shorter than that
    is extended cyclically (needed inside alternating extraction, where the
    seed is a d-bit row). With seed_len = n+m-1 this is the textbook
    XOR-universal family, which is what certification measures.
    """

    kind = "strong_ext"

    def __init__(self, n: int, m: int, seed_len: int):
        if m > n:
            raise PrimitiveError("output exceeds source length")
        if m < 0 or n <= 0 or (seed_len <= 0 and m > 0):
            raise PrimitiveError("bad extractor signature")
        self.n = n
        self.m = m
        self.seed_len = seed_len
        self._diag_len = n + m - 1
        self._cache_seed: Optional[int] = None
        self._cache_rows: list = []

    @property
    def signature(self):
        return (self.n, self.seed_len, self.m)

    def _rows(self, y: int) -> list:
        if y == self._cache_seed:
            return self._cache_rows
        L = self.seed_len
        reps = -(-self._diag_len // L)
        v = 0
        for _ in range(reps):
            v = (v << L) | y
        diag = v >> (reps * L - self._diag_len)
        rows = []
        nmask = (1 << self.n) - 1
        for j in range(self.m):
            rows.append((diag >> (self._diag_len - (j + self.n))) & nmask)
        self._cache_seed = y
        self._cache_rows = rows
        return rows

    def eval_int(self, x: int, y: int) -> int:
        out = 0
        for row in self._rows(y):
            out = (out << 1) | ((row & x).bit_count() & 1)
        return out

    def __call__(self, x: BitString, y: BitString) -> BitString:
        if len(y) != self.seed_len:
            raise PrimitiveError(f"seed length {len(y)} != declared {self.seed_len}")
        xv = x.value
        if len(x) > self.n:
            raise PrimitiveError(f"source length {len(x)} exceeds declared {self.n}")
        if len(x) < self.n:
            xv <<= self.n - len(x)  # zero-pad on the right
        return BitString(self.eval_int(xv, y.value), self.m)


def ext_hash(x: BitString, y: BitString, m: int) -> BitString:
    """One-shot universal-hash extraction with seed length |y|."""
    if m == 0:
        return BitString(0, 0)
    return ToeplitzExt(len(x), m, len(y))(x, y)


# ---------------------------------------------------------------------------
# Two-source / non-malleable extractor: block inner products over GF(2^w).


def two_source_ip(x: BitString, y: BitString, m: int) -> BitString:
    """Block inner product over GF(2^m); y is truncated or zero-padded to |x|."""
    if m == 0:
        return BitString(0, 0)
    if len(x) % m:
        raise BitError(f"source length {len(x)} not divisible by block size {m}")
    yv = y.value
    if len(y) >= len(x):
        yv >>= len(y) - len(x)
    else:
        yv <<= len(x) - len(y)
    acc = 0
    xv = x.value
    blocks = len(x) // m
    mask = (1 << m) - 1
    for i in range(blocks):
        sh = m * (blocks - 1 - i)
        acc ^= gf_mul_int((xv >> sh) & mask, (yv >> sh) & mask, m)
    return BitString(acc, m)


def nm_ip(x: BitString, y: BitString, m: int) -> BitString:
    """Inner-product instantiation of the non-malleable extractor role."""
    if len(x) != len(y):
        raise BitError("unequal lengths")
    if m and len(x) % m:
        raise BitError(f"block size {m} does not divide {len(x)}")
    return two_source_ip(x, y, m)


class BlockIpExtractor:
    """Registered role wrapper around the block inner product.

    Pads both operands on the right to a common block grid and, for outputs
    wider than the published field table, emits independent GF(2^w) segments
    (w = largest usable divisor of m).
    """

    def __init__(self, n1: int, n2: int, m: int, kind: str = "two_source_ext"):
        self.n1 = n1
        self.n2 = n2
        self.m = m
        self.kind = kind
        self.w = _largest_field_width(m) if m else 1
        self.segments = (m // self.w) if m else 0
        width = max(n1, n2)
        blocks = max(1, -(-width // self.w))
        blocks = -(-blocks // max(self.segments, 1)) * max(self.segments, 1)
        self.padded_len = blocks * self.w
        self.blocks = blocks

    @property
    def signature(self):
        return (self.n1, self.n2, self.m)

    def eval_int(self, x: int, y: int) -> int:
        if self.m == 0:
            return 0
        xv = x << (self.padded_len - self.n1)
        yv = y << (self.padded_len - self.n2)
        w = self.w
        mask = (1 << w) - 1
        segs = [0] * self.segments
        for i in range(self.blocks):
            sh = w * (self.blocks - 1 - i)
            segs[i % self.segments] ^= gf_mul_int((xv >> sh) & mask, (yv >> sh) & mask, w)
        out = 0
        for s in segs:
            out = (out << w) | s
        return out

    def __call__(self, x: BitString, y: BitString) -> BitString:
        if len(x) > self.n1 or len(y) > self.n2:
            raise PrimitiveError("operand exceeds declared signature")
        return BitString(self.eval_int(x.value << (self.n1 - len(x)),
                                       y.value << (self.n2 - len(y))), self.m)


# ---------------------------------------------------------------------------
# One-time MAC: polynomial evaluation over GF(2^v).


def _chunks(msg: BitString, v: int) -> list:
    padded_len = -(-len(msg) // v) * v if len(msg) else v
    vv = msg.value << (padded_len - len(msg))
    out = []
    mask = (1 << v) - 1
    for i in range(padded_len // v):
        out.append((vv >> (v * (padded_len // v - 1 - i))) & mask)
    return out


def mac_tag(key: BitString, msg: BitString, v: int) -> BitString:
    """tag = k2 + sum_i m_i * k1^i over GF(2^v), key = (k1, k2)."""
    if len(key) != 2 * v:
        raise BitError(f"key length {len(key)} != 2v = {2 * v}")
    if v not in GF2_MODULI:
        raise BitError(f"no published modulus for tag width {v}")
    k1 = key.value >> v
    k2 = key.value & ((1 << v) - 1)
    acc = 0
    power = 1
    for chunk in _chunks(msg, v):
        power = gf_mul_int(power, k1, v)
        acc ^= gf_mul_int(chunk, power, v)
    return BitString(acc ^ k2, v)


def _poly_eval_table(v: int, num_chunks: int):
    """ptab[msg_index][k1] = sum_i m_i k1^i for all messages of num_chunks chunks."""
    fld = 1 << v
    pow_tab = [[0] * (num_chunks + 1) for _ in range(fld)]
    for k1 in range(fld):
        p = 1
        for i in range(1, num_chunks + 1):
            p = gf_mul_int(p, k1, v) if i > 1 else k1
            pow_tab[k1][i] = p
    ptab = []
    for midx in range(fld ** num_chunks):
        row = []
        chunks = []
        t = midx
        for _ in range(num_chunks):
            chunks.append(t % fld)
            t //= fld
        chunks.reverse()
        for k1 in range(fld):
            acc = 0
            for i, c in enumerate(chunks, start=1):
                acc ^= gf_mul_int(c, pow_tab[k1][i], v)
            row.append(acc)
        ptab.append(row)
    return ptab


def mac_forgery_advantage(v: int, num_chunks: int, key_dist=None) -> Fraction:
    """Exact best forgery probability against the polynomial MAC.

    Maximized over the probed message, the adversary's tag-observation
    strategy, and the forged (message, tag). With the default uniform key
    the k2 half one-time-pads the observed tag, so the optimum reduces to
    max over nonzero message differences and target constants of
    Pr_k1[sum_i delta_i k1^i = const]; with a supplied key distribution the
    literal bucket-by-observed-tag exhaustion runs.
    """
    if v > 8:
        raise PrimitiveError("v too large for exhaustion; use sampled attack runs")
    fld = 1 << v
    nmsgs = fld ** num_chunks
    if nmsgs * fld > 1 << 22:
        raise PrimitiveError("message space too large for exhaustion; use sampled attack runs")
    ptab = _poly_eval_table(v, num_chunks)
    if key_dist is None:
        best = 0
        for delta in range(1, nmsgs):
            row = ptab[delta]
            counts: dict = {}
            for val in row:
                counts[val] = counts.get(val, 0) + 1
            best = max(best, max(counts.values()))
        return Fraction(best, fld)
    support = [(r, p) for r, p in key_dist if p > 0]
    advantage = Fraction(0)
    vmask = fld - 1
    for w in range(nmsgs):
        buckets: dict = {}
        for r, p in support:
            k1 = r >> v
            tag = (r & vmask) ^ ptab[w][k1]
            buckets.setdefault(tag, []).append((k1, p))
        adv_w = Fraction(0)
        for entries in buckets.values():
            best = Fraction(0)
            for delta in range(1, nmsgs):
                row = ptab[delta]
                acc: dict = {}
                for k1, p in entries:
                    val = row[k1]
                    acc[val] = acc.get(val, Fraction(0)) + p
                cand = max(acc.values())
                if cand > best:
                    best = cand
            adv_w += best
        if adv_w > advantage:
            advantage = adv_w
    return advantage


def flat_half_key_dist(v: int) -> list:
    """Key distribution flat on half the key space (top bit of k1 clamped)."""
    half = 1 << (2 * v - 1)
    p = Fraction(1, half)
    return [(r, p) for r in range(half)]


class PolyMac:
    kind = "mac"

    def __init__(self, v: int, msg_len: int):
        if v not in GF2_MODULI:
            raise PrimitiveError(f"no published modulus for tag width {v}")
        self.v = v
        self.msg_len = msg_len
        self.key_len = 2 * v
        self.num_chunks = max(1, -(-msg_len // v))

    @property
    def signature(self):
        return (self.key_len, self.msg_len, self.v)

    def tag(self, key: BitString, msg: BitString) -> BitString:
        if len(msg) != self.msg_len:
            raise PrimitiveError(f"message length {len(msg)} != declared {self.msg_len}")
        return mac_tag(key, msg, self.v)

    def __call__(self, key: BitString, msg: BitString) -> BitString:
        return self.tag(key, msg)


# ---------------------------------------------------------------------------
# Somewhere condenser: coordinate-projection rows, certified exhaustively.


@dataclass(frozen=True)
class ProjectionCondenser:
    """Rows are fixed coordinate projections of the input."""

    n: int
    rows: tuple  # tuple of tuples of bit positions
    kind: str = field(default="somewhere_cond", init=False)

    @property
    def C(self) -> int:
        return len(self.rows)

    @property
    def row_len(self) -> int:
        return len(self.rows[0])

    @property
    def signature(self):
        return (self.n, self.C, self.row_len)

    @classmethod
    def identity(cls, n: int) -> "ProjectionCondenser":
        return cls(n, (tuple(range(n)),))

    @classmethod
    def block_split(cls, n: int, C: int) -> "ProjectionCondenser":
        if n % C:
            raise PrimitiveError(f"{C} rows do not evenly split {n} bits")
        w = n // C
        return cls(n, tuple(tuple(range(i * w, (i + 1) * w)) for i in range(C)))

    def eval_int_rows(self, x: int) -> list:
        out = []
        for positions in self.rows:
            v = 0
            for pos in positions:
                v = (v << 1) | ((x >> (self.n - 1 - pos)) & 1)
            out.append(v)
        return out

    def __call__(self, x: BitString) -> list:
        if len(x) != self.n:
            raise PrimitiveError(f"input length {len(x)} != declared {self.n}")
        return [BitString(v, self.row_len) for v in self.eval_int_rows(x.value)]


def somewhere_condense(x: BitString, C: int, row_len: int, registry=None) -> list:
    """Apply the registered somewhere-condenser instantiation for (|x|, C, row_len)."""
    n = len(x)
    if registry is not None:
        inst = registry.find("somewhere_cond", (n, C, row_len))
        if inst is None:
            raise PrimitiveError(f"no somewhere-condenser instantiation for ({n},{C},{row_len})")
        return inst(x)
    if C == 1 and row_len == n:
        return ProjectionCondenser.identity(n)(x)
    if C * row_len == n:
        return ProjectionCondenser.block_split(n, C)(x)
    raise PrimitiveError(f"no somewhere-condenser instantiation for ({n},{C},{row_len})")


def row_entropy_certificate(cond: ProjectionCondenser, k: int, l: int, family) -> Fraction:
    """Worst case over the family of min over rows of distance to an l-source.

    A row marginal eps-close to an l-source certifies the whole vector is
    eps-close to a somewhere-l-source (replace that row via the coupling
    argument), so this is a sound upper bound.
    """
    worst = Fraction(0)
    for src in family:
        pairs = src.support_probs()
        best_row = None
        for idx in range(cond.C):
            marg: dict = {}
            for x, px in pairs:
                v = cond.eval_int_rows(x)[idx]
                marg[v] = marg.get(v, Fraction(0)) + px
            d = oracle.dist_to_capped(
                oracle.Dist({BitString(v, cond.row_len): p for v, p in marg.items()},
                            cond.row_len), l)
            if best_row is None or d < best_row:
                best_row = d
        if best_row > worst:
            worst = best_row
    return worst


def search_projection_condenser(n: int, C: int, row_len: int, k: int, l: int, family):
    """Exhaustive search over ordered tuples of coordinate projections.

    Returns the (condenser, certificate) with the smallest certified epsilon;
    ties break lexicographically on the row tuples for reproducibility.
    """
    family = list(family)
    candidates = list(itertools.combinations(range(n), row_len))
    per_row = []
    for positions in candidates:
        cond = ProjectionCondenser(n, (positions,))
        vals = []
        for src in family:
            pairs = src.support_probs()
            marg: dict = {}
            for x, px in pairs:
                v = cond.eval_int_rows(x)[0]
                marg[v] = marg.get(v, Fraction(0)) + px
            vals.append(oracle.dist_to_capped(
                oracle.Dist({BitString(v, row_len): p for v, p in marg.items()}, row_len), l))
        per_row.append(vals)
    best = None
    for combo in itertools.product(range(len(candidates)), repeat=C):
        worst = Fraction(0)
        for si in range(len(family)):
            row_best = min(per_row[ri][si] for ri in combo)
            if row_best > worst:
                worst = row_best
        key = (worst, tuple(candidates[ri] for ri in combo))
        if best is None or key < best:
            best = key
    eps, rows = best
    return ProjectionCondenser(n, rows), eps


# ---------------------------------------------------------------------------
# Edit-distance code: repetition with per-group 01 markers.


def edit_distance_dp(a: BitString, b: BitString) -> int:
    """Reference Levenshtein over bits (insert/delete/alter), quadratic DP."""
    la, lb = len(a), len(b)
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        ai = a[i - 1]
        for j in range(1, lb + 1):
            cost = 0 if ai == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[lb]


def edit_distance(a: BitString, b: BitString) -> int:
    """Exact Levenshtein distance via Myers' bit-parallel algorithm."""
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    mask = (1 << la) - 1
    high = 1 << (la - 1)
    peq = [0, 0]
    av = a.value
    for i in range(la):
        peq[(av >> (la - 1 - i)) & 1] |= 1 << i
    pv = mask
    mv = 0
    score = la
    bv = b.value
    for j in range(lb):
        eq = peq[(bv >> (lb - 1 - j)) & 1]
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | (~(xh | pv) & mask)
        mh = pv & xh
        if ph & high:
            score += 1
        elif mh & high:
            score -= 1
        ph = ((ph << 1) | 1) & mask
        mh = (mh << 1) & mask
        pv = mh | (~(xv | ph) & mask)
        mv = ph & xv
    return score


class RepetitionMarkerCode:
    """Each message bit repeated ``reps`` times, then a fixed 01 marker."""

    kind = "edit_code"

    def __init__(self, msg_len: int, reps: int = 1):
        if msg_len <= 0 or reps <= 0:
            raise PrimitiveError("bad edit-code parameters")
        self.msg_len = msg_len
        self.reps = reps
        self.codeword_len = msg_len * (reps + 2)
        self.rate = Fraction(msg_len, self.codeword_len)

    @property
    def signature(self):
        return (self.msg_len, self.codeword_len)

    def encode(self, m: BitString) -> BitString:
        if len(m) != self.msg_len:
            raise PrimitiveError(f"message length {len(m)} != declared {self.msg_len}")
        v = 0
        for i in range(self.msg_len):
            bit = m[i]
            for _ in range(self.reps):
                v = (v << 1) | bit
            v = (v << 2) | 0b01
        return BitString(v, self.codeword_len)

    __call__ = encode

    def certify_relative_distance(self) -> Fraction:
        """Exhaustive min pairwise edit distance over codewords, as e = min / lambda_c."""
        if self.msg_len > 10:
            raise PrimitiveError("exhaustive certification supports msg_len <= 10")
        words = [self.encode(BitString(m, self.msg_len)) for m in range(1 << self.msg_len)]
        best = None
        for i in range(len(words)):
            for jj in range(i + 1, len(words)):
                d = edit_distance(words[i], words[jj])
                if best is None or d < best:
                    best = d
        return Fraction(best, self.codeword_len)


def edit_encode(m: BitString, code: RepetitionMarkerCode) -> BitString:
    return code.encode(m)


# ---------------------------------------------------------------------------
# Registry


@dataclass(frozen=True)
class PrimitiveId:
    name: str
    kind: str
    signature: tuple


class Registry:
    """Named primitive instantiations with signature checks and certification."""

    def __init__(self):
        self._entries: dict = {}
        self.certification: Optional[list] = None

    def register(self, name: str, obj) -> None:
        if name in self._entries:
            raise PrimitiveError(f"duplicate primitive name {name!r}")
        self._entries[name] = obj

    def get(self, name: str, kind: Optional[str] = None):
        try:
            obj = self._entries[name]
        except KeyError:
            raise PrimitiveError(f"no primitive registered as {name!r}") from None
        if kind is not None and obj.kind != kind:
            raise PrimitiveError(f"{name!r} has kind {obj.kind}, expected {kind}")
        return obj

    def find(self, kind: str, signature: tuple):
        for obj in self._entries.values():
            if obj.kind == kind and obj.signature == signature:
                return obj
        return None

    def names(self) -> list:
        return sorted(self._entries)

    def items(self):
        return self._entries.items()

    def manifest(self) -> dict:
        prims = []
        for name, obj in sorted(self._entries.items()):
            prims.append({
                "name": name,
                "kind": obj.kind,
                "signature": list(obj.signature),
            })
        rec = {"schema": "privamp.registry/1", "primitives": prims}
        if self.certification is not None:
            rec["certification"] = self.certification
        return rec
