"""Alternating extraction, the look-ahead extractor, and the look-ahead MAC.

Two protocol variants: the plain one producing rows S_i, R_i, and the
somewhere-source variant that additionally emits geometrically shrinking
rows V_i. Row indexing is 1-based to match R_1..R_t usage; R_0 and S_0 are
stored at index 0 of the trace.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .bits import BitString, concat_all


class LookaheadError(ValueError):
    pass


@dataclass(frozen=True)
class LookaheadPrims:
    """Primitive bundle for one alternating-extraction geometry."""

    raz: object          # two-source extractor: (s0, x) -> row
    ext_q: object        # strong extractor: (q, row) -> row
    ext_w: object        # strong extractor: (x, row) -> row
    ext_v: tuple = ()    # per-step strong extractors for the V variant


@dataclass(frozen=True)
class AltExtTrace:
    """Full row record of one alternating-extraction run.

    s_rows = (S_0..S_t), r_rows = (R_0..R_t), v_rows = (V_1..V_t) or empty.
    """

    s_rows: tuple
    r_rows: tuple
    v_rows: tuple
    t: int
    q_pad: int = 0  # zero bits appended to q to meet the declared source length

    def __post_init__(self):
        if len(self.s_rows) != self.t + 1 or len(self.r_rows) != self.t + 1:
            raise LookaheadError("trace must hold t+1 S rows and t+1 R rows")
        if self.v_rows and len(self.v_rows) != self.t:
            raise LookaheadError("V variant must hold exactly t V rows")

    def s(self, i: int) -> BitString:
        return self.s_rows[i]

    def r(self, i: int) -> BitString:
        return self.r_rows[i]

    def v(self, i: int) -> BitString:
        if not 1 <= i <= len(self.v_rows):
            raise LookaheadError(f"V row {i} out of range")
        return self.v_rows[i - 1]

    def la_rows(self) -> list:
        """The look-ahead extractor output R_1..R_t."""
        return list(self.r_rows[1:])

    def to_json(self, profile: str = "", inputs: dict | None = None) -> dict:
        rec = {
            "schema": "privamp.trace/1",
            "profile": profile,
            "t": self.t,
            "q_pad": self.q_pad,
            "s_rows": [{"hex": b.to_hex(), "bits": len(b)} for b in self.s_rows],
            "r_rows": [{"hex": b.to_hex(), "bits": len(b)} for b in self.r_rows],
            "v_rows": [{"hex": b.to_hex(), "bits": len(b)} for b in self.v_rows],
        }
        if inputs:
            rec["inputs"] = {k: {"hex": v.to_hex(), "bits": len(v)} for k, v in inputs.items()}
        return rec


def _check_prefix(q: BitString, s0: BitString):
    if len(s0) > len(q) or q.slice(0, len(s0)) != s0:
        raise LookaheadError("s0 must be a prefix of q")


def alt_extract(x: BitString, q: BitString, s0: BitString, t: int,
                prims: LookaheadPrims) -> AltExtTrace:
    """Plain alternating extraction: R_0 = Raz(S_0, X), then
    S_i = Ext_q(Q, R_{i-1}), R_i = Ext_w(X, S_i)."""
    _check_prefix(q, s0)
    q_pad = prims.ext_q.n - len(q)
    if q_pad < 0:
        raise LookaheadError(f"q length {len(q)} exceeds declared {prims.ext_q.n}")
    s_rows = [s0]
    r_rows = [prims.raz(s0, x)]
    for _ in range(t):
        s_i = prims.ext_q(q, r_rows[-1])
        r_rows.append(prims.ext_w(x, s_i))
        s_rows.append(s_i)
    return AltExtTrace(tuple(s_rows), tuple(r_rows), (), t, q_pad)


def alt_extract_v(x: BitString, xbar: list, q: BitString, s0: BitString, t: int,
                  prims: LookaheadPrims) -> AltExtTrace:
    """Somewhere-source variant: additionally V_i = Ext_v(xbar_i, S_i)."""
    if len(xbar) != t:
        raise LookaheadError(f"row count mismatch: {len(xbar)} xbar rows for t={t}")
    if len(prims.ext_v) != t:
        raise LookaheadError("one Ext_v instantiation is needed per step")
    _check_prefix(q, s0)
    q_pad = prims.ext_q.n - len(q)
    if q_pad < 0:
        raise LookaheadError(f"q length {len(q)} exceeds declared {prims.ext_q.n}")
    s_rows = [s0]
    r_rows = [prims.raz(s0, x)]
    v_rows = []
    for i in range(1, t + 1):
        s_i = prims.ext_q(q, r_rows[-1])
        v_rows.append(prims.ext_v[i - 1](xbar[i - 1], s_i))
        r_rows.append(prims.ext_w(x, s_i))
        s_rows.append(s_i)
    return AltExtTrace(tuple(s_rows), tuple(r_rows), tuple(v_rows), t, q_pad)


def la_ext(x: BitString, q: BitString, s0: BitString, t: int,
           prims: LookaheadPrims) -> list:
    """Look-ahead extractor: the rows R_1..R_t."""
    return alt_extract(x, q, s0, t, prims).la_rows()


# ---------------------------------------------------------------------------
# Top-heavy collection and look-ahead MAC


@dataclass(frozen=True)
class TopHeavySet:
    elems: frozenset
    source_message: BitString

    def __post_init__(self):
        m = len(self.source_message)
        if len(self.elems) != 2 * m or any(not 1 <= e <= 4 * m for e in self.elems):
            raise LookaheadError("top-heavy set must hold 2m elements inside [4m]")

    def sorted_elems(self) -> list:
        return sorted(self.elems)


def topheavy_map(mu: BitString) -> TopHeavySet:
    """Bit b_i selects {4i-3, 4i} (b_i = 0) or {4i-2, 4i-1} (b_i = 1)."""
    if len(mu) == 0:
        raise LookaheadError("empty message")
    elems = set()
    for i in range(1, len(mu) + 1):
        b = mu[i - 1]
        elems.add(4 * i - 3 + b)
        elems.add(4 * i - b)
    return TopHeavySet(frozenset(elems), mu)


def is_top_heavy(s1, s2, t: int):
    """Whether some j in [t] gives |s1 inter [j, t]| > |s2 inter [j, t]|.

    Returns (flag, smallest witness j or None).
    """
    s1 = set(s1)
    s2 = set(s2)
    if any(not 1 <= e <= t for e in s1 | s2):
        raise LookaheadError("set elements must lie in [t]")
    c1 = len(s1)
    c2 = len(s2)
    for j in range(1, t + 1):
        if c1 > c2:
            return True, j
        if j in s1:
            c1 -= 1
        if j in s2:
            c2 -= 1
    return False, None


def la_mac(r_rows: list, mu: BitString) -> list:
    """Look-ahead MAC: the rows indexed by the message's top-heavy set."""
    if len(r_rows) != 4 * len(mu):
        raise LookaheadError(f"row-count mismatch: {len(r_rows)} rows for |mu|={len(mu)}")
    sel = topheavy_map(mu)
    return [r_rows[i - 1] for i in sel.sorted_elems()]


def la_mac_bits(r_rows: list, mu: BitString) -> BitString:
    return concat_all(la_mac(r_rows, mu))


def load_trace(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
