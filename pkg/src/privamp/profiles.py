"""Parameter profiles: every length/count symbol of the constructions.

``paper`` mode enforces the published magnitude relations as loud
validation (k >= 60 d^2 and friends); ``desk`` mode keeps only the
structural relations the algorithms need (t = 4|y1|, code block geometry,
MAC key arity, output layout) while shrinking magnitudes into exhaustive
range. Desk mode exists because the paper-mode inequalities are mutually
unsatisfiable below n in the thousands.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional

from .primitives import (BlockIpExtractor, PolyMac, ProjectionCondenser, Registry,
                         RepetitionMarkerCode, ToeplitzExt)


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    section: str
    clause: str
    detail: str

    def __str__(self):
        return f"[{self.section}] {self.clause}: {self.detail}"


@dataclass(frozen=True)
class CondParams:
    """Geometry of the quadratic-seed condenser."""

    y1_len: int
    y2_len: int
    s0_len: int
    row_len: int
    t: int
    w_len: int
    v1_len: int

    @property
    def v2_total(self) -> int:
        return 2 * self.y1_len * self.row_len

    @property
    def out_len(self) -> int:
        return self.v1_len + self.v2_total

    @property
    def seed_len(self) -> int:
        return self.y1_len + self.y2_len


@dataclass(frozen=True)
class AkaParams:
    """Geometry of the 2-round key-agreement protocol."""

    y1_len: int
    y2_len: int
    s0_len: int
    row_len: int
    t: int
    y3_len: int
    r1_len: int
    tag_v: int
    t1_len: int
    w_msg_len: int
    key_len: int

    @property
    def z_len(self) -> int:
        return 2 * self.y1_len * self.row_len


@dataclass(frozen=True)
class Aka2Params:
    """Geometry of the multi-phase edit-code protocol."""

    d1: int
    d2: int
    L: int
    reps: int
    lam_m: int
    lam_c: int
    y2_len: int
    s0_len: int
    y3_len: int
    t: int
    resp_len: int
    t_len: int
    tag_v: int
    mac_key_len: int
    key_len: int

    @property
    def z_len(self) -> int:
        return 2 * self.d2 * self.d2


@dataclass(frozen=True)
class Cond2Params:
    """Geometry of the linear-min-entropy condenser."""

    d: int            # y1 length = row length
    C: int
    row_src_len: int  # somewhere-condenser row length
    d_prime: int      # y2 length
    s0_len: int
    m_prime: int      # nmExt output per condensed row
    w_len: int
    h_len: int        # nm2 output
    v_unit: int       # V_C length; V_i has 2^(C-i) * v_unit bits

    @property
    def v_total(self) -> int:
        return ((1 << self.C) - 1) * self.v_unit

    @property
    def out_len(self) -> int:
        return self.h_len + self.v_total

    @property
    def seed_len(self) -> int:
        return self.d + self.d_prime

    def v_len(self, i: int) -> int:
        return (1 << (self.C - i)) * self.v_unit


@dataclass(frozen=True)
class ParameterProfile:
    name: str
    mode: str  # "paper" | "desk"
    n: int
    k: int
    s: int
    ell: int
    cond: Optional[CondParams] = None
    aka: Optional[AkaParams] = None
    aka2: Optional[Aka2Params] = None
    cond2: Optional[Cond2Params] = None

    def to_json(self) -> dict:
        rec = {"schema": "privamp.profile/1"}
        rec.update({k: v for k, v in asdict(self).items() if v is not None})
        return rec

    @classmethod
    def from_json(cls, rec: dict) -> "ParameterProfile":
        kw = {k: rec[k] for k in ("name", "mode", "n", "k", "s", "ell")}
        for key, typ in (("cond", CondParams), ("aka", AkaParams),
                         ("aka2", Aka2Params), ("cond2", Cond2Params)):
            if key in rec:
                kw[key] = typ(**rec[key])
        return cls(**kw)


def validate_profile(profile: ParameterProfile) -> list:
    """All mode-appropriate constraint violations, each naming its clause."""
    v: list = []

    def need(cond, section, clause, detail):
        if not cond:
            v.append(Violation(section, clause, detail))

    p = profile
    need(p.mode in ("paper", "desk"), "profile", "mode", f"unknown mode {p.mode!r}")
    need(1 <= p.k <= p.n, "profile", "k <= n", f"k={p.k}, n={p.n}")
    need(p.s >= 1 and p.ell >= 1, "profile", "positive parameters", f"s={p.s}, ell={p.ell}")
    paper = p.mode == "paper"

    c = p.cond
    if c is not None:
        need(c.t == 4 * c.y1_len, "cond", "t = 4|y1|", f"t={c.t}, |y1|={c.y1_len}")
        need(1 <= c.s0_len <= c.y2_len, "cond", "s0 inside y2", f"s0={c.s0_len}, |y2|={c.y2_len}")
        need(c.v1_len > c.v2_total, "cond", "|v1| > |v2|", f"{c.v1_len} vs {c.v2_total}")
        need(c.w_len <= p.n, "cond", "w fits source", f"w={c.w_len}, n={p.n}")
        need(c.row_len >= 1, "cond", "positive row", f"row={c.row_len}")
        if paper:
            d = c.y1_len
            need(p.k >= 60 * d * d, "cond", "k >= 60 d^2", f"k={p.k}, d={d}")
            need(d > 5 * p.ell, "cond", "d > 5 ell", f"d={d}, ell={p.ell}")
            need(c.y2_len == 12 * d * d, "cond", "|y2| = 12 d^2", f"|y2|={c.y2_len}")
            need(c.s0_len == 40 * d, "cond", "s0 = first 40d bits", f"s0={c.s0_len}")
            need(c.w_len == 20 * d * d, "cond", "w output 20 d^2", f"w={c.w_len}")
            need(c.v1_len == 8 * d * d, "cond", "nm output 8 d^2", f"v1={c.v1_len}")
            need(c.row_len == d, "cond", "rows output d bits", f"row={c.row_len}")
            need(c.v1_len >= c.v2_total + p.s, "cond", "|V1| >= |V2| + s",
                 f"{c.v1_len} vs {c.v2_total}+{p.s}")

    a = p.aka
    if a is not None:
        need(a.t == 4 * a.y1_len, "aka", "t = 4|y1|", f"t={a.t}, |y1|={a.y1_len}")
        need(1 <= a.s0_len <= a.y2_len, "aka", "s0 inside y2", f"s0={a.s0_len}, |y2|={a.y2_len}")
        need(a.r1_len == 2 * a.tag_v, "aka", "MAC key length 2v", f"r1={a.r1_len}, v={a.tag_v}")
        need(a.key_len >= 1 and a.key_len <= p.n, "aka", "key length sane", f"key={a.key_len}")
        need(a.t1_len >= 1 and a.w_msg_len >= 1, "aka", "positive fields", "")
        if paper:
            d = a.y1_len
            need(d > 202 * p.s, "aka", "d > 202 s", f"d={d}, s={p.s}")
            need(p.k >= 15 * d * d, "aka", "k >= 15 d^2", f"k={p.k}, d={d}")
            need(a.y2_len == 12 * d * d, "aka", "|Y2| = 12 d^2", f"|y2|={a.y2_len}")
            need(a.y3_len == 50 * d * d, "aka", "|Y3| = 50 d^2", f"|y3|={a.y3_len}")
            need(a.s0_len == 40 * d, "aka", "s0 = first 40d bits", f"s0={a.s0_len}")
            need(a.r1_len == 4 * p.s, "aka", "R1 outputs 4s bits", f"r1={a.r1_len}")
            need(a.tag_v == 2 * p.s, "aka", "tag length v = 2s", f"v={a.tag_v}")
            need(a.t1_len == p.s, "aka", "T1 outputs s bits", f"t1={a.t1_len}")
            need(a.row_len == d, "aka", "rows output d bits", f"row={a.row_len}")
            need(a.w_msg_len == d, "aka", "W has d bits", f"w={a.w_msg_len}")

    b = p.aka2
    if b is not None:
        need(b.lam_m == b.d1, "aka2", "codeword encodes Y", f"lam_m={b.lam_m}, d1={b.d1}")
        need(b.lam_c == b.lam_m * (b.reps + 2), "aka2", "lam_c = lam_m / rho",
             f"lam_c={b.lam_c}, lam_m={b.lam_m}, reps={b.reps}")
        need(b.L * b.d2 == b.lam_c, "aka2", "L d2 = lam_c", f"L={b.L}, d2={b.d2}, lam_c={b.lam_c}")
        need(b.t == 4 * b.d2, "aka2", "t = 4 d2", f"t={b.t}, d2={b.d2}")
        need(1 <= b.s0_len <= b.y2_len, "aka2", "s0 inside y2", f"s0={b.s0_len}, |y2|={b.y2_len}")
        need(b.mac_key_len == 2 * b.tag_v, "aka2", "MAC key length 2v",
             f"key={b.mac_key_len}, v={b.tag_v}")
        need(b.key_len >= 1 and b.key_len <= p.n, "aka2", "key length sane", f"key={b.key_len}")
        if paper:
            need(b.d1 > 2 * p.s, "aka2", "d1 > 2s", f"d1={b.d1}, s={p.s}")
            need(b.d2 > 404 * p.ell, "aka2", "d2 > 404 ell", f"d2={b.d2}, ell={p.ell}")
            need(p.k >= b.lam_c + 2 * p.s + 15 * b.d2 * b.d2, "aka2",
                 "k >= d1/rho + 2s + 15 d2^2", f"k={p.k}")
            need(b.y2_len == 12 * b.d2 * b.d2, "aka2", "|Yi2| = 12 d2^2", f"|y2|={b.y2_len}")
            need(b.y3_len == 50 * b.d2 * b.d2, "aka2", "|Yi3| = 50 d2^2", f"|y3|={b.y3_len}")
            need(b.s0_len == 40 * b.d2, "aka2", "s0 = first 40 d2 bits", f"s0={b.s0_len}")
            need(b.resp_len == 2 * p.ell, "aka2", "V outputs 2 ell bits", f"resp={b.resp_len}")
            need(b.t_len == 2 * p.ell, "aka2", "T outputs 2 ell bits", f"t={b.t_len}")
            need(b.tag_v == 2 * b.lam_c, "aka2", "v = 2 d1 / rho", f"v={b.tag_v}")

    q = p.cond2
    if q is not None:
        need(q.C >= 1 and q.v_unit >= 1, "cond2", "positive parameters", "")
        need(1 <= q.s0_len <= q.d_prime, "cond2", "s0 inside y2", f"s0={q.s0_len}")
        need(q.h_len > q.v_total, "cond2", "|v1| > |v2|", f"{q.h_len} vs {q.v_total}")
        need(q.C * q.row_src_len == p.n, "cond2", "somewhere-condenser split",
             f"C={q.C}, n'={q.row_src_len}, n={p.n}")
        need((1 << (q.C - 1)) * q.v_unit <= q.m_prime, "cond2", "V rows fit xbar",
             f"{(1 << (q.C - 1)) * q.v_unit} vs m'={q.m_prime}")
        if paper:
            need(q.d_prime == 4 * q.C * q.d + 61 * q.d + 14 * p.ell, "cond2",
                 "d' = 4Cd + 61d + 14 ell", f"d'={q.d_prime}")
            need(q.w_len == (1 << q.C) * 10 * p.ell, "cond2", "w output 2^C (10 ell)",
                 f"w={q.w_len}")
            need(q.h_len == (1 << q.C) * 4 * p.ell, "cond2", "nm2 output 2^C (4 ell)",
                 f"h={q.h_len}")
            need(q.m_prime == 6 * (1 << q.C) * p.ell, "cond2", "m' = 6 * 2^C ell",
                 f"m'={q.m_prime}")
            need(q.s0_len == 30 * q.d + 6 * p.ell, "cond2", "s0 = first 30d + 6 ell bits",
                 f"s0={q.s0_len}")
            need(q.v_unit == 2 * p.ell, "cond2", "V_C outputs 2 ell bits", f"v={q.v_unit}")

    return v


def require_valid(profile: ParameterProfile):
    violations = validate_profile(profile)
    if violations:
        raise ProfileError("; ".join(str(x) for x in violations))


# ---------------------------------------------------------------------------
# Registry construction


def build_registry(profile: ParameterProfile) -> Registry:
    """Instantiate every primitive role the profile's sections need."""
    require_valid(profile)
    reg = Registry()
    n = profile.n

    c = profile.cond
    if c is not None:
        reg.register("cond.ext_w", ToeplitzExt(n, c.w_len, seed_len=c.y1_len))
        reg.register("cond.la.raz", BlockIpExtractor(c.s0_len, n, c.row_len))
        reg.register("cond.la.ext_q", ToeplitzExt(c.y2_len, c.row_len, seed_len=c.row_len))
        reg.register("cond.la.ext_w", ToeplitzExt(n, c.row_len, seed_len=c.row_len))
        reg.register("cond.nm", BlockIpExtractor(c.w_len, c.y2_len, c.v1_len, kind="nm_ext"))

    a = profile.aka
    if a is not None:
        reg.register("aka.ext_r1", ToeplitzExt(n, a.r1_len, seed_len=a.y1_len))
        reg.register("aka.la.raz", BlockIpExtractor(a.s0_len, n, a.row_len))
        reg.register("aka.la.ext_q", ToeplitzExt(a.y2_len, a.row_len, seed_len=a.row_len))
        reg.register("aka.la.ext_w", ToeplitzExt(n, a.row_len, seed_len=a.row_len))
        reg.register("aka.raz_t1", BlockIpExtractor(a.y3_len, a.z_len, a.t1_len))
        reg.register("aka.mac", PolyMac(a.tag_v, a.w_msg_len))
        reg.register("aka.ext_key", ToeplitzExt(n, a.key_len, seed_len=a.w_msg_len))

    b = profile.aka2
    if b is not None:
        reg.register("aka2.la.raz", BlockIpExtractor(b.s0_len, n, b.d2))
        reg.register("aka2.la.ext_q", ToeplitzExt(b.y2_len, b.d2, seed_len=b.d2))
        reg.register("aka2.la.ext_w", ToeplitzExt(n, b.d2, seed_len=b.d2))
        reg.register("aka2.raz_t", BlockIpExtractor(b.y3_len, b.z_len, b.t_len))
        reg.register("aka2.ext2", ToeplitzExt(n, b.resp_len, seed_len=b.d2))
        reg.register("aka2.ext1_r", ToeplitzExt(n, b.mac_key_len, seed_len=b.d1))
        reg.register("aka2.ext1_key", ToeplitzExt(n, b.key_len, seed_len=b.d1))
        reg.register("aka2.mac", PolyMac(b.tag_v, b.d1))
        reg.register("aka2.edit", RepetitionMarkerCode(b.lam_m, b.reps))

    q = profile.cond2
    if q is not None:
        reg.register("cond2.sw", ProjectionCondenser.block_split(n, q.C))
        reg.register("cond2.ext_w", ToeplitzExt(n, q.w_len, seed_len=q.d))
        reg.register("cond2.nmext",
                     BlockIpExtractor(q.row_src_len, q.d, q.m_prime, kind="nm_ext"))
        reg.register("cond2.nm2", BlockIpExtractor(q.w_len, q.d_prime, q.h_len, kind="nm_ext"))
        reg.register("cond2.la.raz", BlockIpExtractor(q.s0_len, n, q.d))
        reg.register("cond2.la.ext_q", ToeplitzExt(q.d_prime, q.d, seed_len=q.d))
        reg.register("cond2.la.ext_w", ToeplitzExt(n, q.d, seed_len=q.d))
        for i in range(1, q.C + 1):
            reg.register(f"cond2.la.ext_v{i}",
                         ToeplitzExt(q.m_prime, q.v_len(i), seed_len=q.d))

    return reg


# ---------------------------------------------------------------------------
# Built-in profiles


def _builtin() -> dict:
    profs = [
        ParameterProfile(
            name="micro-cond", mode="desk", n=4, k=3, s=1, ell=1,
            cond=CondParams(y1_len=1, y2_len=2, s0_len=1, row_len=1, t=4,
                            w_len=2, v1_len=3)),
        ParameterProfile(
            name="desk-cond", mode="desk", n=8, k=6, s=1, ell=1,
            cond=CondParams(y1_len=1, y2_len=6, s0_len=2, row_len=2, t=4,
                            w_len=3, v1_len=5)),
        ParameterProfile(
            name="paper-cond", mode="paper", n=2160, k=2160, s=1, ell=1,
            cond=CondParams(y1_len=6, y2_len=432, s0_len=240, row_len=6, t=24,
                            w_len=720, v1_len=288)),
        ParameterProfile(
            name="micro-aka", mode="desk", n=4, k=3, s=1, ell=1,
            aka=AkaParams(y1_len=1, y2_len=2, s0_len=1, row_len=1, t=4, y3_len=2,
                          r1_len=2, tag_v=1, t1_len=1, w_msg_len=1, key_len=1)),
        ParameterProfile(
            name="desk-aka", mode="desk", n=16, k=12, s=2, ell=1,
            aka=AkaParams(y1_len=2, y2_len=8, s0_len=3, row_len=2, t=8, y3_len=8,
                          r1_len=4, tag_v=2, t1_len=2, w_msg_len=4, key_len=4)),
        ParameterProfile(
            name="paper-aka", mode="paper", n=618135, k=618135, s=1, ell=1,
            aka=AkaParams(y1_len=203, y2_len=494508, s0_len=8120, row_len=203, t=812,
                          y3_len=2060450, r1_len=4, tag_v=2, t1_len=1, w_msg_len=203,
                          key_len=64)),
        ParameterProfile(
            name="micro-aka2", mode="desk", n=4, k=3, s=1, ell=1,
            aka2=Aka2Params(d1=1, d2=3, L=1, reps=1, lam_m=1, lam_c=3,
                            y2_len=4, s0_len=2, y3_len=3, t=12, resp_len=1, t_len=1,
                            tag_v=1, mac_key_len=2, key_len=1)),
        ParameterProfile(
            name="desk-aka2", mode="desk", n=16, k=12, s=2, ell=1,
            aka2=Aka2Params(d1=2, d2=3, L=2, reps=1, lam_m=2, lam_c=6,
                            y2_len=6, s0_len=3, y3_len=6, t=12, resp_len=2, t_len=2,
                            tag_v=2, mac_key_len=4, key_len=4)),
        ParameterProfile(
            name="paper-aka2", mode="paper", n=2461593, k=2461593, s=1, ell=1,
            aka2=Aka2Params(d1=405, d2=405, L=3, reps=1, lam_m=405, lam_c=1215,
                            y2_len=1968300, s0_len=16200, y3_len=8201250, t=1620,
                            resp_len=2, t_len=2, tag_v=2430, mac_key_len=4860,
                            key_len=64)),
        ParameterProfile(
            name="micro-cond2", mode="desk", n=4, k=3, s=1, ell=1,
            cond2=Cond2Params(d=1, C=2, row_src_len=2, d_prime=3, s0_len=1,
                              m_prime=2, w_len=2, h_len=4, v_unit=1)),
        ParameterProfile(
            name="paper-cond2", mode="paper", n=2160, k=1080, s=1, ell=1,
            cond2=Cond2Params(d=6, C=2, row_src_len=1080, d_prime=428, s0_len=186,
                              m_prime=24, w_len=40, h_len=16, v_unit=2)),
    ]
    return {p.name: p for p in profs}


BUILTIN_PROFILES = _builtin()


def get_profile(name_or_path: str) -> ParameterProfile:
    """Resolve a built-in profile name or a JSON profile file path."""
    if name_or_path in BUILTIN_PROFILES:
        return BUILTIN_PROFILES[name_or_path]
    try:
        with open(name_or_path) as fh:
            return ParameterProfile.from_json(json.load(fh))
    except FileNotFoundError:
        raise ProfileError(
            f"unknown profile {name_or_path!r}; built-ins: {', '.join(sorted(BUILTIN_PROFILES))}"
        ) from None
