"""The two non-malleable condenser algorithms.

Both split the seed as y = (y1, y2), authenticate the y1 half through the
look-ahead rows, and protect the y1-unchanged case with a non-malleable
extractor applied to w = Ext(x, y1). Output layout is v1 first, then the
v2 rows in increasing index order, concatenated without separators; the
layout descriptor travels with the profile.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bits import BitString, concat_all
from .lookahead import LookaheadPrims, alt_extract, alt_extract_v, la_mac
from .profiles import ParameterProfile, ProfileError, build_registry, require_valid


@dataclass(frozen=True)
class CondenserOutput:
    v1: BitString
    v2: tuple  # laMAC rows (quadratic variant) or V rows (linear variant)
    z: BitString

    def __post_init__(self):
        if concat_all([self.v1, *self.v2]) != self.z:
            raise ProfileError("output layout mismatch: z != v1 || v2 rows")


def output_layout(profile: ParameterProfile, which: str = "cond") -> list:
    """Layout descriptor: (field name, bit length) in concatenation order."""
    if which == "cond":
        c = profile.cond
        return [("v1", c.v1_len)] + [(f"v2[{i}]", c.row_len)
                                     for i in range(1, 2 * c.y1_len + 1)]
    if which == "cond2":
        q = profile.cond2
        return [("v1", q.h_len)] + [(f"v[{i}]", q.v_len(i)) for i in range(1, q.C + 1)]
    raise ProfileError(f"unknown condenser {which!r}")


def split_seed(y: BitString, first_len: int, second_len: int):
    if len(y) != first_len + second_len:
        raise ProfileError(f"seed length {len(y)} != {first_len}+{second_len}")
    return y.slice(0, first_len), y.slice(first_len, len(y))


def nm_cond(x: BitString, y: BitString, profile: ParameterProfile,
            registry=None) -> CondenserOutput:
    """Quadratic-seed condenser: z = (nm(w, y2), laMAC_r(y1))."""
    require_valid(profile)
    c = profile.cond
    if c is None:
        raise ProfileError(f"profile {profile.name} has no cond section")
    reg = registry if registry is not None else build_registry(profile)
    if len(x) != profile.n:
        raise ProfileError(f"source length {len(x)} != n = {profile.n}")
    y1, y2 = split_seed(y, c.y1_len, c.y2_len)
    s0 = y2.slice(0, c.s0_len)
    w = reg.get("cond.ext_w", "strong_ext")(x, y1)
    prims = LookaheadPrims(raz=reg.get("cond.la.raz"), ext_q=reg.get("cond.la.ext_q"),
                           ext_w=reg.get("cond.la.ext_w"))
    trace = alt_extract(x, y2, s0, c.t, prims)
    v1 = reg.get("cond.nm", "nm_ext")(w, y2)
    v2 = tuple(la_mac(trace.la_rows(), y1))
    return CondenserOutput(v1, v2, concat_all([v1, *v2]))


def nm_cond_linear(x: BitString, y: BitString, profile: ParameterProfile,
                   registry=None) -> CondenserOutput:
    """Linear-min-entropy condenser: z = (nm2(w, y2), laExt((x, xbar), y2))."""
    require_valid(profile)
    q = profile.cond2
    if q is None:
        raise ProfileError(f"profile {profile.name} has no cond2 section")
    reg = registry if registry is not None else build_registry(profile)
    if len(x) != profile.n:
        raise ProfileError(f"source length {len(x)} != n = {profile.n}")
    y1, y2 = split_seed(y, q.d, q.d_prime)
    s0 = y2.slice(0, q.s0_len)
    rows = reg.get("cond2.sw", "somewhere_cond")(x)
    w = reg.get("cond2.ext_w", "strong_ext")(x, y1)
    nmext = reg.get("cond2.nmext", "nm_ext")
    xbar = [nmext(row, y1) for row in rows]
    prims = LookaheadPrims(
        raz=reg.get("cond2.la.raz"), ext_q=reg.get("cond2.la.ext_q"),
        ext_w=reg.get("cond2.la.ext_w"),
        ext_v=tuple(reg.get(f"cond2.la.ext_v{i}") for i in range(1, q.C + 1)))
    trace = alt_extract_v(x, xbar, y2, s0, q.C, prims)
    v1 = reg.get("cond2.nm2", "nm_ext")(w, y2)
    return CondenserOutput(v1, trace.v_rows, concat_all([v1, *trace.v_rows]))


def case_adversaries(profile: ParameterProfile, which: str, cap: int = 100) -> list:
    """Structured fixed-point-free seed tamperers for one proof case.

    case1: A(y1, y2) = (y1, g(y2)) with g fixed-point-free.
    case2: A(y1, y2) = (y1 xor mask, h(y2)) with mask nonzero, h arbitrary.
    """
    from .dist import fixed_point_free_adversaries
    from .rng import BitStream

    c = profile.cond
    n2 = 1 << c.y2_len
    out = []
    if which == "case1":
        for g in fixed_point_free_adversaries(c.y2_len, cap=cap):
            out.append(tuple((y >> c.y2_len) << c.y2_len | g[y & (n2 - 1)]
                             for y in range(1 << c.seed_len)))
        return out
    stream = BitStream(b"privamp-case2", profile.name)
    masks = [m for m in range(1, 1 << c.y1_len)]
    while len(out) < cap:
        mask = masks[len(out) % len(masks)]
        h = tuple(stream.randrange(n2) for _ in range(n2))
        out.append(tuple(((y >> c.y2_len) ^ mask) << c.y2_len | h[y & (n2 - 1)]
                         for y in range(1 << c.seed_len)))
    return out


def classify_seed_adversary(adv: tuple, profile: ParameterProfile) -> str:
    """Case 1 keeps y1 on every seed; case 2 changes it on every seed."""
    c = profile.cond
    keeps = changes = 0
    for y in range(1 << c.seed_len):
        y1 = y >> c.y2_len
        a1 = adv[y] >> c.y2_len
        if y1 == a1:
            keeps += 1
        else:
            changes += 1
    if changes == 0:
        return "case1"
    if keeps == 0:
        return "case2"
    return "mixed"


def case_split_margins(profile: ParameterProfile, adversaries, source,
                       registry=None) -> dict:
    """Per-case conditional min-entropy margins, mirroring the proof split.

    For y1-fixing adversaries the v1 component should retain entropy given
    (Z', Y); for y1-changing adversaries the v2 component should. Margins
    are the worst (smallest) average conditional min-entropy per case.
    """
    import math

    from .dist import Fraction as _Fr  # exact accumulation

    c = profile.cond
    reg = registry if registry is not None else build_registry(profile)
    ev = cond_eval_fn(profile, reg, "cond")
    pairs = source.support_probs()
    nseeds = 1 << c.seed_len
    table = {(x, y): ev(x, y) for x, _ in pairs for y in range(nseeds)}
    v2_bits = c.v2_total

    def guess_mass(adv, component):
        total = _Fr(0)
        for y in range(nseeds):
            buckets: dict = {}
            for x, px in pairs:
                zp = table[(x, adv[y])]
                z = table[(x, y)]
                comp = z >> v2_bits if component == "v1" else z & ((1 << v2_bits) - 1)
                cell = buckets.setdefault(zp, {})
                cell[comp] = cell.get(comp, _Fr(0)) + px
            total += sum(max(cell.values()) for cell in buckets.values())
        return total / nseeds

    worst = {"case1": None, "case2": None}
    margins = {"case1": None, "case2": None, "mixed": 0, "case1_count": 0, "case2_count": 0,
               "case1_guess_mass": None, "case2_guess_mass": None}
    for adv in adversaries:
        case = classify_seed_adversary(adv, profile)
        if case == "mixed":
            margins["mixed"] += 1
            continue
        component = "v1" if case == "case1" else "v2"
        g = guess_mass(adv, component)
        margins[f"{case}_count"] += 1
        if worst[case] is None or g > worst[case]:
            worst[case] = g
    for case in ("case1", "case2"):
        if worst[case] is not None:
            margins[case] = -math.log2(float(worst[case]))
            margins[f"{case}_guess_mass"] = worst[case]
    return margins


def cond_eval_fn(profile: ParameterProfile, registry=None, which: str = "cond"):
    """Int-native evaluator (x_int, y_int) -> z_int for the oracle."""
    reg = registry if registry is not None else build_registry(profile)
    if which == "cond":
        seed_len = profile.cond.seed_len
        fn = nm_cond
    else:
        seed_len = profile.cond2.seed_len
        fn = nm_cond_linear

    def ev(x_int: int, y_int: int) -> int:
        out = fn(BitString(x_int, profile.n), BitString(y_int, seed_len), profile, reg)
        return out.z.value

    return ev
