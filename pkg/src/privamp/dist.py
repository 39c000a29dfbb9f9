"""Exact brute-force probability oracle.

Distributions over small bit-string domains are represented explicitly
with rational probabilities, so every definitional property (extraction,
non-malleability, condensing, conditional min-entropy bounds) can be
checked exactly, never estimated. Floating point appears only in reported
entropies; all comparisons are done on Fractions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .bits import BitString
from .rng import BitStream

ZERO = Fraction(0)
ONE = Fraction(1)


class OracleError(ValueError):
    pass


def frac_to_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def str_to_frac(s: str) -> Fraction:
    num, _, den = s.partition("/")
    return Fraction(int(num), int(den) if den else 1)


def log2_frac(f: Fraction) -> float:
    if f <= 0:
        raise OracleError("log of non-positive value")
    return math.log2(f.numerator) - math.log2(f.denominator)


class Dist:
    """Explicit distribution over fixed-length bit strings."""

    def __init__(self, probs: dict, domain_len: int):
        total = ZERO
        clean = {}
        for v, p in probs.items():
            if len(v) != domain_len:
                raise OracleError("support value length mismatch")
            p = Fraction(p)
            if p < 0:
                raise OracleError("negative probability")
            if p:
                clean[v] = clean.get(v, ZERO) + p
                total += p
        if total != 1:
            raise OracleError(f"probabilities sum to {total}, not 1")
        self.probs = clean
        self.domain_len = domain_len

    @classmethod
    def uniform(cls, length: int) -> "Dist":
        p = Fraction(1, 1 << length)
        return cls({BitString(v, length): p for v in range(1 << length)}, length)

    @classmethod
    def point(cls, value: BitString) -> "Dist":
        return cls({value: ONE}, len(value))

    @classmethod
    def flat(cls, values: Iterable[BitString], length: int) -> "Dist":
        vals = list(values)
        p = Fraction(1, len(vals))
        return cls({v: p for v in vals}, length)

    def p(self, v: BitString) -> Fraction:
        return self.probs.get(v, ZERO)

    def max_prob(self) -> Fraction:
        if not self.probs:
            raise OracleError("empty support")
        return max(self.probs.values())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dist)
            and self.domain_len == other.domain_len
            and self.probs == other.probs
        )

    def __repr__(self):
        items = ", ".join(f"{v}:{p}" for v, p in sorted(self.probs.items(), key=lambda kv: kv[0].value))
        return f"Dist({items})"


def stat_distance(a: Dist, b: Dist) -> Fraction:
    """Exact statistical (variation) distance."""
    if a.domain_len != b.domain_len:
        raise OracleError("domain mismatch")
    keys = set(a.probs) | set(b.probs)
    return sum((abs(a.p(v) - b.p(v)) for v in keys), ZERO) / 2


def min_entropy(d: Dist) -> float:
    return -log2_frac(d.max_prob())


def dist_to_capped(d: Dist, k: int) -> Fraction:
    """Exact distance from ``d`` to the nearest source with min-entropy >= k.

    Equals the total excess mass above the 2^-k cap (excess can always be
    parked below the cap when k <= domain length).
    """
    if k > d.domain_len:
        raise OracleError("min-entropy cannot exceed domain length")
    cap = Fraction(1, 1 << k)
    return sum((p - cap for p in d.probs.values() if p > cap), ZERO)


class JointDist:
    """Explicit joint distribution over tuples of bit strings."""

    def __init__(self, probs: dict, lens: tuple):
        total = ZERO
        clean = {}
        for tup, p in probs.items():
            if len(tup) != len(lens) or any(len(v) != L for v, L in zip(tup, lens)):
                raise OracleError("tuple shape mismatch")
            p = Fraction(p)
            if p < 0:
                raise OracleError("negative probability")
            if p:
                clean[tup] = clean.get(tup, ZERO) + p
                total += p
        if total != 1:
            raise OracleError(f"probabilities sum to {total}, not 1")
        self.probs = clean
        self.lens = tuple(lens)
        self.arity = len(lens)

    @classmethod
    def from_function(cls, base: Dist, fn: Callable[[BitString], BitString], out_len: int) -> "JointDist":
        """Joint (X, fn(X))."""
        probs: dict = {}
        for v, p in base.probs.items():
            key = (v, fn(v))
            probs[key] = probs.get(key, ZERO) + p
        return cls(probs, (base.domain_len, out_len))

    def marginal(self, index: int) -> Dist:
        probs: dict = {}
        for tup, p in self.probs.items():
            v = tup[index]
            probs[v] = probs.get(v, ZERO) + p
        return Dist(probs, self.lens[index])

    def condition(self, index: int, value: BitString):
        """Conditional distribution of the remaining components."""
        mass = ZERO
        rows = []
        for tup, p in self.probs.items():
            if tup[index] == value:
                mass += p
                rows.append((tup, p))
        if mass == 0:
            raise OracleError("conditioning on zero-probability value")
        rest_lens = tuple(L for i, L in enumerate(self.lens) if i != index)
        probs: dict = {}
        for tup, p in rows:
            rest = tuple(v for i, v in enumerate(tup) if i != index)
            key = rest if len(rest) > 1 else rest[0]
            probs[key] = probs.get(key, ZERO) + p / mass
        if len(rest_lens) == 1:
            return Dist(probs, rest_lens[0])
        return JointDist(probs, rest_lens)


def condition(j: JointDist, index: int, value: BitString):
    return j.condition(index, value)


def avg_cond_min_entropy(j: JointDist) -> float:
    """Average conditional min-entropy of X given W for an arity-2 joint (X, W)."""
    if j.arity != 2:
        raise OracleError("avg_cond_min_entropy expects an arity-2 joint")
    return -log2_frac(_avg_guess_mass(j))


def _avg_guess_mass(j: JointDist) -> Fraction:
    # E_w[max_x P(X=x | W=w)] computed as sum_w max_x P(x, w)
    best: dict = {}
    for (x, w), p in j.probs.items():
        if p > best.get(w, ZERO):
            best[w] = p
    return sum(best.values(), ZERO)


# ---------------------------------------------------------------------------
# Source families


@dataclass(frozen=True)
class SourceSpec:
    """A weak-source description the verifiers can enumerate exactly."""

    kind: str  # "uniform" | "flat" | "explicit"
    n: int
    subset: Optional[tuple] = None
    probs: Optional[tuple] = None  # tuple of (int value, Fraction)
    label: str = ""

    def support_probs(self) -> list:
        if self.kind == "uniform":
            p = Fraction(1, 1 << self.n)
            return [(v, p) for v in range(1 << self.n)]
        if self.kind == "flat":
            p = Fraction(1, len(self.subset))
            return [(v, p) for v in self.subset]
        if self.kind == "explicit":
            return list(self.probs)
        raise OracleError(f"unknown source kind {self.kind!r}")

    def min_entropy(self) -> float:
        return -log2_frac(max(p for _, p in self.support_probs()))

    def to_dist(self) -> Dist:
        return Dist({BitString(v, self.n): p for v, p in self.support_probs()}, self.n)

    def describe(self) -> str:
        if self.label:
            return self.label
        if self.kind == "flat":
            return f"flat[{','.join(map(str, self.subset))}]"
        return self.kind


def flat_sources(n: int, k: int, cap: int, sampled: int = 0, seed: bytes = b"flat") -> list:
    """Flat min-entropy-k sources: first ``cap`` subsets in lexicographic
    order plus ``sampled`` seeded pseudorandom subsets beyond the cap.

    Flat sources are the extreme points of the min-entropy polytope, so
    worst cases for the verifiers are attained on them.
    """
    if k > n:
        raise OracleError("k exceeds n")
    size = 1 << k
    out = []
    for subset in itertools.islice(itertools.combinations(range(1 << n), size), cap):
        out.append(SourceSpec("flat", n, subset=subset))
    stream = BitStream(seed, f"flat/{n}/{k}")
    for i in range(sampled):
        subset = tuple(stream.sample(1 << n, size))
        out.append(SourceSpec("flat", n, subset=subset, label=f"flat-sampled-{i}"))
    return out


def fixed_point_free_adversaries(d: int, cap: Optional[int] = None, sampled: int = 0,
                                 seed: bytes = b"adv") -> list:
    """Seed-tampering functions A with A(y) != y for all y, as tuples.

    Enumerated lexicographically over function tables; ``cap`` truncates and
    ``sampled`` adds seeded draws beyond the cap ((2^d - 1)^(2^d) explodes
    at d = 3).
    """
    dom = 1 << d
    choices = dom - 1  # per point, anything except y itself

    def table(index: int) -> tuple:
        out = []
        for y in range(dom):
            index, c = divmod(index, choices)
            out.append(c if c < y else c + 1)
        return tuple(out)

    total = choices ** dom
    limit = total if cap is None else min(cap, total)
    advs = [table(i) for i in range(limit)]
    if sampled and limit < total:
        stream = BitStream(seed, f"adv/{d}")
        seen = set(range(limit))
        while len(advs) < limit + sampled:
            i = stream.randrange(total)
            if i in seen:
                continue
            seen.add(i)
            advs.append(table(i))
    return advs


def check_fixed_point_free(adv: tuple) -> None:
    for y, ay in enumerate(adv):
        if y == ay:
            raise OracleError(f"A({y})={y} violates the fixed-point-free requirement")


# ---------------------------------------------------------------------------
# Verifiers


@dataclass
class VerifyReport:
    primitive: str
    profile: str
    worst_distance: Fraction
    witness_source: str = ""
    witness_adversary: str = ""
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        rec = {
            "schema": "privamp.verify/1",
            "primitive": self.primitive,
            "profile": self.profile,
            "worst_distance": frac_to_str(self.worst_distance),
            "worst_distance_float": float(self.worst_distance),
            "witness_source": self.witness_source,
            "witness_adversary": self.witness_adversary,
        }
        rec.update(self.extra)
        return rec


def _require_entropy(sources: Iterable[SourceSpec], k: int):
    for src in sources:
        if max(p for _, p in src.support_probs()) > Fraction(1, 1 << k):
            raise OracleError(f"source {src.describe()} has min-entropy below {k}")


def verify_strong_extractor(ext, n: int, k: int, m: int, family: Iterable[SourceSpec],
                            name: str = "ext", profile: str = "") -> VerifyReport:
    """Exact worst-case distance of (Ext(X,Y), Y) from (U_m, Y) over the family.

    The seed ranges over all of {0,1}^seed_len, so the seed space must be
    enumerable.
    """
    family = list(family)
    _require_entropy(family, k)
    seed_len = ext.seed_len
    if seed_len > 24:
        raise OracleError("seed space too large for exact enumeration")
    nseeds = 1 << seed_len
    worst = ZERO
    witness = ""
    for src in family:
        pairs = src.support_probs()
        flat = all(p == pairs[0][1] for _, p in pairs)
        if flat:
            a = len(pairs)
            xs = [x for x, _ in pairs]
            t = 0
            for y in range(nseeds):
                counts = [0] * (1 << m)
                for x in xs:
                    counts[ext.eval_int(x, y)] += 1
                t += sum(abs((c << m) - a) for c in counts)
            dist = Fraction(t, 2 * a * (nseeds << m))
        else:
            dist = ZERO
            u = Fraction(1, 1 << m)
            for y in range(nseeds):
                acc: dict = {}
                for x, px in pairs:
                    z = ext.eval_int(x, y)
                    acc[z] = acc.get(z, ZERO) + px
                per_seed = sum((abs(acc.get(z, ZERO) - u) for z in range(1 << m)), ZERO) / 2
                dist += per_seed
            dist /= nseeds
        if dist > worst:
            worst = dist
            witness = src.describe()
    return VerifyReport(name, profile, worst, witness_source=witness,
                        extra={"n": n, "k": k, "m": m, "family_size": len(family)})


def verify_two_source_extractor(text, n1: int, n2: int, m: int, k1: int, k2: int,
                                family1: Iterable[SourceSpec], family2: Iterable[SourceSpec],
                                name: str = "two_source", profile: str = "") -> VerifyReport:
    """Exact worst-case strong-two-source distance over both families.

    Strongness is checked on both sides: output close to uniform jointly with
    either input.
    """
    family1, family2 = list(family1), list(family2)
    _require_entropy(family1, k1)
    _require_entropy(family2, k2)
    worst = ZERO
    witness = ""
    u = Fraction(1, 1 << m)
    for s1 in family1:
        p1 = s1.support_probs()
        for s2 in family2:
            p2 = s2.support_probs()
            # strong on both sides: output close to uniform given either input
            for fixed_side in (1, 2):
                dist = ZERO
                outer = p1 if fixed_side == 1 else p2
                inner = p2 if fixed_side == 1 else p1
                for w, pw in outer:
                    acc: dict = {}
                    for v, pv in inner:
                        z = text.eval_int(w, v) if fixed_side == 1 else text.eval_int(v, w)
                        acc[z] = acc.get(z, ZERO) + pv
                    per = sum((abs(acc.get(z, ZERO) - u) for z in range(1 << m)), ZERO) / 2
                    dist += pw * per
                if dist > worst:
                    worst = dist
                    witness = f"{s1.describe()}|{s2.describe()}|side{fixed_side}"
    return VerifyReport(name, profile, worst, witness_source=witness,
                        extra={"k1": k1, "k2": k2, "m": m})


def verify_nm_extractor(nmext, n: int, d: int, m: int, k: int,
                        adversaries: Iterable[tuple], family: Iterable[SourceSpec],
                        name: str = "nm_ext", profile: str = "") -> VerifyReport:
    """Exact worst case of Delta((nm(X,Y), nm(X,A(Y)), Y), (U_m, nm(X,A(Y)), Y))."""
    family = list(family)
    adversaries = list(adversaries)
    _require_entropy(family, k)
    for adv in adversaries:
        check_fixed_point_free(adv)
    nseeds = 1 << d
    py = Fraction(1, nseeds)
    um = Fraction(1, 1 << m)
    worst = ZERO
    wit_src = wit_adv = ""
    for src in family:
        pairs = src.support_probs()
        table = {}
        for x, _ in pairs:
            table[x] = [nmext.eval_int(x, y) for y in range(nseeds)]
        for adv in adversaries:
            left: dict = {}
            for x, px in pairs:
                row = table[x]
                for y in range(nseeds):
                    key = (row[y], row[adv[y]], y)
                    left[key] = left.get(key, ZERO) + px * py
            margin: dict = {}
            for (z, z2, y), p in left.items():
                margin[(z2, y)] = margin.get((z2, y), ZERO) + p
            total = ZERO
            for (z2, y), pm in margin.items():
                for z in range(1 << m):
                    total += abs(left.get((z, z2, y), ZERO) - pm * um)
            dist = total / 2
            if dist > worst:
                worst = dist
                wit_src, wit_adv = src.describe(), str(list(adv))
    return VerifyReport(name, profile, worst, wit_src, wit_adv,
                        extra={"n": n, "d": d, "m": m, "adversaries": len(adversaries)})


def min_selfconsistent_eps(pairs: list) -> Fraction:
    """Smallest e with (mass of entries whose value <= e) >= 1 - e.

    ``pairs`` is a list of (value, mass) with total mass 1; values and masses
    are Fractions.
    """
    total = sum((mass for _, mass in pairs), ZERO)
    if total != 1:
        raise OracleError("masses must sum to 1")
    merged: dict = {}
    for v, mass in pairs:
        merged[v] = merged.get(v, ZERO) + mass
    values = sorted(merged)
    cums = []
    run = ZERO
    for v in values:
        run += merged[v]
        cums.append(run)
    candidates = {ZERO, ONE}
    candidates.update(values)
    candidates.update(ONE - c for c in cums)
    best = None
    for e in sorted(candidates):
        if e < 0:
            continue
        # mass of values <= e
        mass = ZERO
        for v, c in zip(values, cums):
            if v <= e:
                mass = c
            else:
                break
        if mass >= 1 - e and (best is None or e < best):
            best = e
            break
    assert best is not None
    return best


@dataclass
class CondenserReport:
    primitive: str
    profile: str
    eps_seed: Fraction
    eps_inner: Fraction
    witness_source: str = ""
    witness_adversary: str = ""
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        rec = {
            "schema": "privamp.verify/1",
            "primitive": self.primitive,
            "profile": self.profile,
            "eps_seed": frac_to_str(self.eps_seed),
            "eps_inner": frac_to_str(self.eps_inner),
            "witness_source": self.witness_source,
            "witness_adversary": self.witness_adversary,
        }
        rec.update(self.extra)
        return rec


def verify_nm_condenser(cond_eval, n: int, d: int, m: int, k: int, kprime: int,
                        adversaries: Iterable[tuple], family: Iterable[SourceSpec],
                        name: str = "nm_cond", profile: str = "") -> CondenserReport:
    """Exact two-knob check of the non-malleable-condenser definition.

    For each seed y the inner epsilon is the smallest e such that, with
    probability >= 1-e over z' drawn from cond(X, A(y)), the conditioned
    distribution cond(X, y) | cond(X, A(y)) = z' is e-close to an (m, k')
    source. eps_inner is the smallest e for which a 1-e fraction of seeds
    meets its inner epsilon, and eps_seed is the exact bad-seed mass at that
    threshold. Worst case over sources and adversaries, ordered by
    (eps_inner, eps_seed).
    """
    family = list(family)
    adversaries = list(adversaries)
    _require_entropy(family, k)
    for adv in adversaries:
        check_fixed_point_free(adv)
    nseeds = 1 << d
    py = Fraction(1, nseeds)
    table: dict = {}

    def z_of(x, y):
        key = (x, y)
        if key not in table:
            table[key] = cond_eval(x, y)
        return table[key]

    worst = None
    wit_src = wit_adv = ""
    for src in family:
        pairs = src.support_probs()
        for adv in adversaries:
            per_seed = []
            for y in range(nseeds):
                buckets: dict = {}
                for x, px in pairs:
                    zp = z_of(x, adv[y])
                    buckets.setdefault(zp, {})
                    zz = z_of(x, y)
                    buckets[zp][zz] = buckets[zp].get(zz, ZERO) + px
                inner_pairs = []
                for zp, cell in buckets.items():
                    mass = sum(cell.values(), ZERO)
                    cond_dist = Dist({BitString(z, m): p / mass for z, p in cell.items()}, m)
                    delta = dist_to_capped(cond_dist, kprime)
                    inner_pairs.append((delta, mass))
                per_seed.append(min_selfconsistent_eps(inner_pairs))
            eps_inner = min_selfconsistent_eps([(e, py) for e in per_seed])
            eps_seed = sum((py for e in per_seed if e > eps_inner), ZERO)
            key = (eps_inner, eps_seed)
            if worst is None or key > worst:
                worst = key
                wit_src, wit_adv = src.describe(), str(list(adv))
    eps_inner, eps_seed = worst
    return CondenserReport(name, profile, eps_seed, eps_inner, wit_src, wit_adv,
                           extra={"n": n, "d": d, "m": m, "k": k, "k_prime": kprime,
                                  "sources": len(family), "adversaries": len(adversaries)})


# ---------------------------------------------------------------------------
# Lemma shadows: the testable conclusions of the conditioning lemmas,
# checked exactly on explicit joints.


def check_entropies_lemma(j: JointDist) -> list:
    """Pr_w[H(X|W=w) >= Havg(X|W) - s] >= 1 - 2^-s for every s > 0.

    Equivalent exact form: for every w with guess mass above the average,
    Pr[guess mass >= that] * mass <= E[guess mass]. Returns violations.
    """
    if j.arity != 2:
        raise OracleError("expects arity-2 joint (X, W)")
    pw: dict = {}
    best: dict = {}
    for (x, w), p in j.probs.items():
        pw[w] = pw.get(w, ZERO) + p
        if p > best.get(w, ZERO):
            best[w] = p
    mp = {w: best[w] / pw[w] for w in pw}
    avg = sum((pw[w] * mp[w] for w in pw), ZERO)
    violations = []
    for w in pw:
        if mp[w] <= avg:
            continue
        tail = sum((pw[w2] for w2 in pw if mp[w2] >= mp[w]), ZERO)
        if tail * mp[w] > avg:
            violations.append((w, tail, mp[w], avg))
    return violations


def check_amentropy_lemma(j: JointDist) -> bool:
    """Havg(A|B) >= H(A) - log2(#values of B), exactly."""
    if j.arity != 2:
        raise OracleError("expects arity-2 joint (A, B)")
    guess = _avg_guess_mass(j)
    max_pa = j.marginal(0).max_prob()
    nb = len(j.marginal(1).probs)
    return guess <= nb * max_pa


def check_condition_lemma(j: JointDist) -> list:
    """Pr_y[H(X|Y=y) >= H(X) - log|Y| - log(1/eps)] >= 1 - eps for all eps.

    Exact form: with c(y) = maxP(X) * |Y| / maxP(X|Y=y), require
    Pr[c <= v] <= v at every support value v. Returns violations.
    """
    if j.arity != 2:
        raise OracleError("expects arity-2 joint (X, Y)")
    pw: dict = {}
    best: dict = {}
    for (x, y), p in j.probs.items():
        pw[y] = pw.get(y, ZERO) + p
        if p > best.get(y, ZERO):
            best[y] = p
    ny = len(pw)
    max_px = j.marginal(0).max_prob()
    c = {y: max_px * ny * pw[y] / best[y] for y in pw}
    violations = []
    for y in pw:
        mass = sum((pw[y2] for y2 in pw if c[y2] <= c[y]), ZERO)
        if mass > c[y]:
            violations.append((y, mass, c[y]))
    return violations


def check_econdition_lemma(j: JointDist, k: int, eps_primes: Iterable[Fraction]) -> list:
    """The approximate-conditioning bound 1 - eps' - eps/eps', exactly.

    eps is the exact distance of the X-marginal from the nearest k-source;
    for each eps' the good-seed mass must reach 1 - eps' - eps/eps'.
    Returns violations.
    """
    if j.arity != 2:
        raise OracleError("expects arity-2 joint (X, Y)")
    eps = dist_to_capped(j.marginal(0), k)
    ymarg = j.marginal(1)
    ny = len(ymarg.probs)
    violations = []
    for ep in eps_primes:
        ep = Fraction(ep)
        # target min-entropy k - log|Y| - log(1/ep) as a probability cap
        cap = Fraction(1, 1 << k) * ny / ep
        good = ZERO
        for y, py in ymarg.probs.items():
            cond = j.condition(1, y)
            delta = sum((p - cap for p in cond.probs.values() if p > cap), ZERO)
            if delta <= ep:
                good += py
        bound = 1 - ep - eps / ep
        if good < bound:
            violations.append((ep, good, bound))
    return violations


def enumerate_tiny_joints(count: int, seed: bytes = b"privamp-joints",
                          x_bits=(1, 2, 3), y_bits=(1, 2)) -> list:
    """Deterministic family of small rational joints for the lemma suites."""
    stream = BitStream(seed, "joints")
    out = []
    while len(out) < count:
        nx = x_bits[stream.randrange(len(x_bits))]
        ny = y_bits[stream.randrange(len(y_bits))]
        cells = (1 << nx) * (1 << ny)
        weights = [stream.randrange(8) for _ in range(cells)]
        total = sum(weights)
        if total == 0:
            continue
        probs = {}
        i = 0
        for xv in range(1 << nx):
            for yv in range(1 << ny):
                if weights[i]:
                    probs[(BitString(xv, nx), BitString(yv, ny))] = Fraction(weights[i], total)
                i += 1
        out.append(JointDist(probs, (nx, ny)))
    return out
