"""Built-in adversary scripts, sized to a profile.

The library mirrors the analysis structure: passive; tag replay on a
substituted W; seed substitution with Y1 fixed (the case the inner
non-malleable extractor handles) and Y1 changed (the look-ahead case, with
optimal challenge answering); and block alter / fabricate / delay plays
for the multi-round protocol.
"""

from __future__ import annotations

from .adversary import AdversaryScript, EveStep, Transform
from .bits import BitString
from .dist import SourceSpec
from .primitives import RepetitionMarkerCode
from .profiles import ParameterProfile
from .rng import BitStream


def default_source(profile: ParameterProfile) -> SourceSpec:
    """Seeded flat k-source on n bits, fixed across runs.

    A lexicographic-first subset would clamp the leading bits and collapse
    the extraction cascade at micro sizes, so the default is a deterministic
    pseudorandom subset instead.
    """
    stream = BitStream(b"privamp-default-source", f"{profile.n}/{profile.k}")
    subset = tuple(stream.sample(1 << profile.n, 1 << profile.k))
    return SourceSpec("flat", profile.n, subset=subset, label="default-flat")


def _fwd(to, *transforms, phase=None):
    return EveStep(to=to, source="forward", transforms=tuple(transforms), phase=phase)


def _fab(to, fields, phase):
    return EveStep(to=to, source="fabricate", fabricate=tuple(fields), phase=phase)


def _drop(to):
    return EveStep(to=to, source="drop")


def aka_scripts(profile: ParameterProfile) -> list:
    a = profile.aka
    zeros_w = "0" * a.w_msg_len
    out = [
        AdversaryScript(
            name="aka-passive", protocol="aka",
            steps=(_fwd("bob"), _fwd("alice")),
            description="deliver everything verbatim"),
        AdversaryScript(
            name="aka-tag-replay", protocol="aka",
            steps=(_fwd("bob"), _fwd("alice", Transform("w", "flip", 0))),
            description="substitute W, replay Bob's tags unchanged"),
        AdversaryScript(
            name="aka-flip-t2", protocol="aka",
            steps=(_fwd("bob"), _fwd("alice", Transform("t2", "flip", 0))),
            description="flip one tag bit; MAC equality is exact"),
        AdversaryScript(
            name="aka-case1-y2", protocol="aka",
            steps=(_fwd("bob", Transform("y2", "flip", 0)), _fwd("alice")),
            description="tamper the seed with Y1 fixed (case 1 of the analysis)"),
        AdversaryScript(
            name="aka-case2-guess", protocol="aka",
            steps=(_fwd("bob", Transform("y1", "flip", 0)),
                   _fab("alice", (("w", zeros_w), ("t1", "bestguess"),
                                  ("t2", "bestguess")), phase=2)),
            description="change Y1, then answer both tag challenges optimally"),
        AdversaryScript(
            name="aka-case2-guess-post", protocol="aka",
            steps=(_fwd("bob", Transform("y1", "flip", 0)),
                   _fab("alice", (("w", zeros_w), ("t1", "bestguess"),
                                  ("t2", "bestguess")), phase=2)),
            post_application=True,
            description="case 2 with Eve additionally given Bob's finished key"),
    ]
    return out


def aka2_scripts(profile: ParameterProfile) -> list:
    b = profile.aka2
    if b.L != 1:
        # exact-mode library targets the single-block micro geometry
        honest = [_fwd("bob")]
        for _ in range(b.L - 1):
            honest += [_fwd("alice"), _fwd("bob")]
        honest += [_fwd("alice"), _fwd("bob"), _fwd("alice")]
        return [AdversaryScript("aka2-passive", "aka2", tuple(honest),
                                description="deliver everything verbatim")]
    code = RepetitionMarkerCode(b.lam_m, b.reps)
    y_eve = "0" * b.d1
    m_eve = str(code.encode(BitString.from_str(y_eve)))
    honest = (_fwd("bob"), _fwd("alice"), _fwd("bob"), _fwd("alice"))
    out = [
        AdversaryScript(
            name="aka2-passive", protocol="aka2", steps=honest,
            description="deliver everything verbatim"),
        AdversaryScript(
            name="aka2-alter-m1", protocol="aka2",
            steps=(_fwd("bob", Transform("m", "flip", 0)), _fwd("alice"),
                   _fwd("bob"), _fwd("alice")),
            schedule=("A",),
            description="alter the first codeword block in flight"),
        AdversaryScript(
            name="aka2-fabricate-v", protocol="aka2",
            steps=(_fwd("bob"),
                   _fab("bob", (("v_last", "bestguess"),), phase=b.L + 1),
                   _fwd("alice"), _fwd("alice")),
            description="answer Bob's challenge before Alice reveals it"),
        AdversaryScript(
            name="aka2-delay-guess", protocol="aka2",
            steps=(_fab("alice", (("w", "0" * b.d2), ("t", "bestguess")), phase=1),
                   _fwd("bob"), _fwd("bob"), _drop("alice"), _fwd("alice")),
            description="answer Alice first (delete-style), deliver Bob late"),
        AdversaryScript(
            name="aka2-mitm", protocol="aka2",
            steps=(_fab("bob", (("y", y_eve), ("m", m_eve),
                                ("y2", "0" * b.y2_len), ("y3", "0" * b.y3_len)), phase=1),
                   _fab("alice", (("w", "0" * b.d2), ("t", "bestguess")), phase=1),
                   _fab("bob", (("v_last", "0" * b.resp_len),), phase=b.L + 1),
                   _drop("alice"), _fwd("alice")),
            schedule=("I", "D"),
            description="full man in the middle with Eve's own Y"),
    ]
    return out


def built_in_scripts(profile: ParameterProfile) -> dict:
    out = {}
    if profile.aka is not None:
        for sc in aka_scripts(profile):
            out[sc.name] = sc
    if profile.aka2 is not None:
        for sc in aka2_scripts(profile):
            out[sc.name] = sc
    return out
