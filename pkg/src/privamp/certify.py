"""Certify-then-use gate for registered primitive families.

Every primitive kind a registry holds is re-measured by the matching
oracle verifier at its smallest exhaustive twin before protocols may run.
Claimed contracts live in the committed baselines file; a measured value
above its claim (or drifting from its recorded regression value) fails
certification with the witness attached.
"""

from __future__ import annotations

import importlib.resources as resources
import json
from fractions import Fraction

from .dist import (flat_sources, fixed_point_free_adversaries, str_to_frac,
                   verify_nm_extractor, verify_strong_extractor,
                   verify_two_source_extractor)
from .primitives import (BlockIpExtractor, ProjectionCondenser, ToeplitzExt,
                         mac_forgery_advantage, row_entropy_certificate)


def load_baselines() -> dict:
    with resources.files("privamp.data").joinpath("baselines.json").open() as fh:
        return json.load(fh)


def _report(kind, ok, claimed, measured, witness="", note=""):
    return {
        "schema": "privamp.cert/1",
        "primitive": kind,
        "ok": bool(ok),
        "claimed": str(claimed),
        "measured": str(measured),
        "witness": witness,
        "note": note,
    }


def _certify_strong_ext(base, quick):
    cap, sampled = (120, 30) if quick else (500, 100)
    fam = flat_sources(8, 6, cap=cap, sampled=sampled, seed=b"privamp")
    rep = verify_strong_extractor(ToeplitzExt(8, 2, 9), 8, 6, 2, fam)
    bound = str_to_frac(base["strong_ext"]["bound"])
    ok = rep.worst_distance <= bound
    if not quick:
        ok = ok and rep.worst_distance == str_to_frac(base["strong_ext"]["worst_distance"])
    return _report("strong_ext", ok, base["strong_ext"]["bound"],
                   rep.worst_distance, rep.witness_source,
                   note="leftover-hash bound at n=8, k=6, m=2")


def _certify_two_source(base, quick):
    cap, sampled = (15, 5) if quick else (40, 20)
    fam = flat_sources(4, 3, cap=cap, sampled=sampled, seed=b"privamp")
    rep = verify_two_source_extractor(BlockIpExtractor(4, 4, 1), 4, 4, 1, 3, 3, fam, fam)
    bound = str_to_frac(base["two_source"]["bound"])
    ok = rep.worst_distance <= bound
    if not quick:
        ok = ok and rep.worst_distance == str_to_frac(base["two_source"]["worst_distance"])
    return _report("two_source_ext", ok, base["two_source"]["bound"],
                   rep.worst_distance, rep.witness_source)


def _certify_nm_ext(base, quick):
    advs = fixed_point_free_adversaries(2)
    from .dist import SourceSpec
    rep = verify_nm_extractor(BlockIpExtractor(2, 2, 1, kind="nm_ext"), 2, 2, 1, 2,
                              advs, [SourceSpec("uniform", 2)])
    claimed = str_to_frac(base["nm_ext"]["worst_distance"])
    return _report("nm_ext", rep.worst_distance == claimed,
                   base["nm_ext"]["worst_distance"], rep.worst_distance,
                   rep.witness_adversary, note="definitional sweep, 81 adversaries")


def _certify_mac(base, quick):
    adv = mac_forgery_advantage(2, 2)
    claimed = str_to_frac(base["mac"]["advantage"]["v=2,chunks=2"])
    ok = adv == claimed and adv <= Fraction(2, 4)
    return _report("mac", ok, base["mac"]["bounds"]["v=2,chunks=2"], adv,
                   note="exhaustive optimal forger, v=2, 2 chunks")


def _certify_somewhere(base, quick):
    rows = tuple(tuple(r) for r in base["somewhere"]["rows"])
    cond = ProjectionCondenser(6, rows)
    cap, sampled = (15, 5) if quick else (40, 20)
    fam = flat_sources(6, 4, cap=cap, sampled=sampled, seed=b"privamp")
    eps = row_entropy_certificate(cond, 4, 2, fam)
    claimed = str_to_frac(base["somewhere"]["eps"])
    ok = eps <= claimed if quick else eps == claimed
    return _report("somewhere_cond", ok, base["somewhere"]["eps"], eps,
                   note="row-entropy certificate at n=6, C=2, rows from search")


def _certify_edit(base, quick, registry):
    table = base["edit_code"]["relative_distance"]
    results = []
    for name, obj in registry.items():
        if obj.kind != "edit_code":
            continue
        e = obj.certify_relative_distance()
        claimed = table.get(str(obj.msg_len))
        ok = claimed is not None and e == str_to_frac(claimed)
        results.append(_report(f"edit_code[{obj.msg_len}]", ok, claimed or "missing", e))
    return results


_CERT_MEMO: dict = {}


def certify_registry(registry, quick: bool = False, baselines=None) -> tuple:
    """Run the per-kind certifiers for every kind the registry holds.

    Returns (all_ok, list of report records); also caches the result on the
    registry so protocol commands can refuse to run uncertified primitives.
    Results are memoized per (kinds, edit sizes, quick, baseline content)
    since certification is a family-level property, not a per-instance one.
    """
    base = baselines if baselines is not None else load_baselines()
    kinds = {obj.kind for _, obj in registry.items()}
    edit_sizes = tuple(sorted(obj.msg_len for _, obj in registry.items()
                              if obj.kind == "edit_code"))
    memo_key = (frozenset(kinds), edit_sizes, quick, json.dumps(base, sort_keys=True))
    if memo_key in _CERT_MEMO:
        ok, reports = _CERT_MEMO[memo_key]
        registry.certification = reports
        return ok, reports
    reports = []
    if "strong_ext" in kinds:
        reports.append(_certify_strong_ext(base, quick))
    if "two_source_ext" in kinds:
        reports.append(_certify_two_source(base, quick))
    if "nm_ext" in kinds:
        reports.append(_certify_nm_ext(base, quick))
    if "mac" in kinds:
        reports.append(_certify_mac(base, quick))
    if "somewhere_cond" in kinds:
        reports.append(_certify_somewhere(base, quick))
    if "edit_code" in kinds:
        reports.extend(_certify_edit(base, quick, registry))
    ok = all(r["ok"] for r in reports)
    registry.certification = reports
    _CERT_MEMO[memo_key] = (ok, reports)
    return ok, reports
