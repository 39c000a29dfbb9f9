import json
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import pytest

from privamp.bits import BitString
from privamp.certify import load_baselines
from privamp.condenser import (CondenserOutput, case_adversaries, case_split_margins,
                               classify_seed_adversary, cond_eval_fn, nm_cond,
                               nm_cond_linear, output_layout)
from privamp.dist import str_to_frac
from privamp.profiles import (BUILTIN_PROFILES, ParameterProfile, ProfileError,
                              build_registry, get_profile, validate_profile)
from privamp.rng import BitStream
from privamp.scripts import default_source

GOLDEN = Path(__file__).parent / "golden"


class TestProfileValidation:
    def test_builtins_valid(self):
        for name, p in BUILTIN_PROFILES.items():
            assert validate_profile(p) == [], name

    def test_paper_boundary_k(self):
        p = BUILTIN_PROFILES["paper-cond"]
        bad = replace(p, k=60 * 36 - 1, n=60 * 36 - 1)
        violations = validate_profile(bad)
        assert any(v.clause == "k >= 60 d^2" for v in violations)

    def test_desk_keeps_structural(self):
        p = BUILTIN_PROFILES["micro-cond"]
        bad = replace(p, cond=replace(p.cond, t=3))
        violations = validate_profile(bad)
        assert any(v.clause == "t = 4|y1|" for v in violations)

    def test_desk_ignores_magnitudes(self):
        # magnitudes far below the paper regime are fine in desk mode
        assert validate_profile(BUILTIN_PROFILES["micro-cond"]) == []

    def test_size_gap_enforced(self):
        p = BUILTIN_PROFILES["micro-cond"]
        bad = replace(p, cond=replace(p.cond, v1_len=2))
        assert any(v.clause == "|v1| > |v2|" for v in validate_profile(bad))

    def test_json_roundtrip(self):
        for p in BUILTIN_PROFILES.values():
            assert ParameterProfile.from_json(p.to_json()) == p

    def test_get_profile_unknown(self):
        with pytest.raises(ProfileError, match="unknown profile"):
            get_profile("no-such-profile")

    def test_get_profile_from_file(self, tmp_path):
        p = BUILTIN_PROFILES["micro-cond"]
        path = tmp_path / "prof.json"
        path.write_text(json.dumps(p.to_json()))
        assert get_profile(str(path)) == p


class TestNmCond:
    def test_paper_shape(self):
        p = BUILTIN_PROFILES["paper-cond"]
        reg = build_registry(p)
        st = BitStream(b"shape", "x")
        x, y = st.take(p.n), st.take(p.cond.seed_len)
        out = nm_cond(x, y, p, reg)
        d = p.cond.y1_len
        assert len(out.v1) == 8 * d * d
        assert len(out.v2) == 2 * d and all(len(r) == d for r in out.v2)
        assert len(out.z) == 8 * d * d + 2 * d * d

    def test_determinism(self):
        p = BUILTIN_PROFILES["desk-cond"]
        reg = build_registry(p)
        st = BitStream(b"det", "x")
        x, y = st.take(p.n), st.take(p.cond.seed_len)
        assert nm_cond(x, y, p, reg).z == nm_cond(x, y, p, reg).z

    def test_seed_splitting_consistency(self):
        p = BUILTIN_PROFILES["desk-cond"]
        c = p.cond
        reg = build_registry(p)
        st = BitStream(b"split", "x")
        x = st.take(p.n)
        y1, y2 = st.take(c.y1_len), st.take(c.y2_len)
        out = nm_cond(x, y1.concat(y2), p, reg)
        # the layout descriptor recovers the components from z
        layout = output_layout(p, "cond")
        assert sum(n for _, n in layout) == len(out.z)
        assert out.z.slice(0, c.v1_len) == out.v1
        pos = c.v1_len
        for row in out.v2:
            assert out.z.slice(pos, pos + len(row)) == row
            pos += len(row)

    def test_seed_length_error(self):
        p = BUILTIN_PROFILES["desk-cond"]
        with pytest.raises(ProfileError, match="seed length"):
            nm_cond(BitString(0, p.n), BitString(0, 3), p)

    def test_layout_mismatch_rejected(self):
        with pytest.raises(ProfileError, match="layout"):
            CondenserOutput(BitString.from_str("1"), (BitString.from_str("0"),),
                            BitString.from_str("11"))

    def test_golden_output(self):
        rec = json.loads((GOLDEN / "cond_desk.json").read_text())
        p = BUILTIN_PROFILES[rec["profile"]]
        x = BitString.from_hex(rec["x"]["hex"], rec["x"]["bits"])
        y = BitString.from_hex(rec["y"]["hex"], rec["y"]["bits"])
        out = nm_cond(x, y, p)
        assert out.v1.to_hex() == rec["v1"]["hex"]
        assert [r.to_hex() for r in out.v2] == [r["hex"] for r in rec["v2"]]
        assert out.z.to_hex() == rec["z"]["hex"]


class TestNmCondLinear:
    def test_paper_shape(self):
        p = BUILTIN_PROFILES["paper-cond2"]
        q = p.cond2
        reg = build_registry(p)
        st = BitStream(b"shape2", "x")
        x, y = st.take(p.n), st.take(q.seed_len)
        out = nm_cond_linear(x, y, p, reg)
        assert len(out.v1) == (1 << q.C) * 4 * p.ell
        assert [len(r) for r in out.v2] == [q.v_len(i) for i in range(1, q.C + 1)]
        # total V length is the geometric sum (2^C - 1) * 2 ell
        assert sum(len(r) for r in out.v2) == ((1 << q.C) - 1) * 2 * p.ell
        assert len(out.z) == (1 << q.C) * 4 * p.ell + ((1 << q.C) - 1) * 2 * p.ell

    def test_golden_output(self):
        rec = json.loads((GOLDEN / "cond2_micro.json").read_text())
        p = BUILTIN_PROFILES[rec["profile"]]
        x = BitString.from_hex(rec["x"]["hex"], rec["x"]["bits"])
        y = BitString.from_hex(rec["y"]["hex"], rec["y"]["bits"])
        out = nm_cond_linear(x, y, p)
        assert out.v1.to_hex() == rec["v1"]["hex"]
        assert out.z.to_hex() == rec["z"]["hex"]

    def test_missing_section(self):
        p = BUILTIN_PROFILES["micro-cond"]
        with pytest.raises(ProfileError, match="cond2"):
            nm_cond_linear(BitString(0, p.n), BitString(0, 4), p)


class TestCaseSplit:
    def test_classification(self):
        p = BUILTIN_PROFILES["micro-cond"]
        for adv in case_adversaries(p, "case1", cap=5):
            assert classify_seed_adversary(adv, p) == "case1"
        for adv in case_adversaries(p, "case2", cap=5):
            assert classify_seed_adversary(adv, p) == "case2"

    def test_case_adversaries_fixed_point_free(self):
        from privamp.dist import check_fixed_point_free
        p = BUILTIN_PROFILES["micro-cond"]
        for which in ("case1", "case2"):
            for adv in case_adversaries(p, which, cap=20):
                check_fixed_point_free(adv)

    def test_margins_match_committed(self):
        base = load_baselines()["case_margins_desk_cond"]
        p = BUILTIN_PROFILES["desk-cond"]
        advs = case_adversaries(p, "case1", cap=8) + case_adversaries(p, "case2", cap=8)
        m = case_split_margins(p, advs, default_source(p))
        assert m["case1_count"] == 8 and m["case2_count"] == 8
        assert m["case1_guess_mass"] == str_to_frac(base["case1_guess_mass"])
        assert m["case2_guess_mass"] == str_to_frac(base["case2_guess_mass"])
        assert m["case1"] >= 0 and m["case2"] >= 0


class TestCondEval:
    def test_eval_matches_bitstring_path(self):
        p = BUILTIN_PROFILES["micro-cond"]
        reg = build_registry(p)
        ev = cond_eval_fn(p, reg)
        st = BitStream(b"ev", "x")
        for _ in range(10):
            x, y = st.take(p.n), st.take(p.cond.seed_len)
            assert ev(x.value, y.value) == nm_cond(x, y, p, reg).z.value
