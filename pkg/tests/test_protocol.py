import json
from pathlib import Path

import pytest

from privamp.bits import BitString
from privamp.profiles import BUILTIN_PROFILES, build_registry
from privamp.protocol import (AkaAlice, AkaBob, Aka2Alice, Aka2Bob, Message,
                              PartyOutcome, ProtocolError, REJECT, Transcript,
                              aka_alice_round1, aka_alice_round2, aka_bob_respond,
                              aka_multiround_step, alice_rand_len, bob_rand_len,
                              leakage_ledger, purify, run_honest)
from privamp.rng import BitStream

GOLDEN = Path(__file__).parent / "golden"


def _setup(profile_name):
    p = BUILTIN_PROFILES[profile_name]
    return p, build_registry(p)


class TestAka:
    def test_honest_agreement(self):
        p, reg = _setup("desk-aka")
        for i in range(25):
            x = BitStream(b"corr", f"{i}/x").take(p.n)
            tr = run_honest("aka", x, p, reg,
                            BitStream(b"corr", f"{i}/a"), BitStream(b"corr", f"{i}/b"))
            assert not tr.outcome_alice.is_reject
            assert not tr.outcome_bob.is_reject
            assert tr.outcome_alice.key == tr.outcome_bob.key
            assert len(tr.outcome_alice.key) == p.aka.key_len

    def test_functional_wrappers(self):
        p, reg = _setup("micro-aka")
        x = BitStream(b"fw", "x").take(p.n)
        alice, msg1 = aka_alice_round1(x, BitStream(b"fw", "a"), p, reg)
        assert len(msg1.payload["y1"]) == p.aka.y1_len
        reply, bob_out = aka_bob_respond(x, msg1, BitStream(b"fw", "b"), p, reg)
        assert not bob_out.is_reject
        out = aka_alice_round2(alice, reply)
        assert out.key == bob_out.key

    def test_r1_and_t1_lengths_from_profile(self):
        # paper mode pins R1 = 4s and T1 = s; the desk profile keeps its declared sizes
        p, reg = _setup("desk-aka")
        x = BitStream(b"len", "x").take(p.n)
        alice = AkaAlice(x, p, reg, BitStream(b"len", "a"))
        alice.start()
        assert len(alice.r1) == p.aka.r1_len
        assert len(alice.expected_t1()) == p.aka.t1_len

    def test_flipped_tag_rejects(self):
        p, reg = _setup("micro-aka")
        x = BitStream(b"flip", "x").take(p.n)
        alice = AkaAlice(x, p, reg, BitStream(b"flip", "a"))
        msg1 = alice.start()
        bob = AkaBob(x, p, reg, BitStream(b"flip", "b"))
        reply = bob.deliver(msg1)
        reply.payload["t2"] = reply.payload["t2"].flip(0)
        alice.deliver(reply)
        assert alice.outcome.is_reject
        assert ("alice.t2_mac", False) in alice.checks

    def test_malformed_framing_rejects(self):
        p, reg = _setup("micro-aka")
        x = BitStream(b"bad", "x").take(p.n)
        bob = AkaBob(x, p, reg, BitStream(b"bad", "b"))
        bad = Message("A->B", 1, {"y1": BitString(0, p.aka.y1_len + 1),
                                  "y2": BitString(0, p.aka.y2_len),
                                  "y3": BitString(0, p.aka.y3_len)})
        assert bob.deliver(bad) is None
        assert bob.outcome.is_reject

    def test_phase_mismatch_rejects(self):
        p, reg = _setup("micro-aka")
        x = BitStream(b"ph", "x").take(p.n)
        alice = AkaAlice(x, p, reg, BitStream(b"ph", "a"))
        alice.start()
        wrong = Message("B->A", 1, {"w": BitString(0, p.aka.w_msg_len),
                                    "t1": BitString(0, p.aka.t1_len),
                                    "t2": BitString(0, p.aka.tag_v)})
        alice.deliver(wrong)
        assert alice.outcome.is_reject

    def test_golden_state(self):
        rec = json.loads((GOLDEN / "aka_desk.json").read_text())
        p, reg = _setup(rec["profile"])
        x = BitString.from_hex(rec["x"]["hex"], rec["x"]["bits"])
        alice = AkaAlice(x, p, reg, BitStream(b"golden", "aka/alice"))
        msg1 = alice.start()
        assert {k: v.to_hex() for k, v in msg1.payload.items()} == \
            {k: v["hex"] for k, v in rec["round1"].items()}
        assert alice.r1.to_hex() == rec["r1"]["hex"]
        bob = AkaBob(x, p, reg, BitStream(b"golden", "aka/bob"))
        reply = bob.deliver(msg1)
        assert {k: v.to_hex() for k, v in reply.payload.items()} == \
            {k: v["hex"] for k, v in rec["reply"].items()}
        alice.deliver(reply)
        assert alice.outcome.key.to_hex() == rec["alice_key"]["hex"]
        assert bob.outcome.key.to_hex() == rec["bob_key"]["hex"]


class TestAka2:
    def test_honest_agreement_and_round_count(self):
        for prof in ("micro-aka2", "desk-aka2"):
            p, reg = _setup(prof)
            for i in range(10):
                x = BitStream(b"c2", f"{prof}/{i}/x").take(p.n)
                tr = run_honest("aka2", x, p, reg,
                                BitStream(b"c2", f"{prof}/{i}/a"),
                                BitStream(b"c2", f"{prof}/{i}/b"))
                assert not tr.outcome_alice.is_reject
                assert not tr.outcome_bob.is_reject
                assert tr.outcome_alice.key == tr.outcome_bob.key
                # 2L+2 messages on the wire
                assert len(tr.entries) == 2 * p.aka2.L + 2

    def test_block_division(self):
        p, reg = _setup("desk-aka2")
        x = BitStream(b"blk", "x").take(p.n)
        alice = Aka2Alice(x, p, reg, BitStream(b"blk", "a"))
        alice.start()
        assert len(alice.blocks) == p.aka2.L
        assert all(len(b) == p.aka2.d2 for b in alice.blocks)
        code = reg.get("aka2.edit")
        from privamp.bits import concat_all
        assert concat_all(alice.blocks) == code.encode(alice.y)

    def test_altered_block_rejected_at_codeword_check(self):
        p, reg = _setup("micro-aka2")
        x = BitStream(b"alt", "x").take(p.n)
        alice = Aka2Alice(x, p, reg, BitStream(b"alt", "a"))
        bob = Aka2Bob(x, p, reg, BitStream(b"alt", "b"))
        msg = alice.start()
        msg.payload["m"] = msg.payload["m"].flip(0)
        reply = bob.deliver(msg)
        if reply is not None:  # Bob replies before the codeword check
            nxt = aka_multiround_step(alice, reply)
            if isinstance(nxt, Message):
                aka_multiround_step(bob, nxt)
                assert ("bob.codeword", False) in bob.checks
                assert bob.outcome.is_reject

    def test_mid_phase_tag_check(self):
        p, reg = _setup("desk-aka2")
        x = BitStream(b"mid", "x").take(p.n)
        alice = Aka2Alice(x, p, reg, BitStream(b"mid", "a"))
        bob = Aka2Bob(x, p, reg, BitStream(b"mid", "b"))
        msg = alice.start()
        reply = bob.deliver(msg)
        reply.payload["t"] = reply.payload["t"].flip(0)
        alice.deliver(reply)
        assert alice.outcome.is_reject
        assert ("alice.t_raz@1", False) in alice.checks

    def test_v_response_check(self):
        p, reg = _setup("micro-aka2")
        x = BitStream(b"vr", "x").take(p.n)
        alice = Aka2Alice(x, p, reg, BitStream(b"vr", "a"))
        bob = Aka2Bob(x, p, reg, BitStream(b"vr", "b"))
        msg = alice.start()
        reply = bob.deliver(msg)
        vmsg = alice.deliver(reply)
        vmsg.payload["v_last"] = vmsg.payload["v_last"].flip(0)
        bob.deliver(vmsg)
        assert bob.outcome.is_reject
        assert (f"bob.v_resp@{p.aka2.L + 1}", False) in bob.checks


class TestTranscript:
    def test_determinism(self):
        p, reg = _setup("desk-aka")
        x = BitStream(b"tj", "x").take(p.n)
        recs = []
        for _ in range(2):
            tr = run_honest("aka", x, p, reg,
                            BitStream(b"tj", "a"), BitStream(b"tj", "b"))
            recs.append(json.dumps(tr.to_jsonl_records("r")))
        assert recs[0] == recs[1]

    def test_framing_preserved_invariant(self):
        tr = Transcript()
        a = Message("A->B", 1, {"y1": BitString(0, 2)})
        b = Message("A->B", 1, {"y1": BitString(0, 3)})
        with pytest.raises(ProtocolError, match="framing"):
            tr.record(a, b, tampered=True)

    def test_jsonl_fields(self):
        p, reg = _setup("micro-aka")
        x = BitStream(b"jf", "x").take(p.n)
        tr = run_honest("aka", x, p, reg, BitStream(b"jf", "a"), BitStream(b"jf", "b"))
        recs = tr.to_jsonl_records("run0")
        assert all({"run_id", "phase", "direction", "field", "hex", "tampered"} <=
                   set(r) for r in recs)


class TestPurifyAndLedger:
    def test_purify(self):
        assert purify(REJECT, BitStream(b"p", "r")).is_reject
        out = PartyOutcome(BitString.from_str("1011"))
        pur = purify(out, BitStream(b"p", "r"))
        assert not pur.is_reject and len(pur.key) == 4

    def test_aka_ledger_is_paper_accounting(self):
        p = BUILTIN_PROFILES["paper-aka"]
        led = leakage_ledger(p, "aka")
        assert led["total"] == 4 * p.s + p.s + 2 * p.s

    def test_aka2_ledger_bound(self):
        p = BUILTIN_PROFILES["paper-aka2"]
        led = leakage_ledger(p, "aka2")
        assert led["total"] <= 5 * p.aka2.lam_c

    def test_rand_lengths(self):
        p = BUILTIN_PROFILES["micro-aka"]
        assert alice_rand_len(p, "aka") == 1 + 2 + 2
        assert bob_rand_len(p, "aka") == 1
        p2 = BUILTIN_PROFILES["micro-aka2"]
        assert alice_rand_len(p2, "aka2") == 1 + 1 * (4 + 3)
        assert bob_rand_len(p2, "aka2") == 3 + 1
