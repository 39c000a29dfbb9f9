"""Alice/Bob state machines for the two key-agreement protocols.

The 2-round protocol sends (Y1, Y2, Y3) out and (W, T1, T2) back; the
multi-phase protocol streams an edit-coded copy of Y in d2-bit blocks with
per-phase challenge/response. Message framing carries an explicit phase
tag; a recipient validates field names and lengths against its own phase
and rejects immediately on mismatch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bits import BitString, concat_all
from .lookahead import LookaheadPrims, alt_extract, la_mac
from .profiles import ParameterProfile, require_valid


class ProtocolError(ValueError):
    pass


@dataclass
class Message:
    direction: str  # "A->B" | "B->A"
    phase: int
    payload: dict   # field name -> BitString, insertion order = wire order

    def canonical(self) -> tuple:
        return (self.direction, self.phase,
                tuple((k, v.value, len(v)) for k, v in self.payload.items()))

    def copy(self) -> "Message":
        return Message(self.direction, self.phase, dict(self.payload))

    def schema(self) -> tuple:
        return tuple((k, len(v)) for k, v in self.payload.items())


@dataclass(frozen=True)
class PartyOutcome:
    key: BitString | None  # None encodes the reject symbol

    @property
    def is_reject(self) -> bool:
        return self.key is None

    def __str__(self):
        return "reject" if self.is_reject else f"key({self.key})"


REJECT = PartyOutcome(None)


def purify(outcome: PartyOutcome, rng) -> PartyOutcome:
    """Reject stays reject; a key is replaced by a fresh uniform key."""
    if outcome.is_reject:
        return REJECT
    return PartyOutcome(rng.take(len(outcome.key)))


@dataclass
class TranscriptEntry:
    sent: Message | None       # None when the channel fabricated the delivery
    delivered: Message
    tampered: bool


@dataclass
class Transcript:
    entries: list = field(default_factory=list)
    outcome_alice: PartyOutcome | None = None
    outcome_bob: PartyOutcome | None = None
    randomness: dict = field(default_factory=dict)

    def record(self, sent, delivered, tampered):
        if sent is not None and sent.schema() != delivered.schema():
            raise ProtocolError("delivered framing must match sent framing")
        self.entries.append(TranscriptEntry(sent, delivered, tampered))

    def to_jsonl_records(self, run_id: str) -> list:
        recs = []
        for i, e in enumerate(self.entries):
            for name, bs in e.delivered.payload.items():
                recs.append({
                    "schema": "privamp.transcript/1",
                    "run_id": run_id,
                    "seq": i,
                    "phase": e.delivered.phase,
                    "direction": e.delivered.direction,
                    "field": name,
                    "hex": bs.to_hex(),
                    "bits": len(bs),
                    "tampered": e.tampered,
                })
        return recs

    def eve_view(self) -> tuple:
        """Everything on the wire, both as sent and as delivered."""
        out = []
        for e in self.entries:
            out.append(("sent", e.sent.canonical() if e.sent else None))
            out.append(("delivered", e.delivered.canonical()))
        return tuple(out)


def _check_payload(msg: Message, direction: str, phase: int, schema: list) -> bool:
    if msg.direction != direction or msg.phase != phase:
        return False
    if list(msg.payload.keys()) != [name for name, _ in schema]:
        return False
    return all(len(msg.payload[name]) == length for name, length in schema)


# ---------------------------------------------------------------------------
# 2-round protocol


class AkaAlice:
    """Round 1: sample Y, send (Y1,Y2,Y3); round 2: verify (W,T1,T2)."""

    def __init__(self, x: BitString, profile: ParameterProfile, registry, rng):
        require_valid(profile)
        self.p = profile.aka
        if self.p is None:
            raise ProtocolError(f"profile {profile.name} has no aka section")
        if len(x) != profile.n:
            raise ProtocolError("source length mismatch")
        self.x = x
        self.reg = registry
        self.rng = rng
        self.outcome: PartyOutcome | None = None
        self.checks: list = []

    def start(self) -> Message:
        p = self.p
        self.y1 = self.rng.take(p.y1_len)
        self.y2 = self.rng.take(p.y2_len)
        self.y3 = self.rng.take(p.y3_len)
        prims = LookaheadPrims(raz=self.reg.get("aka.la.raz"),
                               ext_q=self.reg.get("aka.la.ext_q"),
                               ext_w=self.reg.get("aka.la.ext_w"))
        trace = alt_extract(self.x, self.y2, self.y2.slice(0, p.s0_len), p.t, prims)
        self.z_rows = la_mac(trace.la_rows(), self.y1)
        self.r1 = self.reg.get("aka.ext_r1")(self.x, self.y1)
        return Message("A->B", 1, {"y1": self.y1, "y2": self.y2, "y3": self.y3})

    def expected_t1(self) -> BitString:
        return self.reg.get("aka.raz_t1")(self.y3, concat_all(self.z_rows))

    def expected_t2(self, w: BitString) -> BitString:
        return self.reg.get("aka.mac").tag(self.r1, w)

    def deliver(self, msg: Message):
        p = self.p
        if not _check_payload(msg, "B->A", 2,
                              [("w", p.w_msg_len), ("t1", p.t1_len), ("t2", p.tag_v)]):
            self.outcome = REJECT
            self.checks.append(("alice.framing", False))
            return
        w, t1, t2 = msg.payload["w"], msg.payload["t1"], msg.payload["t2"]
        ok1 = t1 == self.expected_t1()
        self.checks.append(("alice.t1_raz", ok1))
        if not ok1:
            self.outcome = REJECT
            return
        ok2 = t2 == self.expected_t2(w)
        self.checks.append(("alice.t2_mac", ok2))
        if not ok2:
            self.outcome = REJECT
            return
        self.outcome = PartyOutcome(self.reg.get("aka.ext_key")(self.x, w))


class AkaBob:
    """Computes the reply (W', T1', T2') and finishes with R_B."""

    def __init__(self, x: BitString, profile: ParameterProfile, registry, rng):
        require_valid(profile)
        self.p = profile.aka
        if self.p is None:
            raise ProtocolError(f"profile {profile.name} has no aka section")
        if len(x) != profile.n:
            raise ProtocolError("source length mismatch")
        self.x = x
        self.reg = registry
        self.rng = rng
        self.outcome: PartyOutcome | None = None
        self.checks: list = []

    def start(self):
        return None

    def deliver(self, msg: Message) -> Message | None:
        p = self.p
        if not _check_payload(msg, "A->B", 1,
                              [("y1", p.y1_len), ("y2", p.y2_len), ("y3", p.y3_len)]):
            self.outcome = REJECT
            self.checks.append(("bob.framing", False))
            return None
        y1, y2, y3 = msg.payload["y1"], msg.payload["y2"], msg.payload["y3"]
        w = self.rng.take(p.w_msg_len)
        prims = LookaheadPrims(raz=self.reg.get("aka.la.raz"),
                               ext_q=self.reg.get("aka.la.ext_q"),
                               ext_w=self.reg.get("aka.la.ext_w"))
        trace = alt_extract(self.x, y2, y2.slice(0, p.s0_len), p.t, prims)
        z_rows = la_mac(trace.la_rows(), y1)
        r1 = self.reg.get("aka.ext_r1")(self.x, y1)
        t1 = self.reg.get("aka.raz_t1")(y3, concat_all(z_rows))
        t2 = self.reg.get("aka.mac").tag(r1, w)
        self.outcome = PartyOutcome(self.reg.get("aka.ext_key")(self.x, w))
        return Message("B->A", 2, {"w": w, "t1": t1, "t2": t2})


# Functional wrappers matching the operation contracts.

def aka_alice_round1(x, rng, profile, registry):
    alice = AkaAlice(x, profile, registry, rng)
    return alice, alice.start()


def aka_bob_respond(x, delivered, rng, profile, registry):
    bob = AkaBob(x, profile, registry, rng)
    reply = bob.deliver(delivered)
    return reply, bob.outcome


def aka_alice_round2(alice: AkaAlice, delivered) -> PartyOutcome:
    alice.deliver(delivered)
    return alice.outcome


# ---------------------------------------------------------------------------
# (2L+2)-round edit-code protocol


class Aka2Alice:
    def __init__(self, x: BitString, profile: ParameterProfile, registry, rng):
        require_valid(profile)
        self.p = profile.aka2
        if self.p is None:
            raise ProtocolError(f"profile {profile.name} has no aka2 section")
        if len(x) != profile.n:
            raise ProtocolError("source length mismatch")
        self.x = x
        self.reg = registry
        self.rng = rng
        self.outcome: PartyOutcome | None = None
        self.checks: list = []
        self.phase = 0
        self.w_prev: BitString | None = None

    def _la_prims(self) -> LookaheadPrims:
        return LookaheadPrims(raz=self.reg.get("aka2.la.raz"),
                              ext_q=self.reg.get("aka2.la.ext_q"),
                              ext_w=self.reg.get("aka2.la.ext_w"))

    def _phase_msg(self) -> Message:
        p = self.p
        i = self.phase
        y2 = self.rng.take(p.y2_len)
        y3 = self.rng.take(p.y3_len)
        trace = alt_extract(self.x, y2, y2.slice(0, p.s0_len), p.t, self._la_prims())
        m_i = self.blocks[i - 1]
        self.z_rows = la_mac(trace.la_rows(), m_i)
        self.y3 = y3
        payload = {}
        if i == 1:
            payload["y"] = self.y
        else:
            payload["v_prev"] = self.reg.get("aka2.ext2")(self.x, self.w_prev)
        payload["m"] = m_i
        payload["y2"] = y2
        payload["y3"] = y3
        return Message("A->B", i, payload)

    def start(self) -> Message:
        p = self.p
        self.y = self.rng.take(p.d1)
        m = self.reg.get("aka2.edit").encode(self.y)
        self.blocks = [m.slice(i * p.d2, (i + 1) * p.d2) for i in range(p.L)]
        self.phase = 1
        return self._phase_msg()

    def expected_t(self) -> BitString:
        return self.reg.get("aka2.raz_t")(self.y3, concat_all(self.z_rows))

    def expected_t2(self, w: BitString) -> BitString:
        r = self.reg.get("aka2.ext1_r")(self.x, self.y)
        return self.reg.get("aka2.mac").tag(r, w)

    def deliver(self, msg: Message) -> Message | None:
        p = self.p
        i = self.phase
        if i <= p.L:
            if not _check_payload(msg, "B->A", i, [("w", p.d2), ("t", p.t_len)]):
                self.outcome = REJECT
                self.checks.append(("alice.framing", False))
                return None
            ok = msg.payload["t"] == self.expected_t()
            self.checks.append((f"alice.t_raz@{i}", ok))
            if not ok:
                self.outcome = REJECT
                return None
            self.w_prev = msg.payload["w"]
            self.phase += 1
            if self.phase <= p.L:
                return self._phase_msg()
            v_last = self.reg.get("aka2.ext2")(self.x, self.w_prev)
            return Message("A->B", p.L + 1, {"v_last": v_last})
        if not _check_payload(msg, "B->A", p.L + 1, [("w", p.d1), ("t", p.tag_v)]):
            self.outcome = REJECT
            self.checks.append(("alice.framing", False))
            return None
        w, t = msg.payload["w"], msg.payload["t"]
        ok = t == self.expected_t2(w)
        self.checks.append(("alice.t_mac", ok))
        if not ok:
            self.outcome = REJECT
            return None
        self.outcome = PartyOutcome(self.reg.get("aka2.ext1_key")(self.x, w))
        return None


class Aka2Bob:
    def __init__(self, x: BitString, profile: ParameterProfile, registry, rng):
        require_valid(profile)
        self.p = profile.aka2
        if self.p is None:
            raise ProtocolError(f"profile {profile.name} has no aka2 section")
        if len(x) != profile.n:
            raise ProtocolError("source length mismatch")
        self.x = x
        self.reg = registry
        self.rng = rng
        self.outcome: PartyOutcome | None = None
        self.checks: list = []
        self.phase = 1
        self.y_recv: BitString | None = None
        self.m_blocks: list = []
        self.w_sent: BitString | None = None

    def _la_prims(self) -> LookaheadPrims:
        return LookaheadPrims(raz=self.reg.get("aka2.la.raz"),
                              ext_q=self.reg.get("aka2.la.ext_q"),
                              ext_w=self.reg.get("aka2.la.ext_w"))

    def start(self):
        return None

    def expected_v(self) -> BitString:
        return self.reg.get("aka2.ext2")(self.x, self.w_sent)

    def deliver(self, msg: Message) -> Message | None:
        p = self.p
        i = self.phase
        if i <= p.L:
            schema = [("m", p.d2), ("y2", p.y2_len), ("y3", p.y3_len)]
            schema.insert(0, ("y", p.d1) if i == 1 else ("v_prev", p.resp_len))
            if not _check_payload(msg, "A->B", i, schema):
                self.outcome = REJECT
                self.checks.append(("bob.framing", False))
                return None
            if i == 1:
                self.y_recv = msg.payload["y"]
            else:
                ok = msg.payload["v_prev"] == self.expected_v()
                self.checks.append((f"bob.v_resp@{i}", ok))
                if not ok:
                    self.outcome = REJECT
                    return None
            m_i, y2, y3 = msg.payload["m"], msg.payload["y2"], msg.payload["y3"]
            self.m_blocks.append(m_i)
            trace = alt_extract(self.x, y2, y2.slice(0, p.s0_len), p.t, self._la_prims())
            z_rows = la_mac(trace.la_rows(), m_i)
            t = self.reg.get("aka2.raz_t")(y3, concat_all(z_rows))
            self.w_sent = self.rng.take(p.d2)
            self.phase += 1
            return Message("B->A", i, {"w": self.w_sent, "t": t})
        if not _check_payload(msg, "A->B", p.L + 1, [("v_last", p.resp_len)]):
            self.outcome = REJECT
            self.checks.append(("bob.framing", False))
            return None
        m_full = concat_all(self.m_blocks)
        ok = m_full == self.reg.get("aka2.edit").encode(self.y_recv)
        self.checks.append(("bob.codeword", ok))
        if not ok:
            self.outcome = REJECT
            return None
        ok = msg.payload["v_last"] == self.expected_v()
        self.checks.append((f"bob.v_resp@{p.L + 1}", ok))
        if not ok:
            self.outcome = REJECT
            return None
        w = self.rng.take(p.d1)
        r = self.reg.get("aka2.ext1_r")(self.x, self.y_recv)
        t = self.reg.get("aka2.mac").tag(r, w)
        self.outcome = PartyOutcome(self.reg.get("aka2.ext1_key")(self.x, w))
        return Message("B->A", p.L + 1, {"w": w, "t": t})


def aka_multiround_step(party, delivered: Message):
    """Advance one multi-round party machine; returns its reply or outcome."""
    reply = party.deliver(delivered)
    if reply is not None:
        return reply
    return party.outcome


# ---------------------------------------------------------------------------
# Honest driver and accounting


def make_parties(protocol: str, x, profile, registry, rng_a, rng_b):
    if protocol == "aka":
        return AkaAlice(x, profile, registry, rng_a), AkaBob(x, profile, registry, rng_b)
    if protocol == "aka2":
        return Aka2Alice(x, profile, registry, rng_a), Aka2Bob(x, profile, registry, rng_b)
    raise ProtocolError(f"unknown protocol {protocol!r}")


def run_honest(protocol: str, x: BitString, profile: ParameterProfile, registry,
               rng_a, rng_b) -> Transcript:
    """Passive-channel run: every message delivered verbatim."""
    alice, bob = make_parties(protocol, x, profile, registry, rng_a, rng_b)
    transcript = Transcript()
    msg = alice.start()
    bob.start()
    current, sender = msg, "A"
    while current is not None:
        transcript.record(current, current.copy(), tampered=False)
        receiver = bob if sender == "A" else alice
        reply = receiver.deliver(current)
        current, sender = reply, ("B" if sender == "A" else "A")
    transcript.outcome_alice = alice.outcome
    transcript.outcome_bob = bob.outcome
    return transcript


def alice_rand_len(profile: ParameterProfile, protocol: str) -> int:
    if protocol == "aka":
        a = profile.aka
        return a.y1_len + a.y2_len + a.y3_len
    b = profile.aka2
    return b.d1 + b.L * (b.y2_len + b.y3_len)


def bob_rand_len(profile: ParameterProfile, protocol: str) -> int:
    if protocol == "aka":
        return profile.aka.w_msg_len
    b = profile.aka2
    return b.L * b.d2 + b.d1


def leakage_ledger(profile: ParameterProfile, protocol: str) -> dict:
    """Bit counts of the transcript variables that carry information about X.

    2-round: the MAC key R1 plus the two tags. Multi-round: both copies of
    every challenge/response V and tag T plus the final MAC key R.
    """
    if protocol == "aka":
        a = profile.aka
        fields = [("r1", a.r1_len), ("t1", a.t1_len), ("t2", a.tag_v)]
    elif protocol == "aka2":
        b = profile.aka2
        fields = [("v_copies", 2 * b.L * b.resp_len), ("t_copies", 2 * b.L * b.t_len),
                  ("mac_key", b.mac_key_len)]
    else:
        raise ProtocolError(f"unknown protocol {protocol!r}")
    return {"protocol": protocol, "fields": fields, "total": sum(n for _, n in fields)}
