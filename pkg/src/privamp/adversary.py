"""Active-adversary channel: scripts, scheduler, and exact advantage runs.

The channel is message-at-a-time with Eve choosing the next recipient
(delete = she fabricates the reply to Alice herself, insert = she
fabricates a phase message to Bob, alter = a forwarded message with a
transformed block). Eve is deterministic; her "best guess" answers are the
exact posterior modes given her view, computed by a two-pass enumeration.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, asdict
from fractions import Fraction

from .bits import BitString
from .dist import SourceSpec, frac_to_str
from .profiles import ParameterProfile, build_registry
from .protocol import (Message, Transcript, make_parties, alice_rand_len,
                       bob_rand_len)
from .rng import BitStream


class ScriptError(ValueError):
    pass


@dataclass(frozen=True)
class Transform:
    field: str
    op: str            # "flip" | "set" | "xor"
    bit: int = 0
    value: str = ""    # bit string for set/xor

    def apply(self, payload: dict) -> dict:
        if self.field not in payload:
            raise ScriptError(f"transform targets missing field {self.field!r}")
        cur = payload[self.field]
        if self.op == "flip":
            new = cur.flip(self.bit)
        elif self.op == "set":
            new = BitString.from_str(self.value)
        elif self.op == "xor":
            new = cur.xor(BitString.from_str(self.value))
        else:
            raise ScriptError(f"unknown transform op {self.op!r}")
        if len(new) != len(cur):
            raise ScriptError("transform must preserve the payload schema")
        out = dict(payload)
        out[self.field] = new
        return out


@dataclass(frozen=True)
class EveStep:
    to: str                       # "alice" | "bob"
    source: str = "forward"       # "forward" | "fabricate" | "drop"
    transforms: tuple = ()
    fabricate: tuple = ()         # tuple of (field, spec); spec = "bestguess" | bit string
    phase: int | None = None      # phase tag of a fabricated message
    direction: str | None = None


@dataclass(frozen=True)
class AdversaryScript:
    name: str
    protocol: str                 # "aka" | "aka2"
    steps: tuple
    schedule: tuple = ()          # declared block-level D/I/A ops, in order
    post_application: bool = False
    description: str = ""

    def has_bestguess(self) -> bool:
        return any(spec == "bestguess" for st in self.steps for _, spec in st.fabricate)

    def to_json(self) -> dict:
        rec = asdict(self)
        rec["schema"] = "privamp.script/1"
        return rec

    @classmethod
    def from_json(cls, rec: dict) -> "AdversaryScript":
        steps = tuple(
            EveStep(to=s["to"], source=s.get("source", "forward"),
                    transforms=tuple(Transform(**t) for t in s.get("transforms", ())),
                    fabricate=tuple((f, spec) for f, spec in s.get("fabricate", ())),
                    phase=s.get("phase"), direction=s.get("direction"))
            for s in rec["steps"])
        return cls(name=rec["name"], protocol=rec["protocol"], steps=steps,
                   schedule=tuple(rec.get("schedule", ())),
                   post_application=rec.get("post_application", False),
                   description=rec.get("description", ""))


# ---------------------------------------------------------------------------
# Single-run engine


class _FixedBits:
    """Randomness provider that replays one enumerated assignment."""

    def __init__(self, value: int, total: int):
        self.value = value
        self.total = total
        self.used = 0

    def take(self, nbits: int) -> BitString:
        if self.used + nbits > self.total:
            raise ScriptError("party drew more randomness than enumerated")
        sh = self.total - self.used - nbits
        self.used += nbits
        return BitString((self.value >> sh) & ((1 << nbits) - 1), nbits)


@dataclass
class RunResult:
    transcript: Transcript
    checks: list          # chronological (check_id, passed)
    outcome_alice: object
    outcome_bob: object


def _fabricate_payload(step: EveStep, receiver, answers_for_step) -> dict:
    payload = {}
    for name, spec in step.fabricate:
        if spec == "bestguess":
            payload[name] = None  # filled below
        else:
            payload[name] = BitString.from_str(spec)
    guesses = [name for name, spec in step.fabricate if spec == "bestguess"]
    if guesses:
        if answers_for_step is None:
            raise ScriptError("best-guess step requires exact two-pass mode")
        for name in guesses:
            payload[name] = answers_for_step[name]
    return payload


def _bestguess_targets(protocol: str, step: EveStep, alice, bob, payload: dict) -> dict:
    """The values that would pass the receiver's checks, from party state."""
    targets = {}
    for name, spec in step.fabricate:
        if spec != "bestguess":
            continue
        if step.to == "alice":
            if protocol == "aka":
                if name == "t1":
                    targets[name] = alice.expected_t1()
                elif name == "t2":
                    targets[name] = alice.expected_t2(payload["w"])
                else:
                    raise ScriptError(f"no best-guess rule for alice field {name!r}")
            else:
                if name == "t" and alice.phase <= alice.p.L:
                    targets[name] = alice.expected_t()
                elif name == "t":
                    targets[name] = alice.expected_t2(payload["w"])
                else:
                    raise ScriptError(f"no best-guess rule for alice field {name!r}")
        else:
            if name in ("v_prev", "v_last"):
                targets[name] = bob.expected_v()
            else:
                raise ScriptError(f"no best-guess rule for bob field {name!r}")
    return targets


def execute_script(protocol: str, profile: ParameterProfile, registry,
                   x: BitString, rng_a, rng_b, script: AdversaryScript,
                   answers=None, probe=None) -> RunResult:
    """One deterministic run of the script against fresh party machines.

    ``answers`` maps (step index, view key) to field->BitString for
    best-guess fields; ``probe``, when given, collects (step, view, targets)
    and answers with the targets themselves (pass-1 of the two-pass mode).
    """
    alice, bob = make_parties(protocol, x, profile, registry, rng_a, rng_b)
    transcript = Transcript()
    checks: list = []
    seen: list = []  # Eve's accumulated view: messages the parties emitted
    from_alice: deque = deque()
    from_bob: deque = deque()

    def emit(msg, sender):
        if msg is None:
            return
        (from_alice if sender == "A" else from_bob).append(msg)
        seen.append(msg.canonical())

    emit(alice.start(), "A")
    bob.start()

    def view_key():
        key = list(seen)
        if script.post_application:
            for tag, party in (("ra", alice), ("rb", bob)):
                if party.outcome is not None:
                    key.append((tag, None if party.outcome.is_reject
                                else party.outcome.key.value))
        return tuple(key)

    for idx, step in enumerate(script.steps):
        receiver = alice if step.to == "alice" else bob
        if step.source in ("forward", "drop"):
            queue = from_bob if step.to == "alice" else from_alice
            producer = bob if step.to == "alice" else alice
            if not queue:
                if producer.outcome is not None:
                    break  # upstream party halted; nothing more can flow
                raise ScriptError(f"step {idx}: nothing to forward to {step.to}")
            if step.source == "drop":
                queue.popleft()
                continue
            orig = queue.popleft()
            payload = dict(orig.payload)
            for tr in step.transforms:
                payload = tr.apply(payload)
            msg = Message(step.direction or orig.direction,
                          step.phase if step.phase is not None else orig.phase,
                          payload)
            tampered = bool(step.transforms) or msg.phase != orig.phase
        else:
            orig = None
            direction = step.direction or ("B->A" if step.to == "alice" else "A->B")
            key = view_key()
            has_guess = any(s == "bestguess" for _, s in step.fabricate)
            if probe is not None and has_guess:
                const_part = {name: BitString.from_str(spec)
                              for name, spec in step.fabricate if spec != "bestguess"}
                targets = _bestguess_targets(protocol, step, alice, bob, const_part)
                probe.append((idx, key, targets))
                payload = {name: (targets[name] if spec == "bestguess"
                                  else BitString.from_str(spec))
                           for name, spec in step.fabricate}
            else:
                step_answers = answers.get((idx, key)) if answers else None
                payload = _fabricate_payload(step, receiver, step_answers)
            msg = Message(direction, step.phase if step.phase is not None else 0, payload)
            tampered = True
        transcript.record(orig, msg, tampered)
        if receiver.outcome is not None:
            continue  # a halted party goes silent
        before = len(receiver.checks)
        reply = receiver.deliver(msg)
        checks.extend(receiver.checks[before:])
        emit(reply, "A" if step.to == "alice" else "B")
    transcript.outcome_alice = alice.outcome
    transcript.outcome_bob = bob.outcome
    return RunResult(transcript, checks, alice.outcome, bob.outcome)


# ---------------------------------------------------------------------------
# Exact and sampled attack runs


@dataclass
class LedgerEntry:
    """Chain-rule row: reached = Pr[all prior checks passed], passed =
    Pr[prior passed and this check evaluated and passed]. A check skipped
    because its party already halted counts as failed."""

    check: str
    reached: Fraction
    passed: Fraction

    @property
    def conditional(self):
        return None if self.reached == 0 else self.passed / self.reached

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "reached": frac_to_str(self.reached),
            "passed": frac_to_str(self.passed),
            "conditional": None if self.conditional is None else frac_to_str(self.conditional),
        }


@dataclass
class AttackReport:
    script: str
    profile: str
    exact: bool
    trials: int | None
    success: Fraction
    success_event: str
    accept_agree: Fraction
    reject_alice: Fraction
    reject_bob: Fraction
    ledger: list
    schedule: tuple = ()
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "schema": "privamp.attack/1",
            "script": self.script,
            "profile": self.profile,
            "exact": self.exact,
            "trials": self.trials,
            "success": frac_to_str(self.success),
            "success_float": float(self.success),
            "success_event": self.success_event,
            "accept_agree": frac_to_str(self.accept_agree),
            "reject_alice": frac_to_str(self.reject_alice),
            "reject_bob": frac_to_str(self.reject_bob),
            "schedule": list(self.schedule),
            "ledger": [e.to_json() for e in self.ledger],
            **self.extra,
        }


def _merge_check_order(run_records: list) -> list:
    """Topological merge of per-run check sequences into one global order."""
    order: list = []
    index: dict = {}
    for _, seq in run_records:
        prev = -1
        for cid, _ in seq:
            if cid in index:
                prev = index[cid]
            else:
                prev += 1
                order.insert(prev, cid)
                index = {c: i for i, c in enumerate(order)}
        del prev
    return order


def _chain_ledger(run_records: list) -> list:
    """Exact chain-rule ledger over the merged check order."""
    order = _merge_check_order(run_records)
    reached = {cid: Fraction(0) for cid in order}
    passed = {cid: Fraction(0) for cid in order}
    for w, seq in run_records:
        cmap = dict(seq)
        alive = True
        for cid in order:
            if not alive:
                break
            reached[cid] += w
            if cmap.get(cid, False):
                passed[cid] += w
            else:
                alive = False
    return [LedgerEntry(cid, reached[cid], passed[cid]) for cid in order]


def _enumeration(profile, protocol, source):
    na = alice_rand_len(profile, protocol)
    nb = bob_rand_len(profile, protocol)
    if na + nb > 26:
        raise ScriptError("randomness space too large for exact mode; use --trials")
    pairs = source.support_probs()
    wa = Fraction(1, 1 << na)
    wb = Fraction(1, 1 << nb)
    for xv, px in pairs:
        x = BitString(xv, source.n)
        for ra in range(1 << na):
            for rb in range(1 << nb):
                yield (x, _FixedBits(ra, na), _FixedBits(rb, nb), px * wa * wb)


def run_with_adversary(protocol: str, profile: ParameterProfile, source: SourceSpec,
                       script: AdversaryScript, exact: bool = True,
                       trials: int = 0, seed: bytes = b"privamp",
                       registry=None) -> AttackReport:
    """Robustness-violation probability of a script, exact or sampled.

    Success is the pre-application robustness violation: both parties accept
    and the keys differ. Exact mode enumerates every (x, randomness) tuple;
    best-guess fields are resolved to the posterior mode per Eve view first.
    """
    reg = registry if registry is not None else build_registry(profile)
    if script.protocol != protocol:
        raise ScriptError(f"script {script.name} targets {script.protocol}, not {protocol}")
    if not exact:
        return _run_sampled(protocol, profile, source, script, trials, seed, reg)

    answers = None
    if script.has_bestguess():
        votes: dict = {}
        for x, ra, rb, w in _enumeration(profile, protocol, source):
            probe: list = []
            execute_script(protocol, profile, reg, x, ra, rb, script, probe=probe)
            for idx, key, targets in probe:
                slot = votes.setdefault((idx, key), {})
                tkey = tuple(sorted((f, v.value, len(v)) for f, v in targets.items()))
                cell = slot.setdefault(tkey, [Fraction(0), targets])
                cell[0] += w
        answers = {}
        for slot_key, cand in votes.items():
            best = max(cand.items(), key=lambda kv: (kv[1][0], tuple(-c[1] for c in kv[0])))
            answers[slot_key] = best[1][1]

    success = accept_agree = rej_a = rej_b = Fraction(0)
    run_records: list = []
    for x, ra, rb, w in _enumeration(profile, protocol, source):
        res = execute_script(protocol, profile, reg, x, ra, rb, script, answers=answers)
        oa, ob = res.outcome_alice, res.outcome_bob
        a_rej = oa is None or oa.is_reject
        b_rej = ob is None or ob.is_reject
        if a_rej:
            rej_a += w
        if b_rej:
            rej_b += w
        if not a_rej and not b_rej:
            if oa.key != ob.key:
                success += w
            else:
                accept_agree += w
        run_records.append((w, res.checks))
    ledger = _chain_ledger(run_records)
    return AttackReport(script.name, profile.name, True, None, success,
                        "pre_application", accept_agree, rej_a, rej_b, ledger,
                        schedule=script.schedule,
                        extra={"source": source.describe(),
                               "post_application_view": script.post_application})


def _run_sampled(protocol, profile, source, script, trials, seed, reg):
    if trials <= 0:
        raise ScriptError("sampled mode needs a positive trial count")
    if script.has_bestguess():
        raise ScriptError("best-guess scripts run in exact mode only")
    pairs = source.support_probs()
    cum = []
    acc = Fraction(0)
    for v, p in pairs:
        acc += p
        cum.append((acc, v))
    na = alice_rand_len(profile, protocol)
    nb = bob_rand_len(profile, protocol)
    succ = agree = rej_a = rej_b = 0
    for t in range(trials):
        st = BitStream(seed, f"trial/{t}")
        u = Fraction(st.take_int(32), 1 << 32)
        xv = next(v for c, v in cum if u < c or c == 1)
        res = execute_script(protocol, profile, reg, BitString(xv, source.n),
                             _FixedBits(st.take_int(na), na) if na else _FixedBits(0, 0),
                             _FixedBits(st.take_int(nb), nb) if nb else _FixedBits(0, 0),
                             script)
        oa, ob = res.outcome_alice, res.outcome_bob
        a_rej = oa is None or oa.is_reject
        b_rej = ob is None or ob.is_reject
        rej_a += a_rej
        rej_b += b_rej
        if not a_rej and not b_rej:
            if oa.key != ob.key:
                succ += 1
            else:
                agree += 1
    return AttackReport(script.name, profile.name, False, trials,
                        Fraction(succ, trials), "pre_application",
                        Fraction(agree, trials), Fraction(rej_a, trials),
                        Fraction(rej_b, trials), [], schedule=script.schedule,
                        extra={"source": source.describe(), "approximate": True})


# ---------------------------------------------------------------------------
# Schedule classification and challenge accounting


@dataclass
class ScheduleReport:
    ops: tuple
    deletes: int
    inserts: int
    alters: int
    challenge_bound: int
    flagged: tuple  # indices of A ops immediately followed by I ops

    def to_json(self) -> dict:
        return {"ops": list(self.ops), "deletes": self.deletes, "inserts": self.inserts,
                "alters": self.alters, "challenge_bound": self.challenge_bound,
                "flagged_no_forced_challenge": list(self.flagged)}


def classify_schedule(script: AdversaryScript, profile: ParameterProfile,
                      code_e: Fraction | None = None) -> ScheduleReport:
    """Canonical block-level D/I/A sequence of a multi-round script.

    Derived from what happens to the codeword stream: a block message
    fabricated to Bob is an insert, a forwarded block with a transformed
    block field is an alter, and every Alice block that is never forwarded
    is a delete. Realizability requires deletes = inserts (Bob must consume
    exactly L blocks). The challenge lower bound is
    max(0, ceil(2 e (a+b+c) / 3)) for the registered code's certified e.
    """
    if script.protocol != "aka2":
        raise ScriptError("schedule classification applies to the multi-round protocol")
    b = profile.aka2
    # Bob consumes exactly L block messages: walk deliveries to him in order.
    ops = []
    forwarded_blocks = 0
    consumed = 0
    for st in script.steps:
        if st.to != "bob" or consumed >= b.L:
            continue
        consumed += 1
        if st.source == "fabricate":
            ops.append("I")
        else:
            forwarded_blocks += 1
            if any(t.field == "m" for t in st.transforms):
                ops.append("A")
    deletes = b.L - forwarded_blocks
    inserts = ops.count("I")
    alters = ops.count("A")
    ops.extend("D" for _ in range(max(deletes, 0)))
    if deletes != inserts:
        raise ScriptError(
            f"unrealizable interleaving: {deletes} deletes vs {inserts} inserts")
    if code_e is None:
        from .primitives import RepetitionMarkerCode
        code_e = RepetitionMarkerCode(b.lam_m, b.reps).certify_relative_distance()
    total = deletes + inserts + alters
    bound = max(0, math.ceil(Fraction(2) * code_e * total / 3))
    flagged = tuple(i for i in range(len(ops) - 1)
                    if ops[i] == "A" and ops[i + 1] == "I")
    return ScheduleReport(tuple(ops), deletes, inserts, alters, bound, flagged)


def challenge_ledger(report: AttackReport, schedule: ScheduleReport | None = None) -> list:
    """Per-challenge conditional success table from an exact report.

    A ledger entry counts as a challenge when its conditional pass
    probability is strictly below 1 (checks the script never endangers are
    not challenges for it). Product over entries of the conditionals equals
    the probability Eve survives every challenge, exactly.
    """
    entries = []
    challenge_idx = 0
    for e in report.ledger:
        cond = e.conditional
        if cond is None or cond == 1:
            continue
        flag = ""
        if schedule and challenge_idx in schedule.flagged:
            flag = "no forced challenge (alter immediately followed by insert)"
        entries.append({
            "check": e.check,
            "reached": e.reached,
            "passed": e.passed,
            "conditional": cond,
            "flag": flag,
            "approximate": not report.exact,
        })
        challenge_idx += 1
    return entries


def survival_product(report: AttackReport) -> Fraction:
    """Pr[Eve passes every check] as the ledger's chain product."""
    prod = Fraction(1)
    for e in report.ledger:
        if e.reached == 0:
            return Fraction(0)
        prod *= e.conditional
    return prod


def all_checks_pass_mass(report: AttackReport) -> Fraction:
    """Exact mass of runs in which every evaluated check passed."""
    last = None
    for e in report.ledger:
        last = e
    if last is None:
        return Fraction(1)
    return last.passed


# ---------------------------------------------------------------------------
# Extraction-property estimator


def extraction_distance(protocol: str, profile: ParameterProfile, source: SourceSpec,
                        script: AdversaryScript, registry=None) -> dict:
    """Exact Delta((R, E'), (purify(R), E')) for both parties.

    E' is Eve's full view (messages as sent and as delivered). The purified
    joint replaces each accepted key with a uniform one analytically.
    """
    reg = registry if registry is not None else build_registry(profile)
    joint_a: dict = {}
    joint_b: dict = {}
    accept_a: dict = {}
    accept_b: dict = {}
    answers = None
    if script.has_bestguess():
        raise ScriptError("estimator supports scripts without best-guess fields")
    for x, ra, rb, w in _enumeration(profile, protocol, source):
        res = execute_script(protocol, profile, reg, x, ra, rb, script, answers=answers)
        view = res.transcript.eve_view()
        for joint, acc, out in ((joint_a, accept_a, res.outcome_alice),
                                (joint_b, accept_b, res.outcome_bob)):
            kval = None if (out is None or out.is_reject) else (out.key.value, len(out.key))
            joint[(kval, view)] = joint.get((kval, view), Fraction(0)) + w
            if kval is not None:
                acc[view] = acc.get(view, Fraction(0)) + w
    out = {}
    for label, joint, acc in (("alice", joint_a, accept_a), ("bob", joint_b, accept_b)):
        key_lens = {kv[1] for kv, _ in joint if kv is not None}
        m = key_lens.pop() if key_lens else 0
        um = Fraction(1, 1 << m) if m else Fraction(1)
        total = Fraction(0)
        views = {v for _, v in joint}
        for view in views:
            rej_mass = joint.get((None, view), Fraction(0))
            acc_mass = acc.get(view, Fraction(0))
            for kv in range(1 << m):
                p1 = joint.get(((kv, m), view), Fraction(0))
                total += abs(p1 - acc_mass * um)
            # reject row matches exactly in the purified joint
            _ = rej_mass
        out[label] = total / 2
    return out
