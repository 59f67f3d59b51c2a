"""
Three-party oblivious linear evaluation over Z_p with a helper (TP).

Bob holds f(x) = a*x + b, Alice holds alpha, and Alice ends up with f(alpha).

* TP picks a random line S(x) = a1*x + b1 and a random d, sets g = S(d),
  sends S to Bob (pad key K_B) and (d, g) to Alice (pad key K_A).
* Alice sends l = alpha - d to Bob (pad key K_AB).
* Bob sends back V(x) = f(x + l) + S(x) (pad key K_AB).
* Alice outputs V(d) - g = f(alpha).

Every value travels as ceil(log2 p) basis-state photons, big-endian, padded
with the quantum one-time pad and guarded by decoys. A line is sent as
(slope, intercept). K_A, K_B and K_AB each cover 2L qubits; |l> uses the
leading 2L bits of K_AB.

The phase functions take an optional ``trace`` dict that receives every
intermediate photon sequence and value; the toy-example replay reads it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .channel import (AdversaryModel, DecoyRecord, QuantumMessage, checked_receive,
                      insert_decoys, transmit)
from .errors import ConfigurationError, ProtocolError, SessionAborted
from .qotp import PauliKey, keygen, qotp_decrypt, qotp_encrypt
from .qubit import decode_bits, encode_value, measure_all
from .ring import Modulus, Polynomial, ZpElement, poly_eval
from .transcript import Transcript

TP_BOB = "TP->Bob"
TP_ALICE = "TP->Alice"
ALICE_BOB = "Alice->Bob"
BOB_ALICE = "Bob->Alice"
EDGES = (TP_BOB, TP_ALICE, ALICE_BOB, BOB_ALICE)


class SessionState(enum.Enum):
    INIT = "Init"
    AWAIT_TP = "AwaitTP"
    AWAIT_L = "AwaitL"
    AWAIT_V = "AwaitV"
    DONE = "Done"
    ABORTED = "Aborted"


@dataclass(frozen=True)
class OleFunction:
    a: ZpElement
    b: ZpElement

    def __post_init__(self):
        if self.a.modulus.p != self.b.modulus.p:
            raise ConfigurationError("f coefficients in different rings")

    @classmethod
    def of(cls, a: int, b: int, m: Modulus) -> OleFunction:
        return cls(m.element(a), m.element(b))

    @property
    def modulus(self) -> Modulus:
        return self.a.modulus

    def __call__(self, x) -> ZpElement:
        return self.a * x + self.b

    def as_polynomial(self) -> Polynomial:
        return Polynomial.linear(self.a.value, self.b.value, self.modulus)


@dataclass(frozen=True)
class OleTpSecrets:
    S: Polynomial
    d: ZpElement
    g: ZpElement

    def __post_init__(self):
        if self.S.degree > 1:
            raise ValueError("S must be linear")
        if poly_eval(self.S, self.d) != self.g:
            raise ValueError("g must equal S(d)")


@dataclass(frozen=True)
class OleSessionConfig:
    modulus: Modulus
    k_a: PauliKey
    k_b: PauliKey
    k_ab: PauliKey
    delta: int = 16
    threshold: float = 0.0

    def __post_init__(self):
        need = 2 * self.width
        for name in ("k_a", "k_b", "k_ab"):
            if getattr(self, name).n != need:
                raise ConfigurationError(f"{name} must cover {need} qubits")
        if self.delta < 0:
            raise ConfigurationError("delta must be >= 0")
        if not 0 <= self.threshold <= 1:
            raise ConfigurationError("threshold must lie in [0, 1]")

    @property
    def width(self) -> int:
        return self.modulus.width

    @classmethod
    def fresh(cls, modulus: Modulus, rng, delta: int = 16, threshold: float = 0.0) -> OleSessionConfig:
        """New session with freshly distributed pad keys."""
        n = 2 * modulus.width
        return cls(modulus, keygen(n, rng), keygen(n, rng), keygen(n, rng), delta, threshold)


@dataclass
class Sent:
    """A photon sequence as it leaves the sender, with the sender's record."""
    msg: QuantumMessage
    record: DecoyRecord


@dataclass
class TpOutput:
    to_bob: Sent
    to_alice: Sent
    secrets: OleTpSecrets


@dataclass
class AliceState:
    d: ZpElement
    g: ZpElement
    l: ZpElement
    to_bob: Sent


@dataclass
class BobView:
    S: Polynomial
    l: ZpElement
    V: Polynomial
    to_alice: Sent


@dataclass
class OleTranscript:
    log: Transcript
    state: SessionState = SessionState.INIT
    abort_stage: str | None = None
    abort_reason: str | None = None
    output: ZpElement | None = None
    views: dict = field(default_factory=dict)

    @property
    def aborted(self) -> bool:
        return self.state is SessionState.ABORTED

    @property
    def completed(self) -> bool:
        return self.state is SessionState.DONE

    @property
    def counters(self):
        return self.log.counters

    @property
    def events(self):
        return self.log.events


def _encode_line(P: Polynomial, width: int):
    return encode_value(P.coeff(1), width) + encode_value(P.coeff(0), width)


def _decode_values(qubits, count: int, m: Modulus, rng) -> list[ZpElement]:
    bits = measure_all(qubits, rng)
    w = m.width
    return [decode_bits(bits[k * w:(k + 1) * w], m) for k in range(count)]


def _note(trace, key, value):
    if trace is not None:
        trace[key] = value


def tp_initialize(cfg: OleSessionConfig, rng, S: Polynomial | None = None, d: ZpElement | None = None,
                  plans: dict | None = None, trace: dict | None = None) -> TpOutput:
    """TP's initialization. ``S``, ``d`` and ``plans`` pin choices for test vectors."""
    m, w = cfg.modulus, cfg.width
    plans = plans or {}
    if S is None:
        S = Polynomial.linear(rng.randrange(m.p), rng.randrange(m.p), m)
    if d is None:
        d = m.element(rng.randrange(m.p))
    secrets = OleTpSecrets(S, d, poly_eval(S, d))

    s_plain = _encode_line(S, w)
    s_enc = qotp_encrypt(s_plain, cfg.k_b)
    s_msg, s_rec = insert_decoys(s_enc, cfg.delta, rng, plans.get("S"))
    _note(trace, "tp.|S>", s_plain)
    _note(trace, "tp.|S'>", s_enc)
    _note(trace, "tp.|S''>", s_msg.qubits)

    dg_plain = encode_value(secrets.d, w) + encode_value(secrets.g, w)
    dg_enc = qotp_encrypt(dg_plain, cfg.k_a)
    dg_msg, dg_rec = insert_decoys(dg_enc, cfg.delta, rng, plans.get("dg"))
    _note(trace, "tp.g", secrets.g.value)
    _note(trace, "tp.|d,g>", dg_plain)
    _note(trace, "tp.|d',g'>", dg_enc)
    _note(trace, "tp.|d'',g''>", dg_msg.qubits)
    return TpOutput(Sent(s_msg, s_rec), Sent(dg_msg, dg_rec), secrets)


def alice_phase1(dg: Sent, alpha: ZpElement, cfg: OleSessionConfig, rng,
                 transcript: Transcript | None = None, plan: DecoyRecord | None = None,
                 trace: dict | None = None) -> AliceState:
    """Check TP's photons, learn (d, g), and send l = alpha - d to Bob."""
    m, w = cfg.modulus, cfg.width
    if alpha.modulus.p != m.p:
        raise ConfigurationError("alpha is not in the session ring")
    stripped = checked_receive(dg.msg, dg.record, TP_ALICE, "d'',g''", cfg.threshold, rng, transcript)
    plain = qotp_decrypt(stripped, cfg.k_a)
    d, g = _decode_values(plain, 2, m, rng)
    l = alpha - d
    l_plain = encode_value(l, w)
    l_enc = qotp_encrypt(l_plain, cfg.k_ab.prefix(w))
    l_msg, l_rec = insert_decoys(l_enc, cfg.delta, rng, plan)
    _note(trace, "alice.|d',g'>", stripped)
    _note(trace, "alice.|d,g>", plain)
    _note(trace, "alice.d", d.value)
    _note(trace, "alice.g", g.value)
    _note(trace, "alice.l", l.value)
    _note(trace, "alice.|l'>", l_enc)
    _note(trace, "alice.|l''>", l_msg.qubits)
    return AliceState(d, g, l, Sent(l_msg, l_rec))


def bob_phase(s: Sent, l_sent: Sent, f: OleFunction, cfg: OleSessionConfig, rng,
              transcript: Transcript | None = None, plan: DecoyRecord | None = None,
              trace: dict | None = None) -> BobView:
    """Check both incoming sequences (TP's first), recover S and l, send V."""
    m, w = cfg.modulus, cfg.width
    if f.modulus.p != m.p:
        raise ConfigurationError("f is not in the session ring")
    s_stripped = checked_receive(s.msg, s.record, TP_BOB, "S''", cfg.threshold, rng, transcript)
    l_stripped = checked_receive(l_sent.msg, l_sent.record, ALICE_BOB, "l''", cfg.threshold, rng,
                                 transcript)
    s_plain = qotp_decrypt(s_stripped, cfg.k_b)
    a1, b1 = _decode_values(s_plain, 2, m, rng)
    l_plain = qotp_decrypt(l_stripped, cfg.k_ab.prefix(w))
    (l,) = _decode_values(l_plain, 1, m, rng)

    # V(x) = f(x + l) + S(x) = (a + a1) x + (a*l + b + b1)
    V = Polynomial.linear((f.a + a1).value, (f.a * l + f.b + b1).value, m)
    v_plain = _encode_line(V, w)
    v_enc = qotp_encrypt(v_plain, cfg.k_ab)
    v_msg, v_rec = insert_decoys(v_enc, cfg.delta, rng, plan)
    S = Polynomial.linear(a1.value, b1.value, m)
    _note(trace, "bob.|S'>", s_stripped)
    _note(trace, "bob.|S>", s_plain)
    _note(trace, "bob.S", (a1.value, b1.value))
    _note(trace, "bob.|l'>", l_stripped)
    _note(trace, "bob.|l>", l_plain)
    _note(trace, "bob.l", l.value)
    _note(trace, "bob.V", (V.coeff(1), V.coeff(0)))
    _note(trace, "bob.|V>", v_plain)
    _note(trace, "bob.|V'>", v_enc)
    _note(trace, "bob.|V''>", v_msg.qubits)
    return BobView(S, l, V, Sent(v_msg, v_rec))


def alice_receive_v(v: Sent, cfg: OleSessionConfig, rng, transcript: Transcript | None = None,
                    trace: dict | None = None) -> Polynomial:
    m = cfg.modulus
    stripped = checked_receive(v.msg, v.record, BOB_ALICE, "V''", cfg.threshold, rng, transcript)
    plain = qotp_decrypt(stripped, cfg.k_ab)
    slope, intercept = _decode_values(plain, 2, m, rng)
    _note(trace, "alice.|V'>", stripped)
    _note(trace, "alice.|V>", plain)
    _note(trace, "alice.V", (slope.value, intercept.value))
    return Polynomial.linear(slope.value, intercept.value, m)


def alice_phase2(v: Sent, state: AliceState, cfg: OleSessionConfig, rng,
                 transcript: Transcript | None = None, trace: dict | None = None) -> ZpElement:
    """Output V(d) - g, which equals f(alpha)."""
    V = alice_receive_v(v, cfg, rng, transcript, trace)
    out = poly_eval(V, state.d) - state.g
    _note(trace, "alice.output", out.value)
    return out


def _deliver(sent: Sent, edge: str, what: str, adversaries, adv_rng, log: Transcript) -> Sent:
    log.quantum(edge, what, len(sent.msg), sent.record.delta)
    adv = AdversaryModel(adversaries.get(edge, AdversaryModel.NONE))
    return Sent(transmit(sent.msg, adv, adv_rng.split(edge)), sent.record)


def run_ole(f: OleFunction, alpha: ZpElement, cfg: OleSessionConfig, rng,
            adversaries: dict | None = None, session: str = "ole",
            fixture: dict | None = None, trace: dict | None = None) -> OleTranscript:
    """Run one complete session and return its transcript.

    ``adversaries`` maps edge names (see ``EDGES``) to an AdversaryModel.
    ``fixture`` may pin TP's S and d and the decoy plan of each message
    (keys "S", "d", "plans"); used for test vectors only.
    """
    adversaries = adversaries or {}
    for edge in adversaries:
        if edge not in EDGES:
            raise ConfigurationError(f"unknown edge {edge!r}")
    if f.modulus.p != cfg.modulus.p or alpha.modulus.p != cfg.modulus.p:
        raise ConfigurationError("inputs are not in the session ring")
    fixture = fixture or {}
    plans = fixture.get("plans", {})
    tp_rng, alice_rng, bob_rng, adv_rng = (rng.split(k) for k in ("tp", "alice", "bob", "adversary"))

    log = Transcript(session)
    out = OleTranscript(log)
    out.state = SessionState.AWAIT_TP
    try:
        tp = tp_initialize(cfg, tp_rng, fixture.get("S"), fixture.get("d"), plans, trace)
        to_bob = _deliver(tp.to_bob, TP_BOB, "S''", adversaries, adv_rng, log)
        to_alice = _deliver(tp.to_alice, TP_ALICE, "d'',g''", adversaries, adv_rng, log)

        alice = alice_phase1(to_alice, alpha, cfg, alice_rng, log, plans.get("l"), trace)
        out.state = SessionState.AWAIT_L
        l_in = _deliver(alice.to_bob, ALICE_BOB, "l''", adversaries, adv_rng, log)

        bob = bob_phase(to_bob, l_in, f, cfg, bob_rng, log, plans.get("V"), trace)
        out.views["bob_l"] = bob.l.value
        out.state = SessionState.AWAIT_V
        v_in = _deliver(bob.to_alice, BOB_ALICE, "V''", adversaries, adv_rng, log)

        V = alice_receive_v(v_in, cfg, alice_rng, log, trace)
        out.views["alice_V"] = (V.coeff(1), V.coeff(0))
        out.output = poly_eval(V, alice.d) - alice.g
        _note(trace, "alice.output", out.output.value)
    except SessionAborted as exc:
        out.state = SessionState.ABORTED
        out.abort_stage, out.abort_reason = exc.stage, "eavesdropping"
        log.verdict("abort", stage=exc.stage, reason="eavesdropping", error_rate=exc.error_rate)
        return out
    except ProtocolError as exc:
        out.state = SessionState.ABORTED
        out.abort_stage, out.abort_reason = str(exc), "integrity"
        log.verdict("abort", stage=str(exc), reason="integrity")
        return out
    out.state = SessionState.DONE
    log.verdict("output", value=out.output.value)
    return out
