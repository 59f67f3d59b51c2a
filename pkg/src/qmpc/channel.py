"""
Quantum channel with decoy photons and eavesdropper models.

The sender hides ``delta`` decoy photons, each drawn uniformly from
{|0>, |1>, |+>, |->}, at uniformly random positions in the outgoing sequence
and keeps a private :class:`DecoyRecord`. After the receiver has the photons,
the record is disclosed over an authenticated classical channel and the
receiver measures each decoy in its preparation basis. Any adversary that
disturbs a decoy shows up as a mismatch.

Adversaries act on every photon of a message, since they cannot tell decoys
from payload:

* intercept-resend measures each photon in a random basis and forwards the
  collapsed state; each decoy is caught with probability 1/4;
* entangle-measure couples an ancilla through U_f|x>|y> = |x>|y + f(x)>. Its
  effect on the forwarded photon is a computational-basis measurement, so
  |0>, |1> pass untouched and |+>, |-> become an even mixture, again caught
  with probability 1/4 per decoy.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .errors import SessionAborted
from .qubit import Basis, QubitState, decoy_state, measure
from .transcript import Transcript


class AdversaryModel(enum.Enum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept_resend"
    ENTANGLE_MEASURE = "entangle_measure"


@dataclass(frozen=True)
class DecoyRecord:
    positions: tuple[int, ...] = ()
    states: tuple[tuple[Basis, int], ...] = ()

    def __post_init__(self):
        if len(self.positions) != len(self.states):
            raise ValueError("one state per decoy position")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("decoy positions must be strictly increasing")
        if self.positions and self.positions[0] < 0:
            raise ValueError("negative decoy position")

    @property
    def delta(self) -> int:
        return len(self.positions)

    @classmethod
    def from_labels(cls, positions, labels) -> DecoyRecord:
        """Build from 0-based positions and state labels '0', '1', '+', '-'."""
        table = {"0": (Basis.COMPUTATIONAL, 0), "1": (Basis.COMPUTATIONAL, 1),
                 "+": (Basis.HADAMARD, 0), "-": (Basis.HADAMARD, 1)}
        return cls(tuple(positions), tuple(table[s] for s in labels))


@dataclass(frozen=True)
class QuantumMessage:
    qubits: tuple[QubitState, ...]

    def __len__(self):
        return len(self.qubits)


def disclosure_bits(message_len: int, delta: int) -> int:
    """Classical cost of revealing decoy positions and states."""
    return delta * (max(1, (message_len - 1).bit_length()) + 2)


def insert_decoys(payload: Sequence[QubitState], delta: int, rng,
                  plan: DecoyRecord | None = None) -> tuple[QuantumMessage, DecoyRecord]:
    """Interleave decoys into ``payload``; ``plan`` pins positions and states."""
    if plan is None:
        if delta < 0:
            raise ValueError("delta must be >= 0")
        total = len(payload) + delta
        positions = tuple(sorted(rng.sample(range(total), delta)))
        states = []
        for _ in range(delta):
            basis = Basis.HADAMARD if rng.bit() else Basis.COMPUTATIONAL
            states.append((basis, rng.bit()))
        plan = DecoyRecord(positions, tuple(states))
    total = len(payload) + plan.delta
    if plan.positions and plan.positions[-1] >= total:
        raise ValueError("decoy position outside the message")

    out = []
    it = iter(payload)
    slots = dict(zip(plan.positions, plan.states))
    for k in range(total):
        if k in slots:
            out.append(decoy_state(*slots[k]))
        else:
            out.append(next(it))
    return QuantumMessage(tuple(out)), plan


def intercept_resend(q: QubitState, rng) -> QubitState:
    basis = Basis.HADAMARD if rng.bit() else Basis.COMPUTATIONAL
    return measure(q, basis, rng)[1]


def entangle_measure(q: QubitState, rng) -> tuple[int, QubitState]:
    """Attach an ancilla via a CNOT-type oracle and read it.

    Returns the ancilla reading and the photon as forwarded.
    """
    return measure(q, Basis.COMPUTATIONAL, rng)


def guess_decoy(basis: Basis, ancilla: int) -> tuple[Basis, int]:
    """Best guess of a decoy's state from the ancilla, given its basis.

    In the computational basis the ancilla copies the bit. In the Hadamard
    basis it is independent of the sign, so any rule is right half the time.
    """
    return basis, ancilla


def transmit(msg: QuantumMessage, adv: AdversaryModel, rng) -> QuantumMessage:
    if adv is AdversaryModel.NONE:
        return msg
    if adv is AdversaryModel.INTERCEPT_RESEND:
        return QuantumMessage(tuple(intercept_resend(q, rng) for q in msg.qubits))
    if adv is AdversaryModel.ENTANGLE_MEASURE:
        return QuantumMessage(tuple(entangle_measure(q, rng)[1] for q in msg.qubits))
    raise ValueError(f"unknown adversary {adv!r}")


def decoy_error_rate(msg: QuantumMessage, rec: DecoyRecord, rng) -> float:
    if rec.positions and rec.positions[-1] >= len(msg):
        raise ValueError("decoy record does not match the message")
    if not rec.delta:
        return 0.0
    errors = 0
    for pos, (basis, bit) in zip(rec.positions, rec.states):
        seen, _ = measure(msg.qubits[pos], basis, rng)
        errors += seen != bit
    return errors / rec.delta


def strip_decoys(msg: QuantumMessage, rec: DecoyRecord) -> tuple[QubitState, ...]:
    drop = set(rec.positions)
    return tuple(q for k, q in enumerate(msg.qubits) if k not in drop)


def verify_and_strip(msg: QuantumMessage, rec: DecoyRecord, threshold: float, rng,
                     stage: str = "decoy check") -> tuple[tuple[QubitState, ...], float]:
    """Check decoys, then drop them.

    Returns the payload in original order and the observed error rate.
    Raises :class:`SessionAborted` when the rate exceeds ``threshold``.
    With ``delta == 0`` nothing is checked and the rate is 0.
    """
    rate = decoy_error_rate(msg, rec, rng)
    if rate > threshold:
        raise SessionAborted(stage, rate)
    return strip_decoys(msg, rec), rate


def checked_receive(msg: QuantumMessage, rec: DecoyRecord, edge: str, what: str,
                    threshold: float, rng, transcript: Transcript | None = None):
    """Receiver side of one edge: disclosure, decoy check, strip.

    Logs the classical disclosure and the check verdict when a transcript is
    given, then returns the bare payload or raises :class:`SessionAborted`.
    """
    stage = f"{edge}:{what}"
    if transcript is not None:
        transcript.classical(edge, f"decoys({what})", disclosure_bits(len(msg), rec.delta))
    try:
        payload, rate = verify_and_strip(msg, rec, threshold, rng, stage)
    except SessionAborted as exc:
        if transcript is not None:
            transcript.verdict("decoy_check", edge=edge, message=what,
                               error_rate=exc.error_rate, passed=False)
        raise
    if transcript is not None:
        transcript.verdict("decoy_check", edge=edge, message=what, error_rate=rate, passed=True)
    return payload
