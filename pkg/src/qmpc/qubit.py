"""
Single-qubit pure-state simulator.

Only product states are ever needed: each transmitted photon is one
``QubitState``. Amplitudes keep their sign, so -|1> and |1> differ under
``==`` but agree under :func:`same_up_to_phase`.
"""

from __future__ import annotations

import enum
import math
from typing import Iterable, NamedTuple, Sequence

from .errors import ProtocolError
from .ring import Modulus, ZpElement

SQRT_HALF = 1 / math.sqrt(2)
_NORM_TOL = 1e-12
_SNAP = (0.0, 1.0, -1.0, SQRT_HALF, -SQRT_HALF)


class Basis(enum.Enum):
    COMPUTATIONAL = "Z"
    HADAMARD = "X"


class QubitState(NamedTuple):
    amp0: complex
    amp1: complex

    @classmethod
    def of(cls, amp0, amp1) -> QubitState:
        """Checked constructor: rejects states that are not normalized."""
        a0, a1 = complex(amp0), complex(amp1)
        norm = abs(a0) ** 2 + abs(a1) ** 2
        if abs(norm - 1) > _NORM_TOL:
            raise ValueError(f"state not normalized: |a0|^2+|a1|^2 = {norm}")
        return cls(a0, a1)

    def norm(self) -> float:
        return abs(self.amp0) ** 2 + abs(self.amp1) ** 2

    def __repr__(self):
        return f"QubitState({label(self)})"


ZERO = QubitState(1 + 0j, 0j)
ONE = QubitState(0j, 1 + 0j)
PLUS = QubitState(SQRT_HALF + 0j, SQRT_HALF + 0j)
MINUS = QubitState(SQRT_HALF + 0j, -SQRT_HALF + 0j)

_LABELS = {
    "0": ZERO, "1": ONE, "+": PLUS, "-": MINUS,
    "-0": QubitState(-1 + 0j, 0j), "-1": QubitState(0j, -1 + 0j),
    "-+": QubitState(-SQRT_HALF + 0j, -SQRT_HALF + 0j),
    "--": QubitState(-SQRT_HALF + 0j, SQRT_HALF + 0j),
}
_BY_STATE = {v: k for k, v in _LABELS.items()}


def from_label(s: str) -> QubitState:
    """'0', '1', '+', '-' with an optional leading '-' for a global sign."""
    try:
        return _LABELS[s]
    except KeyError:
        raise ValueError(f"unknown state label {s!r}") from None


def label(q: QubitState) -> str:
    key = QubitState(complex(q.amp0) + 0j, complex(q.amp1) + 0j)
    if key in _BY_STATE:
        return _BY_STATE[key]
    return f"({q.amp0:.6g})|0>+({q.amp1:.6g})|1>"


def decoy_state(basis: Basis, bit: int) -> QubitState:
    if basis is Basis.COMPUTATIONAL:
        return ONE if bit else ZERO
    return MINUS if bit else PLUS


def apply_pauli_x(q: QubitState) -> QubitState:
    return QubitState(q.amp1, q.amp0)


def apply_pauli_z(q: QubitState) -> QubitState:
    return QubitState(q.amp0, -q.amp1)


def _snap(z: complex) -> complex:
    re, im = z.real, z.imag
    for c in _SNAP:
        if abs(re - c) < _NORM_TOL:
            re = c
            break
    if abs(im) < _NORM_TOL:
        im = 0.0
    return complex(re, im)


def apply_h(q: QubitState) -> QubitState:
    a0, a1 = q
    # snapping keeps H*H exact on the +-|0>,|1>,|+>,|-> set
    return QubitState(_snap((a0 + a1) * SQRT_HALF), _snap((a0 - a1) * SQRT_HALF))


def prob_zero(q: QubitState, basis: Basis) -> float:
    """Born probability of outcome 0 (|0> or |+>)."""
    if basis is Basis.COMPUTATIONAL:
        return abs(q.amp0) ** 2
    return abs((q.amp0 + q.amp1) * SQRT_HALF) ** 2


def measure(q: QubitState, basis: Basis, rng) -> tuple[int, QubitState]:
    """Projective measurement; returns the outcome bit and the collapsed state."""
    p0 = prob_zero(q, basis)
    if p0 >= 1 - _NORM_TOL:
        bit = 0
    elif p0 <= _NORM_TOL:
        bit = 1
    else:
        bit = 0 if rng.random() < p0 else 1
    return bit, decoy_state(basis, bit)


def measure_all(qubits: Iterable[QubitState], rng, basis: Basis = Basis.COMPUTATIONAL) -> list[int]:
    return [measure(q, basis, rng)[0] for q in qubits]


def same_up_to_phase(a: QubitState, b: QubitState, tol: float = 1e-12) -> bool:
    overlap = a.amp0.conjugate() * b.amp0 + a.amp1.conjugate() * b.amp1
    return abs(abs(overlap) - 1) < tol


def encode_value(v, width: int) -> tuple[QubitState, ...]:
    """Big-endian basis-state encoding of an integer into ``width`` qubits."""
    value = v.value if isinstance(v, ZpElement) else int(v)
    if value < 0 or value >= 1 << width:
        raise ValueError(f"{value} does not fit in {width} qubits")
    return tuple(ONE if (value >> (width - 1 - i)) & 1 else ZERO for i in range(width))


def bits_to_int(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | b
    return v


def decode_bits(bits: Sequence[int], m: Modulus) -> ZpElement:
    v = bits_to_int(bits)
    if v >= m.p:
        raise ProtocolError(f"decoded value {v} is not a residue mod {m.p}")
    return ZpElement(v, m)
