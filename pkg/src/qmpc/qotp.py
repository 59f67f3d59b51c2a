"""Quantum one-time pad over Pauli X and Z.

Qubit i (1-based) is encrypted as Z^{k[2i-1]} X^{k[2i]}: X first, then Z.
Decryption applies Z first, then X, which cancels exactly (XZZX = I), so a
round trip restores the original amplitudes including their sign.

Key distribution is an ideal oracle here: ``keygen`` returns one uniform key
that both endpoints are assumed to hold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .qubit import QubitState


@dataclass(frozen=True)
class PauliKey:
    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) % 2 or not self.bits:
            raise ValueError("a Pauli key holds 2 bits per qubit")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("key bits must be 0 or 1")

    @classmethod
    def from_string(cls, s: str) -> PauliKey:
        return cls(tuple(int(c) for c in s))

    @property
    def n(self) -> int:
        return len(self.bits) // 2

    def prefix(self, n_qubits: int) -> PauliKey:
        """The leading 2 * n_qubits bits, for messages shorter than the key."""
        if not 1 <= n_qubits <= self.n:
            raise ValueError(f"key covers {self.n} qubits, asked for {n_qubits}")
        return PauliKey(self.bits[: 2 * n_qubits])

    def flip(self, index: int) -> PauliKey:
        b = list(self.bits)
        b[index] ^= 1
        return PauliKey(tuple(b))

    def __str__(self):
        return "".join(map(str, self.bits))


def keygen(n: int, rng) -> PauliKey:
    if n < 1:
        raise ValueError("key length must cover at least one qubit")
    return PauliKey(tuple(rng.bits(2 * n)))


def _check(qubits: Sequence, key: PauliKey):
    if len(key.bits) != 2 * len(qubits):
        raise ValueError(f"key has {len(key.bits)} bits for {len(qubits)} qubits")


def qotp_encrypt(qubits: Sequence[QubitState], key: PauliKey) -> tuple[QubitState, ...]:
    _check(qubits, key)
    out = []
    bits = key.bits
    for i, (a0, a1) in enumerate(qubits):
        if bits[2 * i + 1]:
            a0, a1 = a1, a0
        if bits[2 * i]:
            a1 = -a1
        out.append(QubitState(a0, a1))
    return tuple(out)


def qotp_decrypt(qubits: Sequence[QubitState], key: PauliKey) -> tuple[QubitState, ...]:
    _check(qubits, key)
    out = []
    bits = key.bits
    for i, (a0, a1) in enumerate(qubits):
        if bits[2 * i]:
            a1 = -a1
        if bits[2 * i + 1]:
            a0, a1 = a1, a0
        out.append(QubitState(a0, a1))
    return tuple(out)
