import cmath
import math

import pytest
from hypothesis import given, strategies as st

from qmpc.errors import ProtocolError
from qmpc.qubit import (MINUS, ONE, PLUS, ZERO, Basis, QubitState, apply_h, apply_pauli_x,
                        apply_pauli_z, decode_bits, encode_value, from_label, label, measure,
                        same_up_to_phase)
from qmpc.ring import Modulus
from qmpc.rng import SeededRng

CANONICAL = [from_label(s) for s in ("0", "1", "+", "-", "-0", "-1", "-+", "--")]


@st.composite
def states(draw):
    theta = draw(st.floats(0, math.pi))
    phi = draw(st.floats(0, 2 * math.pi))
    g = draw(st.floats(0, 2 * math.pi))
    return QubitState(cmath.exp(1j * g) * math.cos(theta / 2),
                      cmath.exp(1j * (g + phi)) * math.sin(theta / 2))


class TestGates:
    def test_x_on_one(self):
        assert apply_pauli_x(ONE) == ZERO

    def test_z_on_one_flips_sign(self):
        assert apply_pauli_z(ONE) == QubitState(0j, -1 + 0j)
        assert label(apply_pauli_z(ONE)) == "-1"

    def test_z_on_plus(self):
        assert apply_pauli_z(PLUS) == MINUS

    def test_h_maps_basis(self):
        assert apply_h(ZERO) == PLUS
        assert apply_h(ONE) == MINUS

    @pytest.mark.parametrize("q", CANONICAL)
    def test_involutions_exact_on_canonical_states(self, q):
        assert apply_pauli_x(apply_pauli_x(q)) == q
        assert apply_pauli_z(apply_pauli_z(q)) == q
        assert apply_h(apply_h(q)) == q

    @given(states())
    def test_unitarity(self, q):
        for gate in (apply_pauli_x, apply_pauli_z, apply_h):
            assert abs(gate(q).norm() - 1) < 1e-12

    @given(states())
    def test_involutions_random(self, q):
        for gate in (apply_pauli_x, apply_pauli_z, apply_h):
            # H snaps components within 1e-12 of canonical values, so allow that much drift
            r = gate(gate(q))
            assert abs(r.amp0 - q.amp0) < 1e-9 and abs(r.amp1 - q.amp1) < 1e-9

    def test_checked_constructor(self):
        with pytest.raises(ValueError):
            QubitState.of(1, 1)
        assert QubitState.of(0, 1) == ONE


class TestMeasure:
    def test_one_in_computational(self):
        rng = SeededRng(0)
        assert all(measure(ONE, Basis.COMPUTATIONAL, rng) == (1, ONE) for _ in range(100))

    def test_plus_in_hadamard(self):
        rng = SeededRng(0)
        assert all(measure(PLUS, Basis.HADAMARD, rng) == (0, PLUS) for _ in range(100))

    def test_signed_states_measure_deterministically(self):
        rng = SeededRng(0)
        assert measure(from_label("-1"), Basis.COMPUTATIONAL, rng)[0] == 1
        assert measure(from_label("--"), Basis.HADAMARD, rng)[0] == 1

    def test_born_rule_plus_computational(self):
        rng = SeededRng(11)
        n = 10_000
        zeros = sum(measure(PLUS, Basis.COMPUTATIONAL, rng)[0] == 0 for _ in range(n))
        assert abs(zeros / n - 0.5) <= 3 * math.sqrt(0.25 / n)

    def test_born_rule_general(self):
        theta = 1.1
        q = QubitState(math.cos(theta / 2) + 0j, math.sin(theta / 2) + 0j)
        p0 = math.cos(theta / 2) ** 2
        rng = SeededRng(12)
        n = 10_000
        zeros = sum(measure(q, Basis.COMPUTATIONAL, rng)[0] == 0 for _ in range(n))
        assert abs(zeros / n - p0) <= 3 * math.sqrt(p0 * (1 - p0) / n)

    def test_collapse(self):
        rng = SeededRng(3)
        for _ in range(50):
            bit, post = measure(PLUS, Basis.COMPUTATIONAL, rng)
            assert post == (ONE if bit else ZERO)

    def test_replay(self):
        a = [measure(PLUS, Basis.COMPUTATIONAL, r)[0] for r in [SeededRng(5)] for _ in range(200)]
        b = [measure(PLUS, Basis.COMPUTATIONAL, r)[0] for r in [SeededRng(5)] for _ in range(200)]
        assert a == b


def test_phase_equality():
    assert from_label("-1") != ONE
    assert same_up_to_phase(from_label("-1"), ONE)
    assert not same_up_to_phase(ZERO, ONE)
    assert not same_up_to_phase(PLUS, ZERO)


class TestEncoding:
    def test_toy_value(self):
        assert encode_value(2, 3) == (ZERO, ONE, ZERO)

    def test_zero(self):
        assert encode_value(0, 3) == (ZERO, ZERO, ZERO)

    def test_round_trip(self):
        m = Modulus(8)
        rng = SeededRng(0)
        for v in range(8):
            bits = [measure(q, Basis.COMPUTATIONAL, rng)[0] for q in encode_value(v, 3)]
            assert decode_bits(bits, m).value == v

    def test_too_wide(self):
        with pytest.raises(ValueError):
            encode_value(8, 3)

    def test_decoded_value_out_of_range(self):
        with pytest.raises(ProtocolError):
            decode_bits([1, 1, 1], Modulus(5))
