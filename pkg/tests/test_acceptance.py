"""Acceptance gate: one test class per criterion, summarised at the end of the run."""

import math
import time

import numpy as np
import pytest
from scipy.stats import chi2

from qmpc import experiments, harness
from qmpc.qotp import PauliKey, qotp_decrypt, qotp_encrypt
from qmpc.qubit import QubitState, from_label
from qmpc.rng import SeededRng

SEED = harness.DEFAULT_SEED

RUNS = {
    1: (harness.replay_toy, {}),
    2: (experiments.ole_correctness, {"seed": SEED}),
    3: (experiments.qotp_identity, {"seed": SEED}),
    4: (harness.attack_curve, {"deltas": (1, 2, 4, 8, 16), "trials": 10_000, "seed": SEED,
                               "models": ("intercept_resend", "entangle_measure")}),
    5: (experiments.guess_rate, {"trials": 10_000, "seed": SEED}),
    6: (experiments.mpsi_oracle, {"instances": 200, "seed": SEED}),
    7: (experiments.intersection_identity, {"seed": SEED}),
    8: (harness.comm_audit, {"moduli": (257, 65537), "seed": SEED}),
    9: (experiments.privacy_smoke, {"trials": 10_000, "seed": SEED}),
}

_cache = {}


def run_criterion(n):
    """First run of a criterion's report, timed and cached for the determinism check."""
    if n not in _cache:
        fn, kwargs = RUNS[n]
        start = time.perf_counter()
        report = fn(**kwargs)
        _cache[n] = (report, time.perf_counter() - start)
    return _cache[n]


def failed(report):
    return [v for v in report.verdicts if not v["passed"]]


def three_sigma(p, n):
    s = math.sqrt(p * (1 - p) / n)
    return p - 3 * s, p + 3 * s


@pytest.mark.criterion(1, "toy example replays amplitude-exactly")
class TestToyExample:
    def test_replay(self):
        report, elapsed = run_criterion(1)
        assert failed(report) == []
        assert report.aggregate["output"] == 3
        assert report.aggregate["first_divergence"] is None
        assert all(row["match"] for row in report.trials)
        assert elapsed < 1.0

    def test_published_values(self):
        got = {row["step"]: row["got"] for row in run_criterion(1)[0].trials}
        assert got["tp.|S'>"] == ["0", "-1", "0", "-1", "0", "0"]
        assert got["tp.|S''>"] == ["0", "+", "-1", "0", "0", "-", "-1", "0", "0", "0"]
        assert got["tp.|d',g'>"] == ["1", "0", "1", "0", "1", "0"]
        assert got["tp.|d'',g''>"] == ["1", "1", "1", "0", "1", "+", "0", "1", "+", "0"]
        assert got["alice.|l'>"] == ["-1", "-1", "1"]
        assert got["alice.|l''>"] == ["+", "-", "-1", "0", "-1", "1"]
        assert got["bob.S"] == [3, 1]
        assert got["bob.l"] == 2
        assert got["bob.V"] == [5, 0]
        assert got["bob.|V'>"] == ["0", "0", "0", "0", "1", "1"]
        assert got["bob.|V''>"] == ["0", "0", "0", "1", "0", "0", "0", "+", "1", "1"]
        assert got["alice.output"] == 3

    def test_flipped_key_bit_diverges(self):
        report = harness.replay_toy(flip_key=("k_b", 1))
        assert not report.passed
        assert report.aggregate["first_divergence"] == {"step": "tp.|S'>", "kind": "qotp"}


@pytest.mark.criterion(2, "honest OLE outputs a*alpha+b exactly")
class TestOleCorrectness:
    def test_outputs(self):
        report, elapsed = run_criterion(2)
        assert failed(report) == []
        per_p = {}
        for row in report.trials:
            assert row["state"] == "Done"
            assert row["output"] == (row["a"] * row["alpha"] + row["b"]) % row["p"]
            per_p[row["p"]] = per_p.get(row["p"], 0) + 1
        assert per_p == {p: 1000 for p in (2, 8, 101, 65521, 2**31 - 1)}
        assert elapsed < 30


@pytest.mark.criterion(3, "pad decryption inverts encryption exactly")
class TestPadIdentity:
    def test_experiment(self):
        report, _ = run_criterion(3)
        assert failed(report) == []
        assert report.aggregate["exact"] == 1000

    def test_against_matrix_oracle(self):
        X = np.array([[0, 1], [1, 0]], dtype=complex)
        Z = np.diag([1, -1]).astype(complex)
        labels = ("0", "1", "+", "-", "-0", "-1", "-+", "--")
        rng = SeededRng(SEED).split("matrix-oracle")
        for _ in range(1000):
            n = 1 + rng.randrange(16)
            msg = tuple(from_label(labels[rng.randrange(8)]) for _ in range(n))
            key = PauliKey(tuple(rng.bits(2 * n)))
            enc = qotp_encrypt(msg, key)
            for i, q in enumerate(msg):
                zb, xb = key.bits[2 * i], key.bits[2 * i + 1]
                U = np.linalg.matrix_power(Z, zb) @ np.linalg.matrix_power(X, xb)
                want = U @ np.array([q.amp0, q.amp1])
                assert QubitState(complex(want[0]), complex(want[1])) == enc[i]
            assert qotp_decrypt(enc, key) == msg


@pytest.mark.criterion(4, "decoy detection follows 1-(3/4)^delta")
@pytest.mark.slow
class TestDetectionLaw:
    def test_curve(self):
        report, elapsed = run_criterion(4)
        assert failed(report) == []
        rows = report.table
        assert {(r["model"], r["delta"]) for r in rows} == {
            (m, d) for m in ("intercept_resend", "entangle_measure") for d in (1, 2, 4, 8, 16)}
        for r in rows:
            assert r["trials"] == 10_000
            p = 1 - 0.75 ** r["delta"]
            lo, hi = three_sigma(p, r["trials"])
            assert lo <= r["aborts"] / r["trials"] <= hi, r
            if r["delta"] == 16:
                assert r["aborts"] / r["trials"] >= 0.98
        assert elapsed < 120


@pytest.mark.criterion(5, "entangle-measure guesses Hadamard decoys half the time")
class TestGuessRate:
    def test_rate(self):
        report, _ = run_criterion(5)
        assert failed(report) == []
        had = next(r for r in report.table if r["basis"] == "X")
        lo, hi = three_sigma(0.5, had["trials"])
        assert had["trials"] == 10_000
        assert lo <= had["hits"] / had["trials"] <= hi


@pytest.mark.criterion(6, "MPSI equals brute-force intersection")
@pytest.mark.slow
class TestMpsiOracle:
    def test_instances(self):
        report, elapsed = run_criterion(6)
        assert failed(report) == []
        assert len(report.trials) == 200
        seen_m, seen_n = set(), set()
        for row in report.trials:
            brute = sorted(v for v in row["sets"][0] if all(v in s for s in row["sets"][1:]))
            assert row["intersection"] == brute
            assert row["sessions"] == (row["m"] - 1) * (3 * row["n"] + 1)
            seen_m.add(row["m"])
            seen_n.add(row["n"])
        assert seen_m == {2, 3, 4, 5} and seen_n == set(range(1, 9))
        assert report.scenario["p"] == 2**31 - 1
        assert elapsed < 300


def naive_mul(a, b, p):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % p
    return out


def naive_add(a, b, p):
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % p for i in range(n)]
    while out and out[-1] == 0:
        out.pop()
    return out


@pytest.mark.criterion(7, "interpolated intersection polynomial matches direct sum")
class TestIntersectionPolynomial:
    def test_coefficients(self):
        report, _ = run_criterion(7)
        assert failed(report) == []
        for row in report.trials:
            p, masks = row["p"], row["masks"]
            assert p <= 101
            total = naive_mul(masks[0]["P"], masks[0]["r_A"], p)
            for j in range(1, len(masks)):
                term = naive_mul(naive_mul(masks[j]["P"], masks[j]["r_A"], p), masks[j - 1]["r"], p)
                total = naive_add(total, term, p)
            assert row["interpolated"] == total


def lstsq_residual(x, y):
    """Max relative residual of the closed-form least-squares line."""
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxx = sum((a - mx) ** 2 for a in x)
    slope = sum((a - mx) * (b - my) for a, b in zip(x, y)) / sxx if sxx else 0.0
    icpt = my - slope * mx
    return max(abs(b - (slope * a + icpt)) / abs(b) for a, b in zip(x, y))


@pytest.mark.criterion(8, "qubit costs are 7L per session and linear in L and sessions")
class TestCommunication:
    def test_per_session(self):
        report, _ = run_criterion(8)
        assert failed(report) == []
        ole = {r["p"]: r for r in report.trials}
        assert ole[257]["payload_qubits"] == 7 * 9
        assert ole[65537]["payload_qubits"] == 7 * 17

    def test_linear_fits(self):
        rows = run_criterion(8)[0].table
        for key in {(r["m"], r["n"]) for r in rows}:
            sel = [r for r in rows if (r["m"], r["n"]) == key]
            assert lstsq_residual([r["L"] for r in sel], [r["payload_qubits"] for r in sel]) < 0.01
        for p in {r["p"] for r in rows}:
            sel = [r for r in rows if r["p"] == p]
            assert lstsq_residual([r["sessions"] for r in sel], [r["payload_qubits"] for r in sel]) < 0.01
            for r in sel:
                assert r["sessions"] == (r["m"] - 1) * (3 * r["n"] + 1)


@pytest.mark.criterion(9, "views of Bob and A_2 are chi-squared uniform")
@pytest.mark.slow
class TestPrivacy:
    def test_uniformity(self):
        report, _ = run_criterion(9)
        assert failed(report) == []
        views = {r["view"] for r in report.table}
        assert {"bob_l", "a2_point_1", "a2_point_2", "a2_point_3", "a2_point_4"} <= views
        assert report.scenario["modulus"] == 8 and report.scenario["u_degree"] == "secure"
        for r in report.table:
            counts = r["counts"]
            assert sum(counts) == 10_000
            e = sum(counts) / len(counts)
            stat = sum((c - e) ** 2 / e for c in counts)
            assert math.isclose(chi2.sf(stat, len(counts) - 1), r["p_value"], rel_tol=1e-9)
            assert r["p_value"] > 1e-3, r["view"]


@pytest.mark.criterion(10, "reruns with the same seed give byte-identical reports")
@pytest.mark.slow
class TestDeterminism:
    @pytest.mark.parametrize("n", sorted(RUNS))
    def test_rerun(self, n, tmp_path):
        first, _ = run_criterion(n)
        fn, kwargs = RUNS[n]
        second = fn(**kwargs)
        assert second.to_json() == first.to_json()
        a = first.write(tmp_path / "a", "r")
        b = second.write(tmp_path / "b", "r")
        assert [p.read_bytes() for p in a] == [p.read_bytes() for p in b]
