"""
Batch experiments that back the acceptance suite.

Each function returns a :class:`~qmpc.harness.Report` whose bytes depend only
on its arguments, so a rerun with the same seed can be compared verbatim.
"""

from __future__ import annotations

from collections import Counter

from . import stats
from .channel import entangle_measure, guess_decoy
from .harness import DEFAULT_SEED, Report, _random_sets
from .mpsi import MpsiPublicParams, PartyInput, run_mpsi
from .ole import OleFunction, OleSessionConfig, run_ole
from .qotp import keygen, qotp_decrypt, qotp_encrypt
from .qubit import Basis, decoy_state, from_label
from .ring import Modulus, poly_add, poly_mul
from .rng import SeededRng

OLE_MODULI = (2, 8, 101, 65521, 2**31 - 1)
SIGNED_LABELS = ("0", "1", "+", "-", "-0", "-1", "-+", "--")


def ole_correctness(moduli=OLE_MODULI, sessions: int = 1000, seed: int = DEFAULT_SEED) -> Report:
    """Honest sessions with random f and alpha; every output must equal a*alpha + b."""
    report = Report("ole-correctness", seed, {"moduli": list(moduli), "sessions": sessions})
    base = SeededRng(seed)
    for p in moduli:
        m = Modulus.of(p)
        wrong = aborts = 0
        for t in range(sessions):
            rng = base.split("ole", p, t)
            a, b, alpha = rng.randrange(p), rng.randrange(p), rng.randrange(p)
            cfg = OleSessionConfig.fresh(m, rng.split("keys"))
            res = run_ole(OleFunction.of(a, b, m), m.element(alpha), cfg, rng.split("session"))
            out = res.output.value if res.completed else None
            aborts += not res.completed
            wrong += res.completed and out != (a * alpha + b) % p
            report.trials.append({"p": p, "a": a, "b": b, "alpha": alpha, "output": out,
                                  "state": res.state.value})
        report.verdict(f"p={p}:exact", wrong == 0 and aborts == 0, sessions=sessions,
                       wrong=wrong, aborts=aborts)
    return report


def qotp_identity(messages: int = 1000, max_len: int = 32, seed: int = DEFAULT_SEED) -> Report:
    """Encrypt then decrypt random basis-state messages under random keys."""
    report = Report("qotp-identity", seed, {"messages": messages, "max_len": max_len})
    base = SeededRng(seed)
    exact = qubits = 0
    for t in range(messages):
        rng = base.split("msg", t)
        n = 1 + rng.randrange(max_len)
        msg = tuple(from_label(SIGNED_LABELS[rng.randrange(len(SIGNED_LABELS))]) for _ in range(n))
        key = keygen(n, rng)
        exact += qotp_decrypt(qotp_encrypt(msg, key), key) == msg
        qubits += n
    report.aggregate = {"messages": messages, "exact": exact, "qubits": qubits}
    report.verdict("round_trip_exact", exact == messages, exact=exact, messages=messages)
    return report


def guess_rate(trials: int = 10_000, seed: int = DEFAULT_SEED) -> Report:
    """How often the entangle-measure ancilla reveals a decoy's state.

    Hadamard-basis decoys should be guessed half the time; computational
    ones always, which is why they alone cannot catch this adversary.
    """
    report = Report("guess-rate", seed, {"trials": trials})
    base = SeededRng(seed)
    for basis in (Basis.HADAMARD, Basis.COMPUTATIONAL):
        rng = base.split("guess", basis.value)
        hits = 0
        for _ in range(trials):
            bit = rng.bit()
            ancilla, _ = entangle_measure(decoy_state(basis, bit), rng)
            hits += guess_decoy(basis, ancilla) == (basis, bit)
        report.table.append({"basis": basis.value, "trials": trials, "hits": hits, "rate": hits / trials})
    had, comp = report.table
    lo, hi = stats.three_sigma_bounds(0.5, trials)
    report.verdict("hadamard_guess_half", lo <= had["rate"] <= hi, rate=had["rate"], bounds=[lo, hi])
    report.verdict("computational_guess_certain", comp["hits"] == trials, rate=comp["rate"])
    report.trials = report.table
    return report


def _overlapping_sets(m: int, n: int, p: int, rng) -> list[list[int]]:
    """Sets drawn from a small shared pool, so partial overlaps are common."""
    pool = rng.sample(range(p), n + 2)
    return [sorted(rng.sample(pool, n)) for _ in range(m)]


def mpsi_oracle(instances: int = 200, p: int = 2**31 - 1, parties=(2, 5), sizes=(1, 8),
                seed: int = DEFAULT_SEED) -> Report:
    """Random instances; each result must equal the plain set intersection."""
    scn = {"instances": instances, "p": p, "parties": list(parties), "sizes": list(sizes)}
    report = Report("mpsi-oracle", seed, scn)
    mod = Modulus.of(p)
    base = SeededRng(seed)
    bad_sets = bad_counts = sessions = 0
    for t in range(instances):
        rng = base.split("instance", t)
        m = parties[0] + rng.randrange(parties[1] - parties[0] + 1)
        n = sizes[0] + rng.randrange(sizes[1] - sizes[0] + 1)
        pick = _overlapping_sets if rng.bit() else _random_sets
        sets = pick(m, n, p, rng.split("sets"))
        params = MpsiPublicParams(mod, m, n)
        res = run_mpsi([PartyInput.of(j + 1, x) for j, x in enumerate(sets)], params, rng.split("run"))
        expected = sorted(set.intersection(*map(set, sets)))
        got = sorted(res.intersection)
        bad_sets += got != expected
        bad_counts += res.session_count != params.session_count
        sessions += res.session_count
        report.trials.append({"instance": t, "m": m, "n": n, "sets": sets, "intersection": got,
                              "sessions": res.session_count})
    report.aggregate = {"instances": instances, "sessions": sessions}
    report.verdict("intersection_matches", bad_sets == 0, mismatches=bad_sets)
    report.verdict("session_count", bad_counts == 0, mismatches=bad_counts)
    return report


def direct_intersection_poly(masks):
    """P_1 r_A1 + sum over j >= 2 of P_j r_Aj r_{j-1}, built straight from the masks."""
    total = poly_mul(masks[0].P, masks[0].r_A)
    for j in range(1, len(masks)):
        total = poly_add(total, poly_mul(poly_mul(masks[j].P, masks[j].r_A), masks[j - 1].r))
    return total


def intersection_identity(instances: int = 60, moduli=(11, 13, 31, 53, 101),
                          seed: int = DEFAULT_SEED) -> Report:
    """Interpolated P_cap against the directly composed polynomial."""
    report = Report("intersection-identity", seed, {"instances": instances, "moduli": list(moduli)})
    base = SeededRng(seed)
    mismatches = 0
    for t in range(instances):
        rng = base.split("instance", t)
        p = moduli[t % len(moduli)]
        mod = Modulus.of(p)
        m = 2 + rng.randrange(3)
        n = 1 + rng.randrange(min(4, (p - 2) // 3))
        sets = _overlapping_sets(m, n, p, rng.split("sets"))
        res = run_mpsi([PartyInput.of(j + 1, x) for j, x in enumerate(sets)],
                       MpsiPublicParams(mod, m, n), rng.split("run"))
        direct = direct_intersection_poly(res.masks)
        mismatches += direct != res.P_cap
        report.trials.append({"instance": t, "p": p, "m": m, "n": n, "sets": sets,
                              "interpolated": list(res.P_cap.coeffs), "direct": list(direct.coeffs),
                              "masks": [{"P": list(k.P.coeffs), "r_A": list(k.r_A.coeffs),
                                         "r": list(k.r.coeffs)} for k in res.masks]})
    report.verdict("coefficients_equal", mismatches == 0, mismatches=mismatches)
    return report


def privacy_smoke(trials: int = 10_000, modulus: int = 8, alpha: int = 4, function=(2, 3),
                  mpsi_modulus: int = 11, mpsi_sets=((3,), (5,)), u_degree: str = "secure",
                  seed: int = DEFAULT_SEED) -> Report:
    """Chi-squared uniformity of what Bob and A_2 see, with inputs held fixed."""
    scn = {"trials": trials, "modulus": modulus, "alpha": alpha, "function": list(function),
           "mpsi_modulus": mpsi_modulus, "mpsi_sets": [list(x) for x in mpsi_sets], "u_degree": u_degree}
    report = Report("privacy-smoke", seed, scn)
    base = SeededRng(seed)

    m = Modulus.of(modulus)
    f = OleFunction.of(*function, m)
    l_counts, v_counts = Counter(), Counter()
    for t in range(trials):
        rng = base.split("ole", t)
        res = run_ole(f, m.element(alpha), OleSessionConfig.fresh(m, rng.split("keys")), rng.split("session"))
        l_counts[res.views["bob_l"]] += 1
        v_counts[res.views["alice_V"]] += 1
    l_hist = [l_counts[v] for v in range(modulus)]
    v_hist = [v_counts[(s, c)] for s in range(modulus) for c in range(modulus)]
    for name, hist in (("bob_l", l_hist), ("alice_V", v_hist)):
        pv = stats.chi2_uniform(hist)
        report.table.append({"view": name, "cells": len(hist), "p_value": pv, "counts": hist})
        report.verdict(f"{name}_uniform", pv > stats.CHI2_ALPHA, p_value=pv)

    mod = Modulus.of(mpsi_modulus)
    params = MpsiPublicParams(mod, len(mpsi_sets), len(mpsi_sets[0]), u_degree=u_degree)
    parties = [PartyInput.of(j + 1, x) for j, x in enumerate(mpsi_sets)]
    per_point = [Counter() for _ in params.points]
    for t in range(trials):
        res = run_mpsi(parties, params, base.split("mpsi", t))
        for c, v in zip(per_point, res.received_by_a2):
            c[v] += 1
    for alpha_i, c in zip(params.points, per_point):
        hist = [c[v] for v in range(mpsi_modulus)]
        pv = stats.chi2_uniform(hist)
        report.table.append({"view": f"a2_point_{alpha_i}", "cells": len(hist), "p_value": pv, "counts": hist})
        report.verdict(f"a2_point_{alpha_i}_uniform", pv > stats.CHI2_ALPHA, p_value=pv)
    report.trials = report.table
    return report
