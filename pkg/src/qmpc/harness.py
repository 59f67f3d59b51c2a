"""
Experiment runner: scenario files, toy-example replay, attack curves and
communication audits.

Every entry point returns a :class:`Report`. A report depends only on its
inputs and seed: no timestamps, no wall-clock numbers, stable key order.
Trials get their own random stream, ``SeededRng(seed).split("trial", t)``,
so they can run on any number of workers and merge in any order.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import stats
from .channel import AdversaryModel, DecoyRecord
from .errors import ConfigurationError
from .mpsi import MpsiAborted, MpsiPublicParams, PartyInput, run_mpsi
from .ole import EDGES, OleFunction, OleSessionConfig, run_ole
from .qotp import PauliKey
from .qubit import from_label, label
from .ring import Modulus, Polynomial
from .rng import SeededRng
from .transcript import CostCounters

REPORT_VERSION = 1
DEFAULT_SEED = 20240101


def _data(name: str):
    return json.loads(resources.files("qmpc.data").joinpath(name).read_text())


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def scenario_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


@dataclass
class Report:
    kind: str
    seed: int
    scenario: dict
    trials: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)
    counters: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    transcript: list = field(default_factory=list)
    table: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v["passed"] for v in self.verdicts)

    def verdict(self, name: str, passed: bool, **detail):
        self.verdicts.append({"name": name, "passed": bool(passed), **detail})

    def to_dict(self) -> dict:
        return {
            "report_version": REPORT_VERSION,
            "kind": self.kind,
            "seed": self.seed,
            "scenario_hash": scenario_hash(self.scenario),
            "scenario": self.scenario,
            "aggregate": self.aggregate,
            "counters": self.counters,
            "verdicts": self.verdicts,
            "trials": self.trials,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def write(self, out_dir, stem: str | None = None) -> list[Path]:
        """Write report JSON, transcript JSONL, and a CSV table if there is one."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = stem or self.kind
        paths = [out / f"{stem}.report.json", out / f"{stem}.transcript.jsonl"]
        paths[0].write_text(self.to_json())
        paths[1].write_text("".join(line + "\n" for line in self.transcript))
        if self.table:
            import csv

            p = out / f"{stem}.csv"
            with p.open("w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=list(self.table[0]), lineterminator="\n")
                w.writeheader()
                w.writerows(self.table)
            paths.append(p)
        return paths


# -- scenarios ---------------------------------------------------------------

def load_scenario(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read scenario {path}: {exc}") from exc


def validate_scenario(scn: dict) -> dict:
    """Schema plus semantic checks; returns the scenario with defaults filled."""
    try:
        jsonschema.validate(scn, _data("scenario.schema.json"))
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise ConfigurationError(f"scenario invalid at {where}: {exc.message}") from None
    s = {"schema_version": 1, "delta": 16, "threshold": 0.0, "adversaries": {},
         "trials": 1, "seed": DEFAULT_SEED, "u_degree": "secure"}
    s.update(scn)
    p = s["modulus"]
    if s["protocol"] == "ole":
        for key in ("sets", "points"):
            if key in s:
                raise ConfigurationError(f"'{key}' only applies to mpsi scenarios")
        vals = list(s.get("function", {}).values())
        if "alpha" in s:
            vals.append(s["alpha"])
        if any(v >= p for v in vals):
            raise ConfigurationError(f"ole inputs must be < modulus {p}")
    else:
        mod = Modulus.of(p)
        if not mod.is_prime:
            raise ConfigurationError(f"mpsi requires a prime modulus; {p} is not prime")
        if "sets" not in s:
            raise ConfigurationError("mpsi scenarios need 'sets'")
        for key in ("function", "alpha"):
            if key in s:
                raise ConfigurationError(f"'{key}' only applies to ole scenarios")
        sizes = {len(x) for x in s["sets"]}
        if len(sizes) != 1:
            raise ConfigurationError("all parties' sets must have the same size n")
        if any(v >= p for x in s["sets"] for v in x):
            raise ConfigurationError(f"set elements must be < modulus {p}")
        # raises ConfigurationError on bad points / p too small
        _mpsi_params(s)
    return s


def _mpsi_params(s: dict) -> MpsiPublicParams:
    return MpsiPublicParams(Modulus.of(s["modulus"]), len(s["sets"]), len(s["sets"][0]),
                            tuple(s.get("points", ())), s["u_degree"], s["delta"], s["threshold"])


def _attacked_edges(s: dict) -> int:
    return sum(1 for v in s["adversaries"].values() if v != "none")


def _ole_trial(s: dict, t: int):
    m = Modulus.of(s["modulus"])
    rng = SeededRng(s["seed"]).split("trial", t)
    inputs = rng.split("inputs")
    fn = s.get("function") or {"a": inputs.randrange(m.p), "b": inputs.randrange(m.p)}
    alpha = s["alpha"] if "alpha" in s else inputs.randrange(m.p)
    f = OleFunction.of(fn["a"], fn["b"], m)
    cfg = OleSessionConfig.fresh(m, rng.split("keys"), s["delta"], s["threshold"])
    res = run_ole(f, m.element(alpha), cfg, rng.split("session"), s["adversaries"])
    expected = f(alpha).value
    rec = {"trial": t, "a": fn["a"], "b": fn["b"], "alpha": alpha, "expected": expected,
           "state": res.state.value, "output": res.output.value if res.output else None,
           "correct": res.completed and res.output.value == expected,
           "abort_reason": res.abort_reason, "abort_stage": res.abort_stage,
           "payload_qubits": res.counters.payload_qubits}
    return rec, res.counters, res.log.lines(trial=t)


def _mpsi_trial(s: dict, t: int):
    params = _mpsi_params(s)
    rng = SeededRng(s["seed"]).split("trial", t)
    parties = [PartyInput.of(j + 1, x) for j, x in enumerate(s["sets"])]
    expected = sorted(frozenset.intersection(*(q.elements for q in parties)))
    try:
        res = run_mpsi(parties, params, rng, s["adversaries"])
    except MpsiAborted as exc:
        rec = {"trial": t, "state": "Aborted", "abort_stage": exc.stage,
               "abort_reason": exc.session.abort_reason, "expected": expected,
               "intersection": None, "correct": False, "sessions": None, "payload_qubits": None}
        return rec, exc.session.counters, exc.session.log.lines(trial=t)
    rec = {"trial": t, "state": "Done", "abort_stage": None, "abort_reason": None, "expected": expected,
           "intersection": sorted(res.intersection), "correct": sorted(res.intersection) == expected,
           "sessions": res.session_count, "payload_qubits": res.counters.payload_qubits}
    return rec, res.counters, res.log.lines(trial=t)


@dataclass
class Tally:
    """Order-independent summary of trial records."""
    trials: int = 0
    completed: int = 0
    correct: int = 0
    detected: int = 0
    integrity: int = 0
    counters: CostCounters = field(default_factory=CostCounters)

    @classmethod
    def of(cls, rec: dict, counters: CostCounters) -> Tally:
        done = rec["state"] == "Done"
        eaves = not done and rec.get("abort_reason", "eavesdropping") != "integrity"
        return cls(1, int(done), int(bool(rec["correct"])), int(eaves),
                   int(rec.get("abort_reason") == "integrity"), counters)

    def merge(self, other: Tally) -> Tally:
        return Tally(self.trials + other.trials, self.completed + other.completed,
                     self.correct + other.correct, self.detected + other.detected,
                     self.integrity + other.integrity, self.counters.merge(other.counters))


def _map_trials(fn, s: dict, workers: int):
    idx = range(s["trials"])
    if workers <= 1:
        return [fn(s, t) for t in idx]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, [s] * len(idx), idx, chunksize=max(1, len(idx) // (4 * workers))))


def run_scenario(scenario, workers: int = 1) -> Report:
    """Execute a scenario (a path or an already loaded dict)."""
    raw = load_scenario(scenario) if not isinstance(scenario, dict) else scenario
    s = validate_scenario(raw)
    fn = _ole_trial if s["protocol"] == "ole" else _mpsi_trial
    results = _map_trials(fn, s, workers)

    report = Report(f"{s['protocol']}-run", s["seed"], s)
    tally = Tally()
    for rec, counters, lines in results:
        report.trials.append(rec)
        report.transcript.extend(lines)
        tally = tally.merge(Tally.of(rec, counters))
    n = tally.trials
    agg = {"trials": n, "completed": tally.completed, "correct": tally.correct,
           "success_rate": tally.correct / n, "abort_rate": (n - tally.completed) / n,
           "eavesdropping_aborts": tally.detected, "integrity_aborts": tally.integrity}
    k = _attacked_edges(s)
    if k:
        rate = tally.detected / n
        lo, hi = stats.three_sigma_bounds(rate, n)
        analytic = stats.detection_probability(s["delta"], k)
        alo, ahi = stats.three_sigma_bounds(analytic, n)
        agg["detection"] = {"empirical": rate, "ci3sigma": [lo, hi], "analytic": analytic}
        if s["protocol"] == "ole":
            report.verdict("detection_law", alo <= rate <= ahi, empirical=rate, analytic=analytic,
                           bounds=[alo, ahi])
    report.aggregate = agg
    report.counters = tally.counters.to_dict()
    report.verdict("completed_runs_correct", tally.correct == tally.completed,
                   completed=tally.completed, correct=tally.correct)
    if not k:
        report.verdict("no_aborts_on_honest_channel", tally.completed == n, aborts=n - tally.completed)
    return report


# -- toy example -------------------------------------------------------------

def toy_fixture() -> dict:
    return _data("toy_example.json")


def replay_toy(fixture: dict | None = None, flip_key: tuple[str, int] | None = None) -> Report:
    """Re-run the worked Z_8 example with every random choice pinned.

    Compares each recorded intermediate value against the fixture. States are
    compared amplitude-exactly, so a wrong sign counts as a divergence.
    ``flip_key=("k_b", 3)`` flips one key bit, as a negative control.
    """
    fx = fixture or toy_fixture()
    m = Modulus.of(fx["modulus"])
    keys = {k: PauliKey.from_string(v) for k, v in fx["keys"].items()}
    if flip_key:
        keys[flip_key[0]] = keys[flip_key[0]].flip(flip_key[1])
    cfg = OleSessionConfig(m, keys["k_a"], keys["k_b"], keys["k_ab"])
    plans = {k: DecoyRecord.from_labels(v["positions"], v["states"]) for k, v in fx["decoys"].items()}
    pinned = {"S": Polynomial.linear(fx["tp"]["S"]["slope"], fx["tp"]["S"]["intercept"], m),
              "d": m.element(fx["tp"]["d"]), "plans": plans}
    f = OleFunction.of(fx["function"]["a"], fx["function"]["b"], m)

    trace = {}
    res = run_ole(f, m.element(fx["alpha"]), cfg, SeededRng(0), fixture=pinned, trace=trace)
    scn = {"fixture_version": fx["version"], "flip_key": list(flip_key) if flip_key else None}
    report = Report("replay-toy", 0, scn, transcript=res.log.lines())
    first = None
    for exp in fx["expected"]:
        step = exp["step"]
        got = trace.get(step)
        if "states" in exp:
            want = tuple(from_label(x) for x in exp["states"])
            ok = got is not None and tuple(got) == want
            shown = None if got is None else [label(q) for q in got]
        else:
            want = exp["value"]
            shown = list(got) if isinstance(got, tuple) else got
            ok = shown == want
        report.trials.append({"step": step, "kind": exp["kind"], "match": ok, "got": shown,
                              "expected": exp.get("states", exp.get("value"))})
        if not ok and first is None:
            first = {"step": step, "kind": exp["kind"]}
    report.aggregate = {"output": res.output.value if res.output else None,
                        "state": res.state.value, "first_divergence": first}
    report.counters = res.counters.to_dict()
    report.verdict("intermediate_states", first is None, first_divergence=first)
    report.verdict("final_output", res.output is not None and res.output.value == 3,
                   output=res.output.value if res.output else None, expected=3)
    return report


# -- attack curves -----------------------------------------------------------

def detection_trials(delta: int, trials: int, seed: int, model=AdversaryModel.INTERCEPT_RESEND,
                     edge: str = "TP->Bob", modulus: int = 8) -> int:
    """Number of full OLE sessions, out of ``trials``, aborted by a decoy check."""
    m = Modulus.of(modulus)
    base = SeededRng(seed).split("attack", AdversaryModel(model).value, edge, delta)
    hits = 0
    for t in range(trials):
        rng = base.split(t)
        cfg = OleSessionConfig.fresh(m, rng.split("keys"), delta)
        f = OleFunction.of(rng.randrange(m.p), rng.randrange(m.p), m)
        res = run_ole(f, m.element(rng.randrange(m.p)), cfg, rng.split("session"), {edge: model})
        hits += res.abort_reason == "eavesdropping"
    return hits


def attack_curve(deltas=(1, 2, 4, 8, 16), trials: int = 10_000, seed: int = DEFAULT_SEED,
                 models=(AdversaryModel.INTERCEPT_RESEND, AdversaryModel.ENTANGLE_MEASURE),
                 edge: str = "TP->Bob", modulus: int = 8) -> Report:
    """Empirical abort frequency against 1 - (3/4)^delta for each model and delta."""
    if edge not in EDGES:
        raise ConfigurationError(f"unknown edge {edge!r}")
    models = [AdversaryModel(x) for x in models]
    scn = {"deltas": list(deltas), "trials": trials, "models": [x.value for x in models],
           "edge": edge, "modulus": modulus}
    report = Report("attack-curve", seed, scn)
    for model in models:
        for delta in deltas:
            hits = detection_trials(delta, trials, seed, model, edge, modulus)
            rate = hits / trials
            analytic = stats.detection_probability(delta)
            lo, hi = stats.three_sigma_bounds(analytic, trials)
            row = {"model": model.value, "delta": delta, "trials": trials, "aborts": hits,
                   "empirical": rate, "analytic": analytic, "lo3sigma": lo, "hi3sigma": hi,
                   "within": lo <= rate <= hi}
            report.table.append(row)
            report.verdict(f"{model.value}:delta={delta}", row["within"], empirical=rate,
                           analytic=analytic, bounds=[lo, hi])
            if delta == 16:
                report.verdict(f"{model.value}:delta=16>=0.98", rate >= 0.98, empirical=rate)
    report.trials = report.table
    return report


# -- communication audit -----------------------------------------------------

def _fit_residual(x, y) -> float:
    """Max relative residual of a least-squares line y ~ a*x + b."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(set(x.tolist())) < 2:
        # a single x value: the best line is the mean, so report the spread about it
        return float(np.max(np.abs(y - y.mean()) / np.abs(y)))
    a, b = np.polyfit(x, y, 1)
    return float(np.max(np.abs(y - (a * x + b)) / np.abs(y)))


def comm_audit(moduli=(257, 65537), m: int = 4, n: int = 3, seed: int = DEFAULT_SEED,
               delta: int = 16) -> Report:
    """Measure qubit counts per OLE session and across MPSI runs."""
    scn = {"moduli": list(moduli), "m": m, "n": n, "delta": delta}
    report = Report("comm-audit", seed, scn)
    base = SeededRng(seed)
    for p in moduli:
        mod = Modulus.of(p)
        L = mod.width
        rng = base.split("ole", p)
        cfg = OleSessionConfig.fresh(mod, rng.split("keys"), delta)
        res = run_ole(OleFunction.of(1, 1, mod), mod.element(1), cfg, rng.split("session"))
        c = res.counters
        edges = {e: c.per_edge[e]["qubits"] - c.per_edge[e]["decoys"] for e in EDGES}
        report.trials.append({"protocol": "ole", "p": p, "L": L, "payload_qubits": c.payload_qubits,
                              "decoys": c.decoys_sent, "per_edge_payload": edges})
        report.verdict(f"ole:p={p}:payload=7L", c.payload_qubits == 7 * L,
                       measured=c.payload_qubits, expected=7 * L)
        report.verdict(f"ole:p={p}:decoys=4delta", c.decoys_sent == 4 * delta, measured=c.decoys_sent)

    for p in moduli:
        mod = Modulus.of(p)
        for mm in range(2, m + 1):
            for nn in range(1, n + 1):
                params = MpsiPublicParams(mod, mm, nn, delta=delta)
                rng = base.split("mpsi", p, mm, nn)
                sets = _random_sets(mm, nn, p, rng.split("sets"))
                res = run_mpsi([PartyInput.of(j + 1, x) for j, x in enumerate(sets)], params, rng)
                row = {"p": p, "L": mod.width, "m": mm, "n": nn, "sessions": res.session_count,
                       "expected_sessions": params.session_count,
                       "payload_qubits": res.counters.payload_qubits,
                       "qubits": res.counters.qubits_sent,
                       "classical_bits": res.counters.classical_bits_sent}
                report.table.append(row)
                report.verdict(f"mpsi:p={p}:m={mm}:n={nn}:sessions", res.session_count == params.session_count,
                               measured=res.session_count, expected=params.session_count)

    rows = report.table
    # payload vs L at each fixed (m, n)
    res_L = max(_fit_residual([r["L"] for r in rows if (r["m"], r["n"]) == key],
                              [r["payload_qubits"] for r in rows if (r["m"], r["n"]) == key])
                for key in {(r["m"], r["n"]) for r in rows})
    # payload vs session count at each fixed p
    res_S = max(_fit_residual([r["sessions"] for r in rows if r["p"] == p],
                              [r["payload_qubits"] for r in rows if r["p"] == p]) for p in moduli)
    per_session = sorted({r["payload_qubits"] / (r["sessions"] * r["L"]) for r in rows})
    report.aggregate = {"residual_vs_L": res_L, "residual_vs_sessions": res_S,
                        "payload_per_session_per_L": per_session,
                        "decoys_per_session": sorted({(r["qubits"] - r["payload_qubits"]) / r["sessions"]
                                                      for r in rows})}
    report.verdict("mpsi:linear_in_L", res_L < 0.01, residual=res_L)
    report.verdict("mpsi:linear_in_sessions", res_S < 0.01, residual=res_S)
    return report


def _random_sets(m: int, n: int, p: int, rng) -> list[list[int]]:
    common = rng.sample(range(p), rng.randrange(n + 1))
    sets = []
    for _ in range(m):
        s = list(common)
        while len(s) < n:
            v = rng.randrange(p)
            if v not in s:
                s.append(v)
        sets.append(sorted(s))
    return sets
