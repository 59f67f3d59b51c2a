"""Session transcripts and communication counters.

A transcript is an ordered list of flat dict records, one per event. There
are three kinds: ``quantum`` (a photon sequence went over a channel),
``classical`` (a message on the authenticated classical channel) and
``verdict`` (a decoy check result, an abort, or a final output). The field
layout is documented in docs/schemas.md.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

TRANSCRIPT_VERSION = 1


@dataclass
class CostCounters:
    qubits_sent: int = 0
    decoys_sent: int = 0
    classical_bits_sent: int = 0
    per_edge: dict = field(default_factory=dict)

    @property
    def payload_qubits(self) -> int:
        return self.qubits_sent - self.decoys_sent

    def _edge(self, edge):
        return self.per_edge.setdefault(edge, {"qubits": 0, "decoys": 0, "classical_bits": 0})

    def add_quantum(self, edge: str, qubits: int, decoys: int):
        self.qubits_sent += qubits
        self.decoys_sent += decoys
        e = self._edge(edge)
        e["qubits"] += qubits
        e["decoys"] += decoys

    def add_classical(self, edge: str, bits: int):
        self.classical_bits_sent += bits
        self._edge(edge)["classical_bits"] += bits

    def merge(self, other: CostCounters) -> CostCounters:
        """Sum of two counter sets; associative and commutative."""
        out = CostCounters(
            self.qubits_sent + other.qubits_sent,
            self.decoys_sent + other.decoys_sent,
            self.classical_bits_sent + other.classical_bits_sent,
        )
        for src in (self.per_edge, other.per_edge):
            for edge, e in src.items():
                t = out._edge(edge)
                for k, v in e.items():
                    t[k] += v
        return out

    def to_dict(self) -> dict:
        return {
            "qubits_sent": self.qubits_sent,
            "decoys_sent": self.decoys_sent,
            "payload_qubits": self.payload_qubits,
            "classical_bits_sent": self.classical_bits_sent,
            "per_edge": {k: dict(v) for k, v in sorted(self.per_edge.items())},
        }


class Transcript:
    def __init__(self, session: str = "ole"):
        self.session = session
        self.events: list[dict] = []
        self.counters = CostCounters()

    def _log(self, kind, **fields):
        rec = {"v": TRANSCRIPT_VERSION, "session": self.session, "seq": len(self.events), "kind": kind}
        rec.update(fields)
        self.events.append(rec)
        return rec

    def quantum(self, edge: str, what: str, qubits: int, decoys: int):
        self.counters.add_quantum(edge, qubits, decoys)
        self._log("quantum", edge=edge, what=what, qubits=qubits, decoys=decoys)

    def classical(self, edge: str, what: str, bits: int):
        self.counters.add_classical(edge, bits)
        self._log("classical", edge=edge, what=what, bits=bits)

    def verdict(self, what: str, **fields):
        self._log("verdict", what=what, **fields)

    def extend(self, other: Transcript):
        """Append another transcript's events and fold in its counters."""
        for rec in other.events:
            self.events.append(dict(rec, seq=len(self.events)))
        self.counters = self.counters.merge(other.counters)

    def lines(self, **extra) -> list[str]:
        return [json.dumps(dict(rec, **extra), sort_keys=True) for rec in self.events]
