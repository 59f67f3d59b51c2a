"""
m-party private set intersection by chaining oblivious linear evaluations.

Party A_j encodes its n-element set as the monic polynomial P_j with those
roots and masks it with a root-free r_Aj: P'_j = P_j * r_Aj. A_1 also adds a
random u_A1, giving P_1 = P'_1 + u_A1. At every public point alpha_i a chain
of OLE sessions accumulates

    P^i_j = P'_j(alpha_i) * r_{j-1}(alpha_i) + P^i_{j-1},   j = 2..m,

with A_{j-1} holding the line x -> r_{j-1}(alpha_i) * x + P^i_{j-1} and A_j
evaluating it at P'_j(alpha_i). A_m adds the shared u (known to A_2..A_m),
A_1 strips u_A1, A_2 strips u and interpolates the 3n+1 values into

    P_cap = sum_{j>=2} P_j r_Aj r_{j-1} + P_1 r_A1,

whose roots inside A_2's set are exactly the common elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigurationError
from .ole import OleFunction, OleSessionConfig, run_ole
from .ring import (EvalPoint, Modulus, Polynomial, poly_add, poly_eval,
                   poly_from_roots, poly_interpolate, poly_mul, random_poly,
                   sample_rootfree_poly)
from .transcript import CostCounters, Transcript

U_DEGREE_POLICIES = ("secure", "paper")


class MpsiAborted(Exception):
    """An OLE session inside the chain aborted; ``session`` is its transcript."""

    def __init__(self, stage: str, session=None):
        super().__init__(f"MPSI aborted at {stage}")
        self.stage = stage
        self.session = session


@dataclass(frozen=True)
class PartyInput:
    id: int
    elements: frozenset

    @classmethod
    def of(cls, id: int, elements) -> PartyInput:
        values = [int(e) for e in elements]
        if len(set(values)) != len(values):
            raise ConfigurationError(f"party {id} has repeated elements")
        return cls(id, frozenset(values))

    def __len__(self):
        return len(self.elements)


@dataclass(frozen=True)
class MpsiPublicParams:
    modulus: Modulus
    m: int
    n: int
    points: tuple[int, ...] = ()
    u_degree: str = "secure"
    delta: int = 16
    threshold: float = 0.0

    def __post_init__(self):
        self.modulus.require_prime("MPSI")
        if self.modulus.p == 2:
            raise ConfigurationError("MPSI needs an odd prime modulus")
        if self.m < 2:
            raise ConfigurationError("MPSI needs at least two parties")
        if self.n < 1:
            raise ConfigurationError("empty sets are not supported")
        if self.u_degree not in U_DEGREE_POLICIES:
            raise ConfigurationError(f"u_degree must be one of {U_DEGREE_POLICIES}")
        if not self.points:
            if 3 * self.n + 1 >= self.modulus.p:
                raise ConfigurationError(f"p={self.modulus.p} too small for n={self.n}: need p > 3n+1")
            object.__setattr__(self, "points", tuple(range(1, 3 * self.n + 2)))
        if len(self.points) != 3 * self.n + 1:
            raise ConfigurationError("need exactly 3n+1 evaluation points")
        if any(not 0 <= a < self.modulus.p for a in self.points):
            raise ConfigurationError("evaluation points must be residues mod p")
        if len(set(self.points)) != len(self.points):
            raise ConfigurationError("evaluation points must be distinct")

    @property
    def u_max_degree(self) -> int:
        return 3 * self.n if self.u_degree == "secure" else self.n

    @property
    def session_count(self) -> int:
        return (self.m - 1) * (3 * self.n + 1)


@dataclass
class PartyMasks:
    P: Polynomial
    r_A: Polynomial
    r: Polynomial
    P_prime: Polynomial
    u_A1: Polynomial | None = None
    P1: Polynomial | None = None
    u: Polynomial | None = None


@dataclass
class MpsiResult:
    intersection: frozenset
    P_cap: Polynomial
    session_count: int
    counters: CostCounters
    log: Transcript
    sessions: list = field(default_factory=list)
    received_by_a1: tuple = ()
    received_by_a2: tuple = ()
    masks: list = field(default_factory=list)


def validate_inputs(inputs, params: MpsiPublicParams):
    if len(inputs) != params.m:
        raise ConfigurationError(f"expected {params.m} parties, got {len(inputs)}")
    for party in inputs:
        if len(party) != params.n:
            raise ConfigurationError(f"party {party.id} has {len(party)} elements, all sets need n={params.n}")
        if any(not 0 <= e < params.modulus.p for e in party.elements):
            raise ConfigurationError(f"party {party.id} has elements outside Z_{params.modulus.p}")


def sample_shared_u(params: MpsiPublicParams, rng) -> Polynomial:
    return random_poly(params.u_max_degree, params.modulus, rng)


def prep_party(party: PartyInput, params: MpsiPublicParams, rng,
               shared_u: Polynomial | None = None) -> PartyMasks:
    """Set polynomial and masks for one party; A_1 (id 1) also draws u_A1."""
    if len(party) == 0:
        raise ConfigurationError("empty sets are not supported")
    m = params.modulus
    P = poly_from_roots(sorted(party.elements), m)
    r_A = sample_rootfree_poly(params.n, m, rng)
    r = sample_rootfree_poly(params.n, m, rng)
    masks = PartyMasks(P, r_A, r, poly_mul(P, r_A))
    if party.id == 1:
        masks.u_A1 = random_poly(params.u_max_degree, m, rng)
        masks.P1 = poly_add(masks.P_prime, masks.u_A1)
    else:
        masks.u = shared_u
    return masks


def chain_step(i: int, j: int, holder_P: int, holder_r: int, evaluator_value: int,
               ole_cfg: OleSessionConfig, rng, adversaries=None) -> tuple[int, object]:
    """One link at point index i between A_{j-1} (holder) and A_j.

    Returns A_j's new value P^i_j = evaluator_value * holder_r + holder_P and
    the session transcript. Raises MpsiAborted if the session aborts.
    """
    m = ole_cfg.modulus
    f = OleFunction.of(holder_r, holder_P, m)
    t = run_ole(f, m.element(evaluator_value), ole_cfg, rng, adversaries, session=f"ole[i={i},j={j}]")
    if not t.completed:
        raise MpsiAborted(f"ole[i={i},j={j}] {t.abort_stage}", t)
    return t.output.value, t


def finalize(chain_outputs, masks: list[PartyMasks], inputs, params: MpsiPublicParams,
             log: Transcript | None = None) -> tuple[frozenset, Polynomial, tuple, tuple]:
    """Unmask the chain outputs, interpolate P_cap, and read off the intersection.

    Returns (intersection, P_cap, values A_1 receives, values A_2 receives).
    """
    m = params.modulus
    p = m.p
    w = m.width
    pts = params.points
    if len(chain_outputs) != len(pts):
        raise ConfigurationError("need one chain output per evaluation point")
    u = masks[-1].u
    u_a1 = masks[0].u_A1
    last = params.m

    R = tuple((v + poly_eval(u, a).value) % p for v, a in zip(chain_outputs, pts))
    if log is not None:
        log.classical(f"A{last}->A1", "R", len(R) * w)
    to_a2 = tuple((v - poly_eval(u_a1, a).value) % p for v, a in zip(R, pts))
    if log is not None:
        log.classical("A1->A2", "R-u_A1", len(to_a2) * w)
    values = [(v - poly_eval(u, a).value) % p for v, a in zip(to_a2, pts)]
    try:
        P_cap = poly_interpolate([EvalPoint(m.element(a), m.element(v)) for a, v in zip(pts, values)])
    except ValueError as exc:
        raise ConfigurationError(f"interpolation failed: {exc}") from exc

    a2 = next(party for party in inputs if party.id == 2)
    found = frozenset(g for g in a2.elements if poly_eval(P_cap, g).value == 0)
    if log is not None:
        log.classical("A2->all", "intersection", max(1, len(found) * w))
        log.verdict("intersection", elements=sorted(found))
    return found, P_cap, R, to_a2


def run_mpsi(inputs, params: MpsiPublicParams, rng, adversaries=None,
             keep_sessions: bool = False) -> MpsiResult:
    """Run the whole protocol for parties with ids 1..m.

    Per-party randomness comes from ``rng.split("party", j)`` and each OLE
    session from ``rng.split("ole", i, j)``, so point indices are independent
    of each other and of evaluation order.
    """
    inputs = sorted(inputs, key=lambda party: party.id)
    if [party.id for party in inputs] != list(range(1, params.m + 1)):
        raise ConfigurationError("party ids must be 1..m")
    validate_inputs(inputs, params)
    mod = params.modulus
    p = mod.p

    shared_u = sample_shared_u(params, rng.split("shared-u"))
    masks = [prep_party(party, params, rng.split("party", party.id), shared_u) for party in inputs]
    log = Transcript("mpsi")
    # u travels from A_2 to A_3..A_m over the classical channel
    u_bits = (params.u_max_degree + 1) * mod.width
    for j in range(3, params.m + 1):
        log.classical(f"A2->A{j}", "u", u_bits)

    sessions = []
    chain_outputs = []
    count = 0
    for i, alpha in enumerate(params.points, start=1):
        value = poly_eval(masks[0].P1, alpha).value
        for j in range(2, params.m + 1):
            holder_r = poly_eval(masks[j - 2].r, alpha).value
            evaluator = poly_eval(masks[j - 1].P_prime, alpha).value
            srng = rng.split("ole", i, j)
            cfg = OleSessionConfig.fresh(mod, srng.split("keys"), params.delta, params.threshold)
            try:
                value, t = chain_step(i, j, value, holder_r, evaluator, cfg, srng, adversaries)
            except MpsiAborted as exc:
                log.extend(exc.session.log)
                log.verdict("abort", stage=exc.stage)
                raise
            count += 1
            log.extend(t.log)
            if keep_sessions:
                sessions.append(t)
        chain_outputs.append(value % p)

    found, P_cap, R, to_a2 = finalize(chain_outputs, masks, inputs, params, log)
    return MpsiResult(found, P_cap, count, log.counters, log, sessions, R, to_a2, masks)
