import pytest
from hypothesis import given, settings, strategies as st

from qmpc.errors import ConfigurationError
from qmpc.experiments import direct_intersection_poly
from qmpc.mpsi import (MpsiAborted, MpsiPublicParams, PartyInput, chain_step, prep_party,
                       run_mpsi, sample_shared_u, validate_inputs)
from qmpc.ole import OleSessionConfig
from qmpc.ring import Modulus, poly_eval
from qmpc.rng import SeededRng


def mpsi(p, sets, seed=0, **kw):
    params = MpsiPublicParams(Modulus.of(p), len(sets), len(sets[0]), **kw)
    parties = [PartyInput.of(j + 1, s) for j, s in enumerate(sets)]
    return run_mpsi(parties, params, SeededRng(seed)), params


@st.composite
def instances(draw, p=101, max_m=4, max_n=4):
    m = draw(st.integers(2, max_m))
    n = draw(st.integers(1, max_n))
    pool = draw(st.lists(st.integers(0, p - 1), min_size=n + 2, max_size=n + 2, unique=True))
    sets = [draw(st.lists(st.sampled_from(pool), min_size=n, max_size=n, unique=True)) for _ in range(m)]
    return sets, draw(st.integers(0, 2**32))


class TestPrep:
    def test_single_root_set(self):
        params = MpsiPublicParams(Modulus.of(7), 2, 1)
        masks = prep_party(PartyInput.of(2, [3]), params, SeededRng(0))
        assert masks.P.coeffs == (4, 1)

    @pytest.mark.parametrize("p", [11, 13, 29, 53, 101])
    def test_masked_roots_exactly_the_set(self, p):
        mod = Modulus.of(p)
        rng = SeededRng(p)
        for n in range(1, (p - 2) // 3 + 1):
            params = MpsiPublicParams(mod, 2, n)
            elems = rng.sample(range(p), n)
            masks = prep_party(PartyInput.of(2, elems), params, rng)
            zeros = {x for x in range(p) if poly_eval(masks.P_prime, x).value == 0}
            assert zeros == set(elems)
            assert masks.P_prime.degree == n + masks.r_A.degree <= 2 * n

    def test_first_party_gets_u_a1(self):
        params = MpsiPublicParams(Modulus.of(101), 3, 2)
        shared = sample_shared_u(params, SeededRng(1))
        a1 = prep_party(PartyInput.of(1, [1, 2]), params, SeededRng(2), shared)
        a2 = prep_party(PartyInput.of(2, [1, 2]), params, SeededRng(3), shared)
        assert a1.u_A1 is not None and a1.P1 is not None and a1.u is None
        assert a2.u is shared and a2.u_A1 is None

    @pytest.mark.parametrize("policy,bound", [("secure", 6), ("paper", 2)])
    def test_u_degree_policy(self, policy, bound):
        params = MpsiPublicParams(Modulus.of(101), 2, 2, u_degree=policy)
        assert params.u_max_degree == bound
        for s in range(20):
            assert sample_shared_u(params, SeededRng(s)).degree <= bound


class TestChainStep:
    def cfg(self, p, seed):
        return OleSessionConfig.fresh(Modulus.of(p), SeededRng(seed), 2)

    def test_identity_link(self):
        value, t = chain_step(1, 2, 5, 1, 0, self.cfg(101, 0), SeededRng(1))
        assert value == 5 and t.completed

    def test_random_links(self):
        rng = SeededRng(8)
        for k in range(100):
            P, r, e = rng.randrange(101), 1 + rng.randrange(100), rng.randrange(101)
            value, _ = chain_step(1, 2, P, r, e, self.cfg(101, k), rng.split(k))
            assert value == (e * r + P) % 101

    def test_unrolled_three_party_chain(self):
        p = 101
        rng = SeededRng(21)
        P1, r1, P2, r2, P3 = (rng.randrange(p) for _ in range(5))
        v2, _ = chain_step(1, 2, P1, r1, P2, self.cfg(p, 1), rng.split(1))
        v3, _ = chain_step(1, 3, v2, r2, P3, self.cfg(p, 2), rng.split(2))
        assert v3 == (P3 * r2 + P2 * r1 + P1) % p

    def test_abort_propagates(self):
        with pytest.raises(MpsiAborted) as info:
            chain_step(4, 2, 1, 1, 1, OleSessionConfig.fresh(Modulus.of(101), SeededRng(0)),
                       SeededRng(1), {"TP->Bob": "intercept_resend"})
        assert info.value.stage.startswith("ole[i=4,j=2]")
        assert info.value.session.aborted


class TestIntersection:
    def test_three_parties(self):
        res, params = mpsi(101, [[1, 2, 3], [2, 3, 4], [3, 4, 5]])
        assert res.intersection == {3}
        assert res.session_count == params.session_count == 20
        assert poly_eval(res.P_cap, 3).value == 0

    def test_identical_sets(self):
        res, _ = mpsi(101, [[7, 8, 9]] * 3)
        assert res.intersection == {7, 8, 9}

    def test_disjoint_sets(self):
        res, _ = mpsi(101, [[1, 2], [3, 4], [5, 6]])
        assert res.intersection == frozenset()

    def test_two_parties_singletons(self):
        res, params = mpsi(11, [[1], [1]])
        assert res.intersection == {1} and res.session_count == 4

    def test_paper_u_degree_still_correct(self):
        res, _ = mpsi(101, [[1, 2, 3], [2, 3, 4], [3, 4, 5]], u_degree="paper")
        assert res.intersection == {3}

    def test_custom_points(self):
        res, _ = mpsi(101, [[10, 20], [20, 30]], points=(5, 17, 33, 60, 71, 99, 100))
        assert res.intersection == {20}

    @settings(max_examples=30, deadline=None)
    @given(instances())
    def test_soundness_and_identity(self, inst):
        sets, seed = inst
        res, params = mpsi(101, sets, seed)
        common = set.intersection(*map(set, sets))
        for g in common:
            assert poly_eval(res.P_cap, g).value == 0
        assert common <= res.intersection <= set(sets[1])
        assert res.P_cap.degree <= 3 * params.n
        assert res.P_cap == direct_intersection_poly(res.masks)

    @settings(max_examples=20, deadline=None)
    @given(instances(p=2**31 - 1, max_m=3, max_n=3))
    def test_exact_at_large_modulus(self, inst):
        sets, seed = inst
        res, _ = mpsi(2**31 - 1, sets, seed)
        assert res.intersection == set.intersection(*map(set, sets))

    def test_deterministic(self):
        a, _ = mpsi(101, [[1, 2], [2, 3]], seed=5)
        b, _ = mpsi(101, [[1, 2], [2, 3]], seed=5)
        assert a.log.events == b.log.events
        assert a.received_by_a2 == b.received_by_a2 and a.P_cap == b.P_cap


class TestTranscript:
    def test_counts(self):
        res, params = mpsi(101, [[1, 2], [2, 3], [2, 4], [2, 5]], delta=4)
        L = 7
        assert res.counters.payload_qubits == params.session_count * 7 * L
        assert res.counters.decoys_sent == params.session_count * 4 * 4
        # u to A_3 and A_4, then R, R - u_A1, and the announcement
        u_bits = (params.u_max_degree + 1) * L
        classical = [e for e in res.log.events if e["kind"] == "classical" and not e["what"].startswith("decoys")]
        assert [(e["edge"], e["bits"]) for e in classical] == [
            ("A2->A3", u_bits), ("A2->A4", u_bits), ("A4->A1", 7 * L), ("A1->A2", 7 * L),
            ("A2->all", L)]
        assert [e["seq"] for e in res.log.events] == list(range(len(res.log.events)))

    def test_abort_in_chain(self):
        params = MpsiPublicParams(Modulus.of(101), 2, 1)
        parties = [PartyInput.of(1, [1]), PartyInput.of(2, [1])]
        with pytest.raises(MpsiAborted) as info:
            run_mpsi(parties, params, SeededRng(0), {"Bob->Alice": "intercept_resend"})
        assert info.value.stage.startswith("ole[i=1,j=2]")
        assert info.value.session.abort_reason == "eavesdropping"


class TestValidation:
    @pytest.mark.parametrize("p", [8, 9, 2])
    def test_modulus(self, p):
        with pytest.raises(ConfigurationError):
            MpsiPublicParams(Modulus(p), 2, 1)

    def test_modulus_too_small_for_default_points(self):
        with pytest.raises(ConfigurationError):
            MpsiPublicParams(Modulus.of(7), 2, 2)

    def test_parties_and_sizes(self):
        with pytest.raises(ConfigurationError):
            MpsiPublicParams(Modulus.of(101), 1, 2)
        with pytest.raises(ConfigurationError):
            MpsiPublicParams(Modulus.of(101), 2, 0)

    def test_points(self):
        m = Modulus.of(101)
        with pytest.raises(ConfigurationError):
            MpsiPublicParams(m, 2, 1, points=(1, 2, 3))
        with pytest.raises(ConfigurationError):
            MpsiPublicParams(m, 2, 1, points=(1, 2, 2, 3))
        with pytest.raises(ConfigurationError):
            MpsiPublicParams(m, 2, 1, points=(1, 2, 3, 101))

    def test_u_policy(self):
        with pytest.raises(ConfigurationError):
            MpsiPublicParams(Modulus.of(101), 2, 1, u_degree="n")

    def test_inputs(self):
        params = MpsiPublicParams(Modulus.of(101), 2, 2)
        with pytest.raises(ConfigurationError):
            validate_inputs([PartyInput.of(1, [1, 2])], params)
        with pytest.raises(ConfigurationError):
            validate_inputs([PartyInput.of(1, [1, 2]), PartyInput.of(2, [1])], params)
        with pytest.raises(ConfigurationError):
            validate_inputs([PartyInput.of(1, [1, 2]), PartyInput.of(2, [1, 200])], params)
        with pytest.raises(ConfigurationError):
            PartyInput.of(1, [4, 4])

    def test_party_ids(self):
        params = MpsiPublicParams(Modulus.of(101), 2, 1)
        with pytest.raises(ConfigurationError):
            run_mpsi([PartyInput.of(1, [1]), PartyInput.of(3, [1])], params, SeededRng(0))
