import random

from hypothesis import given, settings, strategies as st

from .. import Market, Allocation, assigned_contract, is_individually_rational, blocking_contracts, is_stable, \
    enumerate_stable, doctor_proposing_da, hospital_proposing_da, theorem1_market
from ..generators import random_market
from ..log import disable_logging

disable_logging()


class TestStability:

    def test_individual_rationality(self):
        instance = theorem1_market(2, "1")
        market = instance.market
        assert is_individually_rational(market.allocation(["x1", "w"]), instance.profile, market)
        assert is_individually_rational(market.allocation([]), instance.profile, market)
        manipulated = instance.profile.replace(instance.report)
        assert not is_individually_rational(market.allocation(["x2"]), manipulated, market)

    def test_blocking_contracts(self):
        instance = theorem1_market(2, "1")
        market, profile = instance.market, instance.profile
        # h1 would rather sign x2, but d1 would not
        assert blocking_contracts(market.allocation(["x1", "w"]), profile, market) == frozenset()
        assert blocking_contracts(market.allocation([]), profile, market) == {"x1", "x2", "w"}
        assert blocking_contracts(market.allocation(["x2"]), profile, market) == {"w"}

    def test_is_stable(self):
        instance = theorem1_market(2, "1")
        market, profile = instance.market, instance.profile
        assert is_stable(market.allocation(["x1", "w"]), profile, market)
        assert is_stable(market.allocation(["x2", "w"]), profile, market)
        assert not is_stable(market.allocation([]), profile, market)
        assert not is_stable(market.allocation(["x1"]), profile, market)

    def test_enumerate_stable_theorem1(self):
        instance = theorem1_market(4, "1/2")
        market = instance.market
        stable_set = enumerate_stable(instance.profile, market)
        assert stable_set.k == 4
        assert [market.format_allocation(y) for y in stable_set] == ["{x1,w}", "{x2,w}", "{x3,w}", "{x4,w}"]
        assert stable_set.doctor_optimal == market.allocation(["x1", "w"])
        assert stable_set.hospital_optimal == market.allocation(["x4", "w"])

    def test_enumerate_stable_manipulated(self):
        instance = theorem1_market(4, "1/2")
        market = instance.market
        stable_set = enumerate_stable(instance.profile.replace(instance.report), market)
        assert list(stable_set) == [market.allocation(["x1", "w"])]

    def test_enumerate_stable_no_contracts(self):
        market = Market.build(["d1", "d2"], ["h1"], [], {})
        stable_set = enumerate_stable(market.profile({"d1": [], "d2": []}), market)
        assert stable_set.k == 1
        assert list(stable_set) == [Allocation()]

    def test_deferred_acceptance_theorem1(self):
        for k in (2, 3, 4):
            instance = theorem1_market(k, "1/2" if k > 2 else "1")
            market = instance.market
            assert assigned_contract(doctor_proposing_da(instance.profile, market), "d1") == "x1"
            assert assigned_contract(hospital_proposing_da(instance.profile, market), "d1") == f"x{k}"
            assert assigned_contract(hospital_proposing_da(instance.profile, market), "d2") == "w"

    def test_deferred_acceptance_empty_ranking(self):
        instance = theorem1_market(2, "1")
        market = instance.market
        profile = market.profile({"d1": [], "d2": ["w"]})
        assert assigned_contract(doctor_proposing_da(profile, market), "d1") is None
        assert assigned_contract(hospital_proposing_da(profile, market), "d1") is None
        assert doctor_proposing_da(profile, market) == market.allocation(["w"])

    def test_deferred_acceptance_no_contracts(self):
        market = Market.build(["d1"], ["h1"], [], {})
        profile = market.profile({"d1": []})
        assert doctor_proposing_da(profile, market) == Allocation()
        assert hospital_proposing_da(profile, market) == Allocation()

    def test_deferred_acceptance_rejection_chain(self):
        # Both doctors want h1 first; h1 prefers d2, so d1 falls back to its contract with h2
        market = Market.build(["d1", "d2"], ["h1", "h2"],
                              [("a", "d1", "h1"), ("b", "d1", "h2"), ("c", "d2", "h1"), ("e", "d2", "h2")],
                              {"h1": ["c", "a"], "h2": ["b", "e"]})
        profile = market.profile({"d1": ["a", "b"], "d2": ["c", "e"]})
        assert doctor_proposing_da(profile, market) == market.allocation(["b", "c"])
        assert hospital_proposing_da(profile, market) == market.allocation(["b", "c"])
        assert enumerate_stable(profile, market).k == 1


class TestStabilityProperties:

    @settings(max_examples=200, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32))
    def test_deferred_acceptance_finds_extremes(self, seed):
        market, profile = random_market(random.Random(seed), max_contracts=6)
        stable_set = enumerate_stable(profile, market)
        doctor_optimal = doctor_proposing_da(profile, market)
        hospital_optimal = hospital_proposing_da(profile, market)
        assert is_stable(doctor_optimal, profile, market)
        assert is_stable(hospital_optimal, profile, market)
        assert doctor_optimal == stable_set.doctor_optimal
        assert hospital_optimal == stable_set.hospital_optimal

    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32))
    def test_stable_set_is_deterministic(self, seed):
        market, profile = random_market(random.Random(seed))
        first = enumerate_stable(profile, market)
        assert enumerate_stable(profile, market) == first
        assert all(not blocking_contracts(y, profile, market) for y in first)
