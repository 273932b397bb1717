import random
import itertools

import pytest
from hypothesis import given, settings, strategies as st

from .. import Market, Allocation, QsmMarketException, QsmParseException, assigned_contract, prefers, \
    enumerate_preferences, preference_domain_size, enumerate_allocations, parse_market, parse_ranking, \
    serialize_market, market_digest, load_market
from ..market_file import MarketFile
from ..generators import random_market, random_preference
from ..log import disable_logging

disable_logging()

THEOREM1_K2 = """\
# d1 and h1 disagree on x1 and x2
doctors: d1 d2
hospitals: h1 h2
contract x1 = (d1, h1)
contract x2 = (d1, h1)
contract w  = (d2, h2)
hospital h1 : x2 > x1
hospital h2 : w
doctor d1 : x1 > x2
doctor d2 : w
"""


def market_with_contracts(n: int) -> Market:
    return Market.build(["d1"], ["h1"], [(f"x{i}", "d1", "h1") for i in range(1, n + 1)], {})


class TestMarketFile:

    def test_parse_theorem1_market(self):
        market_file = parse_market(THEOREM1_K2)
        market = market_file.market
        assert market.doctors == ("d1", "d2")
        assert market.hospitals == ("h1", "h2")
        assert [c.id for c in market.contracts] == ["x1", "x2", "w"]
        assert market.contract("w").doctor == "d2"
        assert market.hospital_preference("h1").ranking == ("x2", "x1")
        assert market_file.profile.of("d1").ranking == ("x1", "x2")
        assert market_file.profile.of("d2").ranking == ("w",)

    def test_doctor_lines_are_optional(self):
        text = "\n".join(line for line in THEOREM1_K2.splitlines() if not line.startswith("doctor "))
        assert parse_market(text).profile is None

    def test_empty_market(self):
        market_file = parse_market("doctors:\nhospitals:\n")
        assert market_file.market.doctors == ()
        assert market_file.market.contracts == ()
        assert enumerate_allocations(market_file.market) == [Allocation()]

    def test_empty_rankings(self):
        market_file = parse_market("doctors: d1 d2\nhospitals: h1\ncontract x = (d1, h1)\n"
                                   "hospital h1 :\ndoctor d1 : x\ndoctor d2 :\n")
        assert market_file.market.hospital_preference("h1").ranking == ()
        assert market_file.profile.of("d2").ranking == ()

    def test_ranking_of_foreign_contract(self):
        text = THEOREM1_K2.replace("hospital h2 : w", "hospital h2 : x1")
        with pytest.raises(QsmParseException) as exc_info:
            parse_market(text)
        line_no = text.splitlines().index("hospital h2 : x1") + 1
        assert exc_info.value.line == line_no
        assert exc_info.value.column == len("hospital h2 : ") + 1
        assert "does not involve" in str(exc_info.value)

    @pytest.mark.parametrize("old, new, message", [
        ("contract w  = (d2, h2)", "contract w  = (d2, h3)", "Unknown hospital"),
        ("contract w  = (d2, h2)", "contract w  = (d3, h2)", "Unknown doctor"),
        ("contract w  = (d2, h2)", "contract x1 = (d2, h2)", "Duplicate contract id"),
        ("hospital h2 : w", "hospital h2 : w > v", "Unknown contract"),
        ("hospital h2 : w", "", "Missing 'hospital' line"),
        ("doctor d2 : w", "", "Missing 'doctor' line"),
        ("doctor d2 : w", "doctor d3 : w", "Unknown doctor"),
        ("hospital h1 : x2 > x1", "hospital h1 : x2 > x2", "Duplicate contract"),
        ("doctors: d1 d2", "doctors: d1 d2 d1", "Duplicate doctor"),
        ("contract x1 = (d1, h1)", "contract x1 (d1, h1)", "Unrecognized line"),
        ("doctor d1 : x1 > x2", "doctor d1 : x1 >> x2", "Invalid contract id"),
    ])
    def test_parse_errors(self, old, new, message):
        assert old in THEOREM1_K2
        with pytest.raises(QsmParseException, match=message):
            parse_market(THEOREM1_K2.replace(old, new))

    def test_syntax_error_position(self):
        with pytest.raises(QsmParseException) as exc_info:
            parse_market("doctors: d1\nhospitals: h1\n   what is this\n")
        assert (exc_info.value.line, exc_info.value.column) == (3, 4)
        assert str(exc_info.value).startswith("line 3, column 4:")

    def test_load_non_utf8(self, tmp_path):
        path = tmp_path / "market.txt"
        path.write_bytes(b"doctors: d1\n\xff\xfe\n")
        with pytest.raises(QsmParseException, match="not UTF-8 text"):
            load_market(str(path))

    def test_missing_rosters(self):
        with pytest.raises(QsmParseException, match="doctors"):
            parse_market("hospitals: h1\nhospital h1 :\n")
        with pytest.raises(QsmParseException, match="hospitals"):
            parse_market("doctors: d1\n")

    def test_parse_ranking(self):
        market = parse_market(THEOREM1_K2).market
        assert parse_ranking(market, "d1", "x2 > x1").ranking == ("x2", "x1")
        assert parse_ranking(market, "d1", "").ranking == ()
        with pytest.raises(QsmMarketException):
            parse_ranking(market, "d1", "w")
        with pytest.raises(QsmMarketException):
            parse_ranking(market, "d1", "x3")

    def test_serialize(self):
        market_file = parse_market(THEOREM1_K2)
        text = serialize_market(market_file.market, market_file.profile)
        assert "hospital h1 : x2 > x1" in text.splitlines()
        assert parse_market(text) == market_file
        # The digest ignores comments and layout
        assert market_digest(market_file.market) == market_digest(parse_market(text).market)


class TestMarketModel:

    @pytest.mark.parametrize("allocation, agent, expected", [
        (["x2", "w"], "d1", "x2"),
        ([], "d1", None),
        (["w"], "d1", None),
        (["w"], "h2", "w"),
    ])
    def test_assigned_contract(self, allocation, agent, expected):
        market = parse_market(THEOREM1_K2).market
        assert assigned_contract(market.allocation(allocation), agent) == expected

    def test_prefers(self):
        market = parse_market(THEOREM1_K2).market
        truth = market.preference("d1", ["x1", "x2"])
        report = market.preference("d1", ["x1"])
        assert prefers(truth, "x1", "x2")
        assert prefers(truth, "x2", None)
        assert prefers(report, None, "x2")
        assert not prefers(report, "x1", "x1")
        assert report.is_acceptable("x1") and not report.is_acceptable("x2")
        with pytest.raises(QsmMarketException):
            prefers(truth, "w", "x1")

    def test_invalid_allocation(self):
        market = parse_market(THEOREM1_K2).market
        with pytest.raises(QsmMarketException):
            market.allocation(["x1", "x2"])

    def test_invalid_market(self):
        with pytest.raises(QsmMarketException, match="disjoint"):
            Market.build(["a"], ["a"], [], {})
        with pytest.raises(QsmMarketException, match="unknown doctor"):
            Market.build(["d1"], ["h1"], [("x", "d2", "h1")], {})
        with pytest.raises(QsmMarketException, match="Unknown hospital"):
            Market.build(["d1"], ["h1"], [], {"h2": []})
        with pytest.raises(QsmMarketException, match="Invalid contract id"):
            Market.build(["d1"], ["h1"], [("x-1", "d1", "h1")], {})

    def test_profile_must_cover_roster(self):
        market = parse_market(THEOREM1_K2).market
        with pytest.raises(QsmMarketException):
            market.profile({"d1": ["x1"]})

    @pytest.mark.parametrize("n, expected", [(0, 1), (1, 2), (2, 5), (3, 16), (4, 65)])
    def test_enumerate_preferences_count(self, n, expected):
        prefs = enumerate_preferences(market_with_contracts(n), "d1")
        assert len(prefs) == expected
        assert len(set(prefs)) == expected
        assert prefs[0].ranking == ()
        assert preference_domain_size(market_with_contracts(n), "d1") == expected

    def test_enumerate_preferences_order(self):
        prefs = enumerate_preferences(market_with_contracts(2), "d1")
        assert [p.ranking for p in prefs] == [(), ("x1",), ("x2",), ("x1", "x2"), ("x2", "x1")]

    def test_enumerate_allocations(self):
        market = parse_market(THEOREM1_K2).market
        allocations = enumerate_allocations(market)
        assert [market.format_allocation(y) for y in allocations] == \
               ["{}", "{x1}", "{x2}", "{w}", "{x1,w}", "{x2,w}"]

    def test_enumerate_allocations_shared_pair(self):
        market = market_with_contracts(2)
        assert len(enumerate_allocations(market)) == 3

    def test_format_assignment(self):
        market = parse_market(THEOREM1_K2).market
        assert market.format_assignment(market.allocation(["x2", "w"])) == "d1:x2 d2:w"
        assert market.format_assignment(market.allocation([])) == "d1:{} d2:{}"


class TestMarketProperties:

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32))
    def test_allocations_match_power_set(self, seed):
        market, _ = random_market(random.Random(seed), max_contracts=10)
        expected = set()
        for size in range(len(market.contracts) + 1):
            for subset in itertools.combinations(market.contracts, size):
                if len({c.doctor for c in subset}) == size and len({c.hospital for c in subset}) == size:
                    expected.add(frozenset(subset))
        allocations = enumerate_allocations(market)
        assert len(allocations) == len(expected)
        assert {y.contracts for y in allocations} == expected

    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32))
    def test_prefers_is_strict_total_order(self, seed):
        rng = random.Random(seed)
        market, _ = random_market(rng)
        doctor = rng.choice(market.doctors)
        pref = random_preference(rng, market, doctor)
        outcomes = list(market.contracts_of(doctor)) + [None]
        for a in outcomes:
            assert not prefers(pref, a, a)
            for b in outcomes:
                if a != b:
                    assert prefers(pref, a, b) != prefers(pref, b, a)
                for c in outcomes:
                    if prefers(pref, a, b) and prefers(pref, b, c):
                        assert prefers(pref, a, c)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32))
    def test_market_file_round_trip(self, seed):
        market, profile = random_market(random.Random(seed))
        assert parse_market(serialize_market(market, profile)) == MarketFile(market, profile)
        assert parse_market(serialize_market(market)) == MarketFile(market)
