from fractions import Fraction

import pytest

from .. import QsmCounterexampleException, QsmMechanismException, Mechanism, QsmAnalyzer, OmCondition, Property, \
    certify, prefers, theorem1_market, minimal_k_for, enumerate_stable, DOCTOR_DA, INTERIOR
from ..market_file import parse_market, serialize_market
from ..log import disable_logging

disable_logging()

QUANTILES = ["1/4", "1/3", "1/2", "2/3", "3/4", "1"]


class TestTheorem1Market:

    @pytest.mark.parametrize("q, expected", [("1", 2), ("1/2", 3), ("1/4", 5), ("1/3", 4), ("2/3", 2),
                                             ("3/4", 2), ("1/10", 11)])
    def test_minimal_k_for(self, q, expected):
        assert minimal_k_for(q) == expected

    def test_minimal_k_for_zero(self):
        with pytest.raises(QsmCounterexampleException):
            minimal_k_for("0")
        with pytest.raises(QsmMechanismException):
            minimal_k_for("5/4")

    def test_market_shape(self):
        instance = theorem1_market(2, "1")
        market = instance.market
        assert [c.id for c in market.contracts] == ["x1", "x2", "w"]
        assert market.hospital_preference("h1").ranking == ("x2", "x1")
        assert market.hospital_preference("h2").ranking == ("w",)
        assert instance.truth.ranking == ("x1", "x2")
        assert instance.report.ranking == ("x1",)
        assert instance.profile.of("d2").ranking == ("w",)
        assert instance.q == Fraction(1)

    def test_market_file(self):
        instance = theorem1_market(3, "1/2")
        market_file = parse_market(serialize_market(instance.market, instance.profile))
        assert market_file.market == instance.market
        assert market_file.profile == instance.profile

    @pytest.mark.parametrize("k, q", [(3, "1/2"), (4, "1/2"), (5, "1/4"), (2, "2/3")])
    def test_valid_parameters(self, k, q):
        assert len(theorem1_market(k, q).market.contracts) == k + 1

    @pytest.mark.parametrize("k, q, hint", [(2, "1/4", "is 5"), (6, "1/2", "is 3"), (1, "1", "is 2"),
                                            (3, "0", r"got k=3, q=0/1$")])
    def test_invalid_parameters(self, k, q, hint):
        with pytest.raises(QsmCounterexampleException, match=hint):
            theorem1_market(k, q)

    def test_stable_set(self):
        instance = theorem1_market(4, "1/2")
        stable_set = enumerate_stable(instance.profile, instance.market)
        assert [instance.market.format_allocation(y) for y in stable_set] == \
               ["{x1,w}", "{x2,w}", "{x3,w}", "{x4,w}"]


class TestTheorem1Reproduction:

    @pytest.mark.parametrize("q", QUANTILES)
    def test_obvious_manipulation(self, q):
        k = minimal_k_for(q)
        instance = theorem1_market(k, q)
        analyzer = QsmAnalyzer(Mechanism.quantile(q), instance.market)
        verdict = analyzer.is_obvious_manipulation("d1", instance.truth, instance.report)
        assert verdict.truth_options.outcomes == ("x2",)
        assert verdict.report_options.outcomes == ("x1",)
        # The worst case strictly improves
        assert verdict.condition in (OmCondition.WORST_CASE, OmCondition.BOTH)
        assert prefers(instance.truth, verdict.worst_report, verdict.worst_truth)
        assert verdict.is_manipulation
        assert verdict.is_obvious

    @pytest.mark.parametrize("q", QUANTILES)
    def test_quantile_fails_nom(self, q):
        instance = theorem1_market(minimal_k_for(q), q)
        certificate = certify(Mechanism.quantile(q), instance.market, Property.NOM)
        assert not certificate.passed
        ce = certificate.counterexample
        assert ce.doctor == "d1"
        assert ce.truth == instance.truth
        assert ce.report == instance.report

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_doctor_da_passes(self, k):
        instance = theorem1_market(k, "1/2" if k > 2 else "1")
        assert certify(Mechanism.quantile(0), instance.market, Property.NOM).passed
        assert certify(DOCTOR_DA, instance.market, Property.SP).passed

    @pytest.mark.parametrize("k", [3, 4])
    def test_interior_fails_nom(self, k):
        instance = theorem1_market(k, "1/2")
        assert enumerate_stable(instance.profile, instance.market).k >= 3
        analyzer = QsmAnalyzer(INTERIOR, instance.market)
        verdict = analyzer.is_obvious_manipulation("d1", instance.truth, instance.report)
        assert verdict.is_obvious
        certificate = analyzer.certify(Property.NOM)
        assert not certificate.passed
        assert certificate.counterexample.report == instance.report
