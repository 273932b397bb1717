"""
The market family on which every quantile stable mechanism with q > 0 is obviously manipulable.

Two doctors and two hospitals. Doctor d1 and hospital h1 share k contracts x1..xk that they rank in opposite
orders (d1: x1 > ... > xk, h1: xk > ... > x1), and d2 and h2 share a single contract w. With ceil(kq) = 2
the mechanism hands d1 the contract x2 whatever d2 reports; declaring only x1 acceptable collapses the stable
set and secures x1 instead - better in the worst case, hence obvious.
"""
from fractions import Fraction
from dataclasses import dataclass

from .common import QsmException
from .market import Market, Preference
from .mechanisms import parse_quantile, quantile_index, format_quantile


class QsmCounterexampleException(QsmException):
    """Indicates that (k, q) does not satisfy ceil(kq) = 2"""


@dataclass(frozen=True)
class CounterexampleMarket:
    """The generated market, d1's true preference and obvious manipulation, and d2's truthful preference"""
    market: Market
    truth: Preference
    report: Preference
    other: Preference
    k: int
    q: Fraction

    @property
    def profile(self):
        return self.market.profile({"d1": self.truth.ranking, "d2": self.other.ranking})


def minimal_k_for(q: Fraction | str) -> int:
    """
    @return: the smallest k >= 2 with ceil(kq) = 2, for q in (0, 1]
    """
    q = parse_quantile(q)
    if q == 0:
        raise QsmCounterexampleException("No k satisfies ceil(kq) = 2 for q = 0")
    k = 2
    # ceil(kq) grows by at most one per step, and reaches 2 no later than k = ceil(2/q)
    while quantile_index(k, q) < 2:
        k += 1
    return k


def theorem1_market(k: int, q: Fraction | str) -> CounterexampleMarket:
    """
    Build the counterexample market for (k, q).

    @param k: number of contracts between d1 and h1 (k >= 2)
    @param q: quantile in (0, 1] with ceil(kq) = 2
    """
    q = parse_quantile(q)
    if k < 2 or quantile_index(k, q) != 2:
        hint = f"; the smallest valid k for q={format_quantile(q)} is {minimal_k_for(q)}" if q > 0 else ""
        raise QsmCounterexampleException(
            f"ceil(k*q) must equal 2, got k={k}, q={format_quantile(q)}{hint}")
    xs = [f"x{t}" for t in range(1, k + 1)]
    market = Market.build(
        doctors=["d1", "d2"],
        hospitals=["h1", "h2"],
        contracts=[(x, "d1", "h1") for x in xs] + [("w", "d2", "h2")],
        hospital_rankings={"h1": list(reversed(xs)), "h2": ["w"]},
    )
    return CounterexampleMarket(market,
                                truth=market.preference("d1", xs),
                                report=market.preference("d1", xs[:1]),
                                other=market.preference("d2", ["w"]),
                                k=k, q=q)
