"""
Market generators for exhaustive and randomized checks:
    small_market_suite - every 2x2 market with up to a few contracts and every hospital preference
    random_market - a random market along with a random doctor profile
"""
import random
import itertools
from typing import Iterator

from .market import Market, Profile, Preference


def _all_rankings(domain: tuple[str, ...]) -> list[tuple[str, ...]]:
    return [ranking for size in range(len(domain) + 1) for ranking in itertools.permutations(domain, size)]


def small_market_suite(max_contracts: int = 3, doctors: tuple[str, ...] = ("d1", "d2"),
                       hospitals: tuple[str, ...] = ("h1", "h2")) -> Iterator[Market]:
    """
    Every market over the given rosters with at most max_contracts contracts (any number of them per
    doctor-hospital pair), combined with every choice of hospital preferences.
    Contracts are named c1, c2, ... in the order of the pairs they bind.
    """
    pairs = list(itertools.product(doctors, hospitals))
    for size in range(max_contracts + 1):
        for chosen_pairs in itertools.combinations_with_replacement(pairs, size):
            contracts = [(f"c{i}", d, h) for i, (d, h) in enumerate(chosen_pairs, start=1)]
            domains = [tuple(cid for cid, _, ch in contracts if ch == h) for h in hospitals]
            for rankings in itertools.product(*(_all_rankings(domain) for domain in domains)):
                yield Market.build(doctors, hospitals, contracts, dict(zip(hospitals, rankings)))


def _random_ranking(rng: random.Random, domain: tuple[str, ...], truncate: bool) -> tuple[str, ...]:
    ranking = list(domain)
    rng.shuffle(ranking)
    if truncate:
        ranking = ranking[:rng.randint(0, len(ranking))]
    return tuple(ranking)


def random_market(rng: random.Random, max_doctors: int = 3, max_hospitals: int = 3, max_contracts: int = 8,
                  truncate: bool = True) -> tuple[Market, Profile]:
    """
    Draw a random market and a random doctor profile.

    @param truncate: if True, some contracts are randomly made unacceptable (for both sides)
    """
    doctors = [f"d{i}" for i in range(1, rng.randint(1, max_doctors) + 1)]
    hospitals = [f"h{i}" for i in range(1, rng.randint(1, max_hospitals) + 1)]
    contracts = [(f"x{i}", rng.choice(doctors), rng.choice(hospitals))
                 for i in range(1, rng.randint(0, max_contracts) + 1)]
    hospital_rankings = {}
    for h in hospitals:
        domain = tuple(cid for cid, _, ch in contracts if ch == h)
        hospital_rankings[h] = _random_ranking(rng, domain, truncate)
    market = Market.build(doctors, hospitals, contracts, hospital_rankings)
    profile = market.profile({d: _random_ranking(rng, market.contracts_of(d), truncate) for d in doctors})
    return market, profile


def random_preference(rng: random.Random, market: Market, doctor: str) -> Preference:
    """A random subset of the doctor's contracts, in random order"""
    return market.preference(doctor, _random_ranking(rng, market.contracts_of(doctor), truncate=True))
