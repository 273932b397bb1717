"""
Individual rationality, blocking and stability of allocations.

The full stable set is found by brute force over every allocation of the market (markets here are
desk-sized), while the two deferred acceptance processes give the extremes of the stable lattice
directly:
    doctor_proposing_da - the doctor-optimal stable allocation
    hospital_proposing_da - the hospital-optimal (doctor-pessimal) stable allocation
"""
from dataclasses import dataclass
from typing import Callable

from .log import LOGGER
from .market import Market, Profile, Allocation, Contract, Preference, prefers, enumerate_allocations, \
    assigned_contract


def _pref_of(agent: str, profile: Profile, market: Market) -> Preference:
    # Doctors' preferences come from the profile, hospitals' are fixed by the market
    if agent in market.hospitals:
        return market.hospital_preference(agent)
    return profile.of(agent)


def is_individually_rational(allocation: Allocation, profile: Profile, market: Market) -> bool:
    """
    @return: True iff every contract in the allocation is acceptable to both its doctor and its hospital
    """
    return all(profile.of(c.doctor).is_acceptable(c.id) and
               market.hospital_preference(c.hospital).is_acceptable(c.id)
               for c in allocation)


def _blocks(contract: Contract, allocation: Allocation, profile: Profile, market: Market) -> bool:
    return (contract not in allocation and
            prefers(profile.of(contract.doctor), contract.id, assigned_contract(allocation, contract.doctor)) and
            prefers(market.hospital_preference(contract.hospital), contract.id,
                    assigned_contract(allocation, contract.hospital)))


def blocking_contracts(allocation: Allocation, profile: Profile, market: Market) -> frozenset[str]:
    """
    @return: ids of the contracts outside the allocation that both their doctor and their hospital
        strictly prefer to their current assignment
    """
    return frozenset(c.id for c in market.contracts if _blocks(c, allocation, profile, market))


def is_stable(allocation: Allocation, profile: Profile, market: Market) -> bool:
    """Individually rational and not blocked by any contract"""
    return (is_individually_rational(allocation, profile, market) and
            not any(_blocks(c, allocation, profile, market) for c in market.contracts))


@dataclass(frozen=True)
class StableSet:
    """
    Every stable allocation of a market under a doctor profile, in canonical order
    """
    market: Market
    profile: Profile
    allocations: tuple[Allocation, ...]

    def __post_init__(self):
        # The stable set of a market with contracts is never empty
        assert self.allocations, "Empty stable set"

    @property
    def k(self) -> int:
        return len(self.allocations)

    def __len__(self):
        return len(self.allocations)

    def __iter__(self):
        return iter(self.allocations)

    def __contains__(self, allocation: Allocation) -> bool:
        return allocation in self.allocations

    def _unanimous_best(self, agents: tuple[str, ...]) -> Allocation:
        # The member that every one of the agents weakly prefers to every other member
        for candidate in self.allocations:
            if all(not prefers(_pref_of(agent, self.profile, self.market),
                               assigned_contract(other, agent), assigned_contract(candidate, agent))
                   for other in self.allocations for agent in agents):
                return candidate
        raise AssertionError("Stable set has no unanimously preferred extreme")

    @property
    def doctor_optimal(self) -> Allocation:
        return self._unanimous_best(self.market.doctors)

    @property
    def hospital_optimal(self) -> Allocation:
        return self._unanimous_best(self.market.hospitals)


def enumerate_stable(profile: Profile, market: Market) -> StableSet:
    """
    @return: StableSet with every stable allocation (canonical order)
    """
    market.check_profile(profile)
    return StableSet(market, profile,
                     tuple(y for y in enumerate_allocations(market) if is_stable(y, profile, market)))


def _deferred_acceptance(proposers: tuple[str, ...], ranking_of: Callable[[str], tuple[str, ...]],
                         receiver_of: Callable[[Contract], str], receiver_pref: Callable[[str], Preference],
                         market: Market) -> Allocation:
    # Every round, each proposer without a held offer offers its best contract that was not yet
    # rejected; each receiver holds its best acceptable offer and rejects the rest.
    # A proposer that runs out of contracts stays unmatched.
    next_choice = dict.fromkeys(proposers, 0)
    held: dict[str, Contract] = {}
    holding = set()
    rounds = 0
    moved = True
    while moved:
        moved = False
        rounds += 1
        for proposer in proposers:
            ranking = ranking_of(proposer)
            if proposer in holding or next_choice[proposer] >= len(ranking):
                continue
            contract = market.contract(ranking[next_choice[proposer]])
            next_choice[proposer] += 1
            moved = True
            receiver = receiver_of(contract)
            pref = receiver_pref(receiver)
            current = held.get(receiver)
            if not pref.is_acceptable(contract.id):
                continue
            if current is not None:
                if not prefers(pref, contract.id, current.id):
                    continue
                # The previously held offer is rejected
                holding.discard(_proposer_of(current, proposers))
            held[receiver] = contract
            holding.add(proposer)
    LOGGER.debug(f"Deferred acceptance finished after {rounds} rounds")
    return Allocation(frozenset(held.values()))


def _proposer_of(contract: Contract, proposers: tuple[str, ...]) -> str:
    return contract.doctor if contract.doctor in proposers else contract.hospital


def doctor_proposing_da(profile: Profile, market: Market) -> Allocation:
    """
    Doctors propose (in roster order each round), hospitals hold.

    @return: the doctor-optimal stable allocation
    """
    market.check_profile(profile)
    return _deferred_acceptance(market.doctors, lambda d: profile.of(d).ranking,
                                lambda c: c.hospital, market.hospital_preference, market)


def hospital_proposing_da(profile: Profile, market: Market) -> Allocation:
    """
    Hospitals propose (in roster order each round), doctors hold.

    @return: the hospital-optimal stable allocation
    """
    market.check_profile(profile)
    return _deferred_acceptance(market.hospitals, lambda h: market.hospital_preference(h).ranking,
                                lambda c: c.doctor, profile.of, market)
