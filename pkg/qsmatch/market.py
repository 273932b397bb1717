"""
The market data model: contracts, hospital and doctor preferences, profiles and allocations.

All the types here are immutable and hashable, so they may be used as cache keys and shared
between worker processes. Agents and contracts are identified by symbolic tokens; every market
keeps a dense index of its contracts (roster order) which defines the canonical order used
throughout the package.

Exposes, in addition to the types:
    assigned_contract - the contract an agent signs in an allocation (or None)
    prefers - strict preference between two outcomes
    enumerate_preferences - the full preference domain of a doctor
    preference_domain_size - the size of that domain, without building it
    enumerate_allocations - every allocation of a market, in canonical order
"""
import math
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .common import QsmException, EMPTY_TOKEN, format_outcome, is_token

# An outcome for a single agent: a contract id, or None for the empty outcome
Outcome = str | None


class QsmMarketException(QsmException):
    """Represents an invalid market, preference, profile or allocation"""


@dataclass(frozen=True)
class Contract:
    """
    A bilateral agreement between exactly one doctor and one hospital
    """
    id: str
    doctor: str
    hospital: str

    def involves(self, agent: str) -> bool:
        return agent == self.doctor or agent == self.hospital

    def __str__(self):
        return f"{self.id} = ({self.doctor}, {self.hospital})"


@dataclass(frozen=True)
class Preference:
    """
    A strict ranking of an agent's own contracts.

    'ranking' lists the acceptable contracts, best first. The empty outcome sits right after the
    last listed contract, and every contract of 'domain' (all the owner's contracts, in market
    roster order) that is not listed is unacceptable. Unacceptable contracts are ordered among
    themselves by their roster order, which makes the relation a strict total order.
    """
    owner: str
    ranking: tuple[str, ...]
    domain: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.ranking)) != len(self.ranking):
            raise QsmMarketException(f"Duplicate contract in the ranking of {self.owner!r}: {self}")
        for contract_id in self.ranking:
            if contract_id not in self._domain_set:
                raise QsmMarketException(f"Contract {contract_id!r} does not involve {self.owner!r}")

    @cached_property
    def _domain_set(self) -> frozenset[str]:
        return frozenset(self.domain)

    @cached_property
    def _ranks(self) -> dict[Outcome, int]:
        ranks = {contract_id: i for i, contract_id in enumerate(self.ranking)}
        ranks[None] = len(self.ranking)
        unacceptable = (c for c in self.domain if c not in ranks)
        for i, contract_id in enumerate(unacceptable, start=len(self.ranking) + 1):
            ranks[contract_id] = i
        return ranks

    def rank(self, outcome: Outcome) -> int:
        """
        @return: the position of the outcome in the full order (0 is best)
        """
        try:
            return self._ranks[outcome]
        except KeyError:
            raise QsmMarketException(f"Contract {outcome!r} does not involve {self.owner!r}") from None

    def is_acceptable(self, outcome: Outcome) -> bool:
        """Strictly preferred to the empty outcome"""
        return self.rank(outcome) < len(self.ranking)

    def __str__(self):
        return ">".join(self.ranking)


def prefers(p: Preference, a: Outcome, b: Outcome) -> bool:
    """
    @return: True iff outcome a is strictly better than outcome b under p
    """
    return p.rank(a) < p.rank(b)


@dataclass(frozen=True)
class Profile:
    """
    One preference per doctor, in the market's doctor roster order
    """
    prefs: tuple[Preference, ...]

    @cached_property
    def _by_owner(self) -> dict[str, Preference]:
        return {pref.owner: pref for pref in self.prefs}

    @property
    def doctors(self) -> tuple[str, ...]:
        return tuple(pref.owner for pref in self.prefs)

    def of(self, doctor: str) -> Preference:
        try:
            return self._by_owner[doctor]
        except KeyError:
            raise QsmMarketException(f"Profile has no preference for {doctor!r}") from None

    def replace(self, pref: Preference) -> "Profile":
        """A new profile with the owner's preference replaced"""
        self.of(pref.owner)
        return Profile(tuple(pref if p.owner == pref.owner else p for p in self.prefs))

    def without(self, doctor: str) -> tuple[Preference, ...]:
        """The subprofile of every other doctor"""
        return tuple(p for p in self.prefs if p.owner != doctor)

    def __str__(self):
        return ", ".join(f"{p.owner}: {p}" for p in self.prefs)


@dataclass(frozen=True)
class Allocation:
    """
    A set of contracts in which no doctor and no hospital appears twice
    """
    contracts: frozenset[Contract] = frozenset()

    def __post_init__(self):
        doctors = {c.doctor for c in self.contracts}
        hospitals = {c.hospital for c in self.contracts}
        if len(doctors) != len(self.contracts) or len(hospitals) != len(self.contracts):
            raise QsmMarketException(
                f"Not an allocation - an agent signs more than one of {sorted(self.ids)}")

    @cached_property
    def _by_agent(self) -> dict[str, Contract]:
        by_agent = {c.doctor: c for c in self.contracts}
        by_agent.update({c.hospital: c for c in self.contracts})
        return by_agent

    @property
    def ids(self) -> frozenset[str]:
        return frozenset(c.id for c in self.contracts)

    def assigned(self, agent: str) -> Contract | None:
        return self._by_agent.get(agent)

    def __contains__(self, contract: Contract) -> bool:
        return contract in self.contracts

    def __iter__(self):
        return iter(self.contracts)

    def __len__(self):
        return len(self.contracts)


def assigned_contract(allocation: Allocation, agent: str) -> Outcome:
    """
    @return: the id of the only contract in the allocation involving the agent, or None
    """
    contract = allocation.assigned(agent)
    return contract.id if contract is not None else None


@dataclass(frozen=True)
class Market:
    """
    The universal contract set, the agent rosters and the fixed, public hospital preferences
    (one per hospital, in hospital roster order).
    """
    doctors: tuple[str, ...]
    hospitals: tuple[str, ...]
    contracts: tuple[Contract, ...]
    hospital_prefs: tuple[Preference, ...]

    def __post_init__(self):
        for roster_name, roster in [("doctor", self.doctors), ("hospital", self.hospitals),
                                    ("contract", [c.id for c in self.contracts])]:
            if len(set(roster)) != len(roster):
                raise QsmMarketException(f"Duplicate {roster_name} id in {list(roster)}")
            for name in roster:
                if not is_token(name):
                    raise QsmMarketException(f"Invalid {roster_name} id {name!r}")
        if set(self.doctors) & set(self.hospitals):
            raise QsmMarketException("Doctors and hospitals must be disjoint")
        for contract in self.contracts:
            if contract.doctor not in self.doctors:
                raise QsmMarketException(f"Contract {contract.id!r} - unknown doctor {contract.doctor!r}")
            if contract.hospital not in self.hospitals:
                raise QsmMarketException(f"Contract {contract.id!r} - unknown hospital {contract.hospital!r}")
        # Exactly one preference per hospital, each over that hospital's own contracts
        if tuple(p.owner for p in self.hospital_prefs) != self.hospitals:
            raise QsmMarketException("Every hospital must have exactly one preference, in roster order")
        for pref in self.hospital_prefs:
            if pref.domain != self.contracts_of(pref.owner):
                raise QsmMarketException(f"Preference domain of {pref.owner!r} does not match its contracts")

    @classmethod
    def build(cls, doctors: Sequence[str], hospitals: Sequence[str],
              contracts: Iterable[tuple[str, str, str]],
              hospital_rankings: Mapping[str, Sequence[str]]) -> "Market":
        """
        Convenience constructor from plain values.

        @param contracts: (contract id, doctor, hospital) triples, in roster order
        @param hospital_rankings: hospital -> acceptable contract ids, best first (missing means none)
        """
        contracts = tuple(Contract(*c) for c in contracts)
        unknown = set(hospital_rankings) - set(hospitals)
        if unknown:
            raise QsmMarketException(f"Unknown hospital(s) {sorted(unknown)}")
        hospital_prefs = tuple(
            Preference(h, tuple(hospital_rankings.get(h, ())), tuple(c.id for c in contracts if c.hospital == h))
            for h in hospitals)
        return cls(tuple(doctors), tuple(hospitals), contracts, hospital_prefs)

    @cached_property
    def _contract_by_id(self) -> dict[str, Contract]:
        return {c.id: c for c in self.contracts}

    @cached_property
    def _contract_index(self) -> dict[str, int]:
        return {c.id: i for i, c in enumerate(self.contracts)}

    @cached_property
    def _contracts_of(self) -> dict[str, tuple[str, ...]]:
        by_agent = {agent: [] for agent in self.doctors + self.hospitals}
        for c in self.contracts:
            by_agent[c.doctor].append(c.id)
            by_agent[c.hospital].append(c.id)
        return {agent: tuple(ids) for agent, ids in by_agent.items()}

    @cached_property
    def _hospital_pref_by_owner(self) -> dict[str, Preference]:
        return {p.owner: p for p in self.hospital_prefs}

    def contract(self, contract_id: str) -> Contract:
        try:
            return self._contract_by_id[contract_id]
        except KeyError:
            raise QsmMarketException(f"Unknown contract {contract_id!r}") from None

    def contracts_of(self, agent: str) -> tuple[str, ...]:
        """
        @return: the ids of every contract involving the agent, in roster order
        """
        try:
            return self._contracts_of[agent]
        except KeyError:
            raise QsmMarketException(f"Unknown agent {agent!r}") from None

    def hospital_preference(self, hospital: str) -> Preference:
        try:
            return self._hospital_pref_by_owner[hospital]
        except KeyError:
            raise QsmMarketException(f"Unknown hospital {hospital!r}") from None

    def preference(self, owner: str, ranking: Sequence[str]) -> Preference:
        """Build a preference of the given agent from its acceptable contracts, best first"""
        return Preference(owner, tuple(ranking), self.contracts_of(owner))

    def profile(self, rankings: Mapping[str, Sequence[str]]) -> Profile:
        """
        @param rankings: a ranking for every doctor in the roster (and only for them)
        """
        if set(rankings) != set(self.doctors):
            raise QsmMarketException(
                f"A profile must cover exactly the doctors {list(self.doctors)}, got {sorted(rankings)}")
        return Profile(tuple(self.preference(d, rankings[d]) for d in self.doctors))

    def check_profile(self, profile: Profile):
        if profile.doctors != self.doctors:
            raise QsmMarketException(
                f"Profile covers {list(profile.doctors)} instead of the doctors {list(self.doctors)}")

    def allocation(self, contract_ids: Iterable[str]) -> Allocation:
        return Allocation(frozenset(self.contract(cid) for cid in contract_ids))

    def sort_key(self, allocation: Allocation) -> tuple[int, tuple[int, ...]]:
        """Canonical order: by size, then by the sorted roster positions of the members"""
        return len(allocation), tuple(sorted(self._contract_index[c.id] for c in allocation))

    def ordered_ids(self, allocation: Allocation) -> list[str]:
        return sorted(allocation.ids, key=self._contract_index.__getitem__)

    def format_allocation(self, allocation: Allocation) -> str:
        if not allocation:
            return EMPTY_TOKEN
        return "{" + ",".join(self.ordered_ids(allocation)) + "}"

    def format_assignment(self, allocation: Allocation) -> str:
        """Each doctor's outcome, e.g. 'd1:x2 d2:w'"""
        return " ".join(f"{d}:{format_outcome(assigned_contract(allocation, d))}" for d in self.doctors)


def enumerate_preferences(market: Market, doctor: str) -> list[Preference]:
    """
    The full preference domain of a doctor: every strict ranking of every subset of its contracts.
    Ordered by the number of acceptable contracts, then lexicographically by roster position.
    """
    domain = market.contracts_of(doctor)
    return [Preference(doctor, ranking, domain)
            for size in range(len(domain) + 1)
            for ranking in itertools.permutations(domain, size)]


def preference_domain_size(market: Market, doctor: str) -> int:
    """Number of preferences enumerate_preferences would return: sum over s of n!/(n-s)!"""
    n = len(market.contracts_of(doctor))
    return sum(math.perm(n, s) for s in range(n + 1))


def enumerate_allocations(market: Market) -> list[Allocation]:
    """
    Every allocation of the market in canonical order (see Market.sort_key)
    """
    found = []

    def extend(start: int, chosen: list[Contract], doctors: set[str], hospitals: set[str]):
        found.append(Allocation(frozenset(chosen)))
        for i in range(start, len(market.contracts)):
            c = market.contracts[i]
            if c.doctor in doctors or c.hospital in hospitals:
                continue
            chosen.append(c)
            doctors.add(c.doctor)
            hospitals.add(c.hospital)
            extend(i + 1, chosen, doctors, hospitals)
            chosen.pop()
            doctors.remove(c.doctor)
            hospitals.remove(c.hospital)

    extend(0, [], set(), set())
    return sorted(found, key=market.sort_key)
