"""
Matching mechanisms: a mechanism maps every doctor profile of a market to an allocation.

Quantile stable mechanisms select, for a level q in [0, 1], the ceil(k*q)-th quantile stable allocation,
where k is the number of stable allocations under the profile (with ceil(0) taken as 1).
q is always an exact fraction - a floating point ceiling at kq integral would silently change the mechanism.

Mechanisms are described by short strings in reports and on the command line:
    quantile:<num>/<den>, median (= quantile:1/2), interior, da:doctors, da:hospitals
"""
from enum import Enum
from fractions import Fraction
from dataclasses import dataclass

from .common import QsmException
from .market import Market, Profile, Allocation, assigned_contract, QsmMarketException
from .stability import StableSet, enumerate_stable, doctor_proposing_da, hospital_proposing_da


class QsmMechanismException(QsmException):
    """Represents an invalid mechanism, quantile or quantile index"""


class MechanismKind(Enum):
    QUANTILE = "quantile"
    INTERIOR = "interior"
    DOCTOR_DA = "da:doctors"
    HOSPITAL_DA = "da:hospitals"


def parse_quantile(text: str | Fraction | int) -> Fraction:
    """
    Parse an exact quantile such as "1/2" (or "1", "0") and make sure it lies in [0, 1]
    """
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError, TypeError):
        raise QsmMechanismException(f"Invalid quantile {text!r} (expected num/den)") from None
    if not 0 <= q <= 1:
        raise QsmMechanismException(f"Quantile {text} is outside [0, 1]")
    return q

def format_quantile(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def quantile_index(k: int, q: Fraction) -> int:
    """
    @return: j = ceil(k*q) in exact arithmetic, with j = 1 when k*q = 0
    """
    if k < 1:
        raise QsmMechanismException(f"The number of stable allocations must be positive (got {k})")
    q = parse_quantile(q)
    # Integer ceiling of k * num / den
    j = -(-(k * q.numerator) // q.denominator)
    return max(j, 1)

def median_index(k: int) -> int:
    """The median stable allocation: k/2 for even k, (k+1)/2 for odd k"""
    return quantile_index(k, Fraction(1, 2))


def quantile_allocation(stable_set: StableSet, profile: Profile, j: int) -> Allocation:
    """
    The j-th quantile stable allocation: every doctor's j-th best outcome among the stable allocations.

    Each doctor's outcomes are kept as a multiset of exactly k entries (repeated contracts and the empty
    outcome included, the latter at its preference position), so j ranges over 1..k.
    """
    if not 1 <= j <= stable_set.k:
        raise QsmMechanismException(f"Quantile index {j} is outside 1..{stable_set.k}")
    market = stable_set.market
    contracts = []
    for doctor in market.doctors:
        pref = profile.of(doctor)
        outcomes = sorted((assigned_contract(y, doctor) for y in stable_set), key=pref.rank)
        if outcomes[j - 1] is not None:
            contracts.append(market.contract(outcomes[j - 1]))
    try:
        allocation = Allocation(frozenset(contracts))
    except QsmMarketException as e:
        raise AssertionError(f"Quantile allocation {j} is not well defined - {e}") from e
    assert allocation in stable_set, f"Quantile allocation {j} is not stable"
    return allocation


def interior_index(k: int) -> int:
    """
    The canonical interior choice: the second quantile when there are at least three stable
    allocations, otherwise the doctor-optimal one
    """
    return 2 if k >= 3 else 1

def interior_stable_mechanism(profile: Profile, market: Market) -> Allocation:
    stable_set = enumerate_stable(profile, market)
    return quantile_allocation(stable_set, profile, interior_index(stable_set.k))


@dataclass(frozen=True)
class Mechanism:
    """
    A mechanism of one of the built-in kinds (q is only used by quantile mechanisms).

    quantile(0) behaves as da:doctors and quantile(1) as da:hospitals.
    """
    kind: MechanismKind
    q: Fraction | None = None

    def __post_init__(self):
        if self.kind is MechanismKind.QUANTILE:
            object.__setattr__(self, "q", parse_quantile(self.q if self.q is not None else ""))
        elif self.q is not None:
            raise QsmMechanismException(f"Mechanism {self.kind.value!r} does not take a quantile")

    @classmethod
    def quantile(cls, q: Fraction | str | int) -> "Mechanism":
        return cls(MechanismKind.QUANTILE, parse_quantile(q))

    @classmethod
    def parse(cls, descriptor: str) -> "Mechanism":
        """
        @param descriptor: "quantile:<num>/<den>", "median", "interior", "da:doctors" or "da:hospitals"
        """
        descriptor = descriptor.strip()
        if descriptor == "median":
            return cls.quantile(Fraction(1, 2))
        if descriptor.startswith("quantile:"):
            return cls.quantile(descriptor[len("quantile:"):])
        for kind in MechanismKind:
            if kind is not MechanismKind.QUANTILE and descriptor == kind.value:
                return cls(kind)
        raise QsmMechanismException(f"Unknown mechanism descriptor {descriptor!r}")

    @property
    def descriptor(self) -> str:
        if self.kind is MechanismKind.QUANTILE:
            return f"quantile:{format_quantile(self.q)}"
        return self.kind.value

    def __call__(self, profile: Profile, market: Market) -> Allocation:
        return apply_mechanism(self, profile, market)

    def __str__(self):
        return self.descriptor


DOCTOR_DA = Mechanism(MechanismKind.DOCTOR_DA)
HOSPITAL_DA = Mechanism(MechanismKind.HOSPITAL_DA)
INTERIOR = Mechanism(MechanismKind.INTERIOR)


def apply_mechanism(mechanism: Mechanism, profile: Profile, market: Market) -> Allocation:
    """
    @return: the allocation the mechanism selects at the given doctor profile
    """
    match mechanism.kind:
        case MechanismKind.QUANTILE:
            stable_set = enumerate_stable(profile, market)
            return quantile_allocation(stable_set, profile, quantile_index(stable_set.k, mechanism.q))
        case MechanismKind.INTERIOR:
            return interior_stable_mechanism(profile, market)
        case MechanismKind.DOCTOR_DA:
            return doctor_proposing_da(profile, market)
        case MechanismKind.HOSPITAL_DA:
            return hospital_proposing_da(profile, market)
