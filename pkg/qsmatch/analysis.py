"""
Strategic analysis of mechanisms by exhaustive enumeration of the doctors' preference domains.

For a doctor d and a reported preference, the option set is every outcome d can receive as the other
doctors' preferences range over their full domains. A report is a manipulation at a true preference if
it is strictly better (under the truth) at some subprofile of the others, and an obvious manipulation if,
in addition, it strictly improves the worst case or the best case of the option set.

QsmAnalyzer binds a mechanism to a market and memoizes every mechanism evaluation, so that the same
profile is never evaluated twice while certifying. The module-level functions are thin wrappers around it:
    option_set, worst_case, best_case, is_manipulation, is_obvious_manipulation, certify
"""
import math
import time
import itertools
import multiprocessing
from enum import Enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .common import QsmException, DEFAULT_BUDGET, DEFAULT_WORKERS, format_outcome
from .log import LOGGER
from .market import Market, Preference, Profile, Allocation, Outcome, QsmMarketException, prefers, \
    assigned_contract, enumerate_preferences, preference_domain_size
from .market_file import market_digest
from .mechanisms import Mechanism, apply_mechanism


class QsmBudgetException(QsmException):
    """Indicates that an exhaustive search would exceed the configured evaluation budget"""
    def __init__(self, required: int, budget: int, what: str = "search"):
        self.required = required
        self.budget = budget
        super().__init__(f"Exhaustive {what} needs {required} mechanism evaluations, budget is {budget}")


@dataclass
class AnalysisConfig:
    """
    Limits of exhaustive analysis: the maximal number of mechanism evaluations, and the number of
    worker processes used for certification
    """
    budget: int = DEFAULT_BUDGET
    workers: int = DEFAULT_WORKERS

    def __post_init__(self):
        if self.budget < 1:
            raise QsmException(f"Budget must be at least 1 (got {self.budget})")
        if self.workers < 1:
            raise QsmException(f"Worker count must be at least 1 (got {self.workers})")


class OmCondition(Enum):
    NONE = "none"
    WORST_CASE = "worst-case"
    BEST_CASE = "best-case"
    BOTH = "both"

    @classmethod
    def of(cls, worst_improves: bool, best_improves: bool) -> "OmCondition":
        if worst_improves and best_improves:
            return cls.BOTH
        if worst_improves:
            return cls.WORST_CASE
        if best_improves:
            return cls.BEST_CASE
        return cls.NONE


class Property(Enum):
    NOM = "nom"
    SP = "sp"


@dataclass(frozen=True)
class OptionSet:
    """
    The outcomes left open to a doctor by a reported preference, in order of discovery, along with one
    witness profile (the report plus the others' preferences) for each outcome
    """
    doctor: str
    reported: Preference
    outcomes: tuple[Outcome, ...]
    witnesses: dict[Outcome, Profile] = field(hash=False)

    def __post_init__(self):
        assert self.outcomes, "Empty option set"

    def __contains__(self, outcome: Outcome) -> bool:
        return outcome in self.outcomes

    def __iter__(self):
        return iter(self.outcomes)

    def __len__(self):
        return len(self.outcomes)

    def __str__(self):
        return "{" + ",".join(format_outcome(o) for o in self.outcomes) + "}"


def worst_case(pref: Preference, options: OptionSet) -> Outcome:
    """The worst outcome of the option set under the preference (the empty outcome ranked as usual)"""
    return max(options.outcomes, key=pref.rank)

def best_case(pref: Preference, options: OptionSet) -> Outcome:
    """The best outcome of the option set under the preference"""
    return min(options.outcomes, key=pref.rank)


@dataclass(frozen=True)
class Manipulation:
    """
    Whether a report strictly helps a doctor at some subprofile. When it does, 'witness' is the truthful
    profile at which it helps (the manipulated profile is witness.replace(report)).
    """
    found: bool
    witness: Profile | None = None
    truthful_outcome: Outcome = None
    manipulated_outcome: Outcome = None

    def __bool__(self):
        return self.found


@dataclass(frozen=True)
class OmVerdict:
    """
    The result of testing a report for obvious manipulation: the manipulation check and the worst- and
    best-case comparisons between the two option sets, all judged by the true preference
    """
    doctor: str
    truth: Preference
    report: Preference
    manipulation: Manipulation
    is_obvious: bool
    condition: OmCondition
    worst_report: Outcome
    worst_truth: Outcome
    best_report: Outcome
    best_truth: Outcome
    truth_options: OptionSet
    report_options: OptionSet

    def __post_init__(self):
        assert not self.is_obvious or self.manipulation.found, "Obvious manipulation that is not a manipulation"
        expected = OmCondition.of(prefers(self.truth, self.worst_report, self.worst_truth),
                                  prefers(self.truth, self.best_report, self.best_truth))
        assert self.condition is expected, f"Condition {self.condition} inconsistent with the comparisons"
        assert self.is_obvious == (self.manipulation.found and self.condition is not OmCondition.NONE)

    @property
    def is_manipulation(self) -> bool:
        return self.manipulation.found


@dataclass(frozen=True)
class Counterexample:
    """A doctor, a true preference and a report violating the certified property"""
    doctor: str
    truth: Preference
    report: Preference
    witness: Profile
    truthful_outcome: Outcome
    manipulated_outcome: Outcome


@dataclass(frozen=True)
class Certificate:
    """
    The outcome of certifying a property: PASS when the search was exhausted without finding a
    counterexample, FAIL with the first counterexample in search order otherwise
    """
    property: Property
    mechanism: str
    market_digest: str
    passed: bool
    counterexample: Counterexample | None
    triples: int
    evaluations: int
    elapsed: float

    def __post_init__(self):
        assert self.passed == (self.counterexample is None)


class QsmAnalyzer:
    """
    Exhaustive strategic analysis of one mechanism on one market.

    Every doctor's opponents range over their full preference domain, unless a restricted domain is given
    for some doctors (e.g. their truthful preference only). Restricted analyzers may compute option sets
    and manipulation checks, but refuse to certify.

    Example usage:
    >>> analyzer = QsmAnalyzer(Mechanism.parse("quantile:1/2"), market)
    >>> verdict = analyzer.is_obvious_manipulation("d1", truth, report)
    >>> certificate = analyzer.certify(Property.NOM)
    """
    def __init__(self, mechanism: Mechanism, market: Market, config: AnalysisConfig | None = None,
                 restricted_domains: Mapping[str, Sequence[Preference]] | None = None):
        self.mechanism = mechanism
        self.market = market
        self.config = config or AnalysisConfig()
        # Domains are built on first use, after the budget check of the search that needs them
        self._full_domains: dict[str, list[Preference]] = {}
        self._restricted: dict[str, list[Preference]] = {}
        for doctor, prefs in (restricted_domains or {}).items():
            prefs = list(prefs)
            if not prefs:
                raise QsmMarketException(f"Restricted domain of {doctor!r} is empty")
            for pref in prefs:
                self._check_preference(doctor, pref)
            self._restricted[doctor] = prefs
        self.is_restricted = any(len(prefs) != self.full_domain_size(doctor) or prefs != self.full_domain(doctor)
                                 for doctor, prefs in self._restricted.items())
        # Memoized mechanism outcomes, keyed by profile
        self._allocations: dict[Profile, Allocation] = {}
        # Memoized outcome of a doctor for a report, one entry per subprofile of the others
        self._vectors: dict[tuple[str, Preference], tuple[Outcome, ...]] = {}
        self._subprofiles: dict[str, list[tuple[Preference, ...]]] = {}

    @property
    def evaluations(self) -> int:
        """Number of distinct mechanism evaluations so far"""
        return len(self._allocations)

    def _check_preference(self, doctor: str, pref: Preference):
        if doctor not in self.market.doctors:
            raise QsmMarketException(f"Unknown doctor {doctor!r}")
        if pref.owner != doctor or pref.domain != self.market.contracts_of(doctor):
            raise QsmMarketException(f"Preference {pref} is not a preference of {doctor!r} in this market")

    def _check_budget(self, required: int, what: str):
        if required > self.config.budget:
            LOGGER.warning(f"Refusing {what}: {required} evaluations exceed the budget of {self.config.budget}")
            raise QsmBudgetException(required, self.config.budget, what)

    def full_domain_size(self, doctor: str) -> int:
        return preference_domain_size(self.market, doctor)

    def full_domain(self, doctor: str) -> list[Preference]:
        """Every preference of the doctor, in enumeration order (built once)"""
        if doctor not in self._full_domains:
            self._full_domains[doctor] = enumerate_preferences(self.market, doctor)
        return self._full_domains[doctor]

    def domain_size(self, doctor: str) -> int:
        if doctor in self._restricted:
            return len(self._restricted[doctor])
        return self.full_domain_size(doctor)

    def domain(self, doctor: str) -> list[Preference]:
        """The preferences the doctor ranges over as an opponent: its restricted domain if any, else all"""
        if doctor in self._restricted:
            return self._restricted[doctor]
        return self.full_domain(doctor)

    def subprofile_count(self, doctor: str) -> int:
        return math.prod(self.domain_size(other) for other in self.market.doctors if other != doctor)

    def subprofiles(self, doctor: str) -> list[tuple[Preference, ...]]:
        """
        Every subprofile of the other doctors (roster order), in enumeration order
        """
        if doctor not in self._subprofiles:
            self._check_budget(self.subprofile_count(doctor), "option set")
            others = [self.domain(other) for other in self.market.doctors if other != doctor]
            self._subprofiles[doctor] = list(itertools.product(*others))
        return self._subprofiles[doctor]

    def profile_of(self, pref: Preference, subprofile: tuple[Preference, ...]) -> Profile:
        """Merge a doctor's preference into a subprofile of the others"""
        position = self.market.doctors.index(pref.owner)
        return Profile(subprofile[:position] + (pref,) + subprofile[position:])

    def allocation(self, profile: Profile) -> Allocation:
        """The (memoized) allocation the mechanism selects at the profile"""
        allocation = self._allocations.get(profile)
        if allocation is None:
            allocation = apply_mechanism(self.mechanism, profile, self.market)
            self._allocations[profile] = allocation
        return allocation

    def outcomes(self, doctor: str, pref: Preference) -> tuple[Outcome, ...]:
        """The doctor's outcome when reporting pref, for every subprofile of the others"""
        key = (doctor, pref)
        if key not in self._vectors:
            self._check_preference(doctor, pref)
            self._check_budget(self.subprofile_count(doctor), "option set")
            self._vectors[key] = tuple(assigned_contract(self.allocation(self.profile_of(pref, sub)), doctor)
                                       for sub in self.subprofiles(doctor))
        return self._vectors[key]

    def option_set(self, doctor: str, reported: Preference) -> OptionSet:
        """
        @return: OptionSet of every outcome reachable by the report, with a witness profile for each
        """
        witnesses = {}
        for sub, outcome in zip(self.subprofiles(doctor), self.outcomes(doctor, reported)):
            if outcome not in witnesses:
                witnesses[outcome] = self.profile_of(reported, sub)
        return OptionSet(doctor, reported, tuple(witnesses), witnesses)

    def is_manipulation(self, doctor: str, truth: Preference, report: Preference) -> Manipulation:
        """
        @return: Manipulation - found iff at some subprofile the report yields an outcome strictly better
            under the true preference (a report equal to the truth is never a manipulation)
        """
        self._check_preference(doctor, truth)
        self._check_preference(doctor, report)
        if truth == report:
            return Manipulation(False)
        self._check_budget(2 * self.subprofile_count(doctor), "manipulation check")
        truthful = self.outcomes(doctor, truth)
        manipulated = self.outcomes(doctor, report)
        for sub, honest, misreported in zip(self.subprofiles(doctor), truthful, manipulated):
            if prefers(truth, misreported, honest):
                return Manipulation(True, self.profile_of(truth, sub), honest, misreported)
        return Manipulation(False)

    def is_obvious_manipulation(self, doctor: str, truth: Preference, report: Preference) -> OmVerdict:
        """
        Compare the option sets of the truth and of the report by their worst and best cases (under the
        truth). The report is an obvious manipulation if it is a manipulation and improves either.
        """
        manipulation = self.is_manipulation(doctor, truth, report)
        truth_options = self.option_set(doctor, truth)
        report_options = self.option_set(doctor, report)
        worst_report, worst_truth = worst_case(truth, report_options), worst_case(truth, truth_options)
        best_report, best_truth = best_case(truth, report_options), best_case(truth, truth_options)
        condition = OmCondition.of(prefers(truth, worst_report, worst_truth),
                                   prefers(truth, best_report, best_truth))
        return OmVerdict(doctor, truth, report, manipulation,
                         manipulation.found and condition is not OmCondition.NONE, condition,
                         worst_report, worst_truth, best_report, best_truth, truth_options, report_options)

    def required_evaluations(self) -> int:
        """
        The nominal size of certification: sum over doctors of truths x reports x subprofiles
        """
        total = 0
        for doctor in self.market.doctors:
            size = self.full_domain_size(doctor)
            total += size * (size - 1) * math.prod(
                self.full_domain_size(other) for other in self.market.doctors if other != doctor)
        return total

    def certify_truth(self, prop: Property, doctor: str, truth: Preference) -> tuple[Counterexample | None, int]:
        """
        Search the reports of one doctor at one true preference, in enumeration order.

        @return: the first counterexample (or None), and the number of reports examined
        """
        examined = 0
        for report in self.full_domain(doctor):
            if report == truth:
                continue
            examined += 1
            if prop is Property.SP:
                manipulation = self.is_manipulation(doctor, truth, report)
                violated = manipulation.found
            else:
                verdict = self.is_obvious_manipulation(doctor, truth, report)
                manipulation = verdict.manipulation
                violated = verdict.is_obvious
            if violated:
                return Counterexample(doctor, truth, report, manipulation.witness,
                                      manipulation.truthful_outcome, manipulation.manipulated_outcome), examined
        return None, examined

    def tasks(self) -> list[tuple[str, int]]:
        """(doctor, truth index) pairs in search order"""
        return [(doctor, i) for doctor in self.market.doctors for i in range(self.full_domain_size(doctor))]

    def certify(self, prop: Property) -> Certificate:
        """
        Exhaustively search every doctor, every true preference and every other report for a manipulation
        (SP) or an obvious manipulation (NOM).

        @return: Certificate - PASS, or FAIL with the first counterexample in (doctor, truth, report) order
        """
        if self.is_restricted:
            raise QsmException("Certification requires the full preference domain of every doctor")
        self._check_budget(self.required_evaluations(), "certification")
        LOGGER.info(f"Certifying {prop.value.upper()} of {self.mechanism.descriptor} "
                    f"({len(self.market.doctors)} doctors, {len(self.market.contracts)} contracts)")
        start_time = time.time()
        counterexample = None
        triples = 0
        if self.config.workers > 1:
            counterexample, triples, evaluations = self._certify_parallel(prop)
        else:
            for doctor, truth_index in self.tasks():
                counterexample, examined = self.certify_truth(prop, doctor, self.full_domain(doctor)[truth_index])
                triples += examined
                if counterexample is not None:
                    break
            evaluations = self.evaluations
            LOGGER.debug(f"{len(self._vectors)} outcome vectors cached for {len(self._subprofiles)} doctors")
        elapsed = time.time() - start_time
        certificate = Certificate(prop, self.mechanism.descriptor, market_digest(self.market),
                                  counterexample is None, counterexample, triples, evaluations, elapsed)
        LOGGER.info(f"{prop.value.upper()} of {self.mechanism.descriptor}: "
                    f"{'PASS' if certificate.passed else 'FAIL'} after {triples} reports, "
                    f"{evaluations} evaluations, {elapsed:.2f} seconds")
        return certificate

    def _certify_parallel(self, prop: Property) -> tuple[Counterexample | None, int, int]:
        # Tasks are consumed in search order, so the first counterexample is the one with the lowest
        # (doctor, truth, report) index regardless of which worker finishes first
        counterexample = None
        triples = evaluations = 0
        with multiprocessing.Pool(self.config.workers, initializer=_init_worker,
                                  initargs=(self.mechanism, self.market, self.config.budget)) as pool:
            for found, examined, evaluated in pool.imap(_certify_worker, [(prop, d, i) for d, i in self.tasks()]):
                triples += examined
                evaluations += evaluated
                if found is not None:
                    counterexample = found
                    break
        return counterexample, triples, evaluations


#####################
# Worker processes

_worker_analyzer: QsmAnalyzer | None = None

def _init_worker(mechanism: Mechanism, market: Market, budget: int):
    global _worker_analyzer
    _worker_analyzer = QsmAnalyzer(mechanism, market, AnalysisConfig(budget=budget))

def _certify_worker(task: tuple[Property, str, int]) -> tuple[Counterexample | None, int, int]:
    prop, doctor, truth_index = task
    before = _worker_analyzer.evaluations
    found, examined = _worker_analyzer.certify_truth(prop, doctor, _worker_analyzer.full_domain(doctor)[truth_index])
    return found, examined, _worker_analyzer.evaluations - before


#####################
# Syntactic sugaring

def option_set(mechanism: Mechanism, market: Market, doctor: str, reported: Preference,
               config: AnalysisConfig | None = None,
               restricted_domains: Mapping[str, Sequence[Preference]] | None = None) -> OptionSet:
    """
    @param restricted_domains: optionally, explicit preference lists for some of the other doctors
    """
    return QsmAnalyzer(mechanism, market, config, restricted_domains).option_set(doctor, reported)

def is_manipulation(mechanism: Mechanism, market: Market, doctor: str, truth: Preference, report: Preference,
                    config: AnalysisConfig | None = None) -> Manipulation:
    return QsmAnalyzer(mechanism, market, config).is_manipulation(doctor, truth, report)

def is_obvious_manipulation(mechanism: Mechanism, market: Market, doctor: str, truth: Preference,
                            report: Preference, config: AnalysisConfig | None = None) -> OmVerdict:
    return QsmAnalyzer(mechanism, market, config).is_obvious_manipulation(doctor, truth, report)

def certify(mechanism: Mechanism, market: Market, prop: Property,
            config: AnalysisConfig | None = None) -> Certificate:
    return QsmAnalyzer(mechanism, market, config).certify(prop)
