from .common import QsmException
from .market import Contract, Preference, Profile, Allocation, Market, QsmMarketException, assigned_contract, \
    prefers, enumerate_preferences, preference_domain_size, enumerate_allocations
from .market_file import MarketFile, QsmParseException, parse_market, parse_ranking, serialize_market, \
    market_digest, load_market
from .stability import StableSet, is_individually_rational, blocking_contracts, is_stable, enumerate_stable, \
    doctor_proposing_da, hospital_proposing_da
from .mechanisms import Mechanism, MechanismKind, QsmMechanismException, quantile_index, median_index, \
    quantile_allocation, interior_stable_mechanism, apply_mechanism, DOCTOR_DA, HOSPITAL_DA, INTERIOR
from .analysis import QsmAnalyzer, AnalysisConfig, QsmBudgetException, OptionSet, OmVerdict, OmCondition, \
    Manipulation, Certificate, Counterexample, Property, option_set, worst_case, best_case, is_manipulation, \
    is_obvious_manipulation, certify
from .counterexample import CounterexampleMarket, QsmCounterexampleException, theorem1_market, minimal_k_for
