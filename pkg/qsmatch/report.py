"""
Rendering of verdicts and certificates, either as human-readable text or as a JSON record.
Records can be read back (verdict_from_record / certificate_from_record) into equal objects.
"""
import json

from .common import EMPTY_TOKEN, format_outcome
from .market import Preference, Profile
from .analysis import OmVerdict, OmCondition, OptionSet, Manipulation, Certificate, Counterexample, Property


def format_ranking(pref: Preference) -> str:
    return str(pref) if pref.ranking else EMPTY_TOKEN

def format_profile(profile: Profile) -> str:
    return ", ".join(f"{p.owner}: {format_ranking(p)}" for p in profile.prefs)


########
# Text

def verdict_text(verdict: OmVerdict) -> str:
    lines = [f"doctor: {verdict.doctor}",
             f"truth: {format_ranking(verdict.truth)}",
             f"report: {format_ranking(verdict.report)}",
             f"O(truth): {verdict.truth_options}",
             f"O(report): {verdict.report_options}",
             f"worst case: report={format_outcome(verdict.worst_report)} truth={format_outcome(verdict.worst_truth)}",
             f"best case: report={format_outcome(verdict.best_report)} truth={format_outcome(verdict.best_truth)}"]
    manipulation = verdict.manipulation
    if manipulation:
        lines.append(f"manipulation: yes (at {format_profile(manipulation.witness)}: "
                     f"truthful={format_outcome(manipulation.truthful_outcome)} "
                     f"manipulated={format_outcome(manipulation.manipulated_outcome)})")
    else:
        lines.append("manipulation: no")
    lines.append(f"obvious: {'yes' if verdict.is_obvious else 'no'} (condition: {verdict.condition.value})")
    for label, options in [("truth", verdict.truth_options), ("report", verdict.report_options)]:
        for outcome, witness in options.witnesses.items():
            lines.append(f"witness O({label}) {format_outcome(outcome)}: {format_profile(witness)}")
    return "\n".join(lines)


def certificate_text(certificate: Certificate) -> str:
    lines = [f"property: {certificate.property.value.upper()}",
             f"mechanism: {certificate.mechanism}",
             f"market: {certificate.market_digest}",
             f"result: {'PASS' if certificate.passed else 'FAIL'}"]
    ce = certificate.counterexample
    if ce is not None:
        lines.extend([f"counterexample: doctor={ce.doctor} truth={format_ranking(ce.truth)} "
                      f"report={format_ranking(ce.report)}",
                      f"witness: {format_profile(ce.witness)}",
                      f"outcomes: truthful={format_outcome(ce.truthful_outcome)} "
                      f"manipulated={format_outcome(ce.manipulated_outcome)}"])
    lines.extend([f"reports examined: {certificate.triples}",
                  f"evaluations: {certificate.evaluations}",
                  f"elapsed: {certificate.elapsed:.3f}s"])
    return "\n".join(lines)


########
# Records

def _pref_record(pref: Preference) -> dict:
    return {"owner": pref.owner, "ranking": list(pref.ranking), "domain": list(pref.domain)}

def _pref_from(record: dict) -> Preference:
    return Preference(record["owner"], tuple(record["ranking"]), tuple(record["domain"]))

def _profile_record(profile: Profile | None) -> list | None:
    return None if profile is None else [_pref_record(p) for p in profile.prefs]

def _profile_from(record: list | None) -> Profile | None:
    return None if record is None else Profile(tuple(_pref_from(p) for p in record))

def _options_record(options: OptionSet) -> dict:
    return {"doctor": options.doctor,
            "reported": _pref_record(options.reported),
            "outcomes": list(options.outcomes),
            "witnesses": [[outcome, _profile_record(profile)] for outcome, profile in options.witnesses.items()]}

def _options_from(record: dict) -> OptionSet:
    witnesses = {outcome: _profile_from(profile) for outcome, profile in record["witnesses"]}
    return OptionSet(record["doctor"], _pref_from(record["reported"]), tuple(record["outcomes"]), witnesses)

def _counterexample_record(ce: Counterexample | None) -> dict | None:
    if ce is None:
        return None
    return {"doctor": ce.doctor, "truth": _pref_record(ce.truth), "report": _pref_record(ce.report),
            "witness": _profile_record(ce.witness),
            "truthful_outcome": ce.truthful_outcome, "manipulated_outcome": ce.manipulated_outcome}

def _counterexample_from(record: dict | None) -> Counterexample | None:
    if record is None:
        return None
    return Counterexample(record["doctor"], _pref_from(record["truth"]), _pref_from(record["report"]),
                          _profile_from(record["witness"]), record["truthful_outcome"], record["manipulated_outcome"])


def verdict_record(verdict: OmVerdict) -> str:
    m = verdict.manipulation
    return json.dumps({
        "kind": "om-verdict",
        "doctor": verdict.doctor,
        "truth": _pref_record(verdict.truth),
        "report": _pref_record(verdict.report),
        "manipulation": {"found": m.found, "witness": _profile_record(m.witness),
                         "truthful_outcome": m.truthful_outcome, "manipulated_outcome": m.manipulated_outcome},
        "is_obvious": verdict.is_obvious,
        "condition": verdict.condition.value,
        "worst_report": verdict.worst_report,
        "worst_truth": verdict.worst_truth,
        "best_report": verdict.best_report,
        "best_truth": verdict.best_truth,
        "truth_options": _options_record(verdict.truth_options),
        "report_options": _options_record(verdict.report_options),
    }, sort_keys=True)

def verdict_from_record(text: str) -> OmVerdict:
    record = json.loads(text)
    assert record["kind"] == "om-verdict"
    m = record["manipulation"]
    return OmVerdict(record["doctor"], _pref_from(record["truth"]), _pref_from(record["report"]),
                     Manipulation(m["found"], _profile_from(m["witness"]), m["truthful_outcome"],
                                  m["manipulated_outcome"]),
                     record["is_obvious"], OmCondition(record["condition"]),
                     record["worst_report"], record["worst_truth"], record["best_report"], record["best_truth"],
                     _options_from(record["truth_options"]), _options_from(record["report_options"]))


def certificate_record(certificate: Certificate) -> str:
    return json.dumps({
        "kind": "certificate",
        "property": certificate.property.value,
        "mechanism": certificate.mechanism,
        "market_digest": certificate.market_digest,
        "result": "PASS" if certificate.passed else "FAIL",
        "counterexample": _counterexample_record(certificate.counterexample),
        "triples": certificate.triples,
        "evaluations": certificate.evaluations,
        "elapsed": certificate.elapsed,
    }, sort_keys=True)

def certificate_from_record(text: str) -> Certificate:
    record = json.loads(text)
    assert record["kind"] == "certificate"
    return Certificate(Property(record["property"]), record["mechanism"], record["market_digest"],
                       record["result"] == "PASS", _counterexample_from(record["counterexample"]),
                       record["triples"], record["evaluations"], record["elapsed"])
