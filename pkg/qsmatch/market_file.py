"""
Reading and writing the line-oriented market file format:

    doctors: d1 d2
    hospitals: h1 h2
    contract x1 = (d1, h1)
    contract x2 = (d1, h1)
    contract w  = (d2, h2)
    hospital h1 : x2 > x1        # acceptable contracts, best first
    hospital h2 : w
    doctor d1 : x1 > x2          # optional truthful profile
    doctor d2 : w

'#' starts a comment. Every hospital must have a 'hospital' line (the ranking may be empty).
Doctor lines are optional, but when present they must cover every doctor.
"""
import re
import hashlib
from dataclasses import dataclass

from .market import Market, Contract, Preference, Profile, QsmMarketException
from .common import is_token


class QsmParseException(QsmMarketException):
    """Represents a syntax or validation error in a market description"""
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column or 1}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class MarketFile:
    """A parsed market description - the market and, if the file lists them, the doctors' preferences"""
    market: Market
    profile: Profile | None = None


ROSTER_RE = re.compile(r"^\s*(doctors|hospitals)\s*:(.*)$")
CONTRACT_RE = re.compile(r"^\s*contract\s+(\S+)\s*=\s*\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\)\s*$")
RANKING_RE = re.compile(r"^\s*(hospital|doctor)\s+(\S+)\s*:(.*)$")
WORD_RE = re.compile(r"\S+")


def _tokens(text: str, offset: int, line_no: int) -> list[tuple[str, int]]:
    # Whitespace-separated tokens along with their (1-based) column
    res = []
    for m in WORD_RE.finditer(text):
        if not is_token(m.group()):
            raise QsmParseException(f"Invalid id {m.group()!r}", line_no, offset + m.start() + 1)
        res.append((m.group(), offset + m.start() + 1))
    return res

def _ranking_tokens(text: str, offset: int = 0, line_no: int | None = None) -> list[tuple[str, int]]:
    # A '>'-separated ranking; an empty (or blank) ranking means nothing is acceptable
    if not text.strip():
        return []
    res = []
    position = 0
    for part in text.split(">"):
        stripped = part.strip()
        column = offset + position + (len(part) - len(part.lstrip())) + 1
        if not is_token(stripped):
            raise QsmParseException(f"Invalid contract id {stripped!r} in ranking", line_no, column)
        res.append((stripped, column))
        position += len(part) + 1
    return res


def parse_ranking(market: Market, owner: str, text: str) -> Preference:
    """
    Parse a ranking such as "x1>x2" (best first, the empty string means nothing is acceptable)
    into a preference of the given agent.
    """
    ranking = [token for token, _ in _ranking_tokens(text)]
    for contract_id in ranking:
        market.contract(contract_id)
    return market.preference(owner, ranking)


def parse_market(text: str) -> MarketFile:
    """
    Parse and validate a market description.

    @param text: the contents of a market file
    @return: MarketFile with the market and the truthful profile (None if there are no doctor lines)
    """
    doctors = hospitals = None
    roster_lines = {}
    contracts = []
    contract_lines = {}
    rankings = {"hospital": {}, "doctor": {}}
    ranking_lines = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0]
        if not line.strip():
            continue
        if m := ROSTER_RE.match(line):
            kind = m.group(1)
            if kind in roster_lines:
                raise QsmParseException(f"Duplicate {kind!r} line", line_no, m.start(1) + 1)
            roster_lines[kind] = line_no
            names = [token for token, _ in _tokens(m.group(2), m.start(2), line_no)]
            if kind == "doctors":
                doctors = names
            else:
                hospitals = names
        elif m := CONTRACT_RE.match(line):
            for group in (1, 2, 3):
                if not is_token(m.group(group)):
                    raise QsmParseException(f"Invalid id {m.group(group)!r}", line_no, m.start(group) + 1)
            contract_id = m.group(1)
            if contract_id in contract_lines:
                raise QsmParseException(f"Duplicate contract id {contract_id!r}", line_no, m.start(1) + 1)
            contract_lines[contract_id] = (line_no, m)
            contracts.append(Contract(contract_id, m.group(2), m.group(3)))
        elif m := RANKING_RE.match(line):
            kind, owner = m.group(1), m.group(2)
            if owner in rankings[kind]:
                raise QsmParseException(f"Duplicate ranking for {kind} {owner!r}", line_no, m.start(2) + 1)
            rankings[kind][owner] = _ranking_tokens(m.group(3), m.start(3), line_no)
            ranking_lines[kind, owner] = (line_no, m.start(2) + 1)
        else:
            first = len(line) - len(line.lstrip()) + 1
            raise QsmParseException(f"Unrecognized line {line.strip()!r}", line_no, first)

    if doctors is None:
        raise QsmParseException("Missing 'doctors:' line")
    if hospitals is None:
        raise QsmParseException("Missing 'hospitals:' line")

    # Contracts must bind known agents
    for contract in contracts:
        line_no, m = contract_lines[contract.id]
        if contract.doctor not in doctors:
            raise QsmParseException(f"Unknown doctor {contract.doctor!r}", line_no, m.start(2) + 1)
        if contract.hospital not in hospitals:
            raise QsmParseException(f"Unknown hospital {contract.hospital!r}", line_no, m.start(3) + 1)
    by_id = {c.id: c for c in contracts}

    def checked_ranking(kind: str, owner: str) -> list[str]:
        # Every ranked contract must exist and involve the owner
        for contract_id, column in rankings[kind][owner]:
            line_no, _ = ranking_lines[kind, owner]
            if contract_id not in by_id:
                raise QsmParseException(f"Unknown contract {contract_id!r}", line_no, column)
            if not by_id[contract_id].involves(owner):
                raise QsmParseException(
                    f"Contract {contract_id!r} does not involve {kind} {owner!r}", line_no, column)
        return [contract_id for contract_id, _ in rankings[kind][owner]]

    for kind, roster in [("hospital", hospitals), ("doctor", doctors)]:
        for owner in rankings[kind]:
            if owner not in roster:
                line_no, column = ranking_lines[kind, owner]
                raise QsmParseException(f"Unknown {kind} {owner!r}", line_no, column)
    missing = [h for h in hospitals if h not in rankings["hospital"]]
    if missing:
        raise QsmParseException(f"Missing 'hospital' line for {missing}")

    if rankings["doctor"]:
        missing = [d for d in doctors if d not in rankings["doctor"]]
        if missing:
            raise QsmParseException(f"Missing 'doctor' line for {missing} (the profile must be complete)")

    try:
        market = Market.build(doctors, hospitals, [(c.id, c.doctor, c.hospital) for c in contracts],
                              {h: checked_ranking("hospital", h) for h in hospitals})
        profile = None
        if rankings["doctor"]:
            profile = market.profile({d: checked_ranking("doctor", d) for d in doctors})
    except QsmParseException:
        raise
    except QsmMarketException as e:
        # Rosters, duplicates within a ranking etc.
        raise QsmParseException(str(e)) from e
    return MarketFile(market, profile)


def _ranking_line(kind: str, pref: Preference) -> str:
    ranking = " > ".join(pref.ranking)
    return f"{kind} {pref.owner} : {ranking}".rstrip()

def serialize_market(market: Market, profile: Profile | None = None) -> str:
    """
    Canonical text of a market (and optionally a doctor profile), readable by parse_market
    """
    lines = [f"doctors: {' '.join(market.doctors)}".rstrip(),
             f"hospitals: {' '.join(market.hospitals)}".rstrip()]
    lines.extend(f"contract {c.id} = ({c.doctor}, {c.hospital})" for c in market.contracts)
    lines.extend(_ranking_line("hospital", p) for p in market.hospital_prefs)
    if profile is not None:
        market.check_profile(profile)
        lines.extend(_ranking_line("doctor", p) for p in profile.prefs)
    return "\n".join(lines) + "\n"


def market_digest(market: Market) -> str:
    """A short, stable fingerprint of the market (for reports)"""
    return hashlib.sha256(serialize_market(market).encode()).hexdigest()[:16]


def load_market(path: str) -> MarketFile:
    try:
        with open(path, encoding="utf-8") as fp:
            text = fp.read()
    except UnicodeDecodeError as e:
        raise QsmParseException(f"{path} is not UTF-8 text (byte {e.start})") from e
    return parse_market(text)
