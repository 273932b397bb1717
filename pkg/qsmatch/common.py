"""
Various definitions and functions used throughout qsmatch.
"""
import re

# Default cap on mechanism evaluations for exhaustive searches
DEFAULT_BUDGET = 10 ** 8
DEFAULT_WORKERS = 1

# How the empty allocation / empty outcome is printed
EMPTY_TOKEN = "{}"

# Agent and contract ids: letters, digits and underscores
TOKEN_RE = re.compile(r"^\w+$", re.ASCII)


def is_token(name: str) -> bool:
    return TOKEN_RE.match(name) is not None

def format_outcome(outcome: str | None) -> str:
    """An outcome is either a contract id or None (the empty outcome)"""
    return EMPTY_TOKEN if outcome is None else outcome


class QsmException(Exception):
    """Generic base class for other qsmatch exceptions"""
