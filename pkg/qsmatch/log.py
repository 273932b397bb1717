"""
The qsmatch logger. Certification progress is logged at INFO, deferred acceptance rounds and cache sizes
at DEBUG, refused searches at WARNING.

enable_logging / disable_logging attach or drop the console handler, set_level changes the verbosity of both.
"""
import logging

LOGGER = logging.getLogger("qsmatch")

_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"
_DATE_FORMAT = "%d/%m/%Y %H:%M:%S"


def enable_logging(level: int = logging.INFO):
    if LOGGER.handlers:
        return
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(_FORMAT, datefmt=_DATE_FORMAT))
    LOGGER.addHandler(handler)
    set_level(level)

def disable_logging():
    LOGGER.handlers.clear()

def set_level(level: int | str):
    LOGGER.setLevel(level)
    for handler in LOGGER.handlers:
        handler.setLevel(level)

enable_logging()
