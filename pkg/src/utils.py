"""
Utility functions for the toolkit
"""
import logging
import math
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import LOG_FILE, LOG_FORMAT, LOG_LEVEL

Seed = Union[int, Sequence[int]]


# Setup logging
def setup_logger(name: str = 'rankcheck') -> logging.Logger:
    """
    Set up and configure logger

    Args:
        name: Logger name

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, LOG_LEVEL, logging.INFO))

    # Avoid adding handlers multiple times
    if not logger.handlers:
        if LOG_FILE:
            file_handler = logging.FileHandler(LOG_FILE)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
            logger.addHandler(file_handler)

        console_handler = logging.StreamHandler()
        console_handler.setLevel(logging.INFO)
        console_handler.setFormatter(logging.Formatter('%(levelname)s - %(message)s'))
        logger.addHandler(console_handler)

    return logger

# Initialize logger
logger = setup_logger()


class NumericAssertionError(ArithmeticError):
    """A numeric invariant the toolkit relies on was violated"""


class ExplanationError(RuntimeError):
    """An explainer failed on one instance"""

    def __init__(self, instance_id: int, explainer: str, cause: Exception):
        self.instance_id = instance_id
        self.explainer = explainer
        self.cause = cause
        super().__init__(f"{explainer} failed on instance {instance_id}: {cause}")


def seed_tuple(seed: Seed) -> Tuple[int, ...]:
    """Normalize an int or int sequence seed into an entropy tuple"""
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def derive_seed(seed: Seed, *keys: int) -> Tuple[int, ...]:
    """
    Extend a seed with extra keys

    Distinct key tuples always give distinct entropy tuples, so derived
    streams never collide.

    Args:
        seed: Base seed (int or tuple)
        *keys: Non-negative integers identifying the sub-stream

    Returns:
        Entropy tuple usable by make_rng
    """
    for key in keys:
        if key < 0:
            raise ValueError(f"Seed keys must be non-negative, got {key}")
    return seed_tuple(seed) + tuple(int(k) for k in keys)


def make_rng(seed: Seed) -> np.random.Generator:
    """
    Build a PCG64 generator from an int or an entropy tuple

    Args:
        seed: Seed value

    Returns:
        numpy Generator
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(seed_tuple(seed)))))


def validate_positive_int(value: int, name: str, minimum: int = 1) -> int:
    """
    Validate an integer parameter against a lower bound

    Args:
        value: Value to check
        name: Parameter name used in the error
        minimum: Smallest allowed value

    Returns:
        The value as int

    Raises:
        ValueError: If the value is not an integer >= minimum
    """
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def validate_fraction(value: float, name: str) -> float:
    """Validate a value in the open interval (0, 1)"""
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")
    return value


def all_finite(values: Iterable[float]) -> bool:
    """True when every value is a finite real"""
    return all(math.isfinite(v) for v in values)


def parse_bool(text: Optional[str]) -> bool:
    """Parse config-file booleans (true/false/1/0/yes/no)"""
    if text is None:
        return False
    lowered = str(text).strip().lower()
    if lowered in ('true', '1', 'yes', 'on'):
        return True
    if lowered in ('false', '0', 'no', 'off', ''):
        return False
    raise ValueError(f"Not a boolean: {text!r}")


def format_float(value: float) -> str:
    """Shortest round-trip text for a float, always with '.' decimal"""
    return repr(float(value))
