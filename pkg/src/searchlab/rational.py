"""Exact scalar helpers.

All weights, heuristic values, costs, and scores are exact rationals:
plain ``int`` where possible (fast path), ``fractions.Fraction``
otherwise. Floats are rejected everywhere to keep tie and equality
semantics exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from .errors import ValidationError

Rat = Union[int, Fraction]


def as_rat(value) -> Rat:
    """Normalize int/Fraction/str to an exact rational; reject float and bool."""
    if isinstance(value, bool):
        raise ValidationError("boolean is not a valid rational value")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else value
    if isinstance(value, float):
        raise ValidationError(f"floating-point value {value!r} rejected; use a 'p/q' or decimal string")
    if isinstance(value, str):
        return parse_rat(value)
    raise ValidationError(f"cannot interpret {type(value).__name__} as an exact rational")


def parse_rat(text: str) -> Rat:
    """Parse '3', '-2', '3/4', or an exact decimal like '0.25'."""
    try:
        q = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad rational literal {text!r}") from exc
    return int(q) if q.denominator == 1 else q


def format_rat(q: Rat) -> str:
    """Canonical string form: 'p' for integers, 'p/q' otherwise."""
    if isinstance(q, int):
        return str(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"
