"""Exact rational scalars and vectors.

Scalars are ``fractions.Fraction`` throughout: always normalised to lowest
terms with a positive denominator, arbitrary precision, no rounding ever.
Vectors are plain tuples of Fractions so that equality, hashing and sorting
are exact and deterministic.

Serialisation is decimal-free: ``p`` or ``p/q`` with q > 0.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

from .errors import ProblemFormatError

QVector = Tuple[Fraction, ...]

_RAT_RE = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(-?\d+)\s*)?$")


def parse_rational(text: str) -> Fraction:
    """Parse "p" or "p/q" into an exact Fraction; rejects q = 0 and decimals."""
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ProblemFormatError(f"rational must be a string, got {type(text).__name__}")
    m = _RAT_RE.match(text)
    if not m:
        raise ProblemFormatError(f"malformed rational {text!r} (expected 'p' or 'p/q')")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ProblemFormatError(f"malformed rational {text!r} (zero denominator)")
    return Fraction(num, den)


def format_rational(q: Fraction) -> str:
    """Render lowest-terms "p" or "p/q" (denominator positive)."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_vector(items: Sequence[str]) -> QVector:
    return tuple(parse_rational(x) for x in items)


def format_vector(v: QVector) -> list:
    return [format_rational(x) for x in v]


def qvec(values: Iterable) -> QVector:
    """Coerce ints/strings/Fractions into a QVector."""
    out = []
    for x in values:
        if isinstance(x, Fraction):
            out.append(x)
        elif isinstance(x, int):
            out.append(Fraction(x))
        elif isinstance(x, str):
            out.append(parse_rational(x))
        else:
            raise ProblemFormatError(f"cannot interpret {x!r} as a rational")
    return tuple(out)


def vadd(a: QVector, b: QVector) -> QVector:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: QVector, b: QVector) -> QVector:
    return tuple(x - y for x, y in zip(a, b))


def vscale(c: Fraction, v: QVector) -> QVector:
    return tuple(c * x for x in v)


def zero_vector(d: int) -> QVector:
    return (Fraction(0),) * d


def is_zero(v: QVector) -> bool:
    return all(x == 0 for x in v)
