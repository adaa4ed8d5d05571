"""Parsing of numeric tokens used in JSON/CLI configs.

Plain decimal strings are parsed at full binary precision; the radicals
sqrt2, sqrt3, sqrt5 are accepted symbolically (optionally scaled, e.g.
"2*sqrt2/3" or "-sqrt5/2") so catalog constants survive serialization
without decimal truncation.
"""

from __future__ import annotations

import math
import re

_SQRT = {"sqrt2": math.sqrt(2.0), "sqrt3": math.sqrt(3.0),
         "sqrt5": math.sqrt(5.0)}

_RADICAL = re.compile(
    r"^(?P<sign>[+-]?)(?:(?P<coef>[\d.]+)\*)?(?P<rad>sqrt[235])"
    r"(?:/(?P<den>[\d.]+))?$")

_FRACTION = re.compile(r"^(?P<sign>[+-]?)(?P<num>[\d.]+)/(?P<den>[\d.]+)$")


def parse_real(text) -> float:
    """Parse a real config token: decimal, fraction p/q, or radical form."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip()
    m = _RADICAL.match(s)
    if m:
        value = _SQRT[m.group("rad")]
        if m.group("coef"):
            value *= float(m.group("coef"))
        if m.group("den"):
            value /= float(m.group("den"))
        return -value if m.group("sign") == "-" else value
    m = _FRACTION.match(s)
    if m:
        value = float(m.group("num")) / float(m.group("den"))
        return -value if m.group("sign") == "-" else value
    return float(s)


def parse_complex(obj) -> complex:
    """Parse a complex token: [re, im] pair or single real token."""
    if isinstance(obj, (list, tuple)):
        if len(obj) != 2:
            raise ValueError(f"complex token needs two entries: {obj!r}")
        return complex(parse_real(obj[0]), parse_real(obj[1]))
    if isinstance(obj, complex):
        return obj
    return complex(parse_real(obj), 0.0)


def format_real(x: float) -> str:
    return repr(float(x))


def format_complex(z: complex) -> list:
    return [repr(float(z.real)), repr(float(z.imag))]
