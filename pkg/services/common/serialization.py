"""Exact-rational serialization helpers.

All exact values leave the process as ``"num/den"`` strings so that JSON round-trips stay bit-exact;
floats only appear in fields explicitly labelled for display.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, List, Union

import sympy

from services.common.errors import InvalidInputError

RationalLike = Union[int, Fraction, sympy.Rational]


def to_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    raise InvalidInputError(f"not an exact rational: {value!r}")


def format_rational(value: RationalLike) -> str:
    frac = to_fraction(value)
    return f"{frac.numerator}/{frac.denominator}"


def parse_rational(text: Union[str, int]) -> sympy.Rational:
    """解析 "num/den"、整数或 "a/b" 形式的字符串为 sympy Rational。"""
    if isinstance(text, int):
        return sympy.Integer(text)
    raw = str(text).strip()
    num_text, _, den_text = raw.partition("/")
    try:
        num = int(num_text)
        den = int(den_text) if den_text else 1
    except ValueError as exc:
        raise InvalidInputError(f"cannot parse rational {raw!r}") from exc
    if den == 0:
        raise InvalidInputError(f"zero denominator in {raw!r}")
    return sympy.Rational(num, den)


def format_vector(values: Iterable[RationalLike]) -> List[str]:
    return [format_rational(v) for v in values]


def parse_vector(values: Iterable[Union[str, int]]) -> List[sympy.Rational]:
    return [parse_rational(v) for v in values]
