from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Any, Dict, Optional, Set, Tuple

import numpy as np
from sympy import factorint, isprime, multiplicity

from config.default import settings
from services.common.errors import BudgetExceededError, InvalidInputError
from services.common.serialization import format_rational
from services.forms.counting import count_primitive
from services.forms.form import QuadForm

logger = logging.getLogger(__name__)


@lru_cache(maxsize=1024)
def _residue_counts(form: QuadForm, q: int) -> Tuple[int, ...]:
    """Histogram of f(x) mod q over (ℤ/q)⁴."""
    if q < 1:
        raise InvalidInputError(f"modulus must be positive, got {q}")
    if q ** 3 > settings.search_budget:
        raise BudgetExceededError(
            f"residue count modulo {q} needs {q ** 3} cells per slice",
            required=q ** 3,
            available=settings.search_budget,
            unit="residue cells",
        )
    A, B, C, D = form.coefficients
    r = np.arange(q, dtype=np.int64)
    X, Y, Z = np.meshgrid(r, r, r, indexing="ij")
    base = (A * X * X + A * Y * Y + 4 * D * Z * Z + 4 * C * X * Z - 4 * B * Y * Z) % q
    counts = np.zeros(q, dtype=np.int64)
    for t in range(q):
        values = (base + 4 * D * t * t + 4 * B * X * t + 4 * C * Y * t) % q
        counts += np.bincount(values.ravel(), minlength=q)
    return tuple(int(c) for c in counts)


def count_solutions_mod(form: QuadForm, m: int, q: int) -> int:
    """#{x ∈ (ℤ/q)⁴ : f(x) ≡ m (mod q)}."""
    return _residue_counts(form, q)[m % q]


def represented_classes_mod8(form: QuadForm) -> Set[int]:
    counts = _residue_counts(form, 8)
    return {residue for residue, count in enumerate(counts) if count}


def odd_prime_surjective(form: QuadForm, p: int) -> bool:
    """f 在 ℤ/p 上取遍所有剩余类。"""
    return all(_residue_counts(form, p))


def _geometric(p: int, v: int) -> Fraction:
    return sum((Fraction(1, p ** k) for k in range(v + 1)), Fraction(0))


def local_density(form: QuadForm, m: int, p: int) -> Fraction:
    """δ_p(m)：p ∤ disc 时用闭式，p | disc 时数模 p（p = 2 时模 8）的解。"""
    if not isprime(p):
        raise InvalidInputError(f"local density needs a prime, got {p}")
    if p == 2:
        return Fraction(count_solutions_mod(form, m, 8), 8 ** 3)
    if p in form.disc_primes():
        return Fraction(count_solutions_mod(form, m, p), p ** 3)
    v = multiplicity(p, m) if m else 0
    return (1 - Fraction(1, p * p)) * _geometric(p, v)


@dataclass(slots=True)
class SingularSeries:
    """𝔖(m) = (6/π²)·ratio，ratio 为精确有理数。"""

    ratio: Fraction
    value: float

    def to_json(self) -> Dict[str, Any]:
        return {"ratio": format_rational(self.ratio), "value": self.value}


def singular_series(form: QuadForm, m: int) -> SingularSeries:
    """Only finitely many Euler factors differ from 1 − p⁻²; the rest give 6/π²."""
    if m < 1:
        raise InvalidInputError(f"m must be positive, got {m}")
    ratio = Fraction(1)
    disc_primes = form.disc_primes()
    for p in disc_primes:
        ratio *= local_density(form, m, p) / (1 - Fraction(1, p * p))
    for p, v in factorint(m).items():
        if p not in disc_primes:
            ratio *= _geometric(p, v)
    return SingularSeries(ratio=ratio, value=6 / math.pi ** 2 * float(ratio))


def _corrections(m: int) -> Fraction:
    factor = Fraction(1)
    for p, v in factorint(m).items():
        tail = 1 - Fraction(1, p ** (v + 1))
        if p % 4 == 1:
            factor *= (1 - Fraction(1, p)) ** 2 / tail ** 2
        elif p % 4 == 3 and v >= 2:
            factor *= (1 - Fraction(1, p * p)) / tail
    return factor


@dataclass(slots=True)
class MainTerm:
    exact: Fraction
    value: float
    corrections: Fraction

    def to_json(self) -> Dict[str, Any]:
        return {
            "exact": format_rational(self.exact),
            "value": self.value,
            "corrections": format_rational(self.corrections),
        }


def main_term(form: QuadForm, m: int) -> MainTerm:
    """𝒩_P(m) 的主项：(3/(8a₀²))·m·ratio·修正因子，π² 已约去。"""
    disc = 16 * form.a0 ** 4
    if gcd(m, disc) != 1:
        raise InvalidInputError(f"main term needs m coprime to the discriminant {disc}, got {m}")
    series = singular_series(form, m)
    corrections = _corrections(m)
    exact = Fraction(3, 8 * form.a0 ** 2) * m * series.ratio * corrections
    return MainTerm(exact=exact, value=float(exact), corrections=corrections)


@dataclass(slots=True)
class DensityReport:
    """某个 m 的局部密度、奇异级数、主项与本原表示数。"""

    m: int
    densities: Dict[int, Fraction]
    singular_series: SingularSeries
    primitive_count: int
    main_term: Optional[MainTerm] = None
    notes: Dict[str, Any] = field(default_factory=dict)

    @property
    def ratio(self) -> Optional[float]:
        if self.main_term is None or not self.main_term.value:
            return None
        return self.primitive_count / self.main_term.value

    def to_json(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "densities": {str(p): format_rational(d) for p, d in sorted(self.densities.items())},
            "singular_series": self.singular_series.to_json(),
            "primitive_count": self.primitive_count,
            "main_term": self.main_term.to_json() if self.main_term else None,
            "ratio": self.ratio,
            **self.notes,
        }


def density_report(form: QuadForm, m: int, budget: Optional[int] = None) -> DensityReport:
    primes = sorted(set(form.disc_primes()) | set(factorint(m)))
    densities = {p: local_density(form, m, p) for p in primes}
    series = singular_series(form, m)
    primitive = count_primitive(form, m, "direct", budget)
    term: Optional[MainTerm] = None
    notes: Dict[str, Any] = {}
    if gcd(m, 16 * form.a0 ** 4) == 1:
        term = main_term(form, m)
    else:
        notes["main_term_skipped"] = "m shares a prime with the discriminant"
    logger.debug("Density report for m=%d: primitive=%d", m, primitive)
    return DensityReport(
        m=m,
        densities=densities,
        singular_series=series,
        primitive_count=primitive,
        main_term=term,
        notes=notes,
    )
