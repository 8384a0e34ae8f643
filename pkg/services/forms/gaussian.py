from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import List, Tuple

from sympy import factorint
from sympy.polys.domains import ZZ_I

from services.common.errors import InvalidInputError


@dataclass(frozen=True, slots=True)
class GaussianInt:
    """ℤ[i] 中的元素 re + i·im。"""

    re: int
    im: int = 0

    def __add__(self, other: "GaussianInt") -> "GaussianInt":
        return GaussianInt(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianInt") -> "GaussianInt":
        return GaussianInt(self.re - other.re, self.im - other.im)

    def __mul__(self, other: "GaussianInt") -> "GaussianInt":
        return GaussianInt(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __neg__(self) -> "GaussianInt":
        return GaussianInt(-self.re, -self.im)

    def conj(self) -> "GaussianInt":
        return GaussianInt(self.re, -self.im)

    def norm(self) -> int:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_unit(self) -> bool:
        return self.norm() == 1

    def divides(self, other: "GaussianInt") -> bool:
        if self.is_zero():
            return other.is_zero()
        _, remainder = divmod(other.to_domain(), self.to_domain())
        return remainder == ZZ_I.zero

    def canonical(self) -> "GaussianInt":
        """First-quadrant associate: re > 0 and im ≥ 0, zero stays zero."""
        value = self
        for _ in range(4):
            if value.re > 0 and value.im >= 0:
                return value
            value = value * I_UNIT
        return value

    def to_domain(self):
        return ZZ_I(self.re, self.im)

    @classmethod
    def from_domain(cls, element) -> "GaussianInt":
        return cls(int(element.x), int(element.y))

    def __str__(self) -> str:
        return f"{self.re}{self.im:+d}i"


I_UNIT = GaussianInt(0, 1)
UNITS: Tuple[GaussianInt, ...] = (GaussianInt(1, 0), GaussianInt(0, 1), GaussianInt(-1, 0), GaussianInt(0, -1))


def gaussian_gcd(alpha: GaussianInt, beta: GaussianInt) -> GaussianInt:
    """Canonical-associate gcd in ℤ[i]."""
    if alpha.is_zero() and beta.is_zero():
        raise InvalidInputError("gcd of two zero Gaussian integers is undefined")
    value = ZZ_I.gcd(alpha.to_domain(), beta.to_domain())
    return GaussianInt.from_domain(value).canonical()


def is_coprime(alpha: GaussianInt, beta: GaussianInt) -> bool:
    if alpha.is_zero() and beta.is_zero():
        return False
    return gaussian_gcd(alpha, beta).is_unit()


def _local_ideals(p: int, exponent: int) -> List[Tuple[int, int, int]]:
    """无平方因子理想在素数 p 上的局部选择 (范数, μ, 个数)。"""
    options = [(1, 1, 1)]
    if p == 2:
        options.append((2, -1, 1))
    elif p % 4 == 1:
        options.append((p, -1, 2))
        if exponent >= 2:
            options.append((p * p, 1, 1))
    elif exponent >= 2:
        options.append((p * p, -1, 1))
    return options


def moebius_ideals(m: int) -> List[Tuple[int, int, int]]:
    """All squarefree ideals I of ℤ[i] with N(I) | m as ``(norm, μ(I), multiplicity)``."""
    if m < 1:
        raise InvalidInputError(f"moebius_ideals expects a positive integer, got {m}")
    factors = factorint(m)
    local = [_local_ideals(p, e) for p, e in sorted(factors.items())]
    result: List[Tuple[int, int, int]] = []
    for choice in product(*local):
        norm, mu, count = 1, 1, 1
        for p_norm, p_mu, p_count in choice:
            norm *= p_norm
            mu *= p_mu
            count *= p_count
        result.append((norm, mu, count))
    return sorted(result)


def ideal_count(norm: int) -> int:
    """Number of ideals of ℤ[i] with the given norm."""
    if norm < 1:
        raise InvalidInputError(f"ideal norm must be positive, got {norm}")
    total = 1
    for p, e in factorint(norm).items():
        if p % 4 == 1:
            total *= e + 1
        elif p % 4 == 3 and e % 2:
            return 0
    return total
