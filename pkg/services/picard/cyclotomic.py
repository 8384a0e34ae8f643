"""Exact arithmetic in ℤ[ζ₈] and 2×2 matrices over it.

Elements are integer coordinate vectors in the basis ``1, ζ, ζ², ζ³`` with ``ζ⁴ = −1``; ``i = ζ²``
and complex conjugation maps ``ζ ↦ −ζ³``.  No floating point is involved anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Tuple

from services.common.errors import InvalidInputError
from services.forms.gaussian import GaussianInt


@dataclass(frozen=True, slots=True)
class Zeta8:
    c0: int = 0
    c1: int = 0
    c2: int = 0
    c3: int = 0

    @property
    def coords(self) -> Tuple[int, int, int, int]:
        return (self.c0, self.c1, self.c2, self.c3)

    @classmethod
    def gaussian(cls, re: int, im: int = 0) -> "Zeta8":
        return cls(re, 0, im, 0)

    @classmethod
    def from_gaussian(cls, value: GaussianInt) -> "Zeta8":
        return cls(value.re, 0, value.im, 0)

    def __add__(self, other: "Zeta8") -> "Zeta8":
        return Zeta8(*(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "Zeta8") -> "Zeta8":
        return Zeta8(*(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "Zeta8":
        return Zeta8(*(-a for a in self.coords))

    def __mul__(self, other: "Zeta8") -> "Zeta8":
        out = [0, 0, 0, 0]
        for i, a in enumerate(self.coords):
            if not a:
                continue
            for j, b in enumerate(other.coords):
                k = i + j
                if k >= 4:
                    out[k - 4] -= a * b
                else:
                    out[k] += a * b
        return Zeta8(*out)

    def conj(self) -> "Zeta8":
        return Zeta8(self.c0, -self.c3, -self.c2, -self.c1)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_rational(self) -> bool:
        return self.c1 == 0 and self.c2 == 0 and self.c3 == 0

    def is_gaussian(self) -> bool:
        return self.c1 == 0 and self.c3 == 0

    def to_gaussian(self) -> GaussianInt:
        if not self.is_gaussian():
            raise InvalidInputError(f"{self} is not a Gaussian integer")
        return GaussianInt(self.c0, self.c2)

    def twice_re(self) -> "Zeta8":
        return self + self.conj()

    def twice_im(self) -> "Zeta8":
        return MINUS_I * (self - self.conj())

    def __str__(self) -> str:
        terms = [f"{c:+d}{name}" for c, name in zip(self.coords, ("", "ζ", "i", "ζ³")) if c]
        return "".join(terms).lstrip("+") or "0"


ZERO = Zeta8()
ONE = Zeta8(1)
ZETA = Zeta8(0, 1)
I = Zeta8(0, 0, 1)
MINUS_I = Zeta8(0, 0, -1)
ZETA3 = Zeta8(0, 0, 0, 1)


@dataclass(frozen=True, slots=True)
class CyclotomicMatrix:
    """2×2 矩阵 [[α, β], [γ, δ]]，元素位于 ℤ[ζ₈]。"""

    alpha: Zeta8
    beta: Zeta8
    gamma: Zeta8
    delta: Zeta8

    @classmethod
    def of(cls, entries: Iterable[Zeta8]) -> "CyclotomicMatrix":
        return cls(*entries)

    @classmethod
    def gaussian(cls, *entries: Tuple[int, int]) -> "CyclotomicMatrix":
        """Build from four ``(re, im)`` pairs in row order."""
        if len(entries) != 4:
            raise InvalidInputError(f"a 2×2 matrix needs 4 entries, got {len(entries)}")
        return cls(*(Zeta8.gaussian(re, im) for re, im in entries))

    @property
    def entries(self) -> Tuple[Zeta8, Zeta8, Zeta8, Zeta8]:
        return (self.alpha, self.beta, self.gamma, self.delta)

    def __matmul__(self, other: "CyclotomicMatrix") -> "CyclotomicMatrix":
        return CyclotomicMatrix(
            self.alpha * other.alpha + self.beta * other.gamma,
            self.alpha * other.beta + self.beta * other.delta,
            self.gamma * other.alpha + self.delta * other.gamma,
            self.gamma * other.beta + self.delta * other.delta,
        )

    def __neg__(self) -> "CyclotomicMatrix":
        return CyclotomicMatrix(*(-e for e in self.entries))

    def scale(self, factor: Zeta8) -> "CyclotomicMatrix":
        return CyclotomicMatrix(*(factor * e for e in self.entries))

    def det(self) -> Zeta8:
        return self.alpha * self.delta - self.beta * self.gamma

    def inverse(self) -> "CyclotomicMatrix":
        """Adjugate; the true inverse for determinant-1 elements."""
        if self.det() != ONE:
            raise InvalidInputError(f"matrix with determinant {self.det()} is outside SL₂")
        return CyclotomicMatrix(self.delta, -self.beta, -self.gamma, self.alpha)

    def is_gaussian(self) -> bool:
        return all(e.is_gaussian() for e in self.entries)

    def projectively_equal(self, other: "CyclotomicMatrix") -> bool:
        return self == other or self == -other

    def __str__(self) -> str:
        a, b, c, d = (str(e) for e in self.entries)
        return f"[[{a}, {b}], [{c}, {d}]]"


IDENTITY = CyclotomicMatrix(ONE, ZERO, ZERO, ONE)
