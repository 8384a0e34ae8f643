from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Tuple

import sympy

from services.common.errors import InvariantViolationError
from services.common.models import SeedVector
from services.forms.gaussian import GaussianInt


@dataclass(frozen=True, slots=True)
class QuadForm:
    """f = A x² + A y² + 4D z² + 4D t² + 4B xt − 4B yz + 4C xz + 4C yt。"""

    A0: int
    B0: int
    C0: int
    D0: int
    a0: int

    @property
    def coefficients(self) -> Tuple[int, int, int, int]:
        return (self.A0, self.B0, self.C0, self.D0)

    @property
    def delta(self) -> int:
        """A₀D₀ − B₀² − C₀²，等于 a₀²。"""
        return self.A0 * self.D0 - self.B0 ** 2 - self.C0 ** 2

    @property
    def gamma(self) -> GaussianInt:
        return GaussianInt(self.C0, -self.B0)

    def disc_primes(self) -> Tuple[int, ...]:
        odd = [p for p in sympy.primefactors(abs(self.a0)) if p != 2]
        return tuple([2, *odd])

    def to_json(self) -> Dict[str, Any]:
        return {
            "A0": self.A0,
            "B0": self.B0,
            "C0": self.C0,
            "D0": self.D0,
            "a0": self.a0,
            "discriminant": discriminant(self),
        }


def build_form(seed: SeedVector) -> QuadForm:
    a0, b0, c0, d0, omega0 = seed.as_tuple()
    b_twice = -(a0 + b0 + c0 + d0 - 2 * omega0)
    c_twice = -(a0 + b0 + c0 - d0)
    if b_twice % 2 or c_twice % 2:
        raise InvariantViolationError(
            f"seed {seed.as_tuple()} gives non-integral form coefficients",
            rule="form_integrality",
            context={"seed": list(seed.as_tuple())},
        )
    form = QuadForm(A0=a0 + b0, B0=b_twice // 2, C0=c_twice // 2, D0=a0 + c0, a0=a0)
    if form.delta != a0 * a0:
        raise InvariantViolationError(
            f"B₀² + C₀² − A₀D₀ = {-form.delta}, expected {-a0 * a0}",
            rule="form_discriminant",
            context={"form": list(form.coefficients)},
        )
    if form.A0 <= 0:
        raise InvariantViolationError(
            f"form {form.coefficients} is not positive definite",
            rule="form_definite",
        )
    return form


def eval_form(form: QuadForm, x: int, y: int, z: int, t: int) -> int:
    A, B, C, D = form.coefficients
    return (
        A * x * x
        + A * y * y
        + 4 * D * z * z
        + 4 * D * t * t
        + 4 * B * x * t
        - 4 * B * y * z
        + 4 * C * x * z
        + 4 * C * y * t
    )


def eval_gaussian(form: QuadForm, alpha: GaussianInt, beta: GaussianInt) -> int:
    """A|α|² + 4Re(ᾱβγ) + 4D|β|²，其中 γ = C − iB。"""
    cross = alpha.conj() * beta * form.gamma
    return form.A0 * alpha.norm() + 4 * cross.re + 4 * form.D0 * beta.norm()


def gram_matrix(form: QuadForm) -> sympy.ImmutableMatrix:
    A, B, C, D = form.coefficients
    return sympy.ImmutableMatrix(
        [
            [A, 0, 2 * C, 2 * B],
            [0, A, -2 * B, 2 * C],
            [2 * C, -2 * B, 4 * D, 0],
            [2 * B, 2 * C, 0, 4 * D],
        ]
    )


def discriminant(form: QuadForm) -> int:
    return int(gram_matrix(form).det())