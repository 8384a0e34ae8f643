from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

import sympy

from config.default import settings
from services.common.errors import BudgetExceededError, InvalidInputError, InvariantViolationError
from services.common.models import SeedVector
from services.forms.form import build_form
from services.forms.gaussian import UNITS, GaussianInt
from services.octuple.algebra import GENERATORS
from services.picard.cyclotomic import (
    IDENTITY,
    ONE,
    ZERO,
    ZETA,
    ZETA3,
    CyclotomicMatrix,
    Zeta8,
)

logger = logging.getLogger(__name__)

MAX_WORD_LENGTH = 10

# ---------------------------------------------------------------------------
# Matrices of the change-of-basis chain
# ---------------------------------------------------------------------------

G_MATRICES: Dict[str, sympy.ImmutableMatrix] = {
    "g2": sympy.ImmutableMatrix([[1, 2, 2, 2], [0, 0, -1, -1], [0, -1, 0, -1], [0, 0, 0, 1]]),
    "g3": sympy.ImmutableMatrix([[1, 0, 0, 0], [-1, 0, -1, 0], [-1, -1, 0, 0], [2, 2, 2, 1]]),
    "g4": sympy.ImmutableMatrix([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]),
    "g5": sympy.ImmutableMatrix([[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]),
}

V_MATRIX = sympy.ImmutableMatrix([[1, 0, 0, 0], [0, 0, 0, 1], [1, 0, 2, 1], [1, 1, 1, 1]])

U_MATRIX = sympy.ImmutableMatrix(
    [
        [1, 0, 0, 0, 0],
        [-1, 1, 0, 0, 0],
        [-1, 0, 1, 0, 0],
        [-1, 0, 0, 1, 0],
        [-1, 0, 0, 0, 1],
    ]
)

LATTICE_REFLECTIONS: Dict[str, sympy.ImmutableMatrix] = {
    "R2": sympy.ImmutableMatrix([[-1, 0, 0, 2], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]),
    "R3": sympy.ImmutableMatrix([[1, 0, 0, 0], [0, -1, 0, 2], [0, 0, 1, 0], [0, 0, 0, 1]]),
    "R4": sympy.ImmutableMatrix([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 2], [0, 0, 0, 1]]),
    "R5": sympy.ImmutableMatrix([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [1, 1, 1, -1]]),
}

# Δ(A, B, C, D) = B² + C² − AD
DELTA_GRAM = sympy.ImmutableMatrix(
    [
        [0, 0, 0, -sympy.Rational(1, 2)],
        [0, 1, 0, 0],
        [0, 0, 1, 0],
        [-sympy.Rational(1, 2), 0, 0, 0],
    ]
)

# Q(x₂..x₅) = 2x₅² − 2x₅(x₂ + x₃ + x₄) + x₂² + x₃² + x₄²
Q_GRAM = sympy.ImmutableMatrix([[1, 0, 0, -1], [0, 1, 0, -1], [0, 0, 1, -1], [-1, -1, -1, 2]])

# ---------------------------------------------------------------------------
# M₁..M₆, word identities and the Ξ generators
# ---------------------------------------------------------------------------

M_MATRICES: Dict[str, CyclotomicMatrix] = {
    "M1": CyclotomicMatrix.gaussian((1, 0), (1, 1), (-1, 1), (-1, 0)),
    "M2": CyclotomicMatrix.gaussian((0, 1), (-1, 1), (0, 0), (0, -1)),
    "M3": CyclotomicMatrix(ZETA3, ZETA + ZETA3, ZERO, -ZETA),
    "M4": CyclotomicMatrix.gaussian((0, 1), (0, 0), (-1, -1), (0, -1)),
    "M5": CyclotomicMatrix(ZETA3, ZERO, -(ZETA + ZETA3), -ZETA),
    "M6": CyclotomicMatrix(ZETA, ZERO, ZERO, -ZETA3),
}

RHO_PRODUCTS: Dict[str, Tuple[str, str]] = {
    "M1": ("g2", "g3"),
    "M2": ("g2", "g4"),
    "M3": ("g2", "g5"),
    "M4": ("g3", "g4"),
    "M5": ("g3", "g5"),
    "M6": ("g4", "g5"),
}


@dataclass(frozen=True, slots=True)
class WordIdentity:
    name: str
    word: Tuple[str, ...]
    rhs: CyclotomicMatrix
    mandatory: bool = True


WORD_IDENTITIES: Tuple[WordIdentity, ...] = (
    WordIdentity(
        "translation_real",
        ("M6", "M4", "M2", "M4", "M6^-1", "M2^-1"),
        CyclotomicMatrix.gaussian((1, 0), (2, 0), (0, 0), (1, 0)),
    ),
    WordIdentity(
        "lower_real",
        ("M5^-1", "M4^-1", "M6^-1", "M5^-1", "M6^-1", "M4"),
        CyclotomicMatrix.gaussian((1, 0), (0, 0), (2, 0), (1, 0)),
    ),
    WordIdentity(
        "lower_imaginary",
        ("M4^-1", "M6^-1", "M5"),
        CyclotomicMatrix.gaussian((1, 0), (0, 0), (0, 2), (1, 0)),
    ),
    WordIdentity(
        "diagonal_i",
        ("M2", "M1", "M5", "M4^-1", "M5"),
        CyclotomicMatrix.gaussian((0, 1), (0, 0), (0, 0), (0, -1)),
    ),
    WordIdentity(
        "translation_imaginary",
        ("M6^-1", "M1", "M5", "M6", "M5^-1", "M7"),
        CyclotomicMatrix.gaussian((1, 0), (0, 2), (0, 0), (1, 0)),
        mandatory=False,
    ),
    WordIdentity(
        "hyperbolic_real",
        ("M3^-1", "M2", "M6^-1", "M4^-1", "M3^-1", "M5^-1", "M4^-1", "M6^-1", "M5"),
        CyclotomicMatrix.gaussian((1, 2), (2, 0), (2, 0), (1, -2)),
        mandatory=False,
    ),
    WordIdentity(
        "hyperbolic_mixed",
        ("M4^-1", "M5", "M6", "M1^-1", "M3^-1", "M4^-1", "M6^-1", "M1^-1", "M2^-1", "M4"),
        CyclotomicMatrix.gaussian((1, -2), (0, 2), (0, -2), (1, 2)),
    ),
    WordIdentity(
        "hyperbolic_conjugate",
        ("M6^-1", "M2^-1", "M6^-1", "M4^-1", "M5^-1", "M6^-1", "M2^-1"),
        CyclotomicMatrix.gaussian((1, 2), (0, 2), (0, -2), (1, -2)),
    ),
)

XI_GENERATORS: Tuple[CyclotomicMatrix, ...] = tuple(identity.rhs for identity in WORD_IDENTITIES)

# ---------------------------------------------------------------------------
# ρ : PSL₂(ℂ) → SO_Δ
# ---------------------------------------------------------------------------


def _rational(value: Zeta8, what: str) -> int:
    if not value.is_rational():
        raise InvariantViolationError(
            f"ρ entry {what} = {value} is not a rational integer",
            rule="rho_integrality",
        )
    return value.c0


def _half(value: Zeta8, what: str) -> int:
    doubled = _rational(value, what)
    if doubled % 2:
        raise InvariantViolationError(
            f"ρ entry {what} = {doubled}/2 is not an integer",
            rule="rho_integrality",
        )
    return doubled // 2


def rho(matrix: CyclotomicMatrix) -> sympy.ImmutableMatrix:
    """把 [[α, β], [γ, δ]] 映到保持 Δ 的 4×4 整数矩阵；元素必须是有理整数。"""
    a, b, c, d = matrix.entries
    ac = a * c.conj()
    mixed = a.conj() * d - b.conj() * c
    cross = a * d.conj() + b * c.conj()
    bd = b * d.conj()
    ba = b * a.conj()
    dc = d * c.conj()
    rows = [
        [
            _rational(a * a.conj(), "|α|²"),
            _rational(ba.twice_im(), "2Im(βᾱ)"),
            _rational(ba.twice_re(), "2Re(βᾱ)"),
            _rational(b * b.conj(), "|β|²"),
        ],
        [
            _half(ac.twice_im(), "Im(αγ̄)"),
            _half(mixed.twice_re(), "Re(ᾱδ − β̄γ)"),
            _half(cross.twice_im(), "Im(αδ̄ + βγ̄)"),
            _half(bd.twice_im(), "Im(βδ̄)"),
        ],
        [
            _half(ac.twice_re(), "Re(αγ̄)"),
            _half(mixed.twice_im(), "Im(ᾱδ − β̄γ)"),
            _half(cross.twice_re(), "Re(αδ̄ + βγ̄)"),
            _half(bd.twice_re(), "Re(βδ̄)"),
        ],
        [
            _rational(c * c.conj(), "|γ|²"),
            _rational(dc.twice_im(), "2Im(δγ̄)"),
            _rational(dc.twice_re(), "2Re(δγ̄)"),
            _rational(d * d.conj(), "|δ|²"),
        ],
    ]
    return sympy.ImmutableMatrix(rows)


def preserves_delta(matrix: sympy.Matrix) -> bool:
    return (matrix.T * DELTA_GRAM * matrix - DELTA_GRAM).is_zero_matrix


def preserves_q(matrix: sympy.Matrix) -> bool:
    return (matrix.T * Q_GRAM * matrix - Q_GRAM).is_zero_matrix


def _letter(token: str) -> CyclotomicMatrix:
    name, _, power = token.partition("^")
    if name not in M_MATRICES:
        raise InvalidInputError(f"unknown matrix {name!r} in word")
    base = M_MATRICES[name]
    if power in ("", "1"):
        return base
    if power == "-1":
        return base.inverse()
    raise InvalidInputError(f"unsupported exponent in {token!r}")


def evaluate_word(word: Sequence[str]) -> CyclotomicMatrix:
    product = IDENTITY
    for token in word:
        product = product @ _letter(token)
    return product


@dataclass(slots=True)
class CheckResult:
    """校验表中的一行。status 为 pass、fail 或 undefined。"""

    name: str
    status: str
    mandatory: bool = True
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> Dict[str, Any]:
        return {"name": self.name, "status": self.status, "mandatory": self.mandatory, "detail": self.detail}


def verify_word_identities() -> List[CheckResult]:
    results: List[CheckResult] = []
    for identity in WORD_IDENTITIES:
        try:
            value = evaluate_word(identity.word)
        except InvalidInputError as exc:
            results.append(CheckResult(identity.name, "undefined", identity.mandatory, str(exc)))
            continue
        if value.projectively_equal(identity.rhs):
            results.append(CheckResult(identity.name, "pass", identity.mandatory))
        else:
            results.append(
                CheckResult(identity.name, "fail", identity.mandatory, f"word evaluates to {value}, expected {identity.rhs}")
            )
    return results


def verify_rho_images() -> List[CheckResult]:
    """ρ(Mᵢ) equals the listed product of g-matrices."""
    results: List[CheckResult] = []
    for name, (left, right) in RHO_PRODUCTS.items():
        image = rho(M_MATRICES[name])
        expected = G_MATRICES[left] * G_MATRICES[right]
        ok = image == expected and preserves_delta(image) and image.det() == 1
        results.append(CheckResult(f"rho_{name}", "pass" if ok else "fail", True, "" if ok else f"got {image.tolist()}"))
    return results


def lattice_reflection(k: int) -> sympy.ImmutableMatrix:
    """Aₖ in the shifted coordinates (a, b + a, c + a, d + a, ω + a), restricted to the last four."""
    generator = sympy.Matrix(GENERATORS[f"A{k}"])
    conjugated = U_MATRIX.inv() * generator * U_MATRIX
    return sympy.ImmutableMatrix(conjugated[1:, 1:])


def chain_checks() -> List[CheckResult]:
    results: List[CheckResult] = []
    v_inv = V_MATRIX.inv()
    for k in range(2, 6):
        reflection = LATTICE_REFLECTIONS[f"R{k}"]
        g = G_MATRICES[f"g{k}"]
        checks = {
            f"U_A{k}_is_R{k}": lattice_reflection(k) == reflection,
            f"R{k}_preserves_Q": preserves_q(reflection),
            f"V_conjugates_R{k}_to_g{k}": v_inv * reflection * V_MATRIX == g,
            f"g{k}_preserves_delta": preserves_delta(g),
        }
        results.extend(CheckResult(name, "pass" if ok else "fail") for name, ok in checks.items())
    for index, xi in enumerate(XI_GENERATORS, start=1):
        image = V_MATRIX * rho(xi) * v_inv
        ok = preserves_q(image)
        results.append(CheckResult(f"xi{index}_preserves_Q", "pass" if ok else "fail"))
    return results


def seed_vector_check(seed: SeedVector) -> CheckResult:
    """V·(A₀, B₀, C₀, D₀)ᵗ = (b₀ + a₀, c₀ + a₀, d₀ + a₀, ω₀ + a₀) and Q of it is −2a₀²."""
    form = build_form(seed)
    a0, b0, c0, d0, omega0 = seed.as_tuple()
    u0 = V_MATRIX * sympy.Matrix(form.coefficients)
    expected = sympy.Matrix([b0 + a0, c0 + a0, d0 + a0, omega0 + a0])
    q_value = (u0.T * Q_GRAM * u0)[0, 0]
    ok = u0 == expected and q_value == -2 * a0 * a0
    return CheckResult("seed_vector", "pass" if ok else "fail", True, "" if ok else f"u0 = {list(u0)}")


# ---------------------------------------------------------------------------
# Ξ membership and the explicit subset
# ---------------------------------------------------------------------------

DIAG_MINUS_I = CyclotomicMatrix.gaussian((0, -1), (0, 0), (0, 0), (0, 1))


def _congruent_to_identity_mod2(matrix: CyclotomicMatrix) -> bool:
    target = (ONE, ZERO, ZERO, ONE)
    for entry, expected in zip(matrix.entries, target):
        if any((a - b) % 2 for a, b in zip(entry.coords, expected.coords)):
            return False
    return True


def xi_membership(matrix: CyclotomicMatrix) -> bool:
    """m ∈ Γ(2) ∪ diag(i, −i)·Γ(2)，按射影意义判定。"""
    if not matrix.is_gaussian():
        raise InvalidInputError("Ξ membership is defined for Gaussian matrices only")
    if matrix.det() not in (ONE, -ONE):
        raise InvalidInputError(f"matrix determinant {matrix.det()} is not ±1")
    return _congruent_to_identity_mod2(matrix) or _congruent_to_identity_mod2(DIAG_MINUS_I @ matrix)


def _row_key(alpha: GaussianInt, beta: GaussianInt) -> Tuple[int, int, int, int]:
    options = []
    for unit in UNITS:
        a, b = unit * alpha, unit * beta
        options.append((a.re, a.im, b.re, b.im))
    return min(options)


def _subset_value(alpha: GaussianInt, beta: GaussianInt, coefficients: Tuple[int, int, int, int], a0: int) -> int:
    A, B, C, D = coefficients
    ba = beta * alpha.conj()
    return alpha.norm() * A + 2 * ba.im * B + 2 * ba.re * C + beta.norm() * D - a0


def explicit_subset(
    seed: SeedVector,
    word_length: int,
    *,
    budget: Optional[int] = None,
) -> Set[int]:
    """Values A₀|α|² + 2Im(βᾱ)B₀ + 2Re(βᾱ)C₀ + D₀|β|² − a₀ over top rows of words of length ≤ L."""
    if not 0 <= word_length <= MAX_WORD_LENGTH:
        raise InvalidInputError(f"word length must lie in [0, {MAX_WORD_LENGTH}], got {word_length}")
    limit = budget or settings.search_budget
    form = build_form(seed)
    letters: List[Tuple[GaussianInt, GaussianInt, GaussianInt, GaussianInt]] = []
    for xi in XI_GENERATORS:
        for element in (xi, xi.inverse()):
            letters.append(tuple(e.to_gaussian() for e in element.entries))  # type: ignore[arg-type]

    start = (GaussianInt(1), GaussianInt(0))
    seen = {_row_key(*start)}
    level = [start]
    values = {_subset_value(*start, form.coefficients, form.a0)}
    for _ in range(word_length):
        next_level = []
        for alpha, beta in level:
            for a, b, c, d in letters:
                row = (alpha * a + beta * c, alpha * b + beta * d)
                key = _row_key(*row)
                if key in seen:
                    continue
                seen.add(key)
                next_level.append(row)
                values.add(_subset_value(*row, form.coefficients, form.a0))
        if len(seen) > limit:
            raise BudgetExceededError(
                f"explicit subset of word length {word_length} exceeds the search budget",
                required=len(seen),
                available=limit,
                unit="rows",
            )
        level = next_level
    return values


@dataclass(slots=True)
class PicardReport:
    rows: List[CheckResult] = field(default_factory=list)

    @property
    def mandatory_failures(self) -> List[CheckResult]:
        return [row for row in self.rows if row.mandatory and not row.passed]

    @property
    def ok(self) -> bool:
        return not self.mandatory_failures

    def to_json(self) -> Dict[str, Any]:
        return {"ok": self.ok, "rows": [row.to_json() for row in self.rows]}

    def to_table(self) -> str:
        width = max(len(row.name) for row in self.rows) if self.rows else 4
        lines = [f"{'check'.ljust(width)}  status     mandatory"]
        for row in self.rows:
            lines.append(f"{row.name.ljust(width)}  {row.status.ljust(9)}  {'yes' if row.mandatory else 'no'}")
        return "\n".join(lines)


class PicardVerificationService:
    """Picard 群桥接的精确校验：字恒等式、ρ 像、换基链以及 Ξ 生成元。"""

    def run(self, seed: Optional[SeedVector] = None) -> PicardReport:
        report = PicardReport()
        report.rows.extend(verify_word_identities())
        report.rows.extend(verify_rho_images())
        report.rows.extend(chain_checks())
        report.rows.extend(
            CheckResult(f"xi{index}_membership", "pass" if xi_membership(xi) else "fail")
            for index, xi in enumerate(XI_GENERATORS, start=1)
        )
        if seed is not None:
            report.rows.append(seed_vector_check(seed))
        for row in report.rows:
            if row.status != "pass":
                log = logger.error if row.mandatory else logger.warning
                log("Picard check %s: %s %s", row.name, row.status, row.detail)
        logger.info(
            "Picard verification finished",
            extra={"checks": len(report.rows), "mandatory_failures": len(report.mandatory_failures)},
        )
        return report

    def require(self, seed: Optional[SeedVector] = None) -> PicardReport:
        report = self.run(seed)
        if not report.ok:
            names = [row.name for row in report.mandatory_failures]
            raise InvariantViolationError(
                f"mandatory Picard checks failed: {', '.join(names)}",
                rule="picard_identities",
                context={"failed": names},
            )
        return report
