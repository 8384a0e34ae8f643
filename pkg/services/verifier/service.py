from __future__ import annotations

import io
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Any, Dict, Iterable, List, Optional

from sympy import primefactors

from config.default import settings
from services.common.errors import InvalidInputError, InvariantViolationError
from services.common.models import Octuple, SeedVector
from services.common.serialization import format_rational
from services.enumeration.service import EnumerationService, enumerate_curvatures
from services.enumeration.table import CurvatureTable
from services.forms.counting import Representation, find_representation
from services.forms.form import QuadForm, build_form, eval_form
from services.octuple.algebra import normalize_seed, reduce_to_root

logger = logging.getLogger(__name__)

ADMISSIBLE = "admissible"
INADMISSIBLE = "inadmissible"
UNCLASSIFIED = "unclassified"


@dataclass(frozen=True, slots=True)
class AdmissibilityClass:
    """局部条件：gcd(m, a₀) = 1 时，m 可容许当且仅当 m ≡ b₀ (mod 4)。"""

    seed: SeedVector

    @property
    def residue(self) -> int:
        return self.seed.b0 % 4

    @property
    def modulus(self) -> int:
        return abs(self.seed.a0)

    def to_json(self) -> Dict[str, int]:
        return {"residue": self.residue, "modulus": self.modulus}


def is_admissible(m: int, cls: AdmissibilityClass) -> str:
    if m < 1:
        raise InvalidInputError(f"admissibility is defined for positive integers, got {m}")
    if gcd(m, cls.modulus) > 1:
        return UNCLASSIFIED
    return ADMISSIBLE if m % 4 == cls.residue else INADMISSIBLE


def density_lower_bound(a0: int) -> Fraction:
    """(1/4)·Π_{p | a₀, p odd}(1 − 1/p)."""
    bound = Fraction(1, 4)
    for p in primefactors(abs(a0)):
        if p != 2:
            bound *= 1 - Fraction(1, p)
    return bound


def unclassified_summary(values: Iterable[int], a0: int) -> Dict[str, Dict[str, int]]:
    """Counts of present values sharing a factor with a₀, by residue mod 4 and by the common gcd."""
    by_residue: Counter = Counter()
    by_gcd: Counter = Counter()
    for m in values:
        common = gcd(m, a0)
        if common > 1:
            by_residue[str(m % 4)] += 1
            by_gcd[str(common)] += 1
    return {"by_residue_mod4": dict(sorted(by_residue.items())), "by_gcd": dict(sorted(by_gcd.items()))}


@dataclass(slots=True)
class ExceptionReport:
    bound: int
    cls: AdmissibilityClass
    admissible_total: int
    found: int
    missing: List[int]
    unclassified: List[int]
    unclassified_stats: Dict[str, Dict[str, int]] = field(default_factory=dict)

    @property
    def largest_missing(self) -> Optional[int]:
        return self.missing[-1] if self.missing else None

    @property
    def observed_density(self) -> Fraction:
        return Fraction(self.found, self.bound)

    def to_json(self) -> Dict[str, Any]:
        lower = density_lower_bound(self.cls.seed.a0)
        return {
            "bound": self.bound,
            "residue": self.cls.residue,
            "modulus": self.cls.modulus,
            "counts": {
                "admissible_total": self.admissible_total,
                "found": self.found,
                "missing": len(self.missing),
                "unclassified": len(self.unclassified),
            },
            "missing": self.missing,
            "largest_missing": self.largest_missing,
            "density": {
                "observed": float(self.observed_density),
                "lower_bound": format_rational(lower),
                "lower_bound_value": float(lower),
            },
            "unclassified_summary": self.unclassified_stats,
        }


def missing_csv(report: ExceptionReport) -> str:
    buffer = io.StringIO()
    buffer.write("m\n")
    for m in report.missing:
        buffer.write(f"{m}\n")
    return buffer.getvalue()


def classify_table(table: CurvatureTable, cls: AdmissibilityClass) -> ExceptionReport:
    """对 1..N 逐个分类；可容许以外却出现在堆积中的值直接报错。"""
    present = set(table.present_values())
    admissible_total = 0
    found = 0
    missing: List[int] = []
    unclassified: List[int] = []
    violations: List[int] = []
    for m in range(1, table.bound + 1):
        kind = is_admissible(m, cls)
        if kind == UNCLASSIFIED:
            if m in present:
                unclassified.append(m)
        elif kind == ADMISSIBLE:
            admissible_total += 1
            if m in present:
                found += 1
            else:
                missing.append(m)
        elif m in present:
            violations.append(m)
    if violations:
        logger.error("Inadmissible curvatures found in packing: %s", violations[:20])
        raise InvariantViolationError(
            f"{len(violations)} inadmissible curvature(s) present, first {violations[0]}",
            rule="local_obstruction",
            context={"values": violations[:20], "residue": cls.residue, "modulus": cls.modulus},
        )
    return ExceptionReport(
        bound=table.bound,
        cls=cls,
        admissible_total=admissible_total,
        found=found,
        missing=missing,
        unclassified=unclassified,
        unclassified_stats=unclassified_summary(unclassified, cls.seed.a0),
    )


def _class_for(octuple: Octuple) -> AdmissibilityClass:
    root = reduce_to_root(octuple, max_steps=settings.reduction_cap)
    return AdmissibilityClass(seed=normalize_seed(root))


def verify_local_global(octuple: Octuple, bound: int, *, dedup_depth: Optional[int] = None) -> ExceptionReport:
    cls = _class_for(octuple)
    table, _ = enumerate_curvatures(octuple, bound, dedup_depth=dedup_depth, with_multiplicity=False)
    return classify_table(table, cls)


@dataclass(slots=True)
class StabilityReport:
    bound: int
    missing: List[int]
    missing_at_double: List[int]
    new_missing: List[int]
    resolved: List[int]

    @property
    def stable(self) -> bool:
        return not self.new_missing

    def to_json(self) -> Dict[str, Any]:
        return {
            "bound": self.bound,
            "stable": self.stable,
            "missing": self.missing,
            "missing_at_double": self.missing_at_double,
            "new_missing": self.new_missing,
            "resolved": self.resolved,
        }


def missing_stability(octuple: Octuple, bound: int, *, dedup_depth: Optional[int] = None) -> StabilityReport:
    """Re-run at 2N and compare the missing values at or below N."""
    first = verify_local_global(octuple, bound, dedup_depth=dedup_depth)
    second = verify_local_global(octuple, 2 * bound, dedup_depth=dedup_depth)
    return compare_missing(first, second)


def compare_missing(first: ExceptionReport, second: ExceptionReport) -> StabilityReport:
    bound = first.bound
    again = [m for m in second.missing if m <= bound]
    before = set(first.missing)
    after = set(again)
    return StabilityReport(
        bound=bound,
        missing=first.missing,
        missing_at_double=second.missing,
        new_missing=sorted(after - before),
        resolved=sorted(before - after),
    )


@dataclass(slots=True)
class Certificate:
    """m + a₀ = f(x, y, z, t)，(x + iy, z + it) 互素且 x ≢ y (mod 2)；可独立复核。"""

    m: int
    form: QuadForm
    representation: Optional[Representation]

    @property
    def found(self) -> bool:
        return self.representation is not None

    def check(self) -> bool:
        if self.representation is None:
            return False
        return eval_form(self.form, *self.representation) == self.m + self.form.a0

    def to_json(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"m": self.m, "value": self.m + self.form.a0, "found": self.found}
        if self.representation is not None:
            payload["representation"] = list(self.representation)
        else:
            payload["note"] = "no primitive representation within the search bound"
        return payload


def representability_certificate(seed: SeedVector, m: int, budget: Optional[int] = None) -> Certificate:
    cls = AdmissibilityClass(seed=seed)
    if is_admissible(m, cls) != ADMISSIBLE:
        raise InvalidInputError(f"m={m} is not admissible for residue {cls.residue} mod 4")
    form = build_form(seed)
    disc = 16 * seed.a0 ** 4
    if gcd(m + seed.a0, disc) != 1:
        raise InvalidInputError(f"m + a₀ = {m + seed.a0} shares a factor with the discriminant {disc}")
    rep = find_representation(form, m + seed.a0, primitive=True, parity=True, budget=budget)
    if rep is None:
        logger.info("No certificate for m=%d within the search bound", m)
    return Certificate(m=m, form=form, representation=rep)


class LocalGlobalService:
    """局部-整体校验服务：枚举曲率表并与可容许类交叉比对。"""

    def __init__(self, enumeration: Optional[EnumerationService] = None) -> None:
        self._enumeration = enumeration or EnumerationService()

    async def verify(self, octuple: Octuple, bound: int, *, threads: Optional[int] = None) -> ExceptionReport:
        result = await self._enumeration.enumerate(octuple, bound, threads=threads, with_multiplicity=False)
        cls = AdmissibilityClass(seed=normalize_seed(result.root))
        report = classify_table(result.table, cls)
        logger.info(
            "Local-global check finished",
            extra={
                "bound": bound,
                "found": report.found,
                "missing_count": len(report.missing),
                "largest_missing": report.largest_missing,
            },
        )
        return report

    def certificates(self, seed: SeedVector, values: Iterable[int]) -> List[Certificate]:
        return [representability_certificate(seed, m) for m in values]

    async def stability(self, octuple: Octuple, bound: int, *, threads: Optional[int] = None) -> StabilityReport:
        first = await self.verify(octuple, bound, threads=threads)
        second = await self.verify(octuple, 2 * bound, threads=threads)
        report = compare_missing(first, second)
        logger.info(
            "Missing-value stability checked",
            extra={"bound": bound, "stable": report.stable, "new_missing": len(report.new_missing)},
        )
        return report