"""Integer curvature-vector algebra for generalized Apollonian sphere packings.

A packing is described by column vectors ``(a, b, c, d, ω)``: four curvatures, one from each pair of
non-tangent spheres of an octuple, and the common pair average ω.  The group generated by ``A1..A5``
acts on these vectors from the left; the helpers below are pure functions over immutable values.
"""

from __future__ import annotations

import logging
import random
from itertools import permutations
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import sympy

from services.common.errors import InvalidInputError, InvariantViolationError
from services.common.models import Octuple, ParityReport, SeedVector

logger = logging.getLogger(__name__)

Matrix5 = Tuple[Tuple[int, ...], ...]

GENERATOR_NAMES: Tuple[str, ...] = ("A1", "A2", "A3", "A4", "A5")

GENERATORS: Dict[str, Matrix5] = {
    "A1": (
        (-1, 0, 0, 0, 2),
        (0, 1, 0, 0, 0),
        (0, 0, 1, 0, 0),
        (0, 0, 0, 1, 0),
        (0, 0, 0, 0, 1),
    ),
    "A2": (
        (1, 0, 0, 0, 0),
        (0, -1, 0, 0, 2),
        (0, 0, 1, 0, 0),
        (0, 0, 0, 1, 0),
        (0, 0, 0, 0, 1),
    ),
    "A3": (
        (1, 0, 0, 0, 0),
        (0, 1, 0, 0, 0),
        (0, 0, -1, 0, 2),
        (0, 0, 0, 1, 0),
        (0, 0, 0, 0, 1),
    ),
    "A4": (
        (1, 0, 0, 0, 0),
        (0, 1, 0, 0, 0),
        (0, 0, 1, 0, 0),
        (0, 0, 0, -1, 2),
        (0, 0, 0, 0, 1),
    ),
    "A5": (
        (1, 0, 0, 0, 0),
        (0, 1, 0, 0, 0),
        (0, 0, 1, 0, 0),
        (0, 0, 0, 1, 0),
        (1, 1, 1, 1, -1),
    ),
}

DEFAULT_REDUCTION_CAP = 1_000_000


def _resolve(generator: str | int) -> str:
    if isinstance(generator, int):
        if not 1 <= generator <= 5:
            raise InvalidInputError(f"generator index out of range: {generator}")
        return f"A{generator}"
    name = generator.upper()
    if name not in GENERATORS:
        raise InvalidInputError(f"unknown generator {generator!r}")
    return name


def solve_omega(b1: int, b2: int, b3: int, b4: int) -> Tuple[sympy.Expr, sympy.Expr]:
    """求解 2ω² − 2ω·Σb + Σb² = 0 的两个根（较小者在前）。

    判别式为完全平方时返回有理数，否则返回精确的二次无理数表达式。
    """
    quad = (b1, b2, b3, b4)
    total = sum(quad)
    squares = sum(b * b for b in quad)
    discriminant = total * total - 2 * squares
    if discriminant < 0:
        raise InvalidInputError(
            f"curvatures {quad} admit no real pair average (discriminant {discriminant})"
        )
    root = sympy.sqrt(sympy.Integer(discriminant))
    low = (sympy.Integer(total) - root) / 2
    high = (sympy.Integer(total) + root) / 2
    return low, high


def apply_generator(generator: str | int, octuple: Octuple) -> Octuple:
    matrix = GENERATORS[_resolve(generator)]
    vector = octuple.as_tuple()
    return Octuple.from_sequence(sum(row[j] * vector[j] for j in range(5)) for row in matrix)


def apply_word(word: Iterable[str | int], octuple: Octuple) -> Octuple:
    """按从左到右的顺序依次作用生成元。"""
    current = octuple
    for letter in word:
        current = apply_generator(letter, current)
    return current


def random_word(rng: random.Random, length: int) -> List[str]:
    """Draw a non-backtracking word (no letter repeated back to back)."""
    word: List[str] = []
    for _ in range(length):
        choices = [name for name in GENERATOR_NAMES if not word or name != word[-1]]
        word.append(rng.choice(choices))
    return word


def is_primitive(octuple: Octuple) -> bool:
    return octuple.content() == 1


def curvatures(octuple: Octuple) -> Tuple[int, ...]:
    return octuple.curvatures()


def octuple_key(octuple: Octuple) -> Tuple[int, ...]:
    """Representation-independent key: ω followed by the sorted smaller member of each pair."""
    omega = octuple.omega
    smaller = sorted(min(b, 2 * omega - b) for b in octuple.quadruple)
    return (omega, *smaller)


def scale(octuple: Octuple, factor: int) -> Octuple:
    return Octuple.from_sequence(factor * v for v in octuple.as_tuple())


def _require_equation(octuple: Octuple) -> None:
    if not octuple.satisfies_equation():
        raise InvalidInputError(
            f"octuple {octuple.as_tuple()} violates 2ω² − 2ω·Σb + Σb² = 0 "
            f"(residual {octuple.residual()})"
        )


def check_parity(octuple: Octuple) -> ParityReport:
    """校验原始八元组的奇偶律：两偶两奇、奇数模 4 同余、ω 为奇数。"""
    _require_equation(octuple)
    if not is_primitive(octuple):
        raise InvalidInputError(f"octuple {octuple.as_tuple()} is not primitive")

    evens = tuple(b for b in octuple.quadruple if b % 2 == 0)
    odds = tuple(b for b in octuple.quadruple if b % 2)
    if len(evens) != 2:
        raise InvariantViolationError(
            f"expected two even and two odd curvatures in {octuple.quadruple}",
            rule="two_even_two_odd",
            context={"octuple": list(octuple.as_tuple())},
        )
    residues = {b % 4 for b in odds}
    if len(residues) != 1:
        raise InvariantViolationError(
            f"odd curvatures {odds} are not congruent modulo 4",
            rule="odd_residue_mod4",
            context={"octuple": list(octuple.as_tuple())},
        )
    if octuple.omega % 2 == 0:
        raise InvariantViolationError(
            f"pair average {octuple.omega} of a primitive octuple must be odd",
            rule="omega_odd",
            context={"octuple": list(octuple.as_tuple())},
        )
    return ParityReport(evens=evens, odds=odds, odd_residue=residues.pop(), omega_odd=True)


def is_root(octuple: Octuple) -> bool:
    """轨道中 ω 最小的代表：排序后 a ≤ 0 ≤ b ≤ c ≤ d ≤ ω，且 A5 不能再减小 ω（2ω ≤ a+b+c+d）。"""
    a, b, c, d, omega = octuple.as_tuple()
    return a <= 0 <= b <= c <= d <= omega and 2 * omega <= a + b + c + d


def reduce_to_root(octuple: Octuple, *, max_steps: int = DEFAULT_REDUCTION_CAP) -> Octuple:
    """把轨道中的任意向量约化为根八元组 a ≤ 0 ≤ b ≤ c ≤ d ≤ ω，2ω ≤ a+b+c+d。"""
    _require_equation(octuple)
    values = list(octuple.as_tuple())
    steps = 0
    while True:
        if steps >= max_steps:
            raise InvalidInputError(
                f"reduction of {octuple.as_tuple()} did not terminate within {max_steps} steps"
            )
        quad, omega = values[:4], values[4]
        if 2 * omega > sum(quad):
            values[4] = sum(quad) - omega
            steps += 1
            continue
        flip = next((i for i, b in enumerate(quad) if b > omega), None)
        if flip is not None:
            values[flip] = 2 * omega - quad[flip]
            steps += 1
            continue
        break

    root = Octuple(*sorted(values[:4]), values[4])
    if not is_root(root):
        raise InvariantViolationError(
            f"reduction of {octuple.as_tuple()} stopped at {root.as_tuple()}, which is not a root",
            rule="root_shape",
        )
    logger.debug("Reduced %s to root %s in %d steps", octuple.as_tuple(), root.as_tuple(), steps)
    return root


def normalize_seed(root: Octuple) -> SeedVector:
    """在所有合法标记中选取字典序最小的 (a₀, b₀, c₀, d₀)，必要时把 a₀ = 0 换成 2ω − a₀。"""
    _require_equation(root)
    if not is_primitive(root):
        raise InvalidInputError(f"root {root.as_tuple()} is not primitive")

    omega = root.omega
    candidates: List[Tuple[int, int, int, int]] = []
    for a0, b0, c0, d0 in set(permutations(root.quadruple)):
        if a0 == 0:
            a0 = 2 * omega - a0
        if a0 == 0 or a0 % 2 or b0 % 2 == 0 or a0 + b0 <= 0:
            continue
        candidates.append((a0, b0, c0, d0))
    if not candidates:
        raise InvariantViolationError(
            f"root {root.as_tuple()} admits no even/odd labeling",
            rule="two_even_two_odd",
        )
    best = min(candidates)
    return SeedVector(*best, omega).validate()


def root_and_seed(octuple: Octuple, *, max_steps: int = DEFAULT_REDUCTION_CAP) -> Tuple[Octuple, SeedVector]:
    root = reduce_to_root(octuple, max_steps=max_steps)
    return root, normalize_seed(root)


def odd_residue(values: Sequence[int]) -> Optional[int]:
    """Common residue mod 4 of the odd entries, ``None`` when there are none or they disagree."""
    residues = {v % 4 for v in values if v % 2}
    if len(residues) != 1:
        return None
    return residues.pop()


def gcd_all(values: Iterable[int]) -> int:
    result = 0
    for value in values:
        result = gcd(result, value)
    return result
