"""Exact representation counts of ``f_{a0}``.

Both Gaussian coordinates are caged by completing the square:
``A·f = |Aα + 2γβ|² + 4Δ|β|²`` and ``4D·f = |4Dβ + 2γ̄α|² + 4Δ|α|²`` with ``Δ = A₀D₀ − B₀² − C₀²``.
Inside the cage ``y`` is the root of a quadratic, solved exactly over the whole ``(β, x)`` grid.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from math import isqrt
from typing import List, Optional, Tuple

import numpy as np
from sympy import divisors

from config.default import settings
from services.common.errors import BudgetExceededError, InvalidInputError, InvariantViolationError
from services.forms.form import QuadForm
from services.forms.gaussian import GaussianInt, ideal_count, is_coprime, moebius_ideals

logger = logging.getLogger(__name__)

Representation = Tuple[int, int, int, int]

METHODS = ("direct", "moebius")


def search_size(form: QuadForm, m: int) -> int:
    """Number of ``(β, x)`` grid points scanned for ``m``."""
    beta_bound = form.A0 * m // (4 * form.delta)
    alpha_bound = form.D0 * m // form.delta
    radius = isqrt(beta_bound)
    betas = sum(2 * isqrt(beta_bound - z * z) + 1 for z in range(-radius, radius + 1))
    return betas * (2 * isqrt(alpha_bound) + 1)


def _beta_grid(bound: int) -> Tuple[np.ndarray, np.ndarray]:
    radius = isqrt(bound)
    axis = np.arange(-radius, radius + 1, dtype=np.int64)
    z, t = np.meshgrid(axis, axis, indexing="ij")
    mask = z * z + t * t <= bound
    return z[mask], t[mask]


def _exact_sqrt(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    roots = np.rint(np.sqrt(values.astype(np.float64))).astype(np.int64)
    return roots, roots * roots == values


@lru_cache(maxsize=4096)
def _representations(form: QuadForm, m: int, budget: int) -> Tuple[Representation, ...]:
    size = search_size(form, m)
    if size > budget:
        logger.warning("Representation search rejected", extra={"m": m, "points": size, "budget": budget})
        raise BudgetExceededError(
            f"representation search for m={m} scans {size} points",
            required=size,
            available=budget,
            unit="lattice points",
        )
    A, B, C, D = form.coefficients
    z, t = _beta_grid(A * m // (4 * form.delta))
    x_radius = isqrt(D * m // form.delta)
    xs = np.arange(-x_radius, x_radius + 1, dtype=np.int64)

    Z = np.repeat(z, xs.size)
    T = np.repeat(t, xs.size)
    X = np.tile(xs, z.size)
    # A y² + b y + c = 0
    b = 4 * (C * T - B * Z)
    c = A * X * X + 4 * D * (Z * Z + T * T) + 4 * B * X * T + 4 * C * X * Z - m
    disc = b * b - 4 * A * c
    real = disc >= 0
    X, Z, T, b, disc = X[real], Z[real], T[real], b[real], disc[real]
    roots, square = _exact_sqrt(disc)
    X, Z, T, b, roots = X[square], Z[square], T[square], b[square], roots[square]

    found: List[np.ndarray] = []
    for sign in (1, -1):
        numerator = -b + sign * roots
        keep = numerator % (2 * A) == 0
        if sign == -1:
            keep &= roots > 0
        y = numerator[keep] // (2 * A)
        found.append(np.column_stack([X[keep], y, Z[keep], T[keep]]))
    solutions = np.concatenate(found) if found else np.zeros((0, 4), dtype=np.int64)

    height = (solutions * solutions).sum(axis=1)
    order = np.lexsort((-solutions[:, 3], -solutions[:, 2], -solutions[:, 1], -solutions[:, 0], height))
    return tuple(tuple(int(v) for v in row) for row in solutions[order])


def representations(form: QuadForm, m: int, budget: Optional[int] = None) -> Tuple[Representation, ...]:
    """All integer ``(x, y, z, t)`` with ``f = m``, ordered by height, then lexicographically descending."""
    if m < 1:
        raise InvalidInputError(f"m must be positive, got {m}")
    return _representations(form, m, budget or settings.search_budget)


def count_representations(form: QuadForm, m: int, budget: Optional[int] = None) -> int:
    return len(representations(form, m, budget))


def is_primitive_representation(rep: Representation) -> bool:
    x, y, z, t = rep
    return is_coprime(GaussianInt(x, y), GaussianInt(z, t))


def primitive_representations(
    form: QuadForm, m: int, budget: Optional[int] = None
) -> List[Representation]:
    return [rep for rep in representations(form, m, budget) if is_primitive_representation(rep)]


def _quarter(total: int, m: int, method: str) -> int:
    if total % 4:
        raise InvariantViolationError(
            f"{method} primitive count {total} for m={m} is not divisible by the four units",
            rule="unit_orbits",
            context={"m": m, "total": total},
        )
    return total // 4


def count_primitive(form: QuadForm, m: int, method: str = "direct", budget: Optional[int] = None) -> int:
    """ℤ[i]-本原表示数（按四个单位归一化）。

    direct 直接筛选 gcd 为单位的表示；moebius 使用 (1/4)·Σ μ(I)·𝒩(m/N(I))。
    """
    if method not in METHODS:
        raise InvalidInputError(f"method must be one of {METHODS}, got {method!r}")
    if method == "direct":
        return _quarter(len(primitive_representations(form, m, budget)), m, method)
    total = 0
    for norm, mu, multiplicity in moebius_ideals(m):
        total += mu * multiplicity * count_representations(form, m // norm, budget)
    return _quarter(total, m, method)


def full_count_from_primitive(form: QuadForm, m: int, budget: Optional[int] = None) -> int:
    """4·Σ_{N(I) | m} 𝒩_P(m / N(I)) over all ideals of ℤ[i]."""
    total = 0
    for norm in divisors(m):
        ideals = ideal_count(norm)
        if ideals:
            total += 4 * ideals * count_primitive(form, m // norm, "direct", budget)
    return total


def find_representation(
    form: QuadForm,
    n: int,
    *,
    primitive: bool = True,
    parity: bool = True,
    budget: Optional[int] = None,
) -> Optional[Representation]:
    """First representation of ``n`` in search order; ``parity`` asks for x ≢ y (mod 2)."""
    for rep in representations(form, n, budget):
        if parity and (rep[0] - rep[1]) % 2 == 0:
            continue
        if primitive and not is_primitive_representation(rep):
            continue
        return rep
    return None
