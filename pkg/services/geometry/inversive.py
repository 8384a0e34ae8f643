"""Exact inversive geometry in abbc coordinates.

Spheres and planes are rows ``(b̄, b, b·x, b·y, b·z)``; the inversive product is ``a(S₁)·W·a(S₂)ᵗ``.
Möbius transformations act on the right, generators ``A1..A5`` act on octuple matrices from the left.
"""

from __future__ import annotations

import logging
from itertools import combinations
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import sympy

from services.common.errors import InvalidInputError, InvariantViolationError
from services.common.serialization import parse_rational, parse_vector
from services.geometry.models import (
    K_MATRIX,
    W_MATRIX,
    FMatrix,
    MobiusMatrix,
    Sphere,
    Vector5,
    as_vector,
    bilinear,
)
from services.octuple.algebra import GENERATOR_NAMES, GENERATORS

logger = logging.getLogger(__name__)

NUMERIC_DIGITS = 30

ROTATION_AXES = ("yz", "xz", "xy")


def sphere_from_geometry(center: Sequence[Any], curvature: Any) -> Sphere:
    b = sympy.sympify(curvature)
    if b == 0:
        raise InvalidInputError("zero curvature describes a plane; use plane_from_geometry")
    point = as_vector(center)
    if len(point) != 3:
        raise InvalidInputError(f"center needs 3 coordinates, got {len(point)}")
    norm2 = sum(c * c for c in point)
    return Sphere(coords=(b * norm2 - 1 / b, b, *(b * c for c in point)))


def plane_from_geometry(normal: Sequence[Any], offset: Any) -> Sphere:
    direction = as_vector(normal)
    if len(direction) != 3:
        raise InvalidInputError(f"normal needs 3 coordinates, got {len(direction)}")
    if sum(c * c for c in direction) != 1:
        raise InvalidInputError(f"plane normal {direction} is not an exact unit vector")
    h = sympy.sympify(offset)
    return Sphere(coords=(2 * h, sympy.Integer(0), *direction))


def sphere_from_json(payload: Mapping[str, Any]) -> Sphere:
    """Geometry JSON → Sphere；所有数值按 "num/den" 字符串或整数解析。"""
    kind = payload.get("type")
    if kind == "sphere":
        return sphere_from_geometry(parse_vector(payload["center"]), parse_rational(payload["curvature"]))
    if kind == "plane":
        return plane_from_geometry(parse_vector(payload["normal"]), parse_rational(payload["offset"]))
    raise InvalidInputError(f"unknown geometry type {kind!r}")


def sphere_to_geometry(sphere: Sphere) -> Dict[str, Any]:
    return sphere.to_geometry()


def inversive_product(s1: Sphere, s2: Sphere) -> sympy.Expr:
    return bilinear(s1.coords, s2.coords)


def mobius_matrix(kind: str, **params: Any) -> MobiusMatrix:
    """构造缩放、旋转、平移或单位球反演对应的 5×5 矩阵。

    ``scale`` 把空间放大 λ 倍：曲率变为 b/λ，球心变为 λ·x，b̄ 随之乘 λ。
    """
    if kind == "scale":
        lam = sympy.sympify(params.get("lam", 1))
        if lam == 0:
            raise InvalidInputError("scale factor must be nonzero")
        matrix = sympy.diag(lam, 1 / lam, 1, 1, 1)
    elif kind == "rotate":
        cos = sympy.sympify(params.get("cos", 1))
        sin = sympy.sympify(params.get("sin", 0))
        if cos * cos + sin * sin != 1:
            raise InvalidInputError(f"rotation pair ({cos}, {sin}) is not on the unit circle")
        axis = params.get("axis", "xy")
        matrix = sympy.eye(5)
        if axis == "yz":
            matrix[3, 3], matrix[3, 4], matrix[4, 3], matrix[4, 4] = cos, -sin, sin, cos
        elif axis == "xz":
            matrix[2, 2], matrix[2, 4], matrix[4, 2], matrix[4, 4] = cos, sin, -sin, cos
        elif axis == "xy":
            matrix[2, 2], matrix[2, 3], matrix[3, 2], matrix[3, 3] = cos, -sin, sin, cos
        else:
            raise InvalidInputError(f"rotation axis must be one of {ROTATION_AXES}, got {axis!r}")
    elif kind == "translate":
        x, y, z = as_vector(params.get("vector", (0, 0, 0)))
        matrix = sympy.Matrix(
            [
                [1, 0, 0, 0, 0],
                [x * x + y * y + z * z, 1, x, y, z],
                [2 * x, 0, 1, 0, 0],
                [2 * y, 0, 0, 1, 0],
                [2 * z, 0, 0, 0, 1],
            ]
        )
    elif kind == "invert":
        matrix = sympy.eye(5)
        matrix[0, 0], matrix[0, 1], matrix[1, 0], matrix[1, 1] = 0, 1, 1, 0
    else:
        raise InvalidInputError(f"unknown Möbius transform kind {kind!r}")
    return MobiusMatrix(matrix=sympy.ImmutableMatrix(matrix), tag=kind)


def compose(*matrices: MobiusMatrix) -> MobiusMatrix:
    """按作用顺序复合：先应用第一个矩阵。"""
    if not matrices:
        return MobiusMatrix(matrix=sympy.ImmutableMatrix(sympy.eye(5)), tag="identity")
    result = matrices[0]
    for item in matrices[1:]:
        result = result @ item
    return result


def transform(sphere: Sphere, mobius: MobiusMatrix) -> Sphere:
    row = sympy.Matrix([list(sphere.coords)]) * mobius.matrix
    return Sphere(coords=tuple(row), exact=sphere.exact)


def transform_fmatrix(fmatrix: FMatrix, mobius: MobiusMatrix) -> FMatrix:
    product = fmatrix.matrix() * mobius.matrix
    rows = tuple(tuple(product.row(i)) for i in range(5))
    return FMatrix(rows=rows, exact=fmatrix.exact)


def check_tangent_quadruple(spheres: Sequence[Sphere]) -> None:
    if len(spheres) != 4:
        raise InvalidInputError(f"fill_gap needs exactly four spheres, got {len(spheres)}")
    for idx, sphere in enumerate(spheres):
        if sphere.self_product() != 1:
            raise InvalidInputError(f"sphere #{idx} is not a valid abbc vector (self product ≠ 1)")
    for (i, s1), (j, s2) in combinations(enumerate(spheres), 2):
        product = inversive_product(s1, s2)
        if product != -1:
            raise InvalidInputError(
                f"spheres #{i} and #{j} are not tangent (inversive product {product})"
            )


def _branch_key(w: Vector5) -> Tuple[Any, ...]:
    return (w[1], *w)


def _numeric_key(w: Vector5) -> Tuple[float, ...]:
    return tuple(float(sympy.N(v)) for v in (w[1], *w))


def fill_gap(spheres: Sequence[Sphere], known_w: Optional[Sequence[Any]] = None) -> Tuple[FMatrix, FMatrix]:
    """给定四个两两相切的球，返回两个间隙各自对应的八元组矩阵。

    第五行 w 满足 w·W·a(Sⱼ)ᵗ = −1 与 w·W·wᵗ = −1；两解之和等于四行之和。
    """
    check_tangent_quadruple(spheres)
    rows = [sphere.coords for sphere in spheres]
    total = tuple(sum(row[k] for row in rows) for k in range(5))

    if known_w is not None:
        w = as_vector(known_w)
        if len(w) != 5 or not _is_pair_average(w, rows):
            raise InvalidInputError(f"supplied w {w} is not a pair average of the quadruple")
        other = tuple(t - v for t, v in zip(total, w))
        return _ordered(rows, w, other, exact=all(v.is_Rational for v in w))

    system = sympy.Matrix([list(row) for row in rows]) * W_MATRIX
    rhs = sympy.Matrix([-1, -1, -1, -1])
    if system.rank() != 4:
        raise InvalidInputError("tangent quadruple is degenerate (linear system has rank < 4)")
    solution, params = system.gauss_jordan_solve(rhs)
    particular = solution.subs({p: 0 for p in params})
    direction = system.nullspace()[0]
    wp = tuple(particular)
    n = tuple(direction)

    alpha = bilinear(n, n)
    beta = 2 * bilinear(wp, n)
    gamma = bilinear(wp, wp) + 1

    if alpha == 0:
        t = -gamma / beta
        first = tuple(p + t * d for p, d in zip(wp, n))
        second = tuple(s - v for s, v in zip(total, first))
        return _ordered(rows, first, second, exact=True)

    discriminant = beta * beta - 4 * alpha * gamma
    root = sympy.sqrt(discriminant)
    if root.is_Rational:
        candidates = [
            tuple(p + ((-beta + sign * root) / (2 * alpha)) * d for p, d in zip(wp, n))
            for sign in (1, -1)
        ]
        return _ordered(rows, candidates[0], candidates[1], exact=True)

    logger.warning(
        "Irrational pair average; returning %d-digit numeric octuples for geometry export only",
        NUMERIC_DIGITS,
    )
    numeric_root = sympy.N(root, NUMERIC_DIGITS)
    candidates = [
        tuple(sympy.N(p + ((-beta + sign * numeric_root) / (2 * alpha)) * d, NUMERIC_DIGITS) for p, d in zip(wp, n))
        for sign in (1, -1)
    ]
    return _ordered(rows, candidates[0], candidates[1], exact=False)


def _is_pair_average(w: Vector5, rows: Sequence[Vector5]) -> bool:
    if any(bilinear(w, row) != -1 for row in rows):
        return False
    return bilinear(w, w) == -1


def _ordered(rows: Sequence[Vector5], w1: Vector5, w2: Vector5, *, exact: bool) -> Tuple[FMatrix, FMatrix]:
    key = _branch_key if exact else _numeric_key
    first, second = sorted((tuple(w1), tuple(w2)), key=key)
    base = tuple(tuple(row) for row in rows)
    return (
        FMatrix(rows=(*base, first), exact=exact),
        FMatrix(rows=(*base, second), exact=exact),
    )


def check_fmatrix(fmatrix: FMatrix) -> None:
    """校验 F·W·Fᵗ = K，失败时抛出不变量异常。"""
    if not fmatrix.exact:
        raise InvalidInputError("numeric octuple matrices cannot be checked exactly")
    gram = fmatrix.matrix() * W_MATRIX * fmatrix.matrix().T
    if not (gram - K_MATRIX).is_zero_matrix:
        raise InvariantViolationError(
            "octuple matrix does not satisfy F·W·Fᵗ = K",
            rule="fmatrix_gram",
            context={"gram": [[str(v) for v in gram.row(i)] for i in range(5)]},
        )


def octuple_spheres(fmatrix: FMatrix) -> Tuple[Sphere, ...]:
    return fmatrix.spheres()


def apply_generator_to_fmatrix(generator: str, fmatrix: FMatrix) -> FMatrix:
    """左乘生成元 A·F；只用到行的线性组合。"""
    matrix = GENERATORS[generator]
    rows = fmatrix.rows
    new_rows = tuple(
        tuple(sum(coef * rows[j][k] for j, coef in enumerate(line) if coef) for k in range(5))
        for line in matrix
    )
    return FMatrix(rows=new_rows, exact=fmatrix.exact)


def geometry_orbit(fmatrix: FMatrix, depth: int, *, max_depth: int = 6) -> List[FMatrix]:
    """沿不回溯的生成元单词展开八元组，按球集合去重。"""
    if depth < 0 or depth > max_depth:
        raise InvalidInputError(f"geometry depth must be within 0..{max_depth}, got {depth}")

    seen = {fmatrix.sphere_set()}
    orbit = [fmatrix]
    frontier: List[Tuple[FMatrix, Optional[str]]] = [(fmatrix, None)]
    for _ in range(depth):
        next_frontier: List[Tuple[FMatrix, Optional[str]]] = []
        for current, last in frontier:
            for name in GENERATOR_NAMES:
                if name == last:
                    continue
                child = apply_generator_to_fmatrix(name, current)
                next_frontier.append((child, name))
                key = child.sphere_set()
                if key not in seen:
                    seen.add(key)
                    orbit.append(child)
        frontier = next_frontier
    logger.debug("Geometry orbit depth %d produced %d octuples", depth, len(orbit))
    return orbit


def distinct_spheres(fmatrices: Iterable[FMatrix]) -> List[Sphere]:
    seen: Dict[Vector5, Sphere] = {}
    for fmatrix in fmatrices:
        for sphere in fmatrix.spheres():
            seen.setdefault(sphere.coords, sphere)
    return sorted(seen.values(), key=lambda s: tuple(float(sympy.N(c)) for c in (s.coords[1], *s.coords)))


def reference_quadruple() -> Tuple[Sphere, Sphere, Sphere, Sphere]:
    """平面 z = ±1 与球心 (−1, ∓1, 0) 的单位球。"""
    return (
        plane_from_geometry((0, 0, 1), 1),
        plane_from_geometry((0, 0, -1), 1),
        sphere_from_geometry((-1, -1, 0), 1),
        sphere_from_geometry((-1, 1, 0), 1),
    )
