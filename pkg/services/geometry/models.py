from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import sympy

from services.common.serialization import format_rational, format_vector

Vector5 = Tuple[sympy.Expr, ...]

HALF = sympy.Rational(1, 2)

W_MATRIX = sympy.ImmutableMatrix(
    [
        [0, -HALF, 0, 0, 0],
        [-HALF, 0, 0, 0, 0],
        [0, 0, 1, 0, 0],
        [0, 0, 0, 1, 0],
        [0, 0, 0, 0, 1],
    ]
)

K_MATRIX = sympy.ImmutableMatrix(
    [
        [1, -1, -1, -1, -1],
        [-1, 1, -1, -1, -1],
        [-1, -1, 1, -1, -1],
        [-1, -1, -1, 1, -1],
        [-1, -1, -1, -1, -1],
    ]
)


def as_vector(values: Sequence[Any]) -> Vector5:
    return tuple(sympy.sympify(v) for v in values)


def bilinear(u: Sequence[sympy.Expr], v: Sequence[sympy.Expr]) -> sympy.Expr:
    """u·W·vᵗ，按 W 的稀疏结构直接展开。"""
    return -HALF * (u[0] * v[1] + u[1] * v[0]) + u[2] * v[2] + u[3] * v[3] + u[4] * v[4]


@dataclass(frozen=True, slots=True)
class Sphere:
    """abbc 坐标 (b̄, b, b·x, b·y, b·z)；平面的曲率 b 为 0。"""

    coords: Vector5
    exact: bool = True

    @property
    def curvature(self) -> sympy.Expr:
        return self.coords[1]

    @property
    def is_plane(self) -> bool:
        return self.coords[1] == 0

    @property
    def center(self) -> Optional[Tuple[sympy.Expr, ...]]:
        if self.is_plane:
            return None
        b = self.coords[1]
        return tuple(c / b for c in self.coords[2:])

    @property
    def normal(self) -> Optional[Tuple[sympy.Expr, ...]]:
        return tuple(self.coords[2:]) if self.is_plane else None

    @property
    def offset(self) -> Optional[sympy.Expr]:
        return self.coords[0] / 2 if self.is_plane else None

    def self_product(self) -> sympy.Expr:
        return bilinear(self.coords, self.coords)

    def to_geometry(self) -> Dict[str, Any]:
        if not self.exact:
            return self._to_numeric_geometry()
        if self.is_plane:
            return {
                "type": "plane",
                "normal": format_vector(self.normal or ()),
                "offset": format_rational(self.offset),
            }
        return {
            "type": "sphere",
            "curvature": format_rational(self.curvature),
            "center": format_vector(self.center or ()),
        }

    def _to_numeric_geometry(self) -> Dict[str, Any]:
        values = [float(sympy.N(c)) for c in self.coords]
        if abs(values[1]) < 1e-24:
            return {"type": "plane", "normal": values[2:], "offset": values[0] / 2, "exact": False}
        return {
            "type": "sphere",
            "curvature": values[1],
            "center": [v / values[1] for v in values[2:]],
            "exact": False,
        }


@dataclass(frozen=True, slots=True)
class MobiusMatrix:
    """Möbius 变换的 5×5 矩阵，作用方式为行向量右乘 a(S)·m。"""

    matrix: sympy.ImmutableMatrix
    tag: str

    def preserves_w(self) -> bool:
        return (self.matrix * W_MATRIX * self.matrix.T - W_MATRIX).is_zero_matrix

    def __matmul__(self, other: "MobiusMatrix") -> "MobiusMatrix":
        return MobiusMatrix(matrix=sympy.ImmutableMatrix(self.matrix * other.matrix), tag=f"{self.tag}*{other.tag}")


@dataclass(frozen=True, slots=True)
class FMatrix:
    """八元组矩阵：前四行是每对中各取一个球的 abbc 坐标，第五行为配对平均 w。"""

    rows: Tuple[Vector5, Vector5, Vector5, Vector5, Vector5]
    exact: bool = True
    meta: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    @property
    def w(self) -> Vector5:
        return self.rows[4]

    @property
    def omega(self) -> sympy.Expr:
        return self.rows[4][1]

    def matrix(self) -> sympy.Matrix:
        return sympy.Matrix([list(row) for row in self.rows])

    def spheres(self) -> Tuple[Sphere, ...]:
        """八个球：四个代表行以及配对球 2w − a(Sⱼ)。"""
        w = self.w
        base = [Sphere(coords=row, exact=self.exact) for row in self.rows[:4]]
        partners = [
            Sphere(coords=tuple(2 * wi - ri for wi, ri in zip(w, row)), exact=self.exact)
            for row in self.rows[:4]
        ]
        return tuple(base + partners)

    def curvature_vector(self) -> Tuple[sympy.Expr, ...]:
        """第二列：(b₁, b₂, b₃, b₄, ω)。"""
        return tuple(row[1] for row in self.rows)

    def sphere_set(self) -> frozenset:
        return frozenset(s.coords for s in self.spheres())
