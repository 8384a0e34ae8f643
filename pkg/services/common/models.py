from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Any, Dict, Iterable, Mapping, Tuple

from services.common.errors import InvalidInputError


@dataclass(frozen=True, slots=True)
class Octuple:
    """曲率向量 (a, b, c, d, ω)：四个两两相切球的曲率加上配对平均值 ω。"""

    a: int
    b: int
    c: int
    d: int
    omega: int

    @classmethod
    def from_sequence(cls, values: Iterable[int]) -> "Octuple":
        items = [int(v) for v in values]
        if len(items) != 5:
            raise InvalidInputError(f"octuple needs 5 integers, got {len(items)}")
        return cls(*items)

    @classmethod
    def parse(cls, text: str) -> "Octuple":
        """解析 "a,b,c,d,omega" 形式的命令行参数。"""
        try:
            return cls.from_sequence(part.strip() for part in text.split(","))
        except ValueError as exc:
            raise InvalidInputError(f"cannot parse octuple {text!r}") from exc

    @classmethod
    def from_mapping(cls, payload: Mapping[str, Any]) -> "Octuple":
        try:
            return cls.from_sequence(payload[key] for key in ("a", "b", "c", "d", "omega"))
        except KeyError as exc:
            raise InvalidInputError(f"octuple JSON missing key {exc.args[0]!r}") from exc

    @property
    def quadruple(self) -> Tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def as_tuple(self) -> Tuple[int, int, int, int, int]:
        return (self.a, self.b, self.c, self.d, self.omega)

    def curvatures(self) -> Tuple[int, ...]:
        """八个曲率：四个代表元及其配对 2ω − bᵢ。"""
        quad = self.quadruple
        return quad + tuple(2 * self.omega - b for b in quad)

    def residual(self) -> int:
        """2ω² − 2ω·Σb + Σb²，合法八元组返回 0。"""
        quad = self.quadruple
        total = sum(quad)
        return 2 * self.omega * self.omega - 2 * self.omega * total + sum(b * b for b in quad)

    def satisfies_equation(self) -> bool:
        return self.residual() == 0

    def content(self) -> int:
        value = 0
        for entry in self.as_tuple():
            value = gcd(value, entry)
        return value

    def to_json(self) -> Dict[str, int]:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d, "omega": self.omega}


@dataclass(frozen=True, slots=True)
class SeedVector:
    """归一化种子 v_P = (a₀, b₀, c₀, d₀, ω₀)：a₀ 为非零偶数，b₀ 为奇数。"""

    a0: int
    b0: int
    c0: int
    d0: int
    omega0: int

    def as_octuple(self) -> Octuple:
        return Octuple(self.a0, self.b0, self.c0, self.d0, self.omega0)

    def as_tuple(self) -> Tuple[int, int, int, int, int]:
        return (self.a0, self.b0, self.c0, self.d0, self.omega0)

    def validate(self) -> "SeedVector":
        if self.a0 == 0 or self.a0 % 2:
            raise InvalidInputError(f"seed a0 must be even and nonzero, got {self.a0}")
        if self.b0 % 2 == 0:
            raise InvalidInputError(f"seed b0 must be odd, got {self.b0}")
        if self.a0 + self.b0 <= 0:
            raise InvalidInputError("seed a0 + b0 must be positive")
        octuple = self.as_octuple()
        if not octuple.satisfies_equation():
            raise InvalidInputError(f"seed {self.as_tuple()} violates the curvature equation")
        if octuple.content() != 1:
            raise InvalidInputError(f"seed {self.as_tuple()} is not primitive")
        return self

    def to_json(self) -> Dict[str, int]:
        return {"a0": self.a0, "b0": self.b0, "c0": self.c0, "d0": self.d0, "omega0": self.omega0}


@dataclass(frozen=True, slots=True)
class ParityReport:
    """奇偶性报告：偶数/奇数曲率、奇曲率模 4 的公共余数以及 ω 的奇偶性。"""

    evens: Tuple[int, ...]
    odds: Tuple[int, ...]
    odd_residue: int
    omega_odd: bool

    def to_json(self) -> Dict[str, Any]:
        return {
            "evens": list(self.evens),
            "odds": list(self.odds),
            "odd_residue": self.odd_residue,
            "omega_odd": self.omega_odd,
        }
