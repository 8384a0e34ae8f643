from __future__ import annotations

import io
import struct
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

import numpy as np

from services.common.errors import InvalidInputError

BITMAP_MAGIC = b"OCT8PACK"
UINT64_MAX = np.iinfo(np.uint64).max


def saturating_add(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """uint64 加法，溢出时饱和到 2⁶⁴ − 1。"""
    headroom = UINT64_MAX - left
    return np.where(right > headroom, UINT64_MAX, left + right).astype(np.uint64)


@dataclass(slots=True)
class CurvatureTable:
    """曲率表：1..N 的存在位图、可选的饱和计数器，以及单独记录的非正曲率。"""

    bound: int
    present: np.ndarray
    multiplicity: Optional[np.ndarray] = None
    nonpositive: Dict[int, int] = field(default_factory=dict)

    @classmethod
    def empty(cls, bound: int, with_multiplicity: bool = True) -> "CurvatureTable":
        if bound < 1:
            raise InvalidInputError(f"bound must be positive, got {bound}")
        counters = np.zeros(bound + 1, dtype=np.uint64) if with_multiplicity else None
        return cls(bound=bound, present=np.zeros(bound + 1, dtype=bool), multiplicity=counters)

    @staticmethod
    def required_bytes(bound: int, with_multiplicity: bool = True) -> int:
        per_entry = 1 + (8 if with_multiplicity else 0)
        return (bound + 1) * per_entry

    def record(self, values: Iterable[int]) -> None:
        """记录一批曲率；超过上界的值被忽略。"""
        positives: List[int] = []
        for value in values:
            if value > self.bound:
                continue
            if value <= 0:
                self.nonpositive[value] = self.nonpositive.get(value, 0) + 1
            else:
                positives.append(value)
        if not positives:
            return
        indices = np.asarray(positives, dtype=np.int64)
        self.present[indices] = True
        if self.multiplicity is not None:
            counts = np.bincount(indices, minlength=self.bound + 1).astype(np.uint64)
            self.multiplicity = saturating_add(self.multiplicity, counts)

    def merge(self, other: "CurvatureTable") -> "CurvatureTable":
        """交换且结合的合并：位图取并集、计数器饱和相加。"""
        if other.bound != self.bound:
            raise InvalidInputError(f"cannot merge tables with bounds {self.bound} and {other.bound}")
        if (self.multiplicity is None) != (other.multiplicity is None):
            raise InvalidInputError("cannot merge tables with and without multiplicities")
        counters = None
        if self.multiplicity is not None and other.multiplicity is not None:
            counters = saturating_add(self.multiplicity, other.multiplicity)
        nonpositive = Counter(self.nonpositive)
        nonpositive.update(other.nonpositive)
        return CurvatureTable(
            bound=self.bound,
            present=self.present | other.present,
            multiplicity=counters,
            nonpositive=dict(nonpositive),
        )

    def restrict(self, bound: int) -> "CurvatureTable":
        if bound > self.bound:
            raise InvalidInputError(f"cannot restrict a table of bound {self.bound} to {bound}")
        counters = None if self.multiplicity is None else self.multiplicity[: bound + 1].copy()
        return CurvatureTable(
            bound=bound,
            present=self.present[: bound + 1].copy(),
            multiplicity=counters,
            nonpositive=dict(self.nonpositive),
        )

    def contains(self, curvature: int) -> bool:
        if curvature <= 0:
            return curvature in self.nonpositive
        return curvature <= self.bound and bool(self.present[curvature])

    def present_values(self) -> List[int]:
        return [int(v) for v in np.flatnonzero(self.present)]

    def curvature_set(self) -> set[int]:
        return set(self.present_values()) | set(self.nonpositive)

    def count(self) -> int:
        return int(self.present.sum())

    def to_csv(self) -> str:
        buffer = io.StringIO()
        buffer.write("curvature,present,multiplicity\n")
        for value in sorted(self.nonpositive):
            buffer.write(f"{value},1,{self.nonpositive[value]}\n")
        counters = self.multiplicity
        for value in range(1, self.bound + 1):
            flag = 1 if self.present[value] else 0
            mult = int(counters[value]) if counters is not None else ""
            buffer.write(f"{value},{flag},{mult}\n")
        return buffer.getvalue()

    def to_bitmap(self) -> bytes:
        """OCT8PACK 头 + 小端 u64 上界 + 小端位序的位数组（位 k 对应曲率 k）。"""
        bits = np.packbits(self.present.astype(np.uint8), bitorder="little")
        return BITMAP_MAGIC + struct.pack("<Q", self.bound) + bits.tobytes()

    @classmethod
    def from_bitmap(cls, payload: bytes) -> "CurvatureTable":
        if payload[:8] != BITMAP_MAGIC:
            raise InvalidInputError("bitmap payload does not start with OCT8PACK")
        (bound,) = struct.unpack("<Q", payload[8:16])
        bits = np.frombuffer(payload[16:], dtype=np.uint8)
        present = np.unpackbits(bits, bitorder="little")[: bound + 1].astype(bool)
        if present.size != bound + 1:
            raise InvalidInputError("bitmap payload is truncated")
        return cls(bound=int(bound), present=present, multiplicity=None)
