from __future__ import annotations

from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator

from services.common.models import Octuple
from services.octuple.algebra import reduce_to_root


class RunConfig(BaseModel):
    """一次命令行运行的有效配置：种子、上界、预算与输出选项。"""

    octuple: Optional[Tuple[int, int, int, int, int]] = Field(default=None, description="种子曲率向量 (a,b,c,d,ω)")
    bound: Optional[int] = Field(default=None, ge=1, description="曲率上界 N")
    mem_budget_mb: int = Field(default=256, gt=0, description="内存预算（MB）")
    threads: int = Field(default=1, ge=1, le=256, description="枚举线程数")
    dedup_depth: int = Field(default=4, ge=0, le=32, description="根附近访问集合的深度")
    executor: str = Field(default="thread", pattern="^(thread|process)$", description="并行执行器类型")
    search_budget: int = Field(default=2_000_000, gt=0, description="表示计数的格点预算")
    reduction_cap: int = Field(default=1_000_000, gt=0, description="根约化的最大步数")
    geometry_max_depth: int = Field(default=6, ge=0, le=6, description="几何导出的最大深度")
    log_level: str = Field(default="INFO", pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$", description="日志级别")
    out: Optional[str] = Field(default=None, description="输出文件路径，缺省写到标准输出")
    format: str = Field(default="json", pattern="^(json|csv|bitmap)$", description="输出格式")

    @field_validator("octuple")
    @classmethod
    def _octuple_in_orbit(cls, value: Optional[Tuple[int, int, int, int, int]]) -> Optional[Tuple[int, ...]]:
        if value is None:
            return value
        octuple = Octuple.from_sequence(value)
        if not octuple.satisfies_equation():
            raise ValueError(f"octuple {value} violates 2ω² − 2ω·Σb + Σb² = 0")
        return value

    @field_validator("log_level", mode="before")
    @classmethod
    def _upper_level(cls, value: Any) -> Any:
        return value.upper() if isinstance(value, str) else value

    def seed_octuple(self) -> Octuple:
        if self.octuple is None:
            raise ValueError("no seed octuple configured")
        return Octuple.from_sequence(self.octuple)

    def root(self) -> Octuple:
        return reduce_to_root(self.seed_octuple(), max_steps=self.reduction_cap)

    @property
    def mem_budget_bytes(self) -> int:
        return self.mem_budget_mb * 1024 * 1024


class RootResponse(BaseModel):
    status: str = Field(default="success", description="执行状态")
    root: List[int] = Field(description="根八元组 (a,b,c,d,ω)")
    seed: List[int] = Field(description="归一化种子 (a₀,b₀,c₀,d₀,ω₀)")
    parity: Dict[str, Any] = Field(default_factory=dict, description="奇偶性报告")


class EnumerateResponse(BaseModel):
    status: str = Field(default="success", description="执行状态")
    root: Dict[str, int] = Field(description="根八元组 {a,b,c,d,omega}")
    bound: int = Field(description="曲率上界 N")
    count: int = Field(description="1..N 中出现的曲率个数")
    curvatures: List[int] = Field(default_factory=list, description="出现的正曲率")
    nonpositive: Dict[str, int] = Field(default_factory=dict, description="非正曲率及其出现次数")
    stats: Dict[str, float] = Field(default_factory=dict, description="遍历统计")


class FailureResponse(BaseModel):
    status: str = Field(default="failed", description="执行状态")
    detail: str = Field(description="稳定的错误代码")
    reason: str = Field(description="错误描述")
    context: Dict[str, Any] = Field(default_factory=dict, description="错误上下文")
