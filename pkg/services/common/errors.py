from __future__ import annotations

from typing import Any, Dict, Optional


class OctetError(Exception):
    """所有领域错误的基类，携带稳定的 detail 代码，便于 CLI 映射退出码。"""

    detail: str = "octet_error"
    exit_code: int = 4

    def __init__(self, message: str, *, context: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.context: Dict[str, Any] = dict(context or {})

    def to_payload(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"status": "failed", "detail": self.detail, "reason": str(self)}
        if self.context:
            payload["context"] = self.context
        return payload


class InvalidInputError(OctetError, ValueError):
    """输入数据不满足前置条件（例如八元组不满足曲率二次方程）。"""

    detail = "invalid_input"
    exit_code = 2


class BudgetExceededError(OctetError):
    """请求超出配置的内存或搜索预算。"""

    detail = "budget_exceeded"
    exit_code = 3

    def __init__(self, message: str, *, required: int, available: int, unit: str = "bytes") -> None:
        super().__init__(message, context={"required": required, "available": available, "unit": unit})
        self.required = required
        self.available = available
        self.unit = unit


class InvariantViolationError(OctetError):
    """内部不变量被破坏：奇偶性、可容许性或恒等式校验失败。"""

    detail = "invariant_violation"
    exit_code = 4

    def __init__(self, message: str, *, rule: str, context: Optional[Dict[str, Any]] = None) -> None:
        merged = {"rule": rule, **(context or {})}
        super().__init__(message, context=merged)
        self.rule = rule
