from __future__ import annotations

import asyncio
import logging
import time
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Any, Dict, List, Optional, Tuple

from config.default import settings
from services.common.errors import BudgetExceededError, InvalidInputError
from services.common.models import Octuple
from services.enumeration.table import CurvatureTable
from services.enumeration.traversal import (
    TraversalStats,
    expand_partition,
    partition,
    plan_frontier,
)
from services.octuple.algebra import reduce_to_root

logger = logging.getLogger(__name__)

EXECUTORS = ("thread", "process")


@dataclass(slots=True)
class EnumerationResult:
    """枚举结果：曲率表、根八元组与遍历统计。"""

    root: Octuple
    table: CurvatureTable
    stats: TraversalStats
    workers: int

    def to_json(self) -> Dict[str, Any]:
        return {
            "root": self.root.to_json(),
            "bound": self.table.bound,
            "count": self.table.count(),
            "curvatures": self.table.present_values(),
            "nonpositive": {str(k): v for k, v in sorted(self.table.nonpositive.items())},
            "workers": self.workers,
            "stats": self.stats.to_json(),
        }


def required_bytes(bound: int, workers: int, with_multiplicity: bool = True) -> int:
    """主表、每个 worker 的部分表以及一次合并的临时表。"""
    return CurvatureTable.required_bytes(bound, with_multiplicity) * (workers + 2)


def check_budget(bound: int, workers: int, budget_bytes: int, with_multiplicity: bool = True) -> int:
    required = required_bytes(bound, workers, with_multiplicity)
    if required > budget_bytes:
        logger.warning(
            "Enumeration rejected by memory budget",
            extra={"bound": bound, "workers": workers, "required": required, "available": budget_bytes},
        )
        raise BudgetExceededError(
            f"enumeration to {bound} with {workers} worker(s) needs {required} bytes",
            required=required,
            available=budget_bytes,
            unit="bytes",
        )
    return required


def _validate(bound: int, workers: int, dedup_depth: int) -> None:
    if bound < 1:
        raise InvalidInputError(f"bound must be at least 1, got {bound}")
    if workers < 1:
        raise InvalidInputError(f"thread count must be at least 1, got {workers}")
    if dedup_depth < 0:
        raise InvalidInputError(f"dedup depth must be non-negative, got {dedup_depth}")


def enumerate_curvatures(
    seed: Octuple,
    bound: int,
    *,
    dedup_depth: Optional[int] = None,
    with_multiplicity: bool = True,
    budget_bytes: Optional[int] = None,
) -> Tuple[CurvatureTable, TraversalStats]:
    """单线程枚举：所有 ≤ bound 的曲率，结果与并行版本逐位一致。"""
    depth = settings.dedup_depth if dedup_depth is None else dedup_depth
    _validate(bound, 1, depth)
    check_budget(bound, 1, budget_bytes or settings.mem_budget_bytes, with_multiplicity)

    started = time.perf_counter()
    root = reduce_to_root(seed, max_steps=settings.reduction_cap)
    plan = plan_frontier(root, bound, depth, with_multiplicity)
    partial_table, partial_stats = expand_partition(plan.frontier, bound, with_multiplicity)
    stats = plan.stats
    stats.absorb(partial_stats)
    stats.elapsed = time.perf_counter() - started
    return plan.table.merge(partial_table), stats


class EnumerationService:
    """曲率枚举服务：前沿划分后交给线程池或进程池，合并部分表。"""

    def __init__(
        self,
        threads: Optional[int] = None,
        dedup_depth: Optional[int] = None,
        executor: Optional[str] = None,
        mem_budget_bytes: Optional[int] = None,
        reduction_cap: Optional[int] = None,
    ) -> None:
        self._threads = threads or settings.threads
        self._dedup_depth = settings.dedup_depth if dedup_depth is None else dedup_depth
        self._executor_kind = executor or settings.executor
        self._budget = mem_budget_bytes or settings.mem_budget_bytes
        self._reduction_cap = reduction_cap or settings.reduction_cap
        if self._executor_kind not in EXECUTORS:
            raise InvalidInputError(f"executor must be one of {EXECUTORS}, got {self._executor_kind!r}")

    def _make_executor(self, workers: int) -> Executor:
        if self._executor_kind == "process":
            return ProcessPoolExecutor(max_workers=workers)
        return ThreadPoolExecutor(max_workers=workers, thread_name_prefix="octet-enum")

    async def enumerate(
        self,
        seed: Octuple,
        bound: int,
        *,
        threads: Optional[int] = None,
        dedup_depth: Optional[int] = None,
        with_multiplicity: bool = True,
    ) -> EnumerationResult:
        workers = threads or self._threads
        depth = self._dedup_depth if dedup_depth is None else dedup_depth
        _validate(bound, workers, depth)
        required = check_budget(bound, workers, self._budget, with_multiplicity)

        started = time.perf_counter()
        root = reduce_to_root(seed, max_steps=self._reduction_cap)
        logger.info(
            "Enumerating curvatures",
            extra={"root": root.as_tuple(), "bound": bound, "workers": workers, "required_bytes": required},
        )
        plan = plan_frontier(root, bound, depth, with_multiplicity)
        parts = partition(plan.frontier, workers)
        logger.debug("Frontier of %d nodes split into %d parts", len(plan.frontier), len(parts))

        table = plan.table
        stats = plan.stats
        if parts:
            loop = asyncio.get_running_loop()
            with self._make_executor(workers) as pool:
                tasks: List[asyncio.Future[Tuple[CurvatureTable, TraversalStats]]] = [
                    loop.run_in_executor(pool, partial(expand_partition, part, bound, with_multiplicity))
                    for part in parts
                ]
                results = await asyncio.gather(*tasks)
            for partial_table, partial_stats in results:
                table = table.merge(partial_table)
                stats.absorb(partial_stats)

        stats.elapsed = time.perf_counter() - started
        if stats.collisions:
            logger.warning(
                "Duplicate octuples met inside the dedup horizon",
                extra={"collisions": stats.collisions, "dedup_depth": depth},
            )
        logger.info(
            "Enumeration finished",
            extra={"bound": bound, "count": table.count(), **stats.to_json()},
        )
        return EnumerationResult(root=root, table=table, stats=stats, workers=workers)
