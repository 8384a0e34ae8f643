"""Octuple-tree traversal over curvature octuples.

Nodes are plain tuples ``(s1, s2, s3, s4, ω)`` holding the smaller member of each pair in sorted
order.  A child is reached by picking one member per pair and reflecting ω; only moves to a larger
ω whose shared members stay at or below the new ω are accepted, so every curvature octuple has
exactly one parent and the traversal is a tree.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterator, List, Sequence, Set, Tuple

from services.common.models import Octuple
from services.enumeration.table import CurvatureTable

logger = logging.getLogger(__name__)

Node = Tuple[int, int, int, int, int]

FLUSH_EVERY = 1 << 16


@dataclass(slots=True)
class TraversalStats:
    nodes: int = 0
    pruned: int = 0
    collisions: int = 0
    max_omega: int = 0
    elapsed: float = 0.0

    def absorb(self, other: "TraversalStats") -> None:
        self.nodes += other.nodes
        self.pruned += other.pruned
        self.collisions += other.collisions
        self.max_omega = max(self.max_omega, other.max_omega)

    def to_json(self) -> Dict[str, float]:
        return {
            "nodes": self.nodes,
            "pruned": self.pruned,
            "collisions": self.collisions,
            "max_omega": self.max_omega,
            "elapsed": round(self.elapsed, 6),
        }


def root_node(root: Octuple) -> Node:
    omega = root.omega
    smaller = sorted(min(b, 2 * omega - b) for b in root.quadruple)
    return (*smaller, omega)  # type: ignore[return-value]


def exceeds_bound(x: int, bound: int) -> bool:
    """((3 − √3)/2)·x > bound，用整数精确判定。"""
    lhs = 3 * x - 2 * bound
    return lhs > 0 and lhs * lhs > 3 * x * x


def should_expand(omega: int, bound: int) -> bool:
    # descendants have pair average ≥ ω + 1, their new curvatures exceed ((3 − √3)/2)(ω + 1)
    return not exceeds_bound(omega + 1, bound)


def children(node: Node) -> Iterator[Tuple[Node, Tuple[int, int, int, int]]]:
    """Yield ``(child, new_curvatures)`` for every canonical child of ``node``."""
    *smaller, omega = node
    options = [(s,) if s == omega else (s, 2 * omega - s) for s in smaller]
    seen: Set[Node] = set()
    for shared in product(*options):
        child_omega = sum(shared) - omega
        if child_omega <= omega:
            continue
        if any(q > child_omega for q in shared):
            continue
        child = (*sorted(shared), child_omega)
        if child in seen:
            continue
        seen.add(child)  # type: ignore[arg-type]
        yield child, tuple(2 * child_omega - q for q in shared)  # type: ignore[misc]


def expand_level(
    nodes: Sequence[Node],
    bound: int,
    table: CurvatureTable,
    visited: Set[Node],
    stats: TraversalStats,
) -> List[Node]:
    """把一层节点展开一步（带访问集合），返回下一层中仍需展开的节点。"""
    next_level: List[Node] = []
    created: List[int] = []
    for node in nodes:
        for child, new_values in children(node):
            if child in visited:
                stats.collisions += 1
                continue
            visited.add(child)
            stats.nodes += 1
            stats.max_omega = max(stats.max_omega, child[4])
            created.extend(new_values)
            if should_expand(child[4], bound):
                next_level.append(child)
            else:
                stats.pruned += 1
    table.record(created)
    return sorted(next_level)


def expand_partition(
    nodes: Sequence[Node],
    bound: int,
    with_multiplicity: bool = True,
) -> Tuple[CurvatureTable, TraversalStats]:
    """对一组子树做深度优先遍历，返回部分曲率表；可在线程或进程中执行。"""
    started = time.perf_counter()
    table = CurvatureTable.empty(bound, with_multiplicity=with_multiplicity)
    stats = TraversalStats()
    stack: List[Node] = list(nodes)
    buffer: List[int] = []
    while stack:
        node = stack.pop()
        for child, new_values in children(node):
            stats.nodes += 1
            if child[4] > stats.max_omega:
                stats.max_omega = child[4]
            buffer.extend(new_values)
            if should_expand(child[4], bound):
                stack.append(child)
            else:
                stats.pruned += 1
        if len(buffer) >= FLUSH_EVERY:
            table.record(buffer)
            buffer = []
    table.record(buffer)
    stats.elapsed = time.perf_counter() - started
    return table, stats


def partition(nodes: Sequence[Node], parts: int) -> List[List[Node]]:
    """Round-robin split of a sorted frontier; empty parts are dropped."""
    buckets: List[List[Node]] = [[] for _ in range(max(parts, 1))]
    for index, node in enumerate(sorted(nodes)):
        buckets[index % len(buckets)].append(node)
    return [bucket for bucket in buckets if bucket]


@dataclass(slots=True)
class FrontierPlan:
    table: CurvatureTable
    frontier: List[Node]
    stats: TraversalStats = field(default_factory=TraversalStats)


def plan_frontier(
    root: Octuple,
    bound: int,
    dedup_depth: int,
    with_multiplicity: bool = True,
) -> FrontierPlan:
    """记录根的八个曲率，并在访问集合保护下按层展开 dedup_depth 层。"""
    table = CurvatureTable.empty(bound, with_multiplicity=with_multiplicity)
    table.record(root.curvatures())
    start = root_node(root)
    stats = TraversalStats(nodes=1, max_omega=root.omega)
    visited: Set[Node] = {start}
    level: List[Node] = [start] if should_expand(root.omega, bound) else []
    for depth in range(dedup_depth):
        if not level:
            break
        level = expand_level(level, bound, table, visited, stats)
        logger.debug("Frontier level %d has %d nodes", depth + 1, len(level))
    return FrontierPlan(table=table, frontier=level, stats=stats)
