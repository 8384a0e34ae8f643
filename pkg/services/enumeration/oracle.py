from __future__ import annotations

import logging
from collections import deque
from typing import Deque, Optional, Set, Tuple

from services.common.errors import InvalidInputError
from services.common.models import Octuple
from services.octuple.algebra import GENERATOR_NAMES, apply_generator, reduce_to_root

logger = logging.getLogger(__name__)

MAX_ORACLE_DEPTH = 8


def _canonical(octuple: Octuple) -> Octuple:
    return Octuple(*sorted(octuple.quadruple), octuple.omega)


def enumerate_exhaustive(
    seed: Octuple,
    depth: Optional[int] = None,
    *,
    omega_cap: Optional[int] = None,
) -> Set[Octuple]:
    """朴素 BFS：从根出发作用 A1..A5，按 (排序四元组, ω) 去重。

    ``depth`` 限制词长（≤ 8），``omega_cap`` 丢弃 ω 超过上限的向量；两者至少给一个。
    """
    if depth is None and omega_cap is None:
        raise InvalidInputError("enumerate_exhaustive needs a depth or an omega cap")
    if depth is not None and not 0 <= depth <= MAX_ORACLE_DEPTH:
        raise InvalidInputError(f"oracle depth must lie in [0, {MAX_ORACLE_DEPTH}], got {depth}")

    root = _canonical(reduce_to_root(seed))
    visited: Set[Octuple] = {root}
    queue: Deque[Tuple[Octuple, int]] = deque([(root, 0)])
    while queue:
        current, level = queue.popleft()
        if depth is not None and level >= depth:
            continue
        for name in GENERATOR_NAMES:
            image = _canonical(apply_generator(name, current))
            if omega_cap is not None and image.omega > omega_cap:
                continue
            if image in visited:
                continue
            visited.add(image)
            queue.append((image, level + 1))
    logger.debug("Exhaustive BFS visited %d vectors", len(visited))
    return visited


def oracle_curvatures(seed: Octuple, bound: int) -> Set[int]:
    """Curvatures ≤ bound of the packing, from the ω ≤ 2·bound exhaustive BFS."""
    vectors = enumerate_exhaustive(seed, omega_cap=2 * bound)
    return {value for vector in vectors for value in vector.curvatures() if value <= bound}
