from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

from config.default import settings
from services.common.models import Octuple, ParityReport, SeedVector
from services.octuple import algebra

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class RootResult:
    """约化结果：根八元组、归一化种子以及根的奇偶性报告。"""

    root: Octuple
    seed: SeedVector
    parity: ParityReport


class OctupleService:
    """八元组代数服务：根约化、种子归一化与奇偶性检查。"""

    def __init__(self, reduction_cap: Optional[int] = None) -> None:
        self._reduction_cap = reduction_cap or settings.reduction_cap

    def resolve(self, octuple: Octuple) -> RootResult:
        root = algebra.reduce_to_root(octuple, max_steps=self._reduction_cap)
        parity = algebra.check_parity(root)
        seed = algebra.normalize_seed(root)
        logger.info(
            "Resolved octuple",
            extra={"octuple": octuple.as_tuple(), "root": root.as_tuple(), "seed": seed.as_tuple()},
        )
        return RootResult(root=root, seed=seed, parity=parity)

    def seed_for(self, octuple: Octuple) -> SeedVector:
        return self.resolve(octuple).seed
