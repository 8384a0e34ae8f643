from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence

from config.default import settings
from services.common.errors import InvalidInputError
from services.common.serialization import format_vector
from services.geometry import inversive
from services.geometry.models import FMatrix, Sphere

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class GeometryExport:
    """几何导出结果：展开得到的八元组与去重后的球列表。"""

    depth: int
    exact: bool
    octuples: List[FMatrix]
    spheres: List[Sphere]

    def to_json(self) -> Dict[str, Any]:
        octuple_payload = []
        for fmatrix in self.octuples:
            entry: Dict[str, Any] = {"spheres": [s.to_geometry() for s in fmatrix.spheres()]}
            if fmatrix.exact:
                entry["w"] = format_vector(fmatrix.w)
            octuple_payload.append(entry)
        return {
            "depth": self.depth,
            "exact": self.exact,
            "octuple_count": len(self.octuples),
            "sphere_count": len(self.spheres),
            "octuples": octuple_payload,
            "spheres": [s.to_geometry() for s in self.spheres],
        }


class GeometryService:
    """从四个相切球出发构造八元组并按深度导出几何。"""

    def __init__(self, max_depth: Optional[int] = None) -> None:
        self._max_depth = max_depth or settings.geometry_max_depth

    def parse_quadruple(self, payload: Sequence[Mapping[str, Any]]) -> List[Sphere]:
        if len(payload) != 4:
            raise InvalidInputError(f"geometry seed needs four spheres, got {len(payload)}")
        return [inversive.sphere_from_json(item) for item in payload]

    def export(
        self,
        spheres: Sequence[Sphere],
        depth: int,
        known_w: Optional[Sequence[Any]] = None,
    ) -> GeometryExport:
        first, _ = inversive.fill_gap(spheres, known_w=known_w)
        if first.exact:
            inversive.check_fmatrix(first)
            orbit = inversive.geometry_orbit(first, depth, max_depth=self._max_depth)
        else:
            if depth:
                logger.warning("Numeric octuple; geometry orbit limited to depth 0")
            orbit = [first]
        distinct = inversive.distinct_spheres(orbit)
        logger.info(
            "Exported geometry",
            extra={"depth": depth, "octuples": len(orbit), "spheres": len(distinct)},
        )
        return GeometryExport(depth=depth, exact=first.exact, octuples=orbit, spheres=distinct)
