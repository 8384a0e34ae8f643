from __future__ import annotations

import logging
from typing import Any, Mapping, Optional, Sequence
from uuid import uuid4

from gateway.schemas import EnumerateResponse, RootResponse, RunConfig
from services.common.errors import InvalidInputError
from services.enumeration.service import EnumerationResult, EnumerationService
from services.forms.densities import DensityReport
from services.forms.form import QuadForm
from services.forms.service import FormService, SweepReport
from services.geometry.service import GeometryExport, GeometryService
from services.octuple.service import OctupleService
from services.picard.service import PicardReport, PicardVerificationService
from services.verifier.service import ExceptionReport, LocalGlobalService, StabilityReport

logger = logging.getLogger(__name__)


class PackingOrchestrator:
    """负责协调八元组、枚举、二次型、Picard 与局部-整体校验的核心编排器。"""

    def __init__(
        self,
        octuple_service: OctupleService,
        enumeration_service: EnumerationService,
        form_service: FormService,
        geometry_service: GeometryService,
        picard_service: PicardVerificationService,
        verifier: LocalGlobalService,
    ) -> None:
        self._octuples = octuple_service
        self._enumeration = enumeration_service
        self._forms = form_service
        self._geometry = geometry_service
        self._picard = picard_service
        self._verifier = verifier

    @classmethod
    def from_config(cls, config: RunConfig) -> "PackingOrchestrator":
        """按运行配置构建各子服务。"""
        enumeration = EnumerationService(
            threads=config.threads,
            dedup_depth=config.dedup_depth,
            executor=config.executor,
            mem_budget_bytes=config.mem_budget_bytes,
            reduction_cap=config.reduction_cap,
        )
        return cls(
            octuple_service=OctupleService(reduction_cap=config.reduction_cap),
            enumeration_service=enumeration,
            form_service=FormService(search_budget=config.search_budget),
            geometry_service=GeometryService(max_depth=config.geometry_max_depth),
            picard_service=PicardVerificationService(),
            verifier=LocalGlobalService(enumeration=enumeration),
        )

    async def handle_root(self, config: RunConfig) -> RootResponse:
        task_id = uuid4()
        logger.info("Handling root request", extra={"task_id": str(task_id)})
        result = self._octuples.resolve(config.seed_octuple())
        return RootResponse(
            root=list(result.root.as_tuple()),
            seed=list(result.seed.as_tuple()),
            parity=result.parity.to_json(),
        )

    async def handle_enumerate(self, config: RunConfig) -> EnumerationResult:
        task_id = uuid4()
        logger.info("Handling enumerate request", extra={"task_id": str(task_id), "bound": config.bound})
        return await self._enumeration.enumerate(config.seed_octuple(), self._require_bound(config))

    def enumerate_payload(self, result: EnumerationResult) -> EnumerateResponse:
        return EnumerateResponse(**result.to_json())

    async def handle_verify(self, config: RunConfig) -> ExceptionReport:
        task_id = uuid4()
        logger.info("Handling verify request", extra={"task_id": str(task_id), "bound": config.bound})
        return await self._verifier.verify(config.seed_octuple(), self._require_bound(config))

    async def handle_stability(self, config: RunConfig) -> StabilityReport:
        task_id = uuid4()
        logger.info("Handling stability request", extra={"task_id": str(task_id), "bound": config.bound})
        return await self._verifier.stability(config.seed_octuple(), self._require_bound(config))

    async def handle_reps(self, config: RunConfig, m: int) -> DensityReport:
        seed = self._octuples.seed_for(config.seed_octuple())
        report = self._forms.report(seed, m)
        certificate_value = m - seed.a0
        if certificate_value >= 1:
            report.notes["curvature"] = certificate_value
        return report

    async def handle_form(self, config: RunConfig) -> QuadForm:
        return self._forms.build(self._octuples.seed_for(config.seed_octuple()))

    async def handle_density_sweep(self, config: RunConfig, low: int, high: int, samples: int) -> SweepReport:
        task_id = uuid4()
        logger.info(
            "Handling density sweep",
            extra={"task_id": str(task_id), "low": low, "high": high, "samples": samples},
        )
        return self._forms.density_sweep(self._octuples.seed_for(config.seed_octuple()), low, high, samples)

    async def handle_geometry(
        self,
        payload: Sequence[Mapping[str, Any]],
        depth: int,
        known_w: Optional[Sequence[Any]] = None,
    ) -> GeometryExport:
        spheres = self._geometry.parse_quadruple(payload)
        return self._geometry.export(spheres, depth, known_w=known_w)

    async def handle_picard(self, config: Optional[RunConfig] = None) -> PicardReport:
        seed = None
        if config is not None and config.octuple is not None:
            seed = self._octuples.seed_for(config.seed_octuple())
        return self._picard.run(seed)

    @staticmethod
    def _require_bound(config: RunConfig) -> int:
        if config.bound is None:
            raise InvalidInputError("--bound is required for this command")
        return config.bound
