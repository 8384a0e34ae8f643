from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from math import gcd
from typing import Any, Dict, List, Optional

import numpy as np

from config.default import settings
from services.common.errors import InvalidInputError
from services.common.models import SeedVector
from services.forms.counting import count_primitive
from services.forms.densities import DensityReport, density_report, main_term
from services.forms.form import QuadForm, build_form

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class SweepReport:
    """主项收敛扫描：每个 m 的 𝒩_P(m)/主项，以及按十分位的中位偏差。"""

    form: QuadForm
    values: List[int]
    ratios: List[float]
    median_deviation: float
    decile_deviations: List[float]
    non_increasing: bool
    tolerance: float

    def to_json(self) -> Dict[str, Any]:
        return {
            "form": self.form.to_json(),
            "samples": len(self.values),
            "median_deviation": self.median_deviation,
            "decile_deviations": self.decile_deviations,
            "non_increasing": self.non_increasing,
            "tolerance": self.tolerance,
            "points": [{"m": m, "ratio": r} for m, r in zip(self.values, self.ratios)],
        }


class FormService:
    """二次型服务：构造 f_{a0}、密度报告以及主项收敛扫描。"""

    def __init__(self, search_budget: Optional[int] = None) -> None:
        self._budget = search_budget or settings.search_budget

    def build(self, seed: SeedVector) -> QuadForm:
        form = build_form(seed)
        logger.info("Built form", extra={"seed": seed.as_tuple(), "form": form.coefficients})
        return form

    def report(self, seed: SeedVector, m: int) -> DensityReport:
        if m < 1:
            raise InvalidInputError(f"m must be positive, got {m}")
        return density_report(build_form(seed), m, self._budget)

    def sweep_values(self, form: QuadForm, low: int, high: int, samples: int) -> List[int]:
        """Evenly spaced m in [low, high] with m ≡ A₀ (mod 4) and gcd(m, disc) = 1."""
        if low < 1 or high < low or samples < 1:
            raise InvalidInputError(f"invalid sweep range [{low}, {high}] with {samples} samples")
        disc = 16 * form.a0 ** 4
        candidates = [m for m in range(low, high + 1) if m % 4 == form.A0 % 4 and gcd(m, disc) == 1]
        if not candidates:
            raise InvalidInputError(f"no admissible sweep values in [{low}, {high}]")
        picks = np.unique(np.linspace(0, len(candidates) - 1, num=min(samples, len(candidates))).round().astype(int))
        return [candidates[i] for i in picks]

    def density_sweep(
        self,
        seed: SeedVector,
        low: int = 1000,
        high: int = 5000,
        samples: int = 200,
        tolerance: float = 0.05,
    ) -> SweepReport:
        started = time.perf_counter()
        form = build_form(seed)
        values = self.sweep_values(form, low, high, samples)
        ratios = [count_primitive(form, m, "direct", self._budget) / main_term(form, m).value for m in values]
        deviations = np.abs(np.asarray(ratios) - 1.0)
        deciles = [float(np.median(chunk)) for chunk in np.array_split(deviations, min(10, len(values)))]
        non_increasing = all(later <= earlier + tolerance for earlier, later in zip(deciles, deciles[1:]))
        logger.info(
            "Density sweep finished",
            extra={"samples": len(values), "low": low, "high": high, "elapsed": time.perf_counter() - started},
        )
        return SweepReport(
            form=form,
            values=values,
            ratios=ratios,
            median_deviation=float(np.median(deviations)),
            decile_deviations=deciles,
            non_increasing=non_increasing,
            tolerance=tolerance,
        )
