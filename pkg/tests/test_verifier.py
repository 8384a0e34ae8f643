import os
import sys
from fractions import Fraction

import pytest

# 自动将项目根目录加入路径
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from services.common.errors import InvalidInputError, InvariantViolationError
from services.common.models import Octuple, SeedVector
from services.enumeration.service import EnumerationService, enumerate_curvatures
from services.enumeration.table import CurvatureTable
from services.verifier.service import (
    ADMISSIBLE,
    INADMISSIBLE,
    UNCLASSIFIED,
    AdmissibilityClass,
    LocalGlobalService,
    classify_table,
    density_lower_bound,
    is_admissible,
    missing_csv,
    missing_stability,
    representability_certificate,
    unclassified_summary,
    verify_local_global,
)

REFERENCE = Octuple(0, 0, 1, 1, 1)
REFERENCE_SEED = SeedVector(2, 1, 0, 1, 1)
REFERENCE_CLASS = AdmissibilityClass(seed=REFERENCE_SEED)

# ==========================================
# 可容许类
# ==========================================


def test_admissibility_class():
    assert REFERENCE_CLASS.residue == 1
    assert REFERENCE_CLASS.modulus == 2
    assert is_admissible(5, REFERENCE_CLASS) == ADMISSIBLE
    assert is_admissible(3, REFERENCE_CLASS) == INADMISSIBLE
    assert is_admissible(4, REFERENCE_CLASS) == UNCLASSIFIED
    with pytest.raises(InvalidInputError):
        is_admissible(0, REFERENCE_CLASS)


def test_negative_residue_class():
    shifted = AdmissibilityClass(seed=SeedVector(2, -1, 2, 3, 3))
    assert shifted.residue == 3
    assert is_admissible(7, shifted) == ADMISSIBLE
    assert is_admissible(5, shifted) == INADMISSIBLE


def test_density_lower_bound():
    assert density_lower_bound(2) == Fraction(1, 4)
    assert density_lower_bound(30) == Fraction(2, 15)


def test_unclassified_summary():
    summary = unclassified_summary([2, 4, 6, 5], 2)
    assert summary == {"by_residue_mod4": {"0": 1, "2": 2}, "by_gcd": {"2": 3}}


# ==========================================
# 曲率表交叉比对
# ==========================================


def test_classify_table_flags_obstruction():
    table = CurvatureTable.empty(10)
    table.record([1, 3, 5])
    with pytest.raises(InvariantViolationError) as info:
        classify_table(table, REFERENCE_CLASS)
    assert info.value.rule == "local_obstruction"
    assert info.value.context["values"] == [3]


def test_classify_table_lists_missing():
    table = CurvatureTable.empty(10)
    table.record([1, 2, 5])
    report = classify_table(table, REFERENCE_CLASS)
    assert report.admissible_total == 3
    assert report.found == 2
    assert report.missing == [9]
    assert report.unclassified == [2]
    assert report.largest_missing == 9
    assert missing_csv(report) == "m\n9\n"


def test_reference_packing_has_no_obstruction():
    report = verify_local_global(REFERENCE, 200)
    assert report.admissible_total == 50
    assert report.found + len(report.missing) == 50
    assert 1 not in report.missing and 5 not in report.missing
    body = report.to_json()
    assert body["residue"] == 1
    assert body["density"]["lower_bound"] == "1/4"
    assert body["counts"]["found"] == report.found


def test_missing_values_are_stable():
    stability = missing_stability(REFERENCE, 100)
    assert stability.stable
    assert stability.new_missing == []
    assert stability.resolved == []
    assert all(m > 100 for m in stability.missing_at_double if m not in stability.missing)


# ==========================================
# 表示证书
# ==========================================


def test_certificates():
    first = representability_certificate(REFERENCE_SEED, 1)
    assert first.representation == (1, 0, 0, 0)
    assert first.check()
    second = representability_certificate(REFERENCE_SEED, 5)
    assert second.representation == (1, 0, 1, 0)
    assert second.check()
    assert second.to_json() == {"m": 5, "value": 7, "found": True, "representation": [1, 0, 1, 0]}


def test_certificate_values_lie_in_packing():
    table, _ = enumerate_curvatures(REFERENCE, 200)
    found = 0
    for m in range(1, 201):
        if is_admissible(m, REFERENCE_CLASS) != ADMISSIBLE:
            continue
        certificate = representability_certificate(REFERENCE_SEED, m)
        if certificate.found:
            found += 1
            assert certificate.check()
            assert table.contains(m)
    assert found == 50


def test_certificate_rejects_inadmissible():
    with pytest.raises(InvalidInputError):
        representability_certificate(REFERENCE_SEED, 3)
    with pytest.raises(InvalidInputError):
        representability_certificate(REFERENCE_SEED, 2)


# ==========================================
# 服务层
# ==========================================


@pytest.mark.asyncio
async def test_service_verify_matches_sync():
    service = LocalGlobalService(EnumerationService(threads=2, dedup_depth=2))
    report = await service.verify(REFERENCE, 200)
    expected = verify_local_global(REFERENCE, 200)
    assert report.missing == expected.missing
    assert report.found == expected.found


@pytest.mark.asyncio
async def test_service_stability_uses_enumeration_service():
    service = LocalGlobalService(EnumerationService(threads=2, dedup_depth=2))
    report = await service.stability(REFERENCE, 100)
    expected = missing_stability(REFERENCE, 100)
    assert report.stable
    assert report.missing == expected.missing
    assert report.missing_at_double == expected.missing_at_double


def test_service_certificates():
    service = LocalGlobalService()
    certificates = service.certificates(REFERENCE_SEED, [1, 5, 9])
    assert all(cert.check() for cert in certificates if cert.found)
    assert certificates[0].found and certificates[1].found
