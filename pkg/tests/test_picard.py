import os
import sys

import pytest
import sympy

# 自动将项目根目录加入路径
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from services.common.errors import BudgetExceededError, InvalidInputError, InvariantViolationError
from services.common.models import Octuple, SeedVector
from services.enumeration.service import enumerate_curvatures
from services.picard.cyclotomic import I, IDENTITY, MINUS_I, ONE, ZETA, CyclotomicMatrix, Zeta8
from services.picard.service import (
    G_MATRICES,
    LATTICE_REFLECTIONS,
    M_MATRICES,
    XI_GENERATORS,
    CheckResult,
    PicardReport,
    PicardVerificationService,
    chain_checks,
    evaluate_word,
    explicit_subset,
    lattice_reflection,
    preserves_delta,
    rho,
    seed_vector_check,
    verify_rho_images,
    verify_word_identities,
    xi_membership,
)

REFERENCE_SEED = SeedVector(2, 1, 0, 1, 1)

# ==========================================
# ℤ[ζ₈] 算术
# ==========================================


def test_zeta_powers():
    assert ZETA * ZETA == I
    assert I * I == -ONE
    assert ZETA * ZETA * ZETA * ZETA == -ONE
    assert ZETA.conj() * ZETA == ONE
    assert I.twice_im() == Zeta8(2)
    assert MINUS_I.twice_re() == Zeta8()


def test_m_matrices_have_unit_determinant():
    for name, matrix in M_MATRICES.items():
        assert matrix.det() == ONE, name
        assert matrix @ matrix.inverse() == IDENTITY


def test_inverse_requires_sl2():
    with pytest.raises(InvalidInputError):
        CyclotomicMatrix.gaussian((2, 0), (0, 0), (0, 0), (1, 0)).inverse()


def test_unknown_word_letter():
    with pytest.raises(InvalidInputError):
        evaluate_word(["M7"])
    with pytest.raises(InvalidInputError):
        evaluate_word(["M4^2"])


# ==========================================
# ρ 与恒等式
# ==========================================


def test_rho_identity():
    assert rho(IDENTITY) == sympy.eye(4)


def test_rho_images_match_g_products():
    results = verify_rho_images()
    assert len(results) == 6
    assert all(row.passed for row in results)
    assert rho(M_MATRICES["M2"]) == G_MATRICES["g2"] * G_MATRICES["g4"]
    assert rho(M_MATRICES["M3"]) == G_MATRICES["g2"] * G_MATRICES["g5"]


def test_rho_is_multiplicative():
    names = list(M_MATRICES)
    for left in names:
        for right in names:
            product = rho(M_MATRICES[left] @ M_MATRICES[right])
            assert product == rho(M_MATRICES[left]) * rho(M_MATRICES[right])
            assert preserves_delta(product)


def test_rho_rejects_non_integral_entries():
    with pytest.raises(InvariantViolationError):
        rho(CyclotomicMatrix(ONE, ZETA, Zeta8(), ONE))


def test_word_identities():
    results = {row.name: row for row in verify_word_identities()}
    mandatory = [row for row in results.values() if row.mandatory]
    assert len(mandatory) == 6
    assert all(row.passed for row in mandatory)
    assert results["translation_imaginary"].status == "undefined"
    assert results["hyperbolic_real"].status == "fail"
    assert not results["hyperbolic_real"].mandatory


def test_lower_imaginary_word():
    value = evaluate_word(["M4^-1", "M6^-1", "M5"])
    assert value.projectively_equal(CyclotomicMatrix.gaussian((1, 0), (0, 0), (0, 2), (1, 0)))


def test_chain_checks():
    for k in range(2, 6):
        assert lattice_reflection(k) == LATTICE_REFLECTIONS[f"R{k}"]
    assert all(row.passed for row in chain_checks())


# ==========================================
# Ξ 与显式曲率子集
# ==========================================


def test_seed_vector_check():
    assert seed_vector_check(REFERENCE_SEED).passed
    assert seed_vector_check(SeedVector(2, -1, 2, 3, 3)).passed


def test_xi_generators_lie_in_xi():
    assert len(XI_GENERATORS) == 8
    assert all(xi_membership(xi) for xi in XI_GENERATORS)


def test_xi_membership():
    assert xi_membership(CyclotomicMatrix.gaussian((1, 0), (2, 0), (0, 0), (1, 0)))
    assert not xi_membership(CyclotomicMatrix.gaussian((0, 0), (-1, 0), (1, 0), (0, 0)))
    assert xi_membership(CyclotomicMatrix.gaussian((0, 1), (0, 0), (0, 0), (0, -1)))
    with pytest.raises(InvalidInputError):
        xi_membership(M_MATRICES["M6"])


def test_explicit_subset_identity_word():
    assert explicit_subset(REFERENCE_SEED, 0) == {1}


def test_explicit_subset_first_level():
    values = explicit_subset(REFERENCE_SEED, 1)
    assert {1, 5, 13, 25} <= values


def test_explicit_subset_inside_packing():
    bound = 300
    table, _ = enumerate_curvatures(Octuple(0, 0, 1, 1, 1), bound)
    values = [v for v in explicit_subset(REFERENCE_SEED, 2) if 1 <= v <= bound]
    assert values
    assert all(table.contains(v) for v in values)


def test_explicit_subset_limits():
    with pytest.raises(InvalidInputError):
        explicit_subset(REFERENCE_SEED, 11)
    with pytest.raises(BudgetExceededError):
        explicit_subset(REFERENCE_SEED, 3, budget=5)


# ==========================================
# 服务层
# ==========================================


def test_service_run_reports_ok():
    report = PicardVerificationService().run(REFERENCE_SEED)
    assert report.ok
    names = {row.name for row in report.rows}
    assert "seed_vector" in names
    assert "xi8_membership" in names
    table = report.to_table()
    assert table.splitlines()[0].startswith("check")


def test_service_require_raises_on_mandatory_failure():
    report = PicardReport(rows=[CheckResult("broken", "fail")])
    assert not report.ok
    service = PicardVerificationService()
    service.run = lambda seed=None: report
    with pytest.raises(InvariantViolationError):
        service.require()
