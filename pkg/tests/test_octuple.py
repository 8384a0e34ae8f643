import os
import random
import sys

import pytest

# 自动将项目根目录加入路径
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from services.common.errors import InvalidInputError
from services.common.models import Octuple, SeedVector
from services.octuple.algebra import (
    apply_generator,
    apply_word,
    check_parity,
    is_root,
    normalize_seed,
    octuple_key,
    random_word,
    reduce_to_root,
    root_and_seed,
    scale,
    solve_omega,
)
from services.geometry.inversive import apply_generator_to_fmatrix, check_fmatrix, fill_gap, reference_quadruple
from services.octuple.service import OctupleService

REFERENCE = Octuple(0, 0, 1, 1, 1)
SHIFTED = Octuple(-1, 2, 2, 3, 3)

# a ≤ 0 的本原根，ω ≤ 17
DERIVED_ROOTS = [
    Octuple(-1, 2, 2, 3, 3),
    Octuple(-2, 3, 6, 7, 7),
    Octuple(-2, 4, 5, 5, 5),
    Octuple(-3, 5, 8, 8, 9),
    Octuple(-3, 4, 12, 13, 13),
    Octuple(-4, 7, 10, 11, 11),
    Octuple(-4, 8, 9, 9, 11),
    Octuple(-5, 10, 11, 12, 13),
    Octuple(-5, 8, 14, 15, 15),
    Octuple(-6, 11, 14, 15, 17),
]

# ==========================================
# 曲率方程与生成元
# ==========================================


def test_reference_satisfies_equation():
    assert REFERENCE.satisfies_equation()
    assert REFERENCE.residual() == 0
    assert not Octuple(1, 1, 1, 1, 1).satisfies_equation()


def test_curvatures_include_pair_partners():
    assert REFERENCE.curvatures() == (0, 0, 1, 1, 2, 2, 1, 1)


def test_parse_and_mapping():
    assert Octuple.parse("2, 0, 1, 1, 3") == Octuple(2, 0, 1, 1, 3)
    assert Octuple.from_mapping({"a": 0, "b": 0, "c": 1, "d": 1, "omega": 1}) == REFERENCE
    with pytest.raises(InvalidInputError):
        Octuple.parse("1,2,x,4,5")
    with pytest.raises(InvalidInputError):
        Octuple.parse("1,2,3")
    with pytest.raises(InvalidInputError):
        Octuple.from_mapping({"a": 0, "b": 0, "c": 1, "d": 1})


def test_generators_are_involutions():
    for name in ("A1", "A2", "A3", "A4", "A5"):
        assert apply_generator(name, apply_generator(name, SHIFTED)) == SHIFTED


def test_reflection_values():
    assert apply_generator("A1", REFERENCE) == Octuple(2, 0, 1, 1, 1)
    assert apply_generator(5, Octuple(2, 0, 1, 1, 1)) == Octuple(2, 0, 1, 1, 3)
    with pytest.raises(InvalidInputError):
        apply_generator("A6", REFERENCE)
    with pytest.raises(InvalidInputError):
        apply_generator(0, REFERENCE)


def test_solve_omega_returns_both_roots():
    assert solve_omega(0, 0, 1, 1) == (1, 1)
    assert solve_omega(2, 0, 1, 1) == (1, 3)
    with pytest.raises(InvalidInputError):
        solve_omega(1, 1, 1, 10)


# ==========================================
# 根约化与种子归一化
# ==========================================


def test_reduce_to_root():
    assert reduce_to_root(Octuple(2, 0, 1, 1, 3)) == REFERENCE
    assert reduce_to_root(REFERENCE) == REFERENCE
    assert is_root(SHIFTED)
    assert reduce_to_root(SHIFTED) == SHIFTED


def test_reduce_rejects_invalid_octuple():
    with pytest.raises(InvalidInputError):
        reduce_to_root(Octuple(1, 1, 1, 1, 1))


def test_reduce_respects_step_cap():
    far = apply_word(["A1", "A5", "A2", "A5"], REFERENCE)
    with pytest.raises(InvalidInputError):
        reduce_to_root(far, max_steps=1)


def test_normalize_seed():
    assert normalize_seed(REFERENCE) == SeedVector(2, 1, 0, 1, 1)
    assert normalize_seed(SHIFTED) == SeedVector(2, -1, 2, 3, 3)


def test_normalize_rejects_non_primitive():
    with pytest.raises(InvalidInputError):
        normalize_seed(scale(REFERENCE, 2))


def test_seed_validate():
    with pytest.raises(InvalidInputError):
        SeedVector(1, 1, 0, 1, 1).validate()
    with pytest.raises(InvalidInputError):
        SeedVector(2, 0, 1, 1, 1).validate()


def test_octuple_key_ignores_labeling():
    relabeled = Octuple(1, 2, 0, 1, 1)
    assert octuple_key(relabeled) == octuple_key(REFERENCE)


# ==========================================
# 随机单词上的不变量
# ==========================================


def _assert_orbit_invariants(start, words):
    root = reduce_to_root(start)
    assert root == start
    expected_residue = check_parity(start).odd_residue
    rng = random.Random(20240611)
    for _ in range(words):
        word = random_word(rng, rng.randint(1, 12))
        image = apply_word(word, start)
        assert image.satisfies_equation()
        assert image.content() == 1
        assert check_parity(image).odd_residue == expected_residue
        assert reduce_to_root(image) == root


def test_random_words_from_reference():
    _assert_orbit_invariants(REFERENCE, 1000)


@pytest.mark.parametrize("start", DERIVED_ROOTS)
def test_random_words_from_derived_roots(start):
    _assert_orbit_invariants(start, 100)


def test_random_words_keep_fmatrix_gram():
    rng = random.Random(11)
    base, _ = fill_gap(reference_quadruple())
    for _ in range(1000):
        word = random_word(rng, rng.randint(1, 12))
        fmatrix = base
        for letter in word:
            fmatrix = apply_generator_to_fmatrix(letter, fmatrix)
        check_fmatrix(fmatrix)
        assert fmatrix.curvature_vector() == apply_word(word, REFERENCE).as_tuple()


def test_roots_are_fixed_by_reduction():
    for root in [REFERENCE, *DERIVED_ROOTS]:
        assert is_root(root)
        assert reduce_to_root(root) == root


def test_root_requires_minimal_omega():
    shaped = Octuple(-4, 7, 10, 11, 13)
    assert shaped.satisfies_equation()
    assert not is_root(shaped)
    assert reduce_to_root(shaped) == Octuple(-4, 7, 10, 11, 11)


def test_random_word_is_non_backtracking():
    rng = random.Random(7)
    word = random_word(rng, 50)
    assert all(left != right for left, right in zip(word, word[1:]))


def test_scaled_octuple_keeps_equation():
    doubled = scale(SHIFTED, 3)
    assert doubled.satisfies_equation()
    assert doubled.content() == 3
    with pytest.raises(InvalidInputError):
        check_parity(doubled)


def test_parity_report():
    report = check_parity(REFERENCE)
    assert report.evens == (0, 0)
    assert report.odds == (1, 1)
    assert report.odd_residue == 1
    assert report.omega_odd


# ==========================================
# 服务层
# ==========================================


def test_service_resolve():
    result = OctupleService().resolve(Octuple(2, 0, 1, 1, 3))
    assert result.root == REFERENCE
    assert result.seed == SeedVector(2, 1, 0, 1, 1)
    assert result.parity.odd_residue == 1


def test_root_and_seed_shortcut():
    root, seed = root_and_seed(apply_word(["A1", "A5"], REFERENCE))
    assert root == REFERENCE
    assert seed.as_tuple() == (2, 1, 0, 1, 1)
