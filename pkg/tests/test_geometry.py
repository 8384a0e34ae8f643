import os
import sys

import pytest
import sympy

# 自动将项目根目录加入路径
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from services.common.errors import InvalidInputError
from services.geometry.inversive import (
    apply_generator_to_fmatrix,
    check_fmatrix,
    compose,
    fill_gap,
    geometry_orbit,
    inversive_product,
    mobius_matrix,
    octuple_spheres,
    plane_from_geometry,
    reference_quadruple,
    sphere_from_geometry,
    sphere_from_json,
    sphere_to_geometry,
    transform,
    transform_fmatrix,
)
from services.geometry.service import GeometryService

HALF = sympy.Rational(1, 2)

# ==========================================
# abbc 坐标
# ==========================================


def test_sphere_coordinates():
    sphere = sphere_from_geometry((-1, -1, 0), 1)
    assert sphere.coords == (1, 1, -1, -1, 0)
    assert sphere.self_product() == 1
    plane = plane_from_geometry((0, 0, 1), 1)
    assert plane.coords == (2, 0, 0, 0, 1)
    assert plane.is_plane
    assert plane.offset == 1


def test_reference_quadruple_is_tangent():
    spheres = reference_quadruple()
    for i in range(4):
        for j in range(i + 1, 4):
            assert inversive_product(spheres[i], spheres[j]) == -1


def test_invalid_geometry_rejected():
    with pytest.raises(InvalidInputError):
        sphere_from_geometry((0, 0, 0), 0)
    with pytest.raises(InvalidInputError):
        plane_from_geometry((1, 1, 0), 0)
    with pytest.raises(InvalidInputError):
        sphere_from_json({"type": "torus"})


def test_geometry_json_round_trip():
    for sphere in reference_quadruple():
        assert sphere_from_json(sphere.to_geometry()) == sphere


# ==========================================
# 填补间隙（参考堆积）
# ==========================================


def test_fill_gap_reference():
    first, second = fill_gap(reference_quadruple())
    assert first.w == (1, 1, 0, 0, 0)
    assert second.w == (5, 1, -2, 0, 0)
    assert first.curvature_vector() == (0, 0, 1, 1, 1)

    partners = first.spheres()[4:]
    assert sorted(s.curvature for s in partners) == [1, 1, 2, 2]
    centers = {s.center for s in partners}
    assert centers == {(1, 1, 0), (1, -1, 0), (0, 0, HALF), (0, 0, -HALF)}


def test_fmatrix_gram_identity():
    for fmatrix in fill_gap(reference_quadruple()):
        check_fmatrix(fmatrix)


def test_fill_gap_with_known_w():
    first, _ = fill_gap(reference_quadruple(), known_w=(5, 1, -2, 0, 0))
    assert first.w in {(1, 1, 0, 0, 0), (5, 1, -2, 0, 0)}
    with pytest.raises(InvalidInputError):
        fill_gap(reference_quadruple(), known_w=(0, 0, 0, 0, 0))


def test_fill_gap_rejects_non_tangent():
    spheres = list(reference_quadruple())
    spheres[3] = sphere_from_geometry((5, 5, 0), 1)
    with pytest.raises(InvalidInputError):
        fill_gap(spheres)


# ==========================================
# Möbius 变换
# ==========================================


@pytest.mark.parametrize(
    "kind,params",
    [
        ("scale", {"lam": 3}),
        ("rotate", {"cos": sympy.Rational(3, 5), "sin": sympy.Rational(4, 5), "axis": "xy"}),
        ("rotate", {"cos": 0, "sin": 1, "axis": "yz"}),
        ("translate", {"vector": (1, HALF, -2)}),
        ("invert", {}),
    ],
)
def test_mobius_preserves_w(kind, params):
    assert mobius_matrix(kind, **params).preserves_w()


def test_translate_moves_center():
    unit = sphere_from_geometry((0, 0, 0), 1)
    moved = transform(unit, mobius_matrix("translate", vector=(1, 0, 0)))
    assert moved.center == (1, 0, 0)
    assert moved.curvature == 1


def test_scale_dilates_space():
    sphere = sphere_from_geometry((1, 0, 0), 1)
    scaled = transform(sphere, mobius_matrix("scale", lam=2))
    assert scaled.curvature == HALF
    assert scaled.center == (2, 0, 0)
    assert scaled.self_product() == 1


def test_mobius_keeps_fmatrix_gram():
    first, _ = fill_gap(reference_quadruple())
    mobius = mobius_matrix("translate", vector=(HALF, 0, 0))
    check_fmatrix(transform_fmatrix(first, mobius))


def test_compose_scales_back_to_identity():
    half = sympy.Rational(1, 2)
    composed = compose(mobius_matrix("scale", lam=2), mobius_matrix("scale", lam=half))
    assert composed.matrix == sympy.eye(5)
    assert compose().matrix == sympy.eye(5)


def test_unknown_mobius_kind():
    with pytest.raises(InvalidInputError):
        mobius_matrix("shear")


# ==========================================
# 轨道导出
# ==========================================


def test_orbit_depth_limit():
    first, _ = fill_gap(reference_quadruple())
    with pytest.raises(InvalidInputError):
        geometry_orbit(first, 7)
    assert geometry_orbit(first, 0) == [first]


def test_orbit_octuples_satisfy_gram():
    first, _ = fill_gap(reference_quadruple())
    orbit = geometry_orbit(first, 2)
    assert len(orbit) > 1
    for fmatrix in orbit:
        check_fmatrix(fmatrix)


def test_service_export_depth_zero():
    service = GeometryService(max_depth=6)
    payload = [sphere.to_geometry() for sphere in reference_quadruple()]
    export = service.export(service.parse_quadruple(payload), 0)
    body = export.to_json()
    assert body["exact"] is True
    assert body["sphere_count"] == 8
    assert {"type": "sphere", "curvature": "2/1", "center": ["0/1", "0/1", "1/2"]} in body["spheres"]


def test_service_rejects_wrong_count():
    service = GeometryService()
    with pytest.raises(InvalidInputError):
        service.parse_quadruple([reference_quadruple()[0].to_geometry()])


def test_octuple_spheres_and_generator_rows():
    first, _ = fill_gap(reference_quadruple())
    assert len(octuple_spheres(first)) == 8
    moved = apply_generator_to_fmatrix("A1", first)
    check_fmatrix(moved)
    assert apply_generator_to_fmatrix("A1", moved) == first
    assert sphere_to_geometry(moved.spheres()[0])["type"] in {"sphere", "plane"}
