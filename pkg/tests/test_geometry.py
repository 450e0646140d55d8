import math

import numpy as np
import pytest

from s2net import families
from s2net.complex import OrientedComplex2
from s2net.geometry import (DegenerateRayError, FanAmbiguityError, GeometryError, count_crossings,
                            cyclic_order_around_edge, edge_fans, ray_hits, side_point,
                            side_point_positions, triangle_normal)
from s2net.tag import build_tag, component_labels, external_side_witness


@pytest.mark.parametrize("pts, expect", [
    ([(0, 0, 0), (1, 0, 0), (0, 1, 0)], (0, 0, 1)),
    ([(0, 0, 0), (0, 1, 0), (1, 0, 0)], (0, 0, -1)),
    ([(0, 0, 0), (2, 0, 0), (0, 3, 0)], (0, 0, 1)),
])
def test_triangle_normal(pts, expect):
    cx = OrientedComplex2(pts, [(0, 1, 2)])
    assert np.allclose(triangle_normal(cx, 0), expect)


def test_zero_area_normal():
    cx = OrientedComplex2([(0, 0, 0), (1, 0, 0), (2, 0, 0)], [(0, 1, 2)])
    with pytest.raises(GeometryError, match="degenerate triangle"):
        triangle_normal(cx, 0)


def test_side_points_are_offset_along_normal():
    cx = OrientedComplex2([(0, 0, 0), (2, 0, 0), (0, 1, 0)], [(0, 1, 2)])
    plus, minus = side_point(cx, 0, +1), side_point(cx, 0, -1)
    centroid = np.array([2 / 3, 1 / 3, 0])
    eps = 1e-3 * 1.0  # shortest side has length 1
    assert np.allclose(plus.position, centroid + [0, 0, eps])
    assert np.allclose(minus.position, centroid - [0, 0, eps])
    assert (plus.id, minus.id) == (0, 1)


def fan_at(angles_deg, flip=()):
    pos = [(0, 0, 0), (0, 0, 1)]
    tris = []
    for k, a in enumerate(angles_deg):
        r = math.radians(a)
        pos.append((math.cos(r), math.sin(r), 0.5))
        tri = (0, 1, k + 2)
        tris.append((tri[1], tri[0], tri[2]) if k in flip else tri)
    return OrientedComplex2(pos, tris)


def test_single_triangle_fan():
    cx = fan_at([0])
    fan = cyclic_order_around_edge(cx, cx.edge_id(0, 1))
    assert len(fan) == 1 and fan.signs == (1,)


def test_fan_matches_independent_angles():
    # listed out of order on purpose
    cx = fan_at([240, 0, 120])
    fan = cyclic_order_around_edge(cx, cx.edge_id(0, 1))
    third = [int(t[2]) for t in cx.triangles]
    oracle = sorted(range(3), key=lambda t: math.atan2(cx.positions[third[t]][1], cx.positions[third[t]][0]))
    n = len(oracle)
    rotations = [tuple(oracle[i:] + oracle[:i]) for i in range(n)]
    assert fan.triangles in rotations
    # right-hand rotation about +z: 0 deg, 120 deg, 240 deg
    assert fan.triangles in [(1, 2, 0), (2, 0, 1), (0, 1, 2)]


def test_book_of_two_is_rotation_invariant():
    cx = fan_at([10, 200])
    fan = cyclic_order_around_edge(cx, 0 if tuple(cx.edges[0]) == (0, 1) else cx.edge_id(0, 1))
    assert sorted(fan.triangles) == [0, 1]
    assert set(fan.rotations()) == {(0, 1), (1, 0)}


def test_reverse_orientation_reverses_cycle():
    cx = fan_at([0, 70, 150, 260, 300], flip=(1, 3))
    e = cx.edge_id(0, 1)
    fwd = cyclic_order_around_edge(cx, e)
    rev = cyclic_order_around_edge(cx, e, reverse=True)
    backwards = tuple(reversed(fwd.triangles))
    assert rev.triangles in [backwards[i:] + backwards[:i] for i in range(len(backwards))]
    assert fwd.signs == tuple(-1 if t in (1, 3) else 1 for t in fwd.triangles)


def test_coplanar_fan_ambiguity():
    pos = [(0, 0, 0), (0, 0, 1), (1, 0, 0.3), (2, 0, 0.7)]
    cx = OrientedComplex2(pos, [(0, 1, 2), (0, 1, 3)])
    with pytest.raises(FanAmbiguityError, match="coplanar fan ambiguity"):
        cyclic_order_around_edge(cx, cx.edge_id(0, 1))
    with pytest.raises(FanAmbiguityError):
        edge_fans(cx)


def test_batched_fans_agree_with_single_edge(glued):
    table = edge_fans(glued)
    for e in range(glued.n_edges):
        one = cyclic_order_around_edge(glued, e)
        assert table.fan(e).triangles == one.triangles
        assert table.fan(e).signs == one.signs
    # fan completeness
    assert sum(len(f) for f in table) == 3 * glued.n_triangles


def test_cube_witness_outside_and_inside(cube):
    labels = component_labels(build_tag(cube))
    pts = side_point_positions(cube)
    outside = {v for v in range(2 * cube.n_triangles) if labels[v] == labels[0]}
    inside = {v for v in range(2 * cube.n_triangles) if labels[v] != labels[0]}
    # v+ of an outward-oriented cube triangle is outside
    assert 0 in outside
    assert external_side_witness(cube, outside)
    assert not external_side_witness(cube, inside)
    # oracle: crossing counts from the side points
    assert count_crossings(cube, pts[0], seed=3) % 2 == 0
    assert count_crossings(cube, pts[1], seed=3) % 2 == 1


def test_free_triangle_both_sides_unbounded():
    cx = OrientedComplex2(np.eye(3), [(0, 1, 2)])
    assert external_side_witness(cx, {0})
    assert external_side_witness(cx, {1})


def test_closed_surface_sides_get_opposite_answers():
    cx = families.perturb(families.cube_surface(), seed=11)
    for t in range(cx.n_triangles):
        assert external_side_witness(cx, {2 * t}) != external_side_witness(cx, {2 * t + 1})


def test_ray_through_edge_is_degenerate():
    cx = OrientedComplex2([(0, 0, 0), (1, 0, 0), (0, 1, 0)], [(0, 1, 2)])
    with pytest.raises(DegenerateRayError):
        ray_hits(cx, (0.5, 0.0, -1.0), (0, 0, 1))
    t, tris, facing = ray_hits(cx, (0.2, 0.2, -1.0), (0, 0, 1))
    assert np.allclose(t, [1.0]) and tris.tolist() == [0] and facing.tolist() == [1]


def test_side_segments_clear_other_triangles():
    from s2net.complex import validate_complex
    for name, cx in families.fixture_suite(count=20):
        assert "side-segment" not in validate_complex(cx).kinds(), name
