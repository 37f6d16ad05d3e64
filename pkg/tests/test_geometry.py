import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neudir.errors import DegenerateEdge, SelfIntersecting
from neudir.geometry import (
    builtin_domain, ear_clip, load_polygon, lshape, make_polygon, refine, regular_polygon,
    signed_area, square, triangulate,
)

DATA = Path(__file__).parent / "data"


def test_shoelace_area_unit_square():
    assert signed_area([(0, 0), (1, 0), (1, 1), (0, 1)]) == pytest.approx(1.0)
    assert signed_area([(0, 0), (0, 1), (1, 1), (1, 0)]) == pytest.approx(-1.0)


def test_hexagon_and_disk_areas():
    # 3 sqrt(3) / 2 for the unit hexagon
    assert builtin_domain("hexagon").area == pytest.approx(2.5980762, abs=1e-6)
    disk = builtin_domain("disk")
    assert disk.n == 256
    # inscribed 256-gon: 128 sin(2 pi / 256) = pi - 3.154e-4
    assert disk.area == pytest.approx(128 * math.sin(2 * math.pi / 256), rel=1e-14)
    assert 3e-4 < math.pi - disk.area < 3.2e-4


def test_polygon_is_reoriented_ccw():
    p = make_polygon([(0, 0), (0, 1), (1, 1), (1, 0)])
    assert signed_area(p.vertices) > 0
    assert not p.vertices.flags.writeable


def test_self_intersecting_bowtie_rejected():
    with pytest.raises(SelfIntersecting):
        make_polygon([(0, 0), (1, 1), (1, 0), (0, 1)])


@pytest.mark.parametrize("pts", [
    [(0, 0), (1, 0), (1, 0), (0, 1)],
    [(0, 0), (1, 0), (2, 0)],
    [(0, 0), (1, 0), (2, 0), (1, 0.0)],
])
def test_degenerate_rejected(pts):
    with pytest.raises(DegenerateEdge):
        make_polygon(pts)


def test_too_few_vertices():
    with pytest.raises(ValueError):
        make_polygon([(0, 0), (1, 0)])


def test_lshape_angles():
    ang = np.degrees(lshape().interior_angles())
    assert sorted(np.round(ang).tolist()) == [90] * 5 + [270]
    assert not lshape().is_convex_cornered()


def test_star_data_polygon():
    star = load_polygon(DATA / "star12.json")
    assert star.n == 12
    assert star.name == "star12"
    assert star.area == pytest.approx(2.1692, abs=1e-4)


def test_ear_clip_counts():
    for poly in (square(), lshape(), builtin_domain("hexagon"), load_polygon(DATA / "star12.json")):
        tri = ear_clip(poly)
        assert tri.shape == (poly.n - 2, 3)
        pts = poly.vertices[tri]
        d1, d2 = pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 0]
        a = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        assert np.all(a > 0)
        assert a.sum() == pytest.approx(poly.area, rel=1e-12)


def test_square_level3_uniform():
    mesh = triangulate(square(), 3)
    assert len(mesh.triangles) == 128
    # 128 congruent triangles tile the square of area pi^2
    np.testing.assert_allclose(mesh.areas, math.pi ** 2 / 128, rtol=1e-12)


def test_disk_boundary_cycle():
    mesh = triangulate(builtin_domain("disk"), 2)
    assert len(mesh.boundary_edges) == 1024
    e = mesh.boundary_edges
    np.testing.assert_array_equal(e[:, 1], np.roll(e[:, 0], -1))


def test_boundary_midpoints_on_polygon():
    mesh = triangulate(builtin_domain("hexagon"), 3)
    r = np.linalg.norm(mesh.points[mesh.boundary_vertices], axis=1)
    # every boundary point lies on a hexagon edge: apothem <= r <= 1
    assert np.all(r <= 1 + 1e-12) and np.all(r >= math.sqrt(3) / 2 - 1e-12)
    assert len(mesh.corner_vertices) == 6


@pytest.mark.parametrize("name", ["square", "lshape", "hexagon", "disk:32"])
def test_euler_characteristic_and_h_halving(name):
    mesh = triangulate(builtin_domain(name), 1)
    for _ in range(2):
        V, E, F = mesh.n_points, len(mesh.edges()), len(mesh.triangles)
        assert V - E + F == 1
        finer = refine(mesh)
        assert finer.h == pytest.approx(mesh.h / 2, rel=1e-12)
        assert finer.areas.sum() == pytest.approx(mesh.areas.sum(), rel=1e-12)
        mesh = finer


def test_normals_outward_unit():
    mesh = triangulate(square(), 2)
    np.testing.assert_allclose(np.linalg.norm(mesh.normals, axis=1), 1.0)
    mid = mesh.points[mesh.boundary_edges].mean(axis=1)
    centre = np.array([math.pi / 2, math.pi / 2])
    assert np.all(((mid - centre) * mesh.normals).sum(axis=1) > 0)


def test_mesh_json_roundtrip():
    mesh = triangulate(lshape(), 1)
    data = json.loads(json.dumps(mesh.to_json()))
    np.testing.assert_allclose(data["points"], mesh.points)
    assert data["triangles"] == mesh.triangles.tolist()


def test_triangulation_deterministic():
    a = triangulate(load_polygon(DATA / "star12.json"), 2)
    b = triangulate(load_polygon(DATA / "star12.json"), 2)
    np.testing.assert_array_equal(a.points, b.points)
    np.testing.assert_array_equal(a.triangles, b.triangles)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 40), st.floats(0.1, 10.0))
def test_regular_polygon_area_property(n, radius):
    p = regular_polygon(n, radius)
    assert p.area == pytest.approx(0.5 * n * radius ** 2 * math.sin(2 * math.pi / n), rel=1e-12)
    assert p.is_convex_cornered()
    tri = ear_clip(p)
    assert len(tri) == n - 2


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.3, 1.0), min_size=5, max_size=14), st.floats(0, 2 * math.pi))
def test_star_polygons_triangulate(radii, phase):
    n = len(radii)
    t = phase + 2 * math.pi * np.arange(n) / n
    pts = np.column_stack([radii * np.cos(t), radii * np.sin(t)])
    poly = make_polygon(pts)
    mesh = triangulate(poly, 1)
    assert mesh.areas.min() > 0
    assert mesh.areas.sum() == pytest.approx(poly.area, rel=1e-10)


def _reference_ear_clip(v):
    # exhaustive rescan every step: best minimum angle, ties to the lowest index
    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def min_angle(a, b, c):
        def ang(p, q, r):
            u, w = q - p, r - p
            return math.atan2(abs(u[0] * w[1] - u[1] * w[0]), u[0] * w[0] + u[1] * w[1])
        return min(ang(a, b, c), ang(b, c, a), ang(c, a, b))

    rem = list(range(len(v)))
    out = []
    while len(rem) > 3:
        m = len(rem)
        best, best_q = None, -1.0
        for pos in range(m):
            i, j, k = rem[pos - 1], rem[pos], rem[(pos + 1) % m]
            a, b, c = v[i], v[j], v[k]
            if cross(a, b, c) <= 0:
                continue
            if any(cross(a, b, v[q]) >= 0 and cross(b, c, v[q]) >= 0 and cross(c, a, v[q]) >= 0
                   for q in rem if q not in (i, j, k)):
                continue
            q = min_angle(a, b, c)
            if q > best_q + 1e-12:
                best, best_q = pos, q
        out.append((rem[best - 1], rem[best], rem[(best + 1) % m]))
        del rem[best]
    out.append(tuple(rem))
    return np.array(out)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.2, 1.0), min_size=4, max_size=16), st.floats(0, 2 * math.pi))
def test_ear_clip_matches_exhaustive_rescan(radii, phase):
    n = len(radii)
    t = phase + 2 * math.pi * np.arange(n) / n
    poly = make_polygon(np.column_stack([radii * np.cos(t), radii * np.sin(t)]))
    np.testing.assert_array_equal(ear_clip(poly), _reference_ear_clip(poly.vertices))


def test_ear_clip_matches_exhaustive_rescan_corpus():
    for poly in (lshape(), load_polygon(DATA / "star12.json"), builtin_domain("disk:64")):
        np.testing.assert_array_equal(ear_clip(poly), _reference_ear_clip(poly.vertices))
