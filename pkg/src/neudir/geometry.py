"""Polygonal domains and conforming triangle meshes.

Meshes are produced by ear clipping followed by uniform 1->4 refinement, so
the mesh sequence for a polygon is nested and fully deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateEdge, EarClipFailure, SelfIntersecting

CORNER_TOL = 1e-6  # rad, angle between adjacent boundary-edge normals
SMOOTHING_ITERATIONS = 5


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def signed_area(vertices) -> float:
    """Shoelace area, positive for counter-clockwise vertex order."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _on_segment(p, q, r):
    # r collinear with pq assumed
    return (min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
            and min(p[1], q[1]) <= r[1] <= max(p[1], q[1]))


def segments_intersect(p1, p2, q1, q2) -> bool:
    """Closed-segment intersection test (touching counts)."""
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True
    if d1 == 0 and _on_segment(q1, q2, p1):
        return True
    if d2 == 0 and _on_segment(q1, q2, p2):
        return True
    if d3 == 0 and _on_segment(p1, p2, q1):
        return True
    if d4 == 0 and _on_segment(p1, p2, q2):
        return True
    return False


@dataclass(frozen=True)
class Polygon:
    """Simple polygon with counter-clockwise vertices; the closing edge is implied."""

    vertices: np.ndarray
    name: str = "polygon"

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    def edges(self):
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def interior_angles(self) -> np.ndarray:
        """Interior angle at each vertex, in (0, 2*pi)."""
        v = self.vertices
        prev = np.roll(v, 1, axis=0) - v
        nxt = np.roll(v, -1, axis=0) - v
        # angle swept from the outgoing edge to the incoming edge, CCW polygon
        ang = np.arctan2(nxt[:, 0] * prev[:, 1] - nxt[:, 1] * prev[:, 0],
                         (nxt * prev).sum(axis=1))
        return np.mod(ang, 2 * np.pi)

    def is_convex_cornered(self) -> bool:
        return bool(np.all(self.interior_angles() < np.pi - 1e-12))

    def to_json(self) -> dict:
        return {"vertices": self.vertices.tolist()}


def make_polygon(points, name: str = "polygon") -> Polygon:
    """Validate ``points`` as a simple polygon and orient it counter-clockwise.

    Raises DegenerateEdge for zero-length edges (including repeated
    consecutive vertices) and SelfIntersecting for crossing edges.
    """
    v = np.array(points, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise ValueError("a polygon needs at least 3 two-dimensional points")
    if not np.all(np.isfinite(v)):
        raise ValueError("polygon coordinates must be finite")
    n = len(v)
    for i in range(n):
        if np.array_equal(v[i], v[(i + 1) % n]):
            raise DegenerateEdge(f"zero-length edge at vertex {i}")
    d = v[1:] - v[0]
    if np.all(d[:, 0] * d[0, 1] - d[:, 1] * d[0, 0] == 0):
        raise DegenerateEdge("all vertices are collinear")
    for i in range(n):
        a1, a2 = v[i], v[(i + 1) % n]
        for j in range(i + 1, n):
            b1, b2 = v[j], v[(j + 1) % n]
            if j == i + 1 or (i == 0 and j == n - 1):
                # adjacent edges share one vertex; they may only fold back
                shared = a2 if j == i + 1 else a1
                other_a = a1 if j == i + 1 else a2
                other_b = b2 if j == i + 1 else b1
                if (_cross(shared, other_a, other_b) == 0
                        and np.dot(other_a - shared, other_b - shared) > 0):
                    raise SelfIntersecting(f"edges {i} and {j} overlap")
                continue
            if segments_intersect(a1, a2, b1, b2):
                raise SelfIntersecting(f"edges {i} and {j} intersect")
    area = signed_area(v)
    if area == 0:
        raise DegenerateEdge("polygon has zero area")
    if area < 0:
        v = v[::-1].copy()
    v.setflags(write=False)
    return Polygon(v, name)


def regular_polygon(n: int, radius: float = 1.0) -> Polygon:
    """Regular ``n``-gon inscribed in the circle of ``radius`` about the origin."""
    if n < 3:
        raise ValueError("regular polygon needs n >= 3")
    if radius <= 0:
        raise ValueError("radius must be positive")
    t = 2 * np.pi * np.arange(n) / n
    pts = radius * np.column_stack([np.cos(t), np.sin(t)])
    return make_polygon(pts, name=f"regular{n}")


def square(side: float = math.pi) -> Polygon:
    return make_polygon([(0, 0), (side, 0), (side, side), (0, side)], name="square")


def lshape() -> Polygon:
    return make_polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)], name="lshape")


def builtin_domain(spec: str) -> Polygon:
    """Resolve ``square``, ``disk[:n]``, ``lshape`` or ``hexagon``."""
    name, _, arg = spec.partition(":")
    if name == "square":
        return square()
    if name == "disk":
        n = int(arg) if arg else 256
        return make_polygon(regular_polygon(n, 1.0).vertices, name=f"disk:{n}")
    if name == "lshape":
        return lshape()
    if name == "hexagon":
        return make_polygon(regular_polygon(6, 1.0).vertices, name="hexagon")
    raise ValueError(f"unknown builtin domain {spec!r}")


def load_polygon(path) -> Polygon:
    path = Path(path)
    with open(path) as f:
        data = json.load(f)
    return make_polygon(data["vertices"], name=path.stem)


@dataclass(frozen=True)
class TriMesh:
    """Conforming triangulation of a polygon.

    ``boundary_edges`` is the boundary cycle in counter-clockwise order, so
    consecutive edges share a vertex and ``boundary_edges[:, 0]`` lists every
    boundary vertex exactly once.
    """

    points: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    normals: np.ndarray
    tangents: np.ndarray
    corner_vertices: np.ndarray
    h: float
    name: str = "mesh"
    level: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def boundary_vertices(self) -> np.ndarray:
        return self.boundary_edges[:, 0]

    @property
    def interior_vertices(self) -> np.ndarray:
        mask = np.ones(len(self.points), dtype=bool)
        mask[self.boundary_vertices] = False
        return np.flatnonzero(mask)

    @property
    def areas(self) -> np.ndarray:
        p = self.points[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted index pairs."""
        if "edges" not in self._cache:
            e = self.triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
            self._cache["edges"] = np.unique(np.sort(e, axis=1), axis=0)
        return self._cache["edges"]

    def to_json(self) -> dict:
        return {
            "points": self.points.tolist(),
            "triangles": self.triangles.tolist(),
            "boundary_edges": self.boundary_edges.tolist(),
        }


def _max_edge_length(points, triangles) -> float:
    p = points[triangles]
    d = np.concatenate([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]])
    return float(np.sqrt((d ** 2).sum(axis=1)).max())


def _build_mesh(points, triangles, cycle, name, level) -> TriMesh:
    points = np.asarray(points, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64)
    cycle = np.asarray(cycle, dtype=np.int64)
    bedges = np.column_stack([cycle, np.roll(cycle, -1)])
    e = points[bedges[:, 1]] - points[bedges[:, 0]]
    length = np.hypot(e[:, 0], e[:, 1])
    tangents = e / length[:, None]
    # outward normal of a CCW cycle: tangent rotated clockwise
    normals = np.column_stack([tangents[:, 1], -tangents[:, 0]])
    n_in = np.roll(normals, 1, axis=0)
    turn = np.abs(np.arctan2(n_in[:, 0] * normals[:, 1] - n_in[:, 1] * normals[:, 0],
                             (n_in * normals).sum(axis=1)))
    corners = cycle[turn > CORNER_TOL]
    for arr in (points, triangles, bedges, normals, tangents, corners):
        arr.setflags(write=False)
    return TriMesh(points, triangles, bedges, normals, tangents, np.sort(corners),
                   _max_edge_length(points, triangles), name, level)


def _min_angle(a, b, c) -> float:
    def ang(p, q, r):
        u, v = q - p, r - p
        return math.atan2(abs(u[0] * v[1] - u[1] * v[0]), u[0] * v[0] + u[1] * v[1])
    return min(ang(a, b, c), ang(b, c, a), ang(c, a, b))


def ear_clip(polygon: Polygon) -> np.ndarray:
    """Triangulate a CCW simple polygon by ear clipping.

    At every step the ear with the largest minimum angle is removed (ties go
    to the lowest vertex index), which keeps the result deterministic.  Ear
    qualities are cached; clipping a vertex changes its two neighbours and
    any ear whose triangle contained it.
    """
    v = polygon.vertices
    remaining = list(range(len(v)))
    triangles = []
    quality = {}
    blockers = {}

    def ear_quality(pos):
        # minimum angle of the ear at remaining[pos], or None if it is no ear
        m = len(remaining)
        i, j, k = remaining[pos - 1], remaining[pos], remaining[(pos + 1) % m]
        a, b, c = v[i], v[j], v[k]
        if _cross(a, b, c) <= 0:
            return None
        others = np.array([q for q in remaining if q not in (i, j, k)], dtype=np.int64)
        if len(others):
            p = v[others]
            inside = ((_cross_many(a, b, p) >= 0) & (_cross_many(b, c, p) >= 0)
                      & (_cross_many(c, a, p) >= 0))
            if inside.any():
                for q in others[inside].tolist():
                    blockers.setdefault(q, set()).add(j)
                return None
        return _min_angle(a, b, c)

    while len(remaining) > 3:
        m = len(remaining)
        best, best_q = None, -1.0
        for pos in range(m):
            j = remaining[pos]
            if j not in quality:
                quality[j] = ear_quality(pos)
            q = quality[j]
            if q is not None and q > best_q + 1e-12:
                best, best_q = pos, q
        if best is None:
            raise EarClipFailure(
                f"no ear found among {m} remaining vertices; near-degenerate input "
                f"around vertex {remaining[0]}", vertex=remaining[0])
        i, j, k = remaining[best - 1], remaining[best], remaining[(best + 1) % m]
        triangles.append((i, j, k))
        del remaining[best]
        del quality[j]
        for x in blockers.pop(j, set()) | {i, k}:
            quality.pop(x, None)
    i, j, k = remaining
    if _cross(v[i], v[j], v[k]) <= 0:
        raise EarClipFailure(f"final triangle at vertex {j} is degenerate", vertex=j)
    triangles.append((i, j, k))
    return np.array(triangles, dtype=np.int64)


def _cross_many(o, a, p):
    return (a[0] - o[0]) * (p[:, 1] - o[1]) - (a[1] - o[1]) * (p[:, 0] - o[0])


def laplacian_smooth(points, triangles, fixed, iterations=SMOOTHING_ITERATIONS):
    """Jacobi smoothing of the non-fixed vertices toward their neighbour average."""
    points = np.array(points, dtype=float)
    free = np.ones(len(points), dtype=bool)
    free[fixed] = False
    if not free.any():
        return points
    e = triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
    e = np.unique(np.sort(e, axis=1), axis=0)
    deg = np.bincount(e.ravel(), minlength=len(points)).astype(float)
    for _ in range(iterations):
        acc = np.zeros_like(points)
        np.add.at(acc, e[:, 0], points[e[:, 1]])
        np.add.at(acc, e[:, 1], points[e[:, 0]])
        points[free] = acc[free] / deg[free, None]
    return points


def refine(mesh: TriMesh) -> TriMesh:
    """Uniform 1->4 refinement through edge midpoints."""
    pts, tri = mesh.points, mesh.triangles
    n = len(pts)
    local = tri[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 3, 2)
    keys = np.sort(local, axis=2)
    flat = keys.reshape(-1, 2)
    uniq, inv = np.unique(flat, axis=0, return_inverse=True)
    inv = inv.reshape(-1, 3)
    mids = 0.5 * (pts[uniq[:, 0]] + pts[uniq[:, 1]])
    new_pts = np.vstack([pts, mids])
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    mab, mbc, mca = n + inv[:, 0], n + inv[:, 1], n + inv[:, 2]
    new_tri = np.concatenate([
        np.column_stack([a, mab, mca]),
        np.column_stack([mab, b, mbc]),
        np.column_stack([mca, mbc, c]),
        np.column_stack([mab, mbc, mca]),
    ])
    cycle = mesh.boundary_edges
    bkeys = np.sort(cycle, axis=1)
    code_u = uniq[:, 0] * (n + 1) + uniq[:, 1]
    code_b = bkeys[:, 0] * (n + 1) + bkeys[:, 1]
    bmid = n + np.searchsorted(code_u, code_b)
    new_cycle = np.column_stack([cycle[:, 0], bmid]).ravel()
    return _build_mesh(new_pts, new_tri, new_cycle, mesh.name, mesh.level + 1)


def triangulate(polygon: Polygon, levels: int = 0) -> TriMesh:
    """Ear-clip ``polygon`` and refine the result ``levels`` times."""
    if levels < 0:
        raise ValueError("levels must be >= 0")
    tri = ear_clip(polygon)
    n = polygon.n
    pts = laplacian_smooth(polygon.vertices, tri, fixed=np.arange(n))
    mesh = _build_mesh(pts, tri, np.arange(n), polygon.name, 0)
    for _ in range(levels):
        mesh = refine(mesh)
    return mesh
