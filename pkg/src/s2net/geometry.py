"""Geometric services on an embedded 2-complex.

Triangle normals follow the vector product ``ab x bc`` for vertex order
``[a, b, c]``.  Angles around an edge are measured in the plane orthogonal to
the edge direction, increasing in the right-hand sense about the edge oriented
from its lower vertex id to its higher one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complex import ComplexError, OrientedComplex2, Violation

ANGLE_TOL = 1e-9
SIDE_EPS_FACTOR = 1e-3
MAX_RAY_RETRIES = 16


class GeometryError(ValueError):
    pass


class FanAmbiguityError(GeometryError):
    pass


class DegenerateRayError(GeometryError):
    pass


def _unit_rows(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(v, axis=-1)
    safe = np.where(norms > 0, norms, 1.0)
    return v / safe[..., None], norms


def triangle_normals(complex: OrientedComplex2) -> tuple[np.ndarray, np.ndarray]:
    """Unit normals ``unit(ab x bc)`` and the raw cross-product lengths."""
    p = complex.positions[complex.triangles]
    raw = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 1])
    return _unit_rows(raw)


def triangle_normal(complex: OrientedComplex2, triangle: int) -> np.ndarray:
    if not 0 <= triangle < complex.n_triangles:
        raise ComplexError(f"triangle {triangle}: cell not in complex")
    a, b, c = complex.positions[complex.triangles[triangle]]
    n = np.cross(b - a, c - b)
    length = np.linalg.norm(n)
    scale = max(np.linalg.norm(b - a), np.linalg.norm(c - b), np.linalg.norm(a - c))
    if length <= 1e-12 * scale * scale:
        raise GeometryError(f"triangle {triangle}: degenerate triangle")
    return n / length


def triangle_areas(complex: OrientedComplex2) -> np.ndarray:
    return 0.5 * triangle_normals(complex)[1]


@dataclass(frozen=True)
class SidePoint:
    """Point just off a triangle; tag vertex id is ``2*t`` for ``+`` and ``2*t+1`` for ``-``."""

    triangle: int
    sign: int
    position: np.ndarray

    @property
    def id(self) -> int:
        return 2 * self.triangle + (0 if self.sign > 0 else 1)


def side_point_positions(complex: OrientedComplex2) -> np.ndarray:
    """Array of shape (2m, 3) indexed by tag vertex id."""
    p = complex.positions[complex.triangles]
    centroid = p.mean(axis=1)
    normal, _ = triangle_normals(complex)
    sides = np.linalg.norm(p - np.roll(p, -1, axis=1), axis=2)
    eps = SIDE_EPS_FACTOR * sides.min(axis=1)
    out = np.empty((2 * complex.n_triangles, 3))
    out[0::2] = centroid + eps[:, None] * normal
    out[1::2] = centroid - eps[:, None] * normal
    return out


def side_point(complex: OrientedComplex2, triangle: int, sign: int) -> SidePoint:
    pos = side_point_positions(complex)[2 * triangle + (0 if sign > 0 else 1)]
    return SidePoint(triangle, 1 if sign > 0 else -1, pos)


@dataclass(frozen=True)
class EdgeFan:
    """Triangles around one edge in increasing rotation angle.

    ``signs[i]`` is +1 when triangle ``triangles[i]`` has the edge with a
    positive sign in its boundary.
    """

    edge: int
    triangles: tuple
    signs: tuple
    angles: tuple

    def __len__(self):
        return len(self.triangles)

    def rotations(self):
        n = len(self.triangles)
        return [self.triangles[i:] + self.triangles[:i] for i in range(n)]


def _edge_frames(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal (u, v) with u x v = d for each unit row of d."""
    ref = np.zeros_like(d)
    ref[np.arange(len(d)), np.argmin(np.abs(d), axis=1)] = 1.0
    u, _ = _unit_rows(np.cross(d, ref))
    v = np.cross(d, u)
    return u, v


@dataclass(frozen=True)
class FanTable:
    """All edge fans of a complex in flat CSR form.

    Entries ``ptr[e]:ptr[e+1]`` list the triangles at edge ``e`` sorted by
    rotation angle.
    """

    ptr: np.ndarray
    triangles: np.ndarray
    signs: np.ndarray
    angles: np.ndarray

    @property
    def n_edges(self) -> int:
        return len(self.ptr) - 1

    def fan(self, edge: int) -> EdgeFan:
        s, t = self.ptr[edge], self.ptr[edge + 1]
        return EdgeFan(int(edge), tuple(int(x) for x in self.triangles[s:t]),
                       tuple(int(x) for x in self.signs[s:t]),
                       tuple(float(x) for x in self.angles[s:t]))

    def __iter__(self):
        return (self.fan(e) for e in range(self.n_edges))

    def __len__(self):
        return self.n_edges


def _fan_angles(complex: OrientedComplex2, inc_edge: np.ndarray, inc_tri: np.ndarray,
                reverse: bool = False) -> np.ndarray:
    pos = complex.positions
    ends = complex.edges[inc_edge]
    p, q = pos[ends[:, 0]], pos[ends[:, 1]]
    if reverse:
        p, q = q, p
    d, _ = _unit_rows(q - p)
    third = complex.triangles[inc_tri].sum(axis=1) - ends.sum(axis=1)
    r = pos[third] - p
    r = r - (r * d).sum(axis=1)[:, None] * d
    u, v = _edge_frames(d)
    return np.arctan2((r * v).sum(axis=1), (r * u).sum(axis=1))


def _check_collisions(ptr: np.ndarray, angles: np.ndarray, edge_of: np.ndarray, tol: float):
    if len(angles) < 2:
        return
    same = edge_of[1:] == edge_of[:-1]
    gaps = np.diff(angles)
    hit = same & (gaps < tol)
    sizes = np.diff(ptr)
    multi = np.flatnonzero(sizes > 1)
    wrap = angles[ptr[multi]] + 2 * np.pi - angles[ptr[multi + 1] - 1]
    if hit.any() or (wrap < tol).any():
        e = int(edge_of[1:][hit][0]) if hit.any() else int(multi[wrap < tol][0])
        raise FanAmbiguityError(f"edge {e}: coplanar fan ambiguity")


def edge_fans(complex: OrientedComplex2, angle_tol: float = ANGLE_TOL) -> FanTable:
    """Cyclic order of triangles around every edge, computed in one pass."""
    counts = np.diff(complex.edge_ptr)
    inc_edge = np.repeat(np.arange(complex.n_edges), counts)
    inc_tri = complex.edge_triangles
    angles = _fan_angles(complex, inc_edge, inc_tri)
    order = np.lexsort((angles, inc_edge))
    angles = angles[order]
    _check_collisions(complex.edge_ptr, angles, inc_edge, angle_tol)
    return FanTable(complex.edge_ptr, inc_tri[order], complex.edge_signs[order], angles)


def cyclic_order_around_edge(complex: OrientedComplex2, edge: int, *, reverse: bool = False,
                             angle_tol: float = ANGLE_TOL) -> EdgeFan:
    """Fan of one edge.  ``reverse=True`` rotates about the opposite direction."""
    tris, signs = complex.incident_triangles(edge)
    if len(tris) == 0:
        raise GeometryError(f"edge {edge} has no incident triangle")
    angles = _fan_angles(complex, np.full(len(tris), edge), tris, reverse=reverse)
    order = np.argsort(angles, kind="stable")
    angles = angles[order]
    _check_collisions(np.array([0, len(tris)]), angles, np.zeros(len(tris), dtype=int), angle_tol)
    if reverse:
        signs = -signs
    return EdgeFan(int(edge), tuple(int(t) for t in tris[order]), tuple(int(s) for s in signs[order]),
                   tuple(float(a) for a in angles))


# -- rays ------------------------------------------------------------------

def ray_hits(complex: OrientedComplex2, origin, direction, triangles=None, tol: float = 1e-9):
    """Forward intersections of a ray with triangles, sorted by distance.

    Returns ``(t, tri, facing)`` where ``facing`` is the sign of
    ``direction . normal`` at each hit.  Raises :class:`DegenerateRayError`
    when the ray grazes an edge, a vertex, or runs inside a triangle's plane.
    """
    o = np.asarray(origin, dtype=float)
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    ids = np.arange(complex.n_triangles) if triangles is None else np.asarray(triangles, dtype=np.int64)
    p = complex.positions[complex.triangles[ids]]
    a = p[:, 0]
    e1, e2 = p[:, 1] - a, p[:, 2] - a
    pv = np.cross(d, e2)
    det = (e1 * pv).sum(axis=1)
    scale = np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
    s = o - a
    normal = np.cross(e1, e2)
    nn = np.linalg.norm(normal, axis=1)
    plane_dist = np.abs((s * normal).sum(axis=1)) / np.where(nn > 0, nn, 1.0)
    parallel = np.abs(det) <= 1e-12 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(parallel, 0.0, 1.0 / np.where(parallel, 1.0, det))
        u = (s * pv).sum(axis=1) * inv
        qv = np.cross(s, e1)
        v = (qv * d).sum(axis=1) * inv
        t = (qv * e2).sum(axis=1) * inv
    w = 1.0 - u - v
    length = np.sqrt(scale)
    inside = (~parallel) & (u >= -tol) & (v >= -tol) & (w >= -tol) & (t > -tol * length)
    near_edge = inside & (np.minimum(np.minimum(u, v), w) <= tol)
    at_origin = inside & (np.abs(t) <= tol * length)
    in_plane = parallel & (plane_dist <= tol * length)
    if near_edge.any() or at_origin.any() or in_plane.any():
        raise DegenerateRayError("ray passes within tolerance of an edge, vertex or triangle plane")
    hit = inside & (t > 0)
    order = np.argsort(t[hit], kind="stable")
    facing = np.sign((normal[hit] * d).sum(axis=1))[order].astype(int)
    return t[hit][order], ids[hit][order], facing


def ray_directions(seed: int = 0):
    """Reproducible stream of unit directions."""
    rng = np.random.default_rng(seed)
    while True:
        v = rng.normal(size=3)
        yield v / np.linalg.norm(v)


def count_crossings(complex: OrientedComplex2, point, *, seed: int = 0, triangles=None) -> int:
    """Number of triangles crossed by a ray from ``point``, retrying degenerate directions."""
    for k, d in enumerate(ray_directions(seed)):
        if k >= MAX_RAY_RETRIES:
            raise DegenerateRayError(f"no clean ray direction after {MAX_RAY_RETRIES} attempts")
        try:
            t, _, _ = ray_hits(complex, point, d, triangles)
        except DegenerateRayError:
            continue
        return len(t)
    raise AssertionError("unreachable")


def bounding_radius(complex: OrientedComplex2) -> tuple[np.ndarray, float]:
    lo, hi = complex.positions.min(axis=0), complex.positions.max(axis=0)
    return 0.5 * (lo + hi), 0.5 * float(np.linalg.norm(hi - lo)) + 1.0


# -- validation predicates ----------------------------------------------------

def _section(tri: np.ndarray, dist: np.ndarray, tol: float) -> list:
    pts = [tri[i] for i in range(3) if abs(dist[i]) <= tol]
    for i, j in ((0, 1), (1, 2), (0, 2)):
        if (dist[i] > tol and dist[j] < -tol) or (dist[i] < -tol and dist[j] > tol):
            s = dist[i] / (dist[i] - dist[j])
            pts.append(tri[i] + s * (tri[j] - tri[i]))
    return pts


def _separated_2d(P2: np.ndarray, Q2: np.ndarray, tol: float) -> bool:
    for poly in (P2, Q2):
        for i in range(3):
            e = poly[(i + 1) % 3] - poly[i]
            axis = np.array([-e[1], e[0]])
            n = np.linalg.norm(axis)
            if n == 0:
                continue
            axis /= n
            a, b = P2 @ axis, Q2 @ axis
            if min(a.max(), b.max()) - max(a.min(), b.min()) <= tol:
                return True
    return False


def triangles_meet_improperly(P: np.ndarray, Q: np.ndarray, shared: int, tol: float) -> bool:
    """True when two triangles intersect outside their common face.

    ``shared`` is the number of vertex ids the triangles have in common
    (0, 1 or 2); with ``shared > 0`` the shared vertices must coincide in the
    arrays as well.
    """
    nP = np.cross(P[1] - P[0], P[2] - P[0])
    nQ = np.cross(Q[1] - Q[0], Q[2] - Q[0])
    nP /= np.linalg.norm(nP)
    nQ /= np.linalg.norm(nQ)
    dQ = (Q - P[0]) @ nP
    dP = (P - Q[0]) @ nQ
    if np.all(np.abs(dQ) <= tol) and np.all(np.abs(dP) <= tol):
        ref = P[1] - P[0]
        ex = ref / np.linalg.norm(ref)
        ey = np.cross(nP, ex)
        P2 = np.stack([(P - P[0]) @ ex, (P - P[0]) @ ey], axis=1)
        Q2 = np.stack([(Q - P[0]) @ ex, (Q - P[0]) @ ey], axis=1)
        return not _separated_2d(P2, Q2, tol)
    if shared == 2:
        return False
    if np.all(dQ > tol) or np.all(dQ < -tol) or np.all(dP > tol) or np.all(dP < -tol):
        return False
    sp_ = _section(P, dP, tol)
    sq = _section(Q, dQ, tol)
    if not sp_ or not sq:
        return False
    line = np.cross(nP, nQ)
    ln = np.linalg.norm(line)
    if ln <= 1e-15:
        return False
    line /= ln
    a = np.array([x @ line for x in sp_])
    b = np.array([x @ line for x in sq])
    overlap = min(a.max(), b.max()) - max(a.min(), b.min())
    if shared == 0:
        return overlap >= -tol
    return overlap > tol


def segment_hits_triangle(p0, p1, tri: np.ndarray, tol: float = 1e-12) -> bool:
    """Closed segment against closed triangle, non-coplanar case."""
    p0, p1 = np.asarray(p0, float), np.asarray(p1, float)
    n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
    d0, d1 = (p0 - tri[0]) @ n, (p1 - tri[0]) @ n
    if (d0 > 0 and d1 > 0) or (d0 < 0 and d1 < 0) or d0 == d1:
        return False
    x = p0 + (d0 / (d0 - d1)) * (p1 - p0)
    for i in range(3):
        a, b = tri[i], tri[(i + 1) % 3]
        if np.cross(b - a, x - a) @ n < -tol * (n @ n):
            return False
    return True


def _candidate_pairs(boxes_lo: np.ndarray, boxes_hi: np.ndarray):
    order = np.argsort(boxes_lo[:, 0], kind="stable")
    lo, hi = boxes_lo[order], boxes_hi[order]
    starts = lo[:, 0]
    for k in range(len(order)):
        stop = int(np.searchsorted(starts, hi[k, 0], side="right"))
        if stop <= k + 1:
            continue
        j = np.arange(k + 1, stop)
        ok = np.all(lo[j, 1:] <= hi[k, 1:], axis=1) & np.all(hi[j, 1:] >= lo[k, 1:], axis=1)
        for jj in j[ok]:
            a, b = int(order[k]), int(order[jj])
            yield (a, b) if a < b else (b, a)


def geometric_violations(complex: OrientedComplex2, tolerance: float = 1e-9) -> list:
    """Geometric checks used by :func:`s2net.complex.validate_complex`."""
    from scipy.spatial import cKDTree

    out = []
    if complex.n_vertices > 1:
        for i, j in sorted(cKDTree(complex.positions).query_pairs(tolerance)):
            out.append(Violation("coincident-vertices", f"vertices {i} and {j} coincide", (i, j)))
    P = complex.positions[complex.triangles]
    _, cross_len = triangle_normals(complex)
    longest = np.linalg.norm(P - np.roll(P, -1, axis=1), axis=2).max(axis=1) if len(P) else np.zeros(0)
    degenerate = cross_len <= tolerance * np.maximum(longest, tolerance)
    for t in np.flatnonzero(degenerate):
        out.append(Violation("degenerate-triangle", f"triangle {int(t)} has zero area", (int(t),)))
    if len(P) < 2:
        return out
    sidepts = side_point_positions(complex)
    pair_pts = sidepts.reshape(-1, 2, 3)
    lo = np.minimum(P.min(axis=1), pair_pts.min(axis=1)) - tolerance
    hi = np.maximum(P.max(axis=1), pair_pts.max(axis=1)) + tolerance
    tri_sets = [set(int(v) for v in t) for t in complex.triangles]
    for a, b in _candidate_pairs(lo, hi):
        if degenerate[a] or degenerate[b]:
            continue
        shared = len(tri_sets[a] & tri_sets[b])
        if triangles_meet_improperly(P[a], P[b], shared, tolerance):
            out.append(Violation("non-face intersection",
                                 f"triangles {a} and {b} intersect outside a common face", (a, b)))
        for t, other in ((a, b), (b, a)):
            if segment_hits_triangle(sidepts[2 * t], sidepts[2 * t + 1], P[other]):
                out.append(Violation("side-segment",
                                     f"side segment of triangle {t} pierces triangle {other}", (t, other)))
    return out
