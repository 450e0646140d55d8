"""Generated complexes and tetrahedral fixtures used for tests and benchmarks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .complex import OrientedComplex2

AXES = np.eye(3, dtype=np.int64)


def _assemble(tris, labels=None) -> OrientedComplex2:
    """Build a complex from triangles given as coordinate triples, merging equal points."""
    index = {}
    pos = []
    out = []
    for tri in tris:
        ids = []
        for p in tri:
            key = tuple(np.round(np.asarray(p, dtype=float), 12))
            if key not in index:
                index[key] = len(pos)
                pos.append(key)
            ids.append(index[key])
        out.append(ids)
    return OrientedComplex2(np.array(pos, dtype=float).reshape(-1, 3), np.array(out, dtype=np.int64).reshape(-1, 3),
                            triangle_labels=labels)


def square_face(base, axis: int):
    """Two triangles covering the unit square at ``base`` normal to ``axis``.

    Both triangles have normal ``+e_axis``; the diagonal joins the low corner
    to the high corner, which matches the Kuhn subdivision of unit cubes.
    """
    b, c = (axis + 1) % 3, (axis + 2) % 3
    p0 = np.asarray(base, dtype=np.int64)
    p1, p3 = p0 + AXES[b], p0 + AXES[c]
    p2 = p1 + AXES[c]
    return [(p0, p1, p2), (p0, p2, p3)]


def cell_surface_triangles(cells, outward: bool = True):
    """Triangulated faces of a union of unit cells, shared faces emitted once.

    Boundary faces point away from the union when ``outward``; interior faces
    keep the ``+axis`` normal.  Faces are listed in a deterministic order.
    """
    cells = {tuple(int(x) for x in c) for c in cells}
    faces = {}
    for cell in sorted(cells):
        for axis in range(3):
            for off in (0, 1):
                base = np.array(cell)
                base[axis] += off
                key = (axis,) + tuple(base)
                faces.setdefault(key, []).append(off)
    tris = []
    for key in sorted(faces):
        axis, base = key[0], key[1:]
        sides = faces[key]
        pair = square_face(base, axis)
        # off == 0 means the face is the low face of that cell; its outward normal is -axis
        flip = outward and len(sides) == 1 and sides[0] == 0
        for t in pair:
            tris.append((t[1], t[0], t[2]) if flip else t)
    return tris


def cube_surface(origin=(0.0, 0.0, 0.0), size: float = 1.0, outward: bool = True) -> OrientedComplex2:
    """Closed surface of an axis-aligned cube, 12 triangles."""
    tris = cell_surface_triangles([(0, 0, 0)], outward)
    o = np.asarray(origin, dtype=float)
    return _assemble([[o + size * np.asarray(p, float) for p in t] for t in tris])


def stacked_cubes(n: int) -> OrientedComplex2:
    """``n`` unit cubes stacked along z sharing faces: ``10n + 2`` triangles, ``n + 1`` regions."""
    if n < 1:
        raise ValueError("need at least one cube")
    return _assemble(cell_surface_triangles([(0, 0, k) for k in range(n)]))


def tetrahelix_points(count: int) -> np.ndarray:
    """Vertices of a chain of face-sharing regular tetrahedra with unit edges."""
    theta = np.arccos(-2.0 / 3.0)
    r = 3.0 * np.sqrt(3.0) / 10.0
    h = 1.0 / np.sqrt(10.0)
    k = np.arange(count)
    return np.stack([r * np.cos(k * theta), r * np.sin(k * theta), k * h], axis=1)


def tetrahedron_chain(n: int) -> OrientedComplex2:
    """Faces of ``n`` consecutive face-sharing tetrahedra: ``3n + 1`` triangles, ``n + 1`` regions."""
    if n < 1:
        raise ValueError("need at least one tetrahedron")
    fixture = tetrahelix_fixture(n)
    return fixture.face_complex()


def open_fan(k: int, radius: float = 1.0, length: float = 1.0, seed: int | None = None) -> OrientedComplex2:
    """``k`` triangles sharing the edge (0,0,0)-(0,0,length), spread around it."""
    if seed is None:
        ang = 2 * np.pi * np.arange(k) / k
    else:
        rng = np.random.default_rng(seed)
        ang = np.sort(rng.uniform(0, 2 * np.pi, size=k))
        gaps = np.diff(np.concatenate([ang, ang[:1] + 2 * np.pi]))
        if k > 1 and gaps.min() < 1e-3:
            ang = 2 * np.pi * np.arange(k) / k
    pos = [(0.0, 0.0, 0.0), (0.0, 0.0, length)]
    tris = []
    for i, a in enumerate(ang):
        pos.append((radius * np.cos(a), radius * np.sin(a), 0.5 * length))
        tris.append((0, 1, i + 2))
    return OrientedComplex2(np.array(pos), np.array(tris))


def flat_patch(nx: int, ny: int) -> OrientedComplex2:
    """Triangulated rectangle in the plane z = 0 (open surface, one region)."""
    tris = []
    for i in range(nx):
        for j in range(ny):
            tris.extend(square_face((i, j, 0), 2))
    return _assemble(tris)


GLUED_POSITIONS = np.array([
    (0.0, 0.0, 0.0),   # a
    (1.0, 0.0, 0.0),   # b
    (0.0, 1.0, 0.0),   # c
    (0.3, 0.3, 1.0),   # d
    (0.3, 0.3, -1.0),  # e
])
GLUED_TRIANGLES = np.array([
    (1, 2, 3),  # d1 = bcd
    (2, 0, 3),  # d2 = cad
    (0, 1, 3),  # d3 = abd
    (0, 2, 1),  # d4 = acb, the shared face
    (0, 2, 4),  # d5 = ace
    (2, 1, 4),  # d6 = cbe
    (1, 0, 4),  # d7 = bae
])
GLUED_LABELS = tuple(f"d{i}" for i in range(1, 8))
GLUED_TETS = np.array([(0, 1, 2, 3), (1, 0, 2, 4)])


def glued_tetrahedra() -> OrientedComplex2:
    """Two tetrahedra sharing face ``d4``; outer faces point outward, ``d4`` points into the lower one."""
    return OrientedComplex2(GLUED_POSITIONS, GLUED_TRIANGLES,
                            vertex_labels=list("abcde"), triangle_labels=GLUED_LABELS)


def disjoint_cubes(gap: float = 1.0) -> OrientedComplex2:
    a = cube_surface((0, 0, 0))
    b = cube_surface((1.0 + gap, 0.25, 0.1))
    return union(a, b)


def nested_cubes() -> OrientedComplex2:
    return union(cube_surface((-1.5, -1.5, -1.5), 3.0), cube_surface((0.0, 0.0, 0.0)))


def union(*parts: OrientedComplex2) -> OrientedComplex2:
    """Disjoint union (vertex ids shifted, no merging)."""
    pos, tris, off = [], [], 0
    for p in parts:
        pos.append(p.positions)
        tris.append(p.triangles + off)
        off += p.n_vertices
    return OrientedComplex2(np.vstack(pos), np.vstack(tris))


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def perturb(complex: OrientedComplex2, seed: int, *, flip_fraction: float = 0.5,
            shuffle: bool = True) -> OrientedComplex2:
    """Random rigid motion, vertex relabeling, triangle shuffling and reorientation.

    Topology is preserved; only ids, positions (rigidly) and orientations change.
    """
    rng = np.random.default_rng(seed)
    pos = complex.positions @ random_rotation(rng).T + rng.normal(size=3)
    tris = complex.triangles.copy()
    if shuffle:
        perm = rng.permutation(complex.n_vertices)
        new_pos = np.empty_like(pos)
        new_pos[perm] = pos
        pos = new_pos
        tris = perm[tris]
        tris = tris[rng.permutation(len(tris))]
    flip = rng.random(len(tris)) < flip_fraction
    tris[flip] = tris[flip][:, [1, 0, 2]]
    return OrientedComplex2(pos, tris)


# -- tetrahedral fixtures -----------------------------------------------------

def _tet_faces(tet):
    """Oriented boundary faces of ``[a, b, c, d]`` as (face, sign) pairs."""
    a, b, c, d = tet
    return [((b, c, d), 1), ((a, c, d), -1), ((a, b, d), 1), ((a, b, c), -1)]


def _parity(seq) -> int:
    """+1 or -1 according to the parity of the permutation sorting ``seq``."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class TetFixture:
    """Tetrahedra over a shared vertex table, each listed with positive volume."""

    positions: np.ndarray
    tets: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float).reshape(-1, 3))
        object.__setattr__(self, "tets", np.asarray(self.tets, dtype=np.int64).reshape(-1, 4))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"t{i}" for i in range(len(self.tets))))

    @property
    def n_tets(self) -> int:
        return len(self.tets)

    def volumes(self) -> np.ndarray:
        p = self.positions[self.tets]
        return np.linalg.det(np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]], axis=1)) / 6.0

    def faces(self):
        """Unique faces keyed by sorted vertex triple.

        Returns ``(keys, oriented, incidences)`` where ``oriented[i]`` is the
        orientation of face ``i`` induced by the first tetrahedron containing
        it and ``incidences[i]`` lists ``(tet, sign)`` relative to
        ``oriented[i]``.
        """
        index, keys, oriented, inc = {}, [], [], []
        for ti, tet in enumerate(self.tets.tolist()):
            for face, s in _tet_faces(tet):
                key = tuple(sorted(face))
                if key not in index:
                    index[key] = len(keys)
                    keys.append(key)
                    oriented.append(face if s > 0 else (face[1], face[0], face[2]))
                    inc.append([])
                i = index[key]
                rel = _parity(face) * _parity(oriented[i])
                inc[i].append((ti, s * rel))
        return keys, oriented, inc

    def face_complex(self) -> OrientedComplex2:
        _, oriented, _ = self.faces()
        return OrientedComplex2(self.positions, np.array(oriented, dtype=np.int64).reshape(-1, 3))


def kuhn_block(shape=(1, 1, 1)) -> TetFixture:
    """Box of unit cubes, each split into the six Kuhn tetrahedra."""
    nx, ny, nz = shape
    index = {}
    pos = []

    def vid(p):
        key = tuple(int(x) for x in p)
        if key not in index:
            index[key] = len(pos)
            pos.append(key)
        return index[key]

    tets = []
    for cell in itertools.product(range(nx), range(ny), range(nz)):
        for perm in itertools.permutations(range(3)):
            p = np.array(cell)
            path = [p.copy()]
            for ax in perm:
                p = p + AXES[ax]
                path.append(p.copy())
            ids = [vid(q) for q in path]
            if _parity(perm) < 0:
                ids[0], ids[1] = ids[1], ids[0]
            tets.append(ids)
    fixture = TetFixture(np.array(pos, dtype=float), np.array(tets))
    return fixture


def tetrahelix_fixture(n: int) -> TetFixture:
    pts = tetrahelix_points(n + 3)
    tets = []
    for k in range(n):
        ids = [k, k + 1, k + 2, k + 3]
        p = pts[ids]
        if np.linalg.det(p[1:] - p[0]) < 0:
            ids[0], ids[1] = ids[1], ids[0]
        tets.append(ids)
    return TetFixture(pts, np.array(tets))


def glued_fixture() -> TetFixture:
    return TetFixture(GLUED_POSITIONS, GLUED_TETS, ("tau1", "tau2"))


def cube_in_block() -> tuple:
    """3x3x3 Kuhn block and the surface of its centre cube."""
    fixture = kuhn_block((3, 3, 3))
    return fixture, cube_surface((1.0, 1.0, 1.0))


def fixture_suite(seed: int = 0, count: int = 60) -> list:
    """Seeded list of ``(name, complex)`` pairs covering the generated families."""
    base = [
        ("cube", cube_surface()),
        ("cube-axis-normals", cube_surface(outward=False)),
        ("glued-tets", glued_tetrahedra()),
        ("single-triangle", OrientedComplex2(np.eye(3), [[0, 1, 2]])),
        ("disjoint-cubes", disjoint_cubes()),
        ("nested-cubes", nested_cubes()),
        ("patch-2x2", flat_patch(2, 2)),
    ]
    for n in (1, 2, 3, 5):
        base.append((f"stacked-{n}", stacked_cubes(n)))
        base.append((f"tet-chain-{n}", tetrahedron_chain(n)))
    for k in (1, 2, 3, 5, 7):
        base.append((f"fan-{k}", open_fan(k)))
    rng = np.random.default_rng(seed)
    out = list(base)
    i = 0
    while len(out) < count:
        name, cx = base[i % len(base)]
        out.append((f"{name}~{i}", perturb(cx, int(rng.integers(2**31)))))
        i += 1
    return out
