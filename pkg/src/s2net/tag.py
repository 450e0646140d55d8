"""Side-point adjacency graph and the region multigraph built from it.

Every triangle ``t`` contributes two side points with ids ``2t`` (the ``+``
side, along ``ab x bc``) and ``2t+1`` (the ``-`` side).  Walking around an
edge in the right-hand sense, the side of one triangle facing the next
triangle is linked to the facing side of that next triangle.  Connected
components of the resulting graph are the regions of space cut out by a
connected complex.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .complex import OrientedComplex2, SparseSignMatrix
from .geometry import (MAX_RAY_RETRIES, DegenerateRayError, FanTable, bounding_radius,
                       edge_fans, ray_directions, ray_hits)


@dataclass(frozen=True)
class TagGraph:
    """Undirected graph on the ``2 * n_triangles`` side points.

    ``edges[k] = (p, q)`` joins side point ``p`` and side point ``q``; there is
    exactly one tag edge per (edge of C, incident triangle) pair.
    """

    n_triangles: int
    edges: np.ndarray
    edge_of: np.ndarray = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return 2 * self.n_triangles

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def _fan_table(complex, fans) -> FanTable:
    if fans is None:
        return edge_fans(complex)
    if isinstance(fans, FanTable):
        return fans
    fans = sorted(fans, key=lambda f: f.edge)
    if [f.edge for f in fans] != list(range(complex.n_edges)):
        raise ValueError("fans must cover every edge of the complex exactly once")
    ptr = np.zeros(len(fans) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(f) for f in fans])
    tris = np.array([t for f in fans for t in f.triangles], dtype=np.int64)
    signs = np.array([s for f in fans for s in f.signs], dtype=np.int64)
    angles = np.array([a for f in fans for a in f.angles], dtype=float)
    return FanTable(ptr, tris, signs, angles)


def build_tag(complex: OrientedComplex2, fans=None) -> TagGraph:
    """Tag graph from the edge fans (computed here when not given).

    Within a fan sorted by increasing angle, triangle ``i`` is followed by
    ``i+1`` (cyclically).  A triangle agreeing with the edge faces its
    successor with its ``+`` side and its predecessor with its ``-`` side;
    a disagreeing triangle is treated as reoriented, which swaps the roles.
    """
    table = _fan_table(complex, fans)
    ptr, tris, signs = table.ptr, table.triangles, table.signs
    n = len(tris)
    if n == 0:
        return TagGraph(complex.n_triangles, np.zeros((0, 2), dtype=np.int64),
                        np.zeros(0, dtype=np.int64))
    agree = signs > 0
    ahead = 2 * tris + np.where(agree, 0, 1)
    behind = 2 * tris + np.where(agree, 1, 0)
    nxt = np.arange(1, n + 1)
    nxt[ptr[1:] - 1] = ptr[:-1]
    edges = np.stack([ahead, behind[nxt]], axis=1)
    edge_of = np.repeat(np.arange(len(ptr) - 1), np.diff(ptr))
    return TagGraph(complex.n_triangles, edges, edge_of)


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path compression and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb] or (self.size[ra] == self.size[rb] and rb < ra):
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def labels(self) -> np.ndarray:
        """Dense labels numbered by the smallest member of each set."""
        out = np.empty(len(self.parent), dtype=np.int64)
        seen = {}
        for x in range(len(self.parent)):
            r = self.find(x)
            if r not in seen:
                seen[r] = len(seen)
            out[x] = seen[r]
        return out


def component_labels(tag: TagGraph) -> np.ndarray:
    """Component label per side point; labels ordered by minimal vertex id."""
    uf = UnionFind(tag.n_vertices)
    union = uf.union
    for p, q in tag.edges.tolist():
        union(p, q)
    return uf.labels()


def components(tag: TagGraph) -> list:
    labels = component_labels(tag)
    groups = [[] for _ in range(int(labels.max()) + 1)] if len(labels) else []
    for v, c in enumerate(labels.tolist()):
        groups[c].append(v)
    return [frozenset(g) for g in groups]


def complex_components(complex: OrientedComplex2) -> np.ndarray:
    """Connected-component label per triangle (triangles touching at a vertex are connected)."""
    uf = UnionFind(complex.n_vertices)
    for a, b, c in complex.triangles.tolist():
        uf.union(a, b)
        uf.union(a, c)
    vlab = uf.labels()
    tri_root = vlab[complex.triangles[:, 0]] if complex.n_triangles else np.zeros(0, dtype=np.int64)
    _, dense = np.unique(tri_root, return_inverse=True)
    # renumber by first appearance so the triangle order drives labels
    order = {}
    out = np.empty(complex.n_triangles, dtype=np.int64)
    for t, c in enumerate(dense.tolist()):
        out[t] = order.setdefault(c, len(order))
    return out


@dataclass(frozen=True)
class RegionLabels:
    """Side-point labels after identifying tag components that share a region.

    ``unbounded`` is the label of the region reaching infinity.
    """

    labels: np.ndarray
    unbounded: int
    fused_pairs: tuple


def _side_of(tri: int, facing: int, arriving: bool) -> int:
    # a ray travelling against the normal (facing < 0) arrives from the + side
    plus = (facing < 0) if arriving else (facing > 0)
    return 2 * tri + (0 if plus else 1)


def region_labels(complex: OrientedComplex2, tag_labels: np.ndarray | None = None, *,
                  seed: int = 0, tag: TagGraph | None = None) -> RegionLabels:
    """Identify regions of space minus the complex, handling several components.

    For each connected component of C a ray is shot from outside the bounding
    sphere towards one of its triangles.  The side of the first triangle of
    that component hit by the ray lies in the component's unbounded tag
    component; the segment before it lies in the region the previous crossing
    departed into (or the unbounded region when nothing was crossed).  The two
    tag components are merged.
    """
    if tag_labels is None:
        tag_labels = component_labels(tag if tag is not None else build_tag(complex))
    n_comp = int(tag_labels.max()) + 1 if len(tag_labels) else 0
    if complex.n_triangles == 0:
        return RegionLabels(tag_labels, -1, ())
    tri_comp = complex_components(complex)
    n_parts = int(tri_comp.max()) + 1
    center, radius = bounding_radius(complex)
    P = complex.positions[complex.triangles]
    firsts = [int(np.flatnonzero(tri_comp == i)[0]) for i in range(n_parts)]
    uf = UnionFind(n_comp)
    unbounded = []
    pairs = []
    directions = ray_directions(seed)
    for part, target_tri in enumerate(firsts):
        target = P[target_tri].mean(axis=0)
        for attempt in range(MAX_RAY_RETRIES + 1):
            if attempt == MAX_RAY_RETRIES:
                raise DegenerateRayError(
                    f"degenerate ray: no clean direction towards component {part} "
                    f"after {MAX_RAY_RETRIES} attempts")
            d = next(directions)
            origin = target - (np.linalg.norm(target - center) + 2 * radius) * d
            try:
                _, hit_tris, facing = ray_hits(complex, origin, d)
            except DegenerateRayError:
                continue
            break
        own = np.flatnonzero(tri_comp[hit_tris] == part)
        k = int(own[0])
        ext = int(tag_labels[_side_of(int(hit_tris[k]), int(facing[k]), True)])
        if k == 0:
            unbounded.append(ext)
        else:
            prev = int(tag_labels[_side_of(int(hit_tris[k - 1]), int(facing[k - 1]), False)])
            uf.union(ext, prev)
            pairs.append((prev, ext))
    for x in unbounded[1:]:
        uf.union(unbounded[0], x)
        pairs.append((unbounded[0], x))
    comp_to_region = uf.labels()
    return RegionLabels(comp_to_region[tag_labels], int(comp_to_region[unbounded[0]]), tuple(pairs))


def external_side_witness(complex: OrientedComplex2, component_vertex_set, *, seed: int = 0) -> bool:
    """True when the given side points lie in the unbounded region."""
    ids = sorted(int(v) for v in component_vertex_set)
    if not ids:
        raise ValueError("empty side-point set")
    if max(ids) >= 2 * complex.n_triangles or min(ids) < 0:
        raise ValueError("side-point id outside the complex")
    regions = region_labels(complex, seed=seed)
    return bool(regions.labels[ids[0]] == regions.unbounded)


@dataclass(frozen=True)
class DualGraph:
    """Directed multigraph with one edge per triangle.

    Edge ``t`` runs from ``tails[t]`` (the node holding the ``+`` side point)
    to ``heads[t]`` (the node holding the ``-`` side point).
    """

    n_nodes: int
    tails: np.ndarray
    heads: np.ndarray
    members: tuple = field(repr=False)
    triangle_labels: tuple = field(default=(), repr=False)
    external: int | None = None
    fused: bool = False

    @property
    def n_edges(self) -> int:
        return len(self.tails)

    @property
    def self_loops(self) -> np.ndarray:
        return np.flatnonzero(self.tails == self.heads)

    def edge_list(self) -> list:
        return list(zip(self.tails.tolist(), self.heads.tolist()))

    def connected_parts(self) -> np.ndarray:
        """Label per node of the connected parts of the underlying undirected graph."""
        uf = UnionFind(self.n_nodes)
        for a, b in zip(self.tails.tolist(), self.heads.tolist()):
            uf.union(a, b)
        return uf.labels()

    def incidence_matrix(self) -> SparseSignMatrix:
        return incidence_matrix(self)


def build_dual_graph(complex: OrientedComplex2, tag_components=None, fuse_external: bool = False, *,
                     seed: int = 0, tag: TagGraph | None = None) -> DualGraph:
    """Region multigraph of a complex.

    ``tag_components`` may be a label array or the list of vertex sets from
    :func:`components`.  With ``fuse_external`` the unbounded tag components
    of separate pieces of C are merged into a single node and the node of the
    unbounded region is recorded.
    """
    m = complex.n_triangles
    if tag_components is None:
        labels = component_labels(tag if tag is not None else build_tag(complex))
    elif isinstance(tag_components, np.ndarray):
        labels = np.asarray(tag_components, dtype=np.int64)
    else:
        labels = np.empty(2 * m, dtype=np.int64)
        for c, vs in enumerate(tag_components):
            labels[list(vs)] = c
    external = None
    if fuse_external and m:
        regions = region_labels(complex, labels, seed=seed)
        labels, external = regions.labels, regions.unbounded
    n_nodes = int(labels.max()) + 1 if m else 0
    members = [[] for _ in range(n_nodes)]
    for v, c in enumerate(labels.tolist()):
        members[c].append(v)
    return DualGraph(n_nodes, labels[0::2].copy(), labels[1::2].copy(),
                     tuple(frozenset(g) for g in members), tuple(complex.triangle_labels),
                     external, bool(fuse_external))


def incidence_matrix(dual: DualGraph) -> SparseSignMatrix:
    """Nodes x triangles; +1 at the tail, -1 at the head, zero column for a self-loop."""
    from scipy.sparse import coo_matrix

    m = dual.n_edges
    keep = dual.tails != dual.heads
    cols = np.flatnonzero(keep)
    rows = np.concatenate([dual.tails[keep], dual.heads[keep]])
    data = np.concatenate([np.ones(len(cols), dtype=np.int64), -np.ones(len(cols), dtype=np.int64)])
    mat = coo_matrix((data, (rows, np.concatenate([cols, cols]))), shape=(dual.n_nodes, m)).tocsr()
    labels = dual.triangle_labels or tuple(str(i) for i in range(m))
    return SparseSignMatrix(mat, tuple(f"V{i + 1}" for i in range(dual.n_nodes)), labels)
