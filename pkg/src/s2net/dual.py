"""The region graph viewed as an ordinary electrical network.

Edge ``t`` of the region graph is a conductance ``1/r_t`` in parallel with a
current source ``E_t - I_t / r_t``; its current is the triangle flux and its
voltage (tail potential minus head potential) is the adjusted mmf.  Nodal
analysis of this network solves the same problem as the cycle-based solver.

The equivalent inverse reluctance seen by a loop current on triangle ``t``
is obtained three ways: by a direct solve, by sums over spanning trees and
2-trees, and by weighted matrix-tree determinants.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .exact import LimitExceeded, bareiss_det
from .network import DeviceSpec, NetworkSolution, _check_device, solve_spd
from .tag import UnionFind

TREE_LIMIT = 20_000


def dual_solve(dual, device: DeviceSpec, tol: float = 1e-12) -> NetworkSolution:
    """Nodal analysis with one grounded node per connected part of the region graph."""
    _check_device(device, dual.n_edges)
    n = dual.n_nodes
    g = device.permeance
    src = device.mmf_source - g * device.loop_current
    rows, cols, vals = [], [], []
    inj = np.zeros(n)
    for t, (a, b) in enumerate(zip(dual.tails.tolist(), dual.heads.tolist())):
        if a == b:
            continue
        rows += [a, b, a, b]
        cols += [a, b, b, a]
        vals += [g[t], g[t], -g[t], -g[t]]
        inj[a] += src[t]
        inj[b] -= src[t]
    L = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    parts = dual.connected_parts()
    ground = {}
    for v, p in enumerate(parts.tolist()):
        ground.setdefault(p, v)
    free = np.array([v for v in range(n) if v not in set(ground.values())], dtype=np.int64)
    q = np.zeros(n)
    if len(free):
        q[free] = solve_spd(L[free][:, free], inj[free], tol)
    m = q[dual.tails] - q[dual.heads]
    phi = g * (m + device.loop_current) - device.mmf_source
    balance = np.zeros(n)
    np.add.at(balance, dual.tails, phi)
    np.subtract.at(balance, dual.heads, phi)
    return NetworkSolution(phi, m, q, "nodal", {"flux_balance_residual": float(np.linalg.norm(balance))},
                           device.loop_current.copy())


# -- spanning trees ---------------------------------------------------------------------

def _as_edges(graph):
    if hasattr(graph, "tails"):
        return graph.n_nodes, list(zip(graph.tails.tolist(), graph.heads.tolist()))
    n, edges = graph
    return int(n), [tuple(e) for e in edges]


@dataclass(frozen=True)
class TreeEnumeration:
    """Spanning trees of a multigraph, and 2-trees separating ``pair`` when requested.

    Trees are frozensets of edge indices of the input graph.
    """

    n_nodes: int
    edges: tuple
    trees: tuple
    pair: tuple | None = None
    two_trees: tuple = ()

    @property
    def n_trees(self) -> int:
        return len(self.trees)


def _spanning_trees(n: int, edges: list, limit: int, allowed=None) -> list:
    """All spanning trees by include/exclude branching over edges in index order."""
    idx = [k for k, (a, b) in enumerate(edges) if a != b and (allowed is None or k in allowed)]
    if n <= 1:
        return [frozenset()]
    out = []

    def connected_with(chosen_parent, rest_from):
        uf = UnionFind(n)
        uf.parent = list(chosen_parent)
        for k in idx[rest_from:]:
            a, b = edges[k]
            uf.union(a, b)
        root = uf.find(0)
        return all(uf.find(v) == root for v in range(n))

    def rec(pos, parent, chosen):
        if len(chosen) == n - 1:
            out.append(frozenset(chosen))
            if len(out) > limit:
                raise LimitExceeded(f"more than {limit} spanning trees; use the matrix-tree route")
            return
        if pos == len(idx) or len(idx) - pos < n - 1 - len(chosen):
            return
        k = idx[pos]
        a, b = edges[k]
        uf = UnionFind(n)
        uf.parent = list(parent)
        if uf.find(a) != uf.find(b):
            uf.union(a, b)
            rec(pos + 1, uf.parent, chosen + [k])
        if connected_with(parent, pos + 1):
            rec(pos + 1, parent, chosen)

    if connected_with(list(range(n)), 0):
        rec(0, list(range(n)), [])
    return out


def _check_count(n: int, edges: list, allowed: set, limit: int):
    """Refuse before enumerating when the matrix-tree count is already over ``limit``."""
    if n <= 1:
        return
    count = laplacian_minor(n, edges, [1] * len(edges), exclude=set(range(len(edges))) - allowed)
    if count > limit:
        raise LimitExceeded(f"{count} spanning trees exceeds the enumeration limit {limit}")


def enumerate_trees(graph, limit: int = TREE_LIMIT, pair=None, exclude=()) -> TreeEnumeration:
    """Spanning trees (and optionally 2-trees separating ``pair``) of a multigraph.

    ``graph`` is a :class:`DualGraph` or ``(n_nodes, edge_list)``.  Self-loops
    never belong to a tree; edges listed in ``exclude`` are ignored.
    """
    n, edges = _as_edges(graph)
    allowed = set(range(len(edges))) - set(exclude)
    _check_count(n, edges, allowed, limit)
    merged = None
    if pair is not None:
        a, b = pair
        if a == b:
            raise ValueError("2-trees need two distinct nodes")
        # 2-trees separating a and b are spanning trees once a and b are merged
        relabel = [v if v != b else a for v in range(n)]
        dense = {v: i for i, v in enumerate(sorted(set(relabel)))}
        merged = [(dense[relabel[u]], dense[relabel[v]]) for u, v in edges]
        _check_count(n - 1, merged, allowed, limit)
    trees = _spanning_trees(n, edges, limit, allowed)
    two = () if merged is None else tuple(_spanning_trees(n - 1, merged, limit, allowed))
    return TreeEnumeration(n, tuple(edges), tuple(trees), None if pair is None else tuple(pair), two)


def _product(edge_set, weights) -> Fraction:
    p = Fraction(1)
    for k in edge_set:
        p *= weights[k]
    return p


def tree_weight_sum(n: int, edges: list, weights, exclude=()) -> Fraction:
    """Weighted spanning tree sum by deletion and contraction with memoisation.

    Parallel edges are merged (weights add), loops dropped, and pendant
    vertices peeled off before branching.
    """
    start = {}
    for k, (a, b) in enumerate(edges):
        if k in exclude or a == b:
            continue
        key = (min(a, b), max(a, b))
        start[key] = start.get(key, Fraction(0)) + Fraction(weights[k])
    return _tree_sum(frozenset(range(n)), frozenset(start.items()))


@lru_cache(maxsize=None)
def _tree_sum(nodes: frozenset, edges: frozenset) -> Fraction:
    if len(nodes) <= 1:
        return Fraction(1)
    adj = {v: [] for v in nodes}
    for (a, b), w in edges:
        adj[a].append(((a, b), w))
        adj[b].append(((a, b), w))
    factor = Fraction(1)
    emap = dict(edges)
    nodes = set(nodes)
    changed = True
    while changed and len(nodes) > 1:
        changed = False
        for v in list(nodes):
            if len(nodes) <= 1:
                break
            if v not in nodes:
                continue
            deg = [e for e in adj[v] if e[0] in emap]
            if not deg:
                return Fraction(0)
            if len(deg) == 1:
                (key, w), = deg
                factor *= w
                del emap[key]
                nodes.discard(v)
                changed = True
    if len(nodes) <= 1:
        return factor
    (a, b), w = max(emap.items())
    rest = dict(emap)
    del rest[(a, b)]
    deleted = _tree_sum(frozenset(nodes), frozenset(rest.items()))
    merged = {}
    for (u, v), x in rest.items():
        u2, v2 = (a if u == b else u), (a if v == b else v)
        if u2 == v2:
            continue
        key = (min(u2, v2), max(u2, v2))
        merged[key] = merged.get(key, Fraction(0)) + x
    contracted = _tree_sum(frozenset(nodes - {b}), frozenset(merged.items()))
    return factor * (deleted + w * contracted)


def laplacian_minor(n: int, edges: list, weights, remove=(0,), exclude=()) -> Fraction:
    """Determinant of the weighted Laplacian with the rows and columns in ``remove`` deleted."""
    L = [[Fraction(0)] * n for _ in range(n)]
    for k, (a, b) in enumerate(edges):
        if k in exclude or a == b:
            continue
        w = Fraction(weights[k])
        L[a][a] += w
        L[b][b] += w
        L[a][b] -= w
        L[b][a] -= w
    keep = [v for v in range(n) if v not in set(remove)]
    return Fraction(bareiss_det([[L[i][j] for j in keep] for i in keep]))


def _component_of(n: int, edges: list, node: int):
    uf = UnionFind(n)
    for a, b in edges:
        uf.union(a, b)
    root = uf.find(node)
    nodes = [v for v in range(n) if uf.find(v) == root]
    dense = {v: i for i, v in enumerate(nodes)}
    keep = [k for k, (a, b) in enumerate(edges) if a in dense]
    return len(nodes), [(dense[edges[k][0]], dense[edges[k][1]]) for k in keep], keep


@dataclass(frozen=True)
class EquivalentReluctance:
    direct: float
    tree: Fraction
    matrix_tree: Fraction
    tree_mode: str
    note: str = ""

    permeance: float = 1.0

    @property
    def spread(self) -> float:
        """Relative disagreement of the three routes.

        When the exact value is zero (a bridge) the gap is measured against
        the permeance of the triangle, the largest value ``g`` can take.
        """
        vals = [self.direct, float(self.tree), float(self.matrix_tree)]
        scale = max(abs(v) for v in vals) if self.tree != 0 else self.permeance
        return 0.0 if scale == 0 else (max(vals) - min(vals)) / scale

    def as_dict(self) -> dict:
        return {"direct": self.direct, "tree": float(self.tree), "tree_exact": str(self.tree),
                "matrix_tree": float(self.matrix_tree), "matrix_tree_exact": str(self.matrix_tree),
                "tree_mode": self.tree_mode, "spread": self.spread, "note": self.note,
                "permeance": self.permeance}


def equivalent_inverse_reluctance(dual, device: DeviceSpec, triangle: int, *, limit: int = TREE_LIMIT,
                                  tol: float = 1e-12) -> EquivalentReluctance:
    """Ratio ``phi_t / i`` for a unit loop current on ``triangle`` and no other source.

    The tree route uses ``g = c_t * T(G - t) / (c_t * F(G - t) + T(G - t))``
    where ``T`` sums conductance products over spanning trees, ``F`` over
    2-trees separating the endpoints of ``t``, and ``c_t = 1 / r_t``.
    """
    _check_device(device, dual.n_edges)
    unit = np.zeros(dual.n_edges)
    unit[triangle] = 1.0
    direct = float(dual_solve(dual, DeviceSpec(device.reluctance, unit), tol).flux[triangle])
    c = [Fraction(float(x)) for x in device.permeance]
    a, b = int(dual.tails[triangle]), int(dual.heads[triangle])
    if a == b:
        g = c[triangle]
        return EquivalentReluctance(direct, g, g, "closed-form", "self-loop: g = 1/r", float(g))
    n, edges, keep = _component_of(dual.n_nodes, list(zip(dual.tails.tolist(), dual.heads.tolist())), a)
    w = [c[k] for k in keep]
    local = keep.index(triangle)
    la, lb = edges[local]
    try:
        enum = enumerate_trees((n, edges), limit, pair=(la, lb), exclude=(local,))
        t_minus = sum((_product(s, w) for s in enum.trees), Fraction(0))
        f_minus = sum((_product(s, w) for s in enum.two_trees), Fraction(0))
        mode = "enumeration"
    except LimitExceeded:
        t_minus = tree_weight_sum(n, edges, w, exclude=(local,))
        merged = [(la if u == lb else u, la if v == lb else v) for u, v in edges]
        relabel = {v: i for i, v in enumerate(sorted({x for e in merged for x in e} | {la}))}
        n2 = n - 1
        merged = [(relabel[u], relabel[v]) for u, v in merged]
        f_minus = tree_weight_sum(n2, merged, w, exclude=(local,))
        mode = "deletion-contraction"
    ct = c[triangle]
    denom = ct * f_minus + t_minus
    tree = ct * t_minus / denom
    t_all = laplacian_minor(n, edges, w)
    t_del = laplacian_minor(n, edges, w, exclude=(local,))
    matrix_tree = ct * t_del / t_all
    note = "bridge: no return path, g = 0" if t_minus == 0 else ""
    return EquivalentReluctance(direct, tree, matrix_tree, mode, note, float(ct))
