from fractions import Fraction

import numpy as np
import pytest

from s2net import dual as dualmod, families
from s2net.complex import OrientedComplex2
from s2net.dual import (dual_solve, enumerate_trees, equivalent_inverse_reluctance, laplacian_minor,
                        tree_weight_sum)
from s2net.network import DeviceSpec, relative_difference, solve_cycle_based
from s2net.tag import DualGraph, build_dual_graph


def graph(n, edges):
    tails, heads = zip(*edges) if edges else ((), ())
    return DualGraph(n, np.array(tails, dtype=np.int64), np.array(heads, dtype=np.int64),
                     [frozenset()] * n, np.zeros(0, dtype=np.int64))


def random_multigraph(rng, n, m):
    return [tuple(int(x) for x in rng.integers(0, n, 2)) for _ in range(m)]


@pytest.mark.parametrize("name", ["glued", "cube", "stacked", "chain"])
def test_nodal_matches_cycle(name):
    cx = {"glued": families.glued_tetrahedra(), "cube": families.cube_surface(),
          "stacked": families.stacked_cubes(3), "chain": families.tetrahedron_chain(4)}[name]
    rng = np.random.default_rng(1)
    dev = DeviceSpec(rng.uniform(0.5, 2, cx.n_triangles), rng.normal(size=cx.n_triangles))
    d = build_dual_graph(cx)
    assert relative_difference(dual_solve(d, dev).flux, solve_cycle_based(d, dev).flux) < 1e-10


def test_tree_counts():
    assert enumerate_trees((3, [(0, 1), (1, 2), (0, 2)])).n_trees == 3
    assert enumerate_trees((4, [(0, 1), (1, 2), (1, 3)])).n_trees == 1
    assert enumerate_trees((1, [(0, 0)])).n_trees == 1
    assert enumerate_trees((2, [])).n_trees == 0
    # complete graph K4 has 4^2 trees
    k4 = [(a, b) for a in range(4) for b in range(a + 1, 4)]
    assert enumerate_trees((4, k4)).n_trees == 16


def test_glued_tree_counts(glued):
    d = build_dual_graph(glued)
    edges = d.edge_list()
    assert enumerate_trees(d).n_trees == 15 == laplacian_minor(3, edges, [1] * 7)
    assert enumerate_trees(d, exclude=(0,)).n_trees == 11


def test_tree_sums_against_laplacian():
    rng = np.random.default_rng(5)
    for _ in range(80):
        n = int(rng.integers(1, 6))
        edges = random_multigraph(rng, n, int(rng.integers(0, 9)))
        w = [Fraction(int(x), int(y)) for x, y in zip(rng.integers(1, 5, len(edges)), rng.integers(1, 4, len(edges)))]
        ref = laplacian_minor(n, edges, w)
        assert tree_weight_sum(n, edges, w) == ref
        trees = enumerate_trees((n, edges)).trees
        assert sum((dualmod._product(t, w) for t in trees), Fraction(0)) == ref


def test_two_trees_are_merged_trees():
    edges = [(0, 1), (1, 2), (0, 2), (2, 3)]
    enum = enumerate_trees((4, edges), pair=(0, 3))
    for f in enum.two_trees:
        assert len(f) == 2
    with pytest.raises(ValueError):
        enumerate_trees((4, edges), pair=(1, 1))


def test_parallel_edges():
    res = equivalent_inverse_reluctance(graph(2, [(0, 1), (0, 1)]), DeviceSpec.uniform(2), 0)
    assert res.tree == res.matrix_tree == Fraction(1, 2)
    assert res.direct == pytest.approx(0.5, abs=1e-12)


def test_self_loop_closed_form():
    cx = OrientedComplex2(np.eye(3), [(0, 1, 2)])
    res = equivalent_inverse_reluctance(build_dual_graph(cx), DeviceSpec([4.0]), 0)
    assert res.tree == Fraction(1, 4) and res.direct == pytest.approx(0.25)


def test_bridge_gives_zero():
    res = equivalent_inverse_reluctance(graph(3, [(0, 1), (1, 2), (1, 2)]), DeviceSpec.uniform(3), 0)
    assert res.tree == 0 and res.matrix_tree == 0 and abs(res.direct) < 1e-12
    assert "bridge" in res.note and res.spread <= 1e-12


def test_glued_equivalent(glued):
    d = build_dual_graph(glued)
    res = equivalent_inverse_reluctance(d, DeviceSpec.uniform(7), 0)
    assert res.tree == res.matrix_tree == Fraction(11, 15)
    assert res.spread < 1e-12


def test_all_triangles_all_routes():
    for cx in (families.glued_tetrahedra(), families.stacked_cubes(2), families.tetrahedron_chain(4)):
        d = build_dual_graph(cx)
        rng = np.random.default_rng(cx.n_triangles)
        dev = DeviceSpec(rng.integers(1, 5, cx.n_triangles).astype(float))
        for t in range(cx.n_triangles):
            assert equivalent_inverse_reluctance(d, dev, t).spread <= 1e-12


def test_scaling(glued):
    d = build_dual_graph(glued)
    r = np.array([1, 2, 3, 1, 2, 3, 4], dtype=float)
    a = equivalent_inverse_reluctance(d, DeviceSpec(r), 3)
    b = equivalent_inverse_reluctance(d, DeviceSpec(4 * r), 3)
    assert b.tree == a.tree / 4


def test_deletion_contraction_fallback(glued):
    res = equivalent_inverse_reluctance(build_dual_graph(glued), DeviceSpec.uniform(7), 0, limit=3)
    assert res.tree_mode == "deletion-contraction" and res.tree == Fraction(11, 15)


def test_tree_complements_are_cobases(glued):
    """Complements of spanning trees of the region graph are column bases of A^(2)."""
    from s2net.complex import coboundary_matrix
    from s2net.exact import RationalMatrix
    A2 = coboundary_matrix(glued, 2).to_dense()
    trees = enumerate_trees(build_dual_graph(glued)).trees
    for tree in trees:
        cols = sorted(set(range(7)) - tree)
        assert RationalMatrix(A2[:, cols]).rank() == 5


def test_enumeration_refuses_over_limit():
    from s2net.exact import LimitExceeded
    k6 = [(a, b) for a in range(6) for b in range(a + 1, 6)]
    with pytest.raises(LimitExceeded):
        enumerate_trees((6, k6), limit=100)
    assert enumerate_trees((6, k6), limit=6 ** 4).n_trees == 6 ** 4
