from fractions import Fraction

import numpy as np
import pytest
import sympy

from s2net import exact, families
from s2net.complex import OrientedComplex2, coboundary_matrix
from s2net.tag import build_dual_graph, incidence_matrix

DET2 = [[1, 0, 0, 0, 1], [1, -1, 0, 0, 0], [0, 1, 1, 0, 0], [0, 0, 1, -1, 0], [0, 0, 0, 1, 1]]


def sym_rank(M):
    return sympy.Matrix(np.asarray(M, dtype=object).tolist()).rank()


def A2_of(cx):
    return coboundary_matrix(cx, 2)


def test_glued_cycle_space(glued):
    A2 = A2_of(glued)
    basis = exact.cycle_space_basis(A2)
    assert basis.shape == (2, 7)
    assert len(sympy.Matrix(A2.to_dense().tolist()).nullspace()) == 2
    # every basis vector is a 2-cycle
    assert (exact.RationalMatrix(A2.to_dense()) @ basis.T).is_zero()
    region_inc = exact.RationalMatrix(incidence_matrix(build_dual_graph(glued)).to_dense())
    assert region_inc.rank() == 2
    assert exact.same_row_space(basis, region_inc)


def test_single_triangle_cycle_space():
    cx = OrientedComplex2(np.eye(3), [(0, 1, 2)])
    assert exact.cycle_space_basis(A2_of(cx)).shape == (0, 1)


def test_cube_cycle_space_matches_region_count(cube):
    basis = exact.cycle_space_basis(A2_of(cube))
    nodes = build_dual_graph(cube).n_nodes
    assert basis.shape[0] == nodes - 1 == 1
    assert basis.shape[0] == 12 - sym_rank(A2_of(cube).to_dense())


def test_rref_and_rank_against_sympy():
    rng = np.random.default_rng(0)
    for _ in range(30):
        M = rng.integers(-3, 4, size=(rng.integers(1, 7), rng.integers(1, 7)))
        R, pivots, r = exact.rref(M)
        S, spiv = sympy.Matrix(M.tolist()).rref()
        assert pivots == tuple(spiv)
        assert [[Fraction(int(x.p), int(x.q)) for x in S.row(i)] for i in range(r)] == [list(row) for row in R.rows]
        assert exact.bareiss_rank(M.tolist()) == r
        if M.shape[0] == M.shape[1]:
            assert exact.bareiss_det(M.tolist()) == sympy.Matrix(M.tolist()).det()


def test_solve_exact_inconsistent():
    assert exact.solve_exact([[1, 1], [2, 2]], [1, 3]) is None
    assert exact.solve_exact([[1, 1], [1, -1]], [3, 1]) == [2, 1]


def test_independent_rows():
    M = [[1, 1, 0], [2, 2, 0], [0, 1, 1], [1, 2, 1]]
    assert exact.independent_rows(M) == [0, 2]


def test_glued_matroid_duality(glued):
    cert = exact.verify_matroid_duality(A2_of(glued), incidence_matrix(build_dual_graph(glued)))
    assert cert.valid and cert.mode == "exhaustive"
    assert (cert.rank_a2, cert.rank_incidence, cert.n_elements) == (5, 2, 7)


def test_single_triangle_duality():
    cx = OrientedComplex2(np.eye(3), [(0, 1, 2)])
    cert = exact.verify_matroid_duality(A2_of(cx), incidence_matrix(build_dual_graph(cx)))
    assert cert.valid and (cert.rank_a2, cert.rank_incidence, cert.n_elements) == (1, 0, 1)


def test_duality_witness_on_wrong_matrix(glued):
    wrong = np.array([[1, 1, 1, 0, 1, 1, 1], [-1, -1, 0, -1, 0, 0, 0]])
    cert = exact.verify_matroid_duality(A2_of(glued), wrong)
    assert not cert.valid and cert.witness is not None


def test_duality_sampled_mode():
    cx = families.stacked_cubes(2)
    cert = exact.verify_matroid_duality(A2_of(cx), incidence_matrix(build_dual_graph(cx)), samples=60)
    assert cert.valid and cert.mode == "sampled"


def test_determinant_two_matrix():
    assert exact.bareiss_det(DET2) == 2 == sympy.Matrix(DET2).det()
    rep = exact.total_unimodularity_check(DET2)
    assert not rep.is_tu and rep.witness_det == 2


def test_identity_is_tu():
    assert exact.total_unimodularity_check(np.eye(4, dtype=int)).is_tu
    assert exact.total_unimodularity_check(np.eye(4, dtype=int), "sampled", samples=50).is_tu


def test_non_unit_entry_is_witness():
    rep = exact.total_unimodularity_check([[1, 2], [0, 1]])
    assert not rep.is_tu and rep.witness_det == 2


def test_standard_representatives_are_tu():
    for name, cx in families.fixture_suite(count=25):
        if cx.n_triangles > 12:
            continue
        basis = exact.cycle_space_basis(A2_of(cx))
        if basis.shape[0] == 0:
            continue
        rep, piv = exact.standard_representative(basis)
        assert [list(rep.rows[i][j] for j in piv) for i in range(len(piv))] == np.eye(len(piv)).tolist()
        assert exact.total_unimodularity_check(rep).is_tu, name


def test_glued_minimal_supports(glued):
    vecs = exact.minimal_support_vectors(exact.cycle_space_basis(A2_of(glued)))
    supports = {frozenset(j for j, x in enumerate(v) if x) for v in vecs}
    assert supports == {frozenset({0, 1, 2, 3}), frozenset({3, 4, 5, 6}), frozenset({0, 1, 2, 4, 5, 6})}
    assert all(exact.is_signed_unit_multiple(v) for v in vecs)


def brute_force_supports(basis):
    """Minimal supports of the row space by enumerating all coefficient vectors in {-2..2}^r."""
    import itertools
    rows = [list(map(Fraction, r)) for r in basis.rows]
    supports = set()
    for coeffs in itertools.product(range(-2, 3), repeat=len(rows)):
        if not any(coeffs):
            continue
        v = [sum(c * r[j] for c, r in zip(coeffs, rows)) for j in range(basis.ncols)]
        supports.add(frozenset(j for j, x in enumerate(v) if x))
    return {s for s in supports if s and not any(t < s for t in supports if t)}


def test_minimal_supports_match_brute_force():
    for cx in (families.glued_tetrahedra(), families.stacked_cubes(2), families.tetrahedron_chain(3)):
        basis = exact.cycle_space_basis(A2_of(cx))
        found = {frozenset(j for j, x in enumerate(v) if x) for v in exact.minimal_support_vectors(basis)}
        assert found == brute_force_supports(basis)


def test_rank_one_space():
    vecs = exact.minimal_support_vectors([[1, 1]])
    assert vecs == [(Fraction(1), Fraction(1))]


def test_minimal_support_limit(glued):
    with pytest.raises(exact.LimitExceeded):
        exact.minimal_support_vectors(exact.RationalMatrix(A2_of(glued).to_dense()), limit=3)


def test_coboundary_space_is_regular(glued):
    vecs = exact.minimal_support_vectors(exact.RationalMatrix(A2_of(glued).to_dense()))
    assert vecs and all(exact.is_signed_unit_multiple(v) for v in vecs)


def test_cell_dual_glued(glued):
    rep = exact.cell_dual_fixture_check(families.glued_fixture(), glued)
    assert rep.ok and rep.n_nodes == 3 and rep.n_edges == 7
    assert rep.a_red_sign == -1


def test_cell_dual_without_shared_face(glued):
    outer = glued.subcomplex([0, 1, 2, 4, 5, 6])
    rep = exact.cell_dual_fixture_check(families.glued_fixture(), outer)
    assert rep.ok and rep.n_nodes == 2


def test_cell_dual_cube_in_block():
    fixture, cube = families.cube_in_block()
    rep = exact.cell_dual_fixture_check(fixture, cube)
    assert rep.ok and rep.n_nodes == 2


def test_cell_dual_detects_mismatch(glued):
    from s2net.tag import DualGraph
    d = build_dual_graph(glued)
    heads = d.heads.copy()
    heads[3] = d.tails[3]
    broken = DualGraph(d.n_nodes, d.tails, heads, d.members, d.triangle_labels)
    rep = exact.cell_dual_fixture_check(families.glued_fixture(), glued, dual=broken)
    assert not rep.ok and rep.first_mismatch == "d4"


def test_negative_volume_rejected(glued):
    bad = families.TetFixture(families.GLUED_POSITIONS, [(1, 0, 2, 3)])
    assert not exact.cell_dual_fixture_check(bad, glued).ok


def test_region_boundaries_exhaustive():
    for fx in (families.glued_fixture(), families.kuhn_block(), families.tetrahelix_fixture(4)):
        ok, checked, witness = exact.boundary_of_region_check(fx)
        assert ok and checked == 2 ** fx.n_tets - 1


def test_fixture_cycles_are_boundaries():
    for fx in (families.glued_fixture(), families.kuhn_block((2, 1, 1)), families.tetrahelix_fixture(3)):
        ok, dim = exact.fixture_cycles_are_boundaries(fx)
        assert ok and dim == fx.n_tets


def test_exact_network_solve_glued(glued):
    phi, m = exact.exact_network_solve(A2_of(glued), [1] * 7, [1, 0, 0, 0, 0, 0, 0])
    assert phi[0] == Fraction(11, 15)
    # sympy oracle: solve the 2x2 nodal system by hand-assembled matrices
    q = sympy.Matrix([[4, -1], [-1, 4]]).solve(sympy.Matrix([1, 0]))
    P = sympy.Matrix([[-1, -1, -1, -1, 0, 0, 0], [0, 0, 0, 1, -1, -1, -1]])
    m_sym = P.T * q
    assert [Fraction(int(x.p), int(x.q)) for x in m_sym] == m


def test_exact_network_rejects_bad_reluctance(glued):
    with pytest.raises(ValueError):
        exact.exact_network_solve(A2_of(glued), [1, 1, 1, 0, 1, 1, 1])
