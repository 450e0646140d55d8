"""Exact rational linear algebra and combinatorial checks.

Everything here works on :class:`fractions.Fraction` or Python integers so
rank and orthogonality decisions are free of round-off.  These routines are
the ground truth the floating point pipeline is compared with.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, lcm

import numpy as np

from .complex import OrientedComplex2, SparseSignMatrix, coboundary_matrix


class LimitExceeded(RuntimeError):
    pass


def _to_rows(M) -> list:
    if isinstance(M, RationalMatrix):
        return [list(r) for r in M.rows]
    if isinstance(M, SparseSignMatrix):
        M = M.to_dense()
    if hasattr(M, "toarray"):
        M = M.toarray()
    arr = M if isinstance(M, (list, tuple)) else np.asarray(M).tolist()
    return [[x if isinstance(x, Fraction) else Fraction(x) for x in row] for row in arr]


class RationalMatrix:
    """Dense matrix of exact rationals."""

    def __init__(self, rows, ncols: int | None = None):
        rows = _to_rows(rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        self.rows = tuple(tuple(r) for r in rows)
        self.ncols = ncols

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "RationalMatrix":
        return cls([[Fraction(0)] * ncols for _ in range(nrows)], ncols)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), self.ncols

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix([list(c) for c in zip(*self.rows)] if self.rows else [], len(self.rows))

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other):
        B = other if isinstance(other, RationalMatrix) else RationalMatrix(other)
        if self.ncols != B.shape[0]:
            raise ValueError("shape mismatch")
        cols = list(zip(*B.rows)) if B.rows else [() for _ in range(B.ncols)]
        return RationalMatrix([[sum((a * b for a, b in zip(r, c) if a and b), Fraction(0)) for c in cols]
                               for r in self.rows], B.ncols)

    def __eq__(self, other):
        if not isinstance(other, RationalMatrix):
            other = RationalMatrix(other)
        return self.shape == other.shape and self.rows == other.rows

    def select(self, rows=None, cols=None) -> "RationalMatrix":
        rs = range(len(self.rows)) if rows is None else rows
        cs = range(self.ncols) if cols is None else list(cols)
        return RationalMatrix([[self.rows[i][j] for j in cs] for i in rs], len(cs))

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.rows for x in r)

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.rows], dtype=float).reshape(self.shape)

    def rank(self) -> int:
        return rref(self)[2]

    def __repr__(self):
        return f"RationalMatrix(shape={self.shape})"


# -- elimination ----------------------------------------------------------------

def rref(M):
    """Reduced row echelon form over the rationals.

    Rows are kept sparse (dicts) so the incidence-type matrices used here are
    reduced quickly.  Returns ``(R, pivots, rank)``.
    """
    rows = _to_rows(M)
    ncols = len(rows[0]) if rows else (M.ncols if isinstance(M, RationalMatrix) else 0)
    sparse = [{j: x for j, x in enumerate(r) if x} for r in rows]
    pivots = []
    done = []
    pending = [r for r in sparse if r]
    for col in range(ncols):
        cands = [k for k, r in enumerate(pending) if col in r]
        if not cands:
            continue
        k = min(cands, key=lambda i: len(pending[i]))
        piv = pending.pop(k)
        inv = 1 / piv[col]
        piv = {j: x * inv for j, x in piv.items()}
        for group in (pending, done):
            for i, r in enumerate(group):
                f = r.get(col)
                if f:
                    for j, x in piv.items():
                        v = r.get(j, 0) - f * x
                        if v:
                            r[j] = v
                        else:
                            r.pop(j, None)
        pending = [r for r in pending if r]
        done.append(piv)
        pivots.append(col)
    R = [[r.get(j, Fraction(0)) for j in range(ncols)] for r in done]
    return RationalMatrix(R, ncols), tuple(pivots), len(pivots)


def nullspace(M) -> RationalMatrix:
    """Basis of ``{x : M x = 0}`` as rows, one per free column."""
    Mr = M if isinstance(M, RationalMatrix) else RationalMatrix(M)
    n = Mr.ncols
    R, pivots, _ = rref(Mr)
    free = [j for j in range(n) if j not in set(pivots)]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for row, p in zip(R.rows, pivots):
            x[p] = -row[f]
        basis.append(x)
    return RationalMatrix(basis, n)


def bareiss_det(M) -> int | Fraction:
    """Determinant by fraction-free elimination (exact for integer input)."""
    rows = _to_rows(M)
    n = len(rows)
    if n == 0:
        return 1
    if any(len(r) != n for r in rows):
        raise ValueError("square matrix required")
    scale = Fraction(1)
    A = []
    for r in rows:
        d = lcm(*(x.denominator for x in r))
        scale /= d
        A.append([int(x * d) for x in r])
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        akk = A[k][k]
        for i in range(k + 1, n):
            aik = A[i][k]
            row_i, row_k = A[i], A[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    det = sign * A[n - 1][n - 1] * scale
    return int(det) if det.denominator == 1 else det


def bareiss_rank(M) -> int:
    """Rank of an integer (or rational) matrix by fraction-free elimination."""
    rows = _to_rows(M)
    A = []
    for r in rows:
        d = lcm(*(x.denominator for x in r)) if r else 1
        A.append([int(x * d) for x in r])
    if not A or not A[0]:
        return 0
    nrows, ncols = len(A), len(A[0])
    rank, prev = 0, 1
    for col in range(ncols):
        piv = next((i for i in range(rank, nrows) if A[i][col] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        p = A[rank][col]
        for i in range(rank + 1, nrows):
            a = A[i][col]
            row_i, row_r = A[i], A[rank]
            for j in range(col + 1, ncols):
                row_i[j] = (row_i[j] * p - a * row_r[j]) // prev
            row_i[col] = 0
        prev = p
        rank += 1
        if rank == nrows:
            break
    return rank


def exact_rank(M) -> int:
    return rref(M)[2]


def solve_exact(A, b):
    """One rational solution of ``A x = b`` or ``None`` when inconsistent."""
    Ar = _to_rows(A)
    ncols = len(Ar[0]) if Ar else 0
    aug = [r + [Fraction(v)] for r, v in zip(Ar, b)]
    R, pivots, _ = rref(RationalMatrix(aug, ncols + 1))
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(R.rows, pivots):
        x[p] = row[ncols]
    return x


def cycle_space_basis(A2) -> RationalMatrix:
    """Exact basis (rows) of the null space of A^(2), the 2-cycles of the complex."""
    return nullspace(A2)


def standard_representative(basis) -> tuple[RationalMatrix, tuple]:
    """Row-reduced basis ``[I | K]`` up to column order, with the identity columns."""
    R, pivots, _ = rref(basis)
    return R, pivots


def independent_rows(M) -> list:
    """Indices of a maximal linearly independent set of rows, greedily in row order."""
    _, pivots, _ = rref(RationalMatrix(M).T if not isinstance(M, RationalMatrix) else M.T)
    return list(pivots)


def same_row_space(A, B) -> bool:
    ra = exact_rank(A)
    rb = exact_rank(B)
    stacked = _to_rows(A) + _to_rows(B)
    return ra == rb == exact_rank(RationalMatrix(stacked)) if stacked else ra == rb == 0


# -- matroid checks ----------------------------------------------------------------

@dataclass
class DualityCertificate:
    valid: bool
    rank_a2: int
    rank_incidence: int
    n_elements: int
    mode: str
    checked: int
    witness: tuple | None = None
    message: str = ""

    def as_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def _column_rank(cols_rows: list, subset) -> int:
    sub = [[row[j] for j in subset] for row in cols_rows]
    return bareiss_rank(sub) if subset else 0


def verify_matroid_duality(A2, incidence, *, exhaustive_limit: int = 12, samples: int = 400,
                           seed: int = 0) -> DualityCertificate:
    """Check that the column matroids of A^(2) and the region incidence are dual.

    Ranks must add up to the number of triangles, and a subset ``B`` is a base
    on one side exactly when its complement is a base on the other side.
    """
    A = [[int(x) for x in r] for r in (A2.to_dense() if hasattr(A2, "to_dense") else np.asarray(A2)).tolist()]
    D = [[int(x) for x in r] for r in (incidence.to_dense() if hasattr(incidence, "to_dense")
                                        else np.asarray(incidence)).tolist()]
    m = len(A[0]) if A else (len(D[0]) if D else 0)
    ra, rd = bareiss_rank(A), bareiss_rank(D)
    if ra + rd != m:
        return DualityCertificate(False, ra, rd, m, "rank", 0, None,
                                  f"rank sum {ra} + {rd} != {m}")
    everything = range(m)

    def check(B):
        comp = [j for j in everything if j not in B]
        left = _column_rank(A, B) == ra
        right = _column_rank(D, comp) == rd
        return left == right

    if m <= exhaustive_limit:
        count = 0
        for B in itertools.combinations(everything, ra):
            count += 1
            if not check(set(B)):
                return DualityCertificate(False, ra, rd, m, "exhaustive", count, tuple(B),
                                          "base/complement mismatch")
        return DualityCertificate(True, ra, rd, m, "exhaustive", count)
    rng = np.random.default_rng(seed)
    count = 0
    for k in range(samples):
        if k % 2 == 0:
            B = set(int(x) for x in rng.choice(m, size=ra, replace=False))
        else:
            # random base of A built greedily, so the positive side is exercised too
            B, rows = [], []
            for j in rng.permutation(m):
                trial = B + [int(j)]
                if _column_rank(A, trial) == len(trial):
                    B = trial
                if len(B) == ra:
                    break
            B = set(B)
        count += 1
        if not check(B):
            return DualityCertificate(False, ra, rd, m, "sampled", count, tuple(sorted(B)),
                                      "base/complement mismatch")
    return DualityCertificate(True, ra, rd, m, "sampled", count)


@dataclass
class TUReport:
    is_tu: bool
    mode: str
    checked: int
    witness_rows: tuple | None = None
    witness_cols: tuple | None = None
    witness_det: int | Fraction | None = None

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        if d["witness_det"] is not None:
            d["witness_det"] = str(d["witness_det"])
        return d


def total_unimodularity_check(M, mode: str = "exhaustive", *, samples: int = 5000, seed: int = 0,
                              max_columns: int = 12) -> TUReport:
    """Every square submatrix has determinant in {-1, 0, 1}, or a witness that one does not."""
    rows = _to_rows(M)
    nr = len(rows)
    nc = len(rows[0]) if rows else 0
    checked = 0
    for i, r in enumerate(rows):
        for j, x in enumerate(r):
            checked += 1
            if x not in (-1, 0, 1):
                return TUReport(False, mode, checked, (i,), (j,), x)
    if mode == "exhaustive":
        if nc > max_columns:
            raise ValueError(f"exhaustive mode is limited to {max_columns} columns")
        for k in range(2, min(nr, nc) + 1):
            for rs in itertools.combinations(range(nr), k):
                sub_rows = [rows[i] for i in rs]
                if all(not any(r) for r in sub_rows):
                    continue
                for cs in itertools.combinations(range(nc), k):
                    checked += 1
                    det = bareiss_det([[r[j] for j in cs] for r in sub_rows])
                    if det not in (-1, 0, 1):
                        return TUReport(False, mode, checked, rs, cs, det)
        return TUReport(True, mode, checked)
    if mode != "sampled":
        raise ValueError("mode must be 'exhaustive' or 'sampled'")
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        k = int(rng.integers(2, min(nr, nc) + 1)) if min(nr, nc) >= 2 else 1
        rs = tuple(sorted(int(x) for x in rng.choice(nr, size=k, replace=False)))
        cs = tuple(sorted(int(x) for x in rng.choice(nc, size=k, replace=False)))
        checked += 1
        det = bareiss_det([[rows[i][j] for j in cs] for i in rs])
        if det not in (-1, 0, 1):
            return TUReport(False, mode, checked, rs, cs, det)
    return TUReport(True, mode, checked)


def _normalize(vec) -> tuple:
    lead = next(x for x in vec if x)
    return tuple(x / lead for x in vec)


def minimal_support_vectors(basis, limit: int = 10000) -> list:
    """Minimal-support vectors of the row space of ``basis``, one per support.

    Each returned vector is scaled so its first nonzero entry is 1.  For a
    space of dimension ``r``, a vector of minimal support spans the subspace
    vanishing on some ``r - 1`` coordinates whose columns have rank ``r - 1``.
    """
    B = RationalMatrix(basis) if not isinstance(basis, RationalMatrix) else basis
    R, _, r = rref(B)
    if r == 0:
        return []
    n = R.ncols
    found = {}
    for Z in itertools.combinations(range(n), r - 1):
        cols = R.select(cols=Z)
        if r > 1 and exact_rank(cols) != r - 1:
            continue
        coeffs = nullspace(cols.T)
        if coeffs.shape[0] != 1:
            continue
        c = coeffs.rows[0]
        vec = [sum((c[i] * R.rows[i][j] for i in range(r)), Fraction(0)) for j in range(n)]
        vec = _normalize(vec)
        support = frozenset(j for j, x in enumerate(vec) if x)
        if support not in found:
            found[support] = vec
            if len(found) > limit:
                raise LimitExceeded(f"more than {limit} minimal-support vectors")
    return sorted(found.values(), key=lambda v: (sum(1 for x in v if x), [j for j, x in enumerate(v) if x]))


def is_signed_unit_multiple(vec) -> bool:
    nz = [x for x in vec if x]
    return bool(nz) and all(abs(x) == abs(nz[0]) for x in nz)


# -- tetrahedral fixtures -------------------------------------------------------------

def tet_coboundary(fixture) -> tuple[RationalMatrix, list]:
    """Faces x tetrahedra matrix: entry = sign of the face in the tetrahedron's boundary.

    Faces are oriented as returned by ``fixture.faces()``.
    """
    keys, oriented, inc = fixture.faces()
    M = [[0] * fixture.n_tets for _ in keys]
    for f, lst in enumerate(inc):
        for t, s in lst:
            M[f][t] = s
    return RationalMatrix(M, fixture.n_tets), oriented


@dataclass
class CellDualReport:
    ok: bool
    n_nodes: int = 0
    n_edges: int = 0
    a_red_sign: int = 0
    message: str = ""
    first_mismatch: str | None = None
    node_map: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _perm_sign(a, b) -> int:
    """+1 when triple ``b`` is an even permutation of triple ``a``."""
    idx = [list(a).index(x) for x in b]
    inv = sum(1 for i in range(3) for j in range(i + 1, 3) if idx[i] > idx[j])
    return 1 if inv % 2 == 0 else -1


def _match_vertices(complex: OrientedComplex2, fixture, tol: float = 1e-9) -> list:
    from scipy.spatial import cKDTree

    tree = cKDTree(fixture.positions)
    dist, idx = tree.query(complex.positions)
    if complex.n_vertices and dist.max() > tol:
        bad = int(np.argmax(dist))
        raise ValueError(f"vertex {bad} of the complex is not a fixture vertex")
    return [int(i) for i in idx]


def cell_dual_graph(fixture, complex: OrientedComplex2 | None = None):
    """Directed cell dual ``(tails, heads, orientations)`` over all fixture faces.

    Node ``n_tets`` is the external node.  Faces belonging to ``complex`` use
    its stored orientation; other faces use the orientation of their first
    tetrahedron.  Edges run from the node on the ``+`` side to the node on the
    ``-`` side, so a face appearing positively in a tetrahedron's boundary has
    that tetrahedron as head.
    """
    keys, oriented, inc = fixture.faces()
    orient = list(oriented)
    in_c = {}
    if complex is not None:
        vmap = _match_vertices(complex, fixture)
        index = {k: i for i, k in enumerate(keys)}
        for t, tri in enumerate(complex.triangles.tolist()):
            mapped = tuple(vmap[v] for v in tri)
            key = tuple(sorted(mapped))
            if key not in index:
                raise ValueError(f"triangle {complex.triangle_labels[t]} is not a fixture face")
            in_c[index[key]] = t
            orient[index[key]] = mapped
    ext = fixture.n_tets
    tails, heads = [], []
    for f, lst in enumerate(inc):
        rel = _perm_sign(oriented[f], orient[f])
        tail = head = ext
        for tet, s in lst:
            if s * rel > 0:
                head = tet
            else:
                tail = tet
        tails.append(tail)
        heads.append(head)
    return tails, heads, orient, in_c


def cell_dual_fixture_check(fixture, complex: OrientedComplex2, dual=None) -> CellDualReport:
    """Contract the cell dual onto the triangles of ``complex`` and compare with its region graph."""
    from .tag import UnionFind, build_dual_graph

    vols = fixture.volumes()
    if (vols <= 0).any():
        return CellDualReport(False, message=f"tetrahedron {int(np.argmin(vols))} is not positively oriented")
    keys, oriented, inc = fixture.faces()
    for f, lst in enumerate(inc):
        if len(lst) > 2:
            return CellDualReport(False, message=f"face {keys[f]} bounds more than two tetrahedra")
        if len(lst) == 2 and lst[0][1] == lst[1][1]:
            return CellDualReport(False, message=f"face {keys[f]} gets equal orientations from both sides")
    try:
        tails, heads, _, in_c = cell_dual_graph(fixture, complex)
    except ValueError as exc:
        return CellDualReport(False, message=str(exc))
    if len(in_c) != complex.n_triangles:
        return CellDualReport(False, message="complex triangles do not map one-to-one to fixture faces")
    # incidence on tetrahedron rows against the tetrahedral coboundary, faces in reference orientation
    ref_tails, ref_heads, _, _ = cell_dual_graph(fixture)
    A3, _ = tet_coboundary(fixture)
    a_red = [[0] * len(keys) for _ in range(fixture.n_tets)]
    for f, (a, b) in enumerate(zip(ref_tails, ref_heads)):
        if a < fixture.n_tets:
            a_red[a][f] += 1
        if b < fixture.n_tets:
            a_red[b][f] -= 1
    a3t = [list(map(int, c)) for c in zip(*A3.rows)] if A3.rows else []
    if a_red == [[-x for x in r] for r in a3t]:
        sign = -1
    elif a_red == a3t:
        sign = 1
    else:
        return CellDualReport(False, message="reduced cell-dual incidence is not a signed transpose of the tetrahedral coboundary")
    n = fixture.n_tets + 1
    uf = UnionFind(n)
    for f in range(len(keys)):
        if f not in in_c:
            uf.union(tails[f], heads[f])
    node = uf.labels()
    if dual is None:
        dual = build_dual_graph(complex, fuse_external=True)
    mapping, back = {}, {}
    for f, t in sorted(in_c.items(), key=lambda kv: kv[1]):
        for ours, theirs in ((int(node[tails[f]]), int(dual.tails[t])), (int(node[heads[f]]), int(dual.heads[t]))):
            if mapping.setdefault(ours, theirs) != theirs or back.setdefault(theirs, ours) != ours:
                label = complex.triangle_labels[t]
                return CellDualReport(False, len(set(node.tolist())), complex.n_triangles, sign,
                                      "contracted cell dual differs from the region graph", label, mapping)
    n_nodes = len(set(node.tolist()))
    if n_nodes != dual.n_nodes:
        return CellDualReport(False, n_nodes, complex.n_triangles, sign,
                              f"node counts differ: {n_nodes} vs {dual.n_nodes}", None, mapping)
    return CellDualReport(True, n_nodes, complex.n_triangles, sign, "match", None, mapping)


def boundary_of_region_check(fixture, max_tets: int = 6) -> tuple[bool, int, tuple | None]:
    """For every subset of tetrahedra, the summed boundary is supported on faces seen once.

    Returns ``(ok, subsets_checked, witness_subset)``.
    """
    if fixture.n_tets > max_tets:
        raise ValueError(f"exhaustive subset check limited to {max_tets} tetrahedra")
    A3, _ = tet_coboundary(fixture)
    rows = [[int(x) for x in r] for r in A3.rows]
    checked = 0
    for k in range(1, fixture.n_tets + 1):
        for P in itertools.combinations(range(fixture.n_tets), k):
            checked += 1
            for r in rows:
                total = sum(r[t] for t in P)
                seen = sum(1 for t in P if r[t])
                if (total != 0) != (seen == 1):
                    return False, checked, P
    return True, checked, None


def fixture_cycles_are_boundaries(fixture) -> tuple[bool, int]:
    """Every 2-cycle on the fixture's faces is the boundary of a rational 3-chain."""
    faces = fixture.face_complex()
    A2 = coboundary_matrix(faces, 2)
    A3, _ = tet_coboundary(fixture)
    basis = nullspace(RationalMatrix(A2.to_dense()))
    for x in basis.rows:
        if solve_exact(A3, list(x)) is None:
            return False, basis.shape[0]
    return True, basis.shape[0]


# -- exact network solve ----------------------------------------------------------

def _exact(values) -> list:
    return [v if isinstance(v, Fraction) else Fraction(float(v)) for v in values]


def exact_network_solve(A2, reluctance, loop_current=None, mmf_source=None):
    """Exact flux and adjusted mmf for the linear network on a complex.

    Unknown ``m`` satisfies ``A2 m = 0`` and the flux
    ``phi = (m + I) / r - E`` is orthogonal to every 2-cycle.  Returns
    ``(phi, m)`` as lists of fractions.
    """
    M = RationalMatrix(A2.to_dense() if hasattr(A2, "to_dense") else A2)
    n = M.ncols
    r = _exact(reluctance)
    I = _exact(loop_current) if loop_current is not None else [Fraction(0)] * n
    E = _exact(mmf_source) if mmf_source is not None else [Fraction(0)] * n
    if any(x <= 0 for x in r):
        raise ValueError("reluctances must be positive")
    perm = [1 / x for x in r]
    N = nullspace(M)
    rows = [list(row) for row in M.rows]
    rhs = [Fraction(0)] * len(rows)
    for c in N.rows:
        rows.append([c[j] * perm[j] for j in range(n)])
        rhs.append(sum((c[j] * (E[j] - perm[j] * I[j]) for j in range(n)), Fraction(0)))
    m = solve_exact(rows, rhs) if rows else [Fraction(0)] * n
    if m is None:
        raise ArithmeticError("inconsistent network equations")
    phi = [perm[j] * (m[j] + I[j]) - E[j] for j in range(n)]
    return phi, m


def integer_orthogonality_violations(incidence, A2) -> int:
    """Number of nonzero entries of ``A2 @ incidence.T`` (integer arithmetic)."""
    P = incidence.to_scipy() if hasattr(incidence, "to_scipy") else incidence
    A = A2.to_scipy() if hasattr(A2, "to_scipy") else A2
    prod = A.astype(np.int64) @ P.T.astype(np.int64)
    prod = prod.toarray() if hasattr(prod, "toarray") else np.asarray(prod)
    return int(np.count_nonzero(prod))


def subset_count(m: int, r: int) -> int:
    return comb(m, r)
