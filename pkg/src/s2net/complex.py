"""Oriented 2-complexes embedded in R^3, chains, and coboundary matrices.

Cells are addressed by dense integer ids assigned at construction: vertices
``0..n-1``, triangles ``0..m-1`` in input order, and edges ``0..e-1`` in
lexicographic order of their canonical (low id, high id) vertex pair.  The
original labels are kept alongside for I/O.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp


class ComplexError(ValueError):
    """Raised for structurally invalid complexes or unknown cells."""


class OrientedComplex2:
    """Vertices in R^3 plus oriented triangles; edges are derived.

    Parameters
    ----------
    positions : array_like, shape (n, 3)
        Vertex coordinates in meters.
    triangles : array_like, shape (m, 3)
        Ordered vertex triples.  The order is the orientation.
    vertex_labels, triangle_labels : sequence of str, optional
        External names; default to the dense ids.

    Instances are treated as immutable; all arrays are marked read-only.
    """

    def __init__(self, positions, triangles, vertex_labels: Sequence[str] | None = None,
                 triangle_labels: Sequence[str] | None = None):
        pos = np.array(positions, dtype=float).reshape(-1, 3)
        tri = np.array(triangles, dtype=np.int64).reshape(-1, 3)
        n, m = len(pos), len(tri)
        if m and (tri.min() < 0 or tri.max() >= n):
            bad = int(np.flatnonzero((tri < 0).any(1) | (tri >= n).any(1))[0])
            raise ComplexError(f"triangle {bad} references a vertex that does not exist")
        if m:
            rep = (tri[:, 0] == tri[:, 1]) | (tri[:, 1] == tri[:, 2]) | (tri[:, 0] == tri[:, 2])
            if rep.any():
                bad = int(np.flatnonzero(rep)[0])
                raise ComplexError(f"triangle {bad} repeats a vertex")
            keys = np.sort(tri, axis=1)
            _, first, counts = np.unique(keys, axis=0, return_index=True, return_counts=True)
            if (counts > 1).any():
                dup = keys[first[counts > 1][0]]
                raise ComplexError(f"two triangles share the vertex set {tuple(int(v) for v in dup)}")

        self.positions = pos
        self.triangles = tri
        self.vertex_labels = tuple(vertex_labels) if vertex_labels is not None else tuple(str(i) for i in range(n))
        self.triangle_labels = tuple(triangle_labels) if triangle_labels is not None else tuple(str(i) for i in range(m))
        if len(self.vertex_labels) != n or len(self.triangle_labels) != m:
            raise ComplexError("label count does not match cell count")

        # sides of [a, b, c]: boundary is bc - ac + ab
        a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
        side_u = np.stack([b, a, a], axis=1)
        side_v = np.stack([c, c, b], axis=1)
        side_sign = np.tile(np.array([1, -1, 1], dtype=np.int64), (m, 1))
        lo, hi = np.minimum(side_u, side_v), np.maximum(side_u, side_v)
        side_sign = np.where(side_u < side_v, side_sign, -side_sign)
        if m:
            pairs = np.stack([lo.ravel(), hi.ravel()], axis=1)
            edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
            inverse = inverse.reshape(m, 3)
        else:
            edges = np.zeros((0, 2), dtype=np.int64)
            inverse = np.zeros((0, 3), dtype=np.int64)
        self.edges = edges.astype(np.int64)
        self.triangle_edges = inverse.astype(np.int64)
        self.triangle_edge_signs = side_sign

        # edge -> incident (triangle, sign) in CSR layout, triangles ascending
        flat_e = self.triangle_edges.ravel()
        order = np.argsort(flat_e, kind="stable")
        self.edge_ptr = np.concatenate([[0], np.cumsum(np.bincount(flat_e, minlength=len(edges)))]).astype(np.int64)
        self.edge_triangles = (order // 3).astype(np.int64)
        self.edge_signs = self.triangle_edge_signs.ravel()[order]

        for arr in (self.positions, self.triangles, self.edges, self.triangle_edges,
                    self.triangle_edge_signs, self.edge_ptr, self.edge_triangles, self.edge_signs):
            arr.setflags(write=False)

    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def incident_triangles(self, edge: int):
        """Triangles containing ``edge`` and their boundary signs on it."""
        if not 0 <= edge < self.n_edges:
            raise ComplexError(f"edge {edge}: cell not in complex")
        s, t = self.edge_ptr[edge], self.edge_ptr[edge + 1]
        return self.edge_triangles[s:t], self.edge_signs[s:t]

    def edge_id(self, u: int, v: int) -> int:
        lo, hi = min(u, v), max(u, v)
        i = int(np.searchsorted(self.edges[:, 0], lo, side="left"))
        j = int(np.searchsorted(self.edges[:, 0], lo, side="right"))
        k = i + int(np.searchsorted(self.edges[i:j, 1], hi))
        if k >= j or self.edges[k, 1] != hi:
            raise ComplexError(f"edge ({u}, {v}): cell not in complex")
        return k

    def triangle_index(self, label: str) -> int:
        try:
            return self.triangle_labels.index(str(label))
        except ValueError:
            raise ComplexError(f"triangle {label!r}: cell not in complex") from None

    def subcomplex(self, triangle_ids) -> "OrientedComplex2":
        """Complex on a subset of triangles, keeping only the vertices they use."""
        keep = np.asarray(sorted(set(int(t) for t in triangle_ids)), dtype=np.int64)
        tri = self.triangles[keep]
        used = np.unique(tri)
        remap = np.full(self.n_vertices, -1, dtype=np.int64)
        remap[used] = np.arange(len(used))
        return OrientedComplex2(self.positions[used], remap[tri],
                                [self.vertex_labels[v] for v in used],
                                [self.triangle_labels[t] for t in keep])

    def __eq__(self, other):
        if not isinstance(other, OrientedComplex2):
            return NotImplemented
        return (np.array_equal(self.positions, other.positions)
                and np.array_equal(self.triangles, other.triangles)
                and self.vertex_labels == other.vertex_labels
                and self.triangle_labels == other.triangle_labels)

    __hash__ = None

    def __repr__(self):
        return (f"OrientedComplex2(vertices={self.n_vertices}, edges={self.n_edges}, "
                f"triangles={self.n_triangles})")


@dataclass(frozen=True)
class CellChain:
    """Sparse real chain on cells of one dimension; zero coefficients are dropped."""

    dimension: int
    entries: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension not in (0, 1, 2):
            raise ComplexError(f"chain dimension must be 0, 1 or 2, got {self.dimension}")
        object.__setattr__(self, "entries",
                           {int(k): float(v) for k, v in sorted(self.entries.items()) if v != 0})

    @classmethod
    def from_vector(cls, dimension: int, vector) -> "CellChain":
        vector = np.asarray(vector, dtype=float)
        nz = np.flatnonzero(vector)
        return cls(dimension, {int(i): float(vector[i]) for i in nz})

    def to_vector(self, size: int) -> np.ndarray:
        out = np.zeros(size)
        for k, v in self.entries.items():
            out[k] = v
        return out

    @property
    def support(self) -> frozenset:
        return frozenset(self.entries)

    def __add__(self, other: "CellChain") -> "CellChain":
        if self.dimension != other.dimension:
            raise ComplexError("cannot add chains of different dimension")
        acc = dict(self.entries)
        for k, v in other.entries.items():
            acc[k] = acc.get(k, 0.0) + v
        return CellChain(self.dimension, acc)

    def __mul__(self, scalar: float) -> "CellChain":
        return CellChain(self.dimension, {k: scalar * v for k, v in self.entries.items()})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.entries


class SparseSignMatrix:
    """Integer sparse matrix whose stored entries are all +1 or -1."""

    def __init__(self, matrix, row_labels: Sequence | None = None, col_labels: Sequence | None = None):
        mat = sp.csr_matrix(matrix, dtype=np.int64)
        mat.eliminate_zeros()
        mat.sort_indices()
        if mat.nnz and not np.all(np.abs(mat.data) == 1):
            raise ComplexError("sign matrix entries must be +1 or -1")
        mat.data.setflags(write=False)
        self._m = mat
        self.row_labels = tuple(row_labels) if row_labels is not None else None
        self.col_labels = tuple(col_labels) if col_labels is not None else None

    @property
    def shape(self) -> tuple[int, int]:
        return self._m.shape

    @property
    def nnz(self) -> int:
        return self._m.nnz

    def to_scipy(self) -> sp.csr_matrix:
        return self._m.copy()

    def to_dense(self) -> np.ndarray:
        return self._m.toarray()

    @property
    def T(self) -> "SparseSignMatrix":
        return SparseSignMatrix(self._m.T, self.col_labels, self.row_labels)

    def __matmul__(self, other):
        if isinstance(other, SparseSignMatrix):
            other = other._m
        return self._m @ other

    def __eq__(self, other):
        if not isinstance(other, SparseSignMatrix):
            return NotImplemented
        return self.shape == other.shape and (self._m != other._m).nnz == 0

    __hash__ = None

    def __repr__(self):
        return f"SparseSignMatrix(shape={self.shape}, nnz={self.nnz})"


def boundary(chain: CellChain, complex: OrientedComplex2) -> CellChain:
    """Boundary of a 1- or 2-chain, expressed against canonical edge orientations."""
    if chain.dimension not in (1, 2):
        raise ComplexError("boundary is defined here for 1- and 2-chains")
    acc: dict[int, float] = {}
    if chain.dimension == 2:
        for t, coef in chain.entries.items():
            if not 0 <= t < complex.n_triangles:
                raise ComplexError(f"triangle {t}: cell not in complex")
            for e, s in zip(complex.triangle_edges[t], complex.triangle_edge_signs[t]):
                acc[int(e)] = acc.get(int(e), 0.0) + s * coef
        return CellChain(1, acc)
    for e, coef in chain.entries.items():
        if not 0 <= e < complex.n_edges:
            raise ComplexError(f"edge {e}: cell not in complex")
        u, v = complex.edges[e]
        acc[int(v)] = acc.get(int(v), 0.0) + coef
        acc[int(u)] = acc.get(int(u), 0.0) - coef
    return CellChain(0, acc)


def coboundary_matrix(complex: OrientedComplex2, k: int) -> SparseSignMatrix:
    """``A^(k)``: rows are (k-1)-cells, columns are k-cells, entries are boundary signs."""
    if k == 1:
        e = complex.n_edges
        rows = complex.edges.T.ravel()
        cols = np.tile(np.arange(e), 2)
        data = np.concatenate([-np.ones(e, dtype=np.int64), np.ones(e, dtype=np.int64)])
        mat = sp.csr_matrix((data, (rows, cols)), shape=(complex.n_vertices, e))
        return SparseSignMatrix(mat, complex.vertex_labels, None)
    if k == 2:
        m = complex.n_triangles
        rows = complex.triangle_edges.ravel()
        cols = np.repeat(np.arange(m), 3)
        mat = sp.csr_matrix((complex.triangle_edge_signs.ravel(), (rows, cols)),
                            shape=(complex.n_edges, m))
        return SparseSignMatrix(mat, None, complex.triangle_labels)
    raise ComplexError(f"coboundary matrix order must be 1 or 2, got {k}")


def reorient_triangle(complex: OrientedComplex2, triangle: int) -> OrientedComplex2:
    """Copy of ``complex`` with one triangle's first two vertices swapped."""
    if not 0 <= triangle < complex.n_triangles:
        raise ComplexError(f"triangle {triangle}: cell not in complex")
    tri = complex.triangles.copy()
    tri[triangle, [0, 1]] = tri[triangle, [1, 0]]
    return OrientedComplex2(complex.positions, tri, complex.vertex_labels, complex.triangle_labels)


@dataclass
class Violation:
    kind: str
    message: str
    cells: tuple = ()


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    checked_geometry: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set:
        return {v.kind for v in self.violations}

    def as_dict(self) -> dict:
        return {"ok": self.ok, "checked_geometry": self.checked_geometry,
                "violations": [{"kind": v.kind, "message": v.message, "cells": list(v.cells)}
                               for v in self.violations]}


def validate_complex(complex: OrientedComplex2, tolerance: float = 1e-9,
                     geometric: bool = True) -> ValidationReport:
    """Check the complex invariants and report every violation found.

    Structural invariants (references, repeated vertices, duplicate cells) are
    already enforced by the constructor, so the topological part here re-checks
    the derived edge set.  With ``geometric=True`` it also looks for degenerate
    triangles, coincident vertices, pairs of triangles meeting outside a shared
    face, and side-point segments that pierce another triangle.
    """
    from . import geometry

    report = ValidationReport(checked_geometry=geometric)
    sides = set()
    for tri in complex.triangles:
        a, b, c = (int(v) for v in tri)
        sides.update({(min(a, b), max(a, b)), (min(b, c), max(b, c)), (min(a, c), max(a, c))})
    if sides != {(int(u), int(v)) for u, v in complex.edges}:
        report.violations.append(Violation("edge-set", "derived edges do not match triangle sides"))
    if not geometric:
        return report
    report.violations.extend(geometry.geometric_violations(complex, tolerance))
    return report
