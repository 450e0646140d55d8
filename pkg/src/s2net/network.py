"""Linear magnetic 2-networks on a complex.

Each triangle carries a flux ``phi`` and a current adjusted mmf ``m``.  Flux
is a 2-coboundary (it is balanced around every region), ``m`` is a 2-cycle,
and the two are tied triangle by triangle through the device law

    phi + E = (m + I) / r

with ``r`` the reluctance, ``I`` a loop current around the triangle and ``E``
an additional mmf source.  The raw mmf across a triangle is ``m + I``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .complex import OrientedComplex2, SparseSignMatrix, coboundary_matrix

log = logging.getLogger(__name__)

DIRECT_LIMIT = 10_000


class SolverError(RuntimeError):
    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")
        self.residual = residual


class InvalidDevice(ValueError):
    pass


@dataclass(frozen=True)
class DeviceSpec:
    """Per-triangle reluctance and sources, indexed like the complex's triangles."""

    reluctance: np.ndarray
    loop_current: np.ndarray = None
    mmf_source: np.ndarray = None

    def __post_init__(self):
        r = np.asarray(self.reluctance, dtype=float).ravel()
        n = len(r)
        i = np.zeros(n) if self.loop_current is None else np.asarray(self.loop_current, dtype=float).ravel()
        e = np.zeros(n) if self.mmf_source is None else np.asarray(self.mmf_source, dtype=float).ravel()
        if len(i) != n or len(e) != n:
            raise InvalidDevice("invalid device: source vectors must match the triangle count")
        if not np.all(np.isfinite(r)) or np.any(r <= 0):
            raise InvalidDevice("invalid device: reluctances must be positive")
        for name, v in (("reluctance", r), ("loop_current", i), ("mmf_source", e)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def uniform(cls, n: int, r: float = 1.0, loop_current=None, mmf_source=None) -> "DeviceSpec":
        return cls(np.full(n, float(r)), loop_current, mmf_source)

    @property
    def size(self) -> int:
        return len(self.reluctance)

    @property
    def permeance(self) -> np.ndarray:
        return 1.0 / self.reluctance

    def with_sources(self, loop_current=None, mmf_source=None) -> "DeviceSpec":
        return DeviceSpec(self.reluctance, loop_current, mmf_source)

    def reoriented(self, triangle: int) -> "DeviceSpec":
        i, e = self.loop_current.copy(), self.mmf_source.copy()
        i[triangle] = -i[triangle]
        e[triangle] = -e[triangle]
        return DeviceSpec(self.reluctance, i, e)


@dataclass(frozen=True)
class NetworkSolution:
    flux: np.ndarray
    mmf_adjusted: np.ndarray
    potentials: np.ndarray
    method: str
    diagnostics: dict = field(default_factory=dict)
    loop_current: np.ndarray | None = None

    @property
    def mmf_raw(self) -> np.ndarray:
        if self.loop_current is None:
            return self.mmf_adjusted.copy()
        return self.mmf_adjusted + self.loop_current


def _check_device(device: DeviceSpec, n: int):
    if device.size != n:
        raise InvalidDevice(f"invalid device: {device.size} entries for {n} triangles")


def reduced_incidence(dual) -> sp.csr_matrix:
    """Incidence matrix with the lowest-numbered node of each connected part removed."""
    inc = dual.incidence_matrix().to_scipy().astype(float)
    parts = dual.connected_parts()
    drop = set()
    seen = set()
    for v, p in enumerate(parts.tolist()):
        if p not in seen:
            seen.add(p)
            drop.add(v)
    keep = [v for v in range(dual.n_nodes) if v not in drop]
    return inc[keep].tocsr(), np.array(keep, dtype=np.int64)


def assemble_cycle_system(dual, device: DeviceSpec):
    """``P R P^T`` and ``-P R I + P E`` with ``R = diag(1/r)`` and ``P`` the reduced incidence."""
    _check_device(device, dual.n_edges)
    P, _ = reduced_incidence(dual)
    R = sp.diags(device.permeance)
    K = (P @ R @ P.T).tocsr()
    rhs = -P @ (device.permeance * device.loop_current) + P @ device.mmf_source
    return K, np.asarray(rhs, dtype=float)


def solve_spd(K, rhs, tol: float = 1e-12) -> np.ndarray:
    """Direct factorisation for moderate sizes, Jacobi-preconditioned CG beyond."""
    n = K.shape[0]
    if n == 0:
        return np.zeros(0)
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0:
        return np.zeros(n)
    K = sp.csc_matrix(K)
    if n <= DIRECT_LIMIT:
        try:
            x = spla.splu(K).solve(rhs)
        except RuntimeError as exc:
            raise SolverError(f"factorisation failed: {exc}") from exc
    else:
        d = K.diagonal()
        if np.any(d <= 0):
            raise SolverError("matrix is not positive definite")
        M = spla.LinearOperator((n, n), matvec=lambda v: v / d)
        x, info = spla.cg(K, rhs, rtol=tol, atol=0.0, maxiter=20 * n, M=M)
        if info != 0:
            res = float(np.linalg.norm(K @ x - rhs) / bnorm)
            raise SolverError("conjugate gradient did not converge", res)
    res = float(np.linalg.norm(K @ x - rhs) / bnorm)
    if not np.isfinite(res) or res > max(1e3 * tol, 1e-8):
        raise SolverError("linear solve inaccurate", res)
    return x


def solve_cycle_based(dual, device: DeviceSpec, tol: float = 1e-12) -> NetworkSolution:
    """Potentials on region nodes; ``m = P^T q`` and flux from the device law."""
    K, rhs = assemble_cycle_system(dual, device)
    P, kept = reduced_incidence(dual)
    q = solve_spd(K, rhs, tol)
    m = P.T @ q if P.shape[0] else np.zeros(dual.n_edges)
    phi = device.permeance * (m + device.loop_current) - device.mmf_source
    potentials = np.zeros(dual.n_nodes)
    potentials[kept] = q
    res = float(np.linalg.norm(P @ phi)) if P.shape[0] else 0.0
    scale = max(float(np.linalg.norm(phi)), 1.0)
    return NetworkSolution(np.asarray(phi), np.asarray(m), potentials, "cycle",
                           {"flux_balance_residual": res, "scale": scale}, device.loop_current.copy())


def coboundary_rows(complex: OrientedComplex2) -> np.ndarray:
    """Indices of a maximal independent set of rows of A^(2), by exact elimination."""
    from .exact import RationalMatrix, rref

    A2 = coboundary_matrix(complex, 2).to_dense()
    _, pivots, _ = rref(RationalMatrix(A2.T))
    return np.array(pivots, dtype=np.int64)


def solve_coboundary_based(complex: OrientedComplex2, device: DeviceSpec, tol: float = 1e-12,
                           rows=None) -> NetworkSolution:
    """Flux ``Â^T z`` with ``Â`` an independent row subset of A^(2)."""
    _check_device(device, complex.n_triangles)
    A2 = coboundary_matrix(complex, 2).to_scipy().astype(float)
    rows = coboundary_rows(complex) if rows is None else np.asarray(rows)
    Ahat = A2[rows]
    G = sp.diags(device.reluctance)
    K = (Ahat @ G @ Ahat.T).tocsr()
    rhs = Ahat @ (device.loop_current - device.reluctance * device.mmf_source)
    z = solve_spd(K, np.asarray(rhs, dtype=float), tol)
    phi = Ahat.T @ z if len(rows) else np.zeros(complex.n_triangles)
    if len(rows) == complex.n_triangles:
        # no nonzero 2-cycles exist, so m vanishes exactly
        m = np.zeros(complex.n_triangles)
    else:
        m = device.reluctance * (phi + device.mmf_source) - device.loop_current
    res = float(np.linalg.norm(A2 @ m))
    scale = max(float(np.linalg.norm(m)), 1.0)
    return NetworkSolution(np.asarray(phi), np.asarray(m), z, "coboundary",
                           {"mmf_cycle_residual": res, "scale": scale}, device.loop_current.copy())


def tellegen_check(sol: NetworkSolution, A2, incidence, tol: float = 1e-9) -> dict:
    """Orthogonality and conservation diagnostics for a solution."""
    A = A2.to_scipy() if isinstance(A2, SparseSignMatrix) else sp.csr_matrix(A2)
    D = incidence.to_scipy() if isinstance(incidence, SparseSignMatrix) else sp.csr_matrix(incidence)
    phi, m = sol.flux, sol.mmf_adjusted
    inner = float(phi @ m)
    nphi, nm = float(np.linalg.norm(phi)), float(np.linalg.norm(m))
    rel = abs(inner) / (nphi * nm) if nphi > 0 and nm > 0 else abs(inner)
    flux_res = float(np.linalg.norm(D @ phi))
    mmf_res = float(np.linalg.norm(A @ m))
    flagged = rel > tol or flux_res > tol * max(nphi, 1.0) or mmf_res > tol * max(nm, 1.0)
    return {"inner_product": inner, "relative_inner_product": rel, "flux_balance_residual": flux_res,
            "mmf_cycle_residual": mmf_res, "flagged": bool(flagged)}


def loop_edge_mmf(complex: OrientedComplex2, sol: NetworkSolution, triangle: int) -> np.ndarray:
    """Net raw mmf around each boundary edge of ``triangle``, edges directed along its boundary.

    With a loop current ``i`` on that triangle and no other sources every
    entry equals ``i``.
    """
    A2 = coboundary_matrix(complex, 2).to_scipy()
    raw = A2 @ sol.mmf_raw
    a, b, c = complex.triangles[triangle].tolist()
    out = []
    for u, v in ((b, c), (c, a), (a, b)):
        e = complex.edge_id(u, v)
        out.append(raw[e] if u < v else -raw[e])
    return np.array(out)


def relative_difference(x: np.ndarray, y: np.ndarray) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    scale = max(np.linalg.norm(x), np.linalg.norm(y))
    return 0.0 if scale == 0 else float(np.linalg.norm(x - y) / scale)
