"""P1 finite-element discretization of the quadratic form

    h(f) = integral |f'|^2 + integral q |f|^2 + sum_v sigma_v |f(v)|^2

on a metric graph, used as a brute-force oracle independent of the
transfer-matrix path.  Vertex continuity is encoded by sharing one DOF per
vertex across all incident edge endpoints; the potential term uses 3-point
Gauss quadrature per element (exact through degree 5, well below the h^2
eigenvalue error).

Eigenvalues of the pencil (A, M) are extracted either densely (Cholesky
reduction + symmetric QR via LAPACK) for small systems, or by
Sylvester-inertia bisection on RCM-reordered banded factors for the large
meshes the random-graph comparisons need: a dense solve at 10^4 DOFs costs
minutes on one core while the banded count costs milliseconds.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.sparse.csgraph import reverse_cuthill_mckee

from . import kernels
from .errors import MassNotPositiveDefinite, MeshTooLarge, SpectrumError
from .potentials import evaluate

__all__ = ["Mesh", "AssembledSystem", "assemble", "solve_eigen",
           "coarse_ground_estimate", "MAX_DOFS"]

MAX_DOFS = 20000
_DENSE_CUTOFF = 1200
_MAX_BANDWIDTH = 128

# 3-point Gauss on [0, 1]
_G_NODES = np.array([0.5 - math.sqrt(0.15), 0.5, 0.5 + math.sqrt(0.15)])
_G_WEIGHTS = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])


@dataclass(frozen=True)
class Mesh:
    """Per-edge uniform subdivisions with a global DOF numbering.

    DOFs 0..|V|-1 are the vertices (in graph order); interior nodes follow
    edge by edge.  edge_dofs[i][j] is the DOF of node j on edge i, node 0
    sitting at the source vertex and node n_el at the target.
    """
    n_elements: tuple
    spacings: tuple
    edge_dofs: tuple
    total_dofs: int


def build_mesh(g, h):
    if not h > 0:
        raise ValueError("mesh size must be positive")
    n_els = []
    spacings = []
    for e in g.edges:
        n_el = max(1, math.ceil(e.length / h))
        n_els.append(n_el)
        spacings.append(e.length / n_el)
    n_vertices = len(g.vertices)
    total = n_vertices + sum(n - 1 for n in n_els)
    if total > MAX_DOFS:
        raise MeshTooLarge(
            "mesh needs %d DOFs, cap is %d" % (total, MAX_DOFS))
    vid_dof = {v.id: i for i, v in enumerate(g.vertices)}
    edge_dofs = []
    base = n_vertices
    for e, n_el in zip(g.edges, n_els):
        dofs = np.empty(n_el + 1, dtype=np.int64)
        dofs[0] = vid_dof[e.source]
        dofs[-1] = vid_dof[e.target]
        dofs[1:-1] = np.arange(base, base + n_el - 1)
        base += n_el - 1
        edge_dofs.append(dofs)
    return Mesh(n_elements=tuple(n_els), spacings=tuple(spacings),
                edge_dofs=tuple(edge_dofs), total_dofs=total)


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    stiffness: scipy.sparse.csr_matrix = field(repr=False)
    mass: scipy.sparse.csr_matrix = field(repr=False)
    mesh: Mesh = field(repr=False)

    @property
    def size(self):
        return self.stiffness.shape[0]

    def dense(self):
        return self.stiffness.toarray(), self.mass.toarray()


def assemble(g, h):
    """Assemble stiffness (including potential and couplings) and mass."""
    mesh = build_mesh(g, h)
    n = mesh.total_dofs
    rows, cols, a_data, m_data = [], [], [], []

    for e, n_el, he, dofs in zip(g.edges, mesh.n_elements, mesh.spacings,
                                 mesh.edge_dofs):
        # q at all Gauss points of the edge in one vectorized call
        el_left = np.arange(n_el) * he
        xg = (el_left[:, None] + _G_NODES[None, :] * he).ravel()
        qg = np.asarray(evaluate(e.potential, xg, e.length)).reshape(n_el, 3)

        # local matrices per element: stiffness + potential term, mass
        n1 = 1.0 - _G_NODES
        n2 = _G_NODES
        wq = qg * _G_WEIGHTS[None, :] * he
        p11 = wq @ (n1 * n1)
        p12 = wq @ (n1 * n2)
        p22 = wq @ (n2 * n2)
        k_diag = 1.0 / he

        d0 = dofs[:-1]
        d1 = dofs[1:]
        rows.append(np.concatenate([d0, d0, d1, d1]))
        cols.append(np.concatenate([d0, d1, d0, d1]))
        a_data.append(np.concatenate([k_diag + p11, -k_diag + p12,
                                      -k_diag + p12, k_diag + p22]))
        m_el = he / 6.0
        m_data.append(np.concatenate([
            np.full(n_el, 2.0 * m_el), np.full(n_el, m_el),
            np.full(n_el, m_el), np.full(n_el, 2.0 * m_el)]))

    # delta couplings: sigma_v on the vertex DOF diagonal of the stiffness
    for i, v in enumerate(g.vertices):
        if v.sigma != 0.0:
            rows.append(np.array([i]))
            cols.append(np.array([i]))
            a_data.append(np.array([v.sigma]))
            m_data.append(np.array([0.0]))

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    a = scipy.sparse.coo_matrix(
        (np.concatenate(a_data), (rows, cols)), shape=(n, n)).tocsr()
    m = scipy.sparse.coo_matrix(
        (np.concatenate(m_data), (rows, cols)), shape=(n, n)).tocsr()
    return AssembledSystem(stiffness=a, mass=m, mesh=mesh)


def _lower_band(csr, perm):
    """(kd+1, n) lower-banded storage band[r, j] = W[j+r, j] of the
    symmetrically permuted matrix."""
    n = csr.shape[0]
    coo = csr.tocoo()
    inv = np.empty(n, dtype=np.int64)
    inv[perm] = np.arange(n)
    ri = inv[coo.row]
    ci = inv[coo.col]
    lower = ri >= ci
    ri, ci, data = ri[lower], ci[lower], coo.data[lower]
    offs = ri - ci
    kd = int(offs.max()) if offs.size else 0
    band = np.zeros((kd + 1, n))
    np.add.at(band, (offs, ci), data)
    return band


def _banded_eigs(sys_, n_want):
    n = sys_.size
    pattern = (sys_.stiffness + sys_.mass).tocsr()
    perm = np.asarray(reverse_cuthill_mckee(pattern, symmetric_mode=True),
                      dtype=np.int64)
    band_a = _lower_band(sys_.stiffness, perm)
    band_m = _lower_band(sys_.mass, perm)
    kd = max(band_a.shape[0], band_m.shape[0]) - 1
    if kd > _MAX_BANDWIDTH:
        raise SpectrumError(
            "reordered bandwidth %d too large for the banded path" % kd)
    if band_a.shape[0] <= kd:
        band_a = np.vstack([band_a,
                            np.zeros((kd + 1 - band_a.shape[0], n))])
    if band_m.shape[0] <= kd:
        band_m = np.vstack([band_m,
                            np.zeros((kd + 1 - band_m.shape[0], n))])

    try:
        scipy.linalg.cholesky_banded(band_m, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise MassNotPositiveDefinite(str(exc)) from exc

    scale = max(1.0, float(np.abs(band_a).max()))
    mscale = max(1.0, float(np.abs(band_m).max()))

    def count_below(shift):
        pivmin = 1e-14 * max(scale, abs(shift) * mscale)
        c = kernels.banded_inertia(band_a, band_m, shift, pivmin)
        if c < 0:
            # factorization hit a NaN; nudge the shift
            c = kernels.banded_inertia(band_a, band_m,
                                       shift * (1.0 + 1e-12) + 1e-12, pivmin)
        if c < 0:
            raise SpectrumError("inertia count failed at shift %g" % shift)
        return c

    lo = -1.0
    for _ in range(200):
        if count_below(lo) == 0:
            break
        lo *= 4.0
    else:
        raise SpectrumError("could not bracket the spectrum from below")
    hi = 1.0
    for _ in range(200):
        if count_below(hi) >= n_want:
            break
        hi *= 4.0
    else:
        raise SpectrumError("could not bracket the spectrum from above")

    out = np.empty(n_want)
    stack = [(lo, hi, 0, n_want)]
    while stack:
        a, b, jlo, jhi = stack.pop()
        if b - a <= 1e-10 + 1e-12 * max(abs(a), abs(b)):
            out[jlo:jhi] = 0.5 * (a + b)
            continue
        mid = 0.5 * (a + b)
        c = min(max(count_below(mid), jlo), jhi)
        if c > jlo:
            stack.append((a, mid, jlo, c))
        if c < jhi:
            stack.append((mid, b, c, jhi))
    return out


def solve_eigen(sys_, n):
    """Smallest n eigenvalues of A x = lam M x, ascending.

    Dense Cholesky + symmetric QR below _DENSE_CUTOFF DOFs, banded inertia
    bisection above (same answers, checked against each other in tests).
    """
    if not 1 <= n <= sys_.size:
        raise ValueError("need 1 <= n <= %d, got %d" % (sys_.size, n))
    if sys_.size <= _DENSE_CUTOFF:
        a, m = sys_.dense()
        try:
            vals = scipy.linalg.eigh(a, m, eigvals_only=True, driver="gv")
        except scipy.linalg.LinAlgError as exc:
            raise MassNotPositiveDefinite(str(exc)) from exc
        return np.asarray(vals[:n])
    return _banded_eigs(sys_, n)


def coarse_ground_estimate(g, target_dofs=240):
    """Cheap FEM estimate of the lowest eigenvalue (a few hundred DOFs),
    used to cross-check analytic scan floors."""
    h = g.total_length() / max(target_dofs, 8 * len(g.edges))
    sys_ = assemble(g, h)
    return float(solve_eigen(sys_, 1)[0])
