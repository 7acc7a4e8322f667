import numpy as np
import pytest
import scipy.linalg

from qglab.errors import MeshTooLarge
from qglab.fem import (
    assemble,
    build_mesh,
    coarse_ground_estimate,
    solve_eigen,
)
from qglab.fixtures import fixture_graph
from qglab.graphs import build_graph


def interval(length=1.0, sigma_left=0.0, sigma_right=0.0, q=0.0):
    return build_graph({
        "vertices": [{"id": "l", "sigma": sigma_left},
                     {"id": "r", "sigma": sigma_right}],
        "edges": [{"id": "e", "from": "l", "to": "r", "length": length,
                   "potential": {"kind": "constant", "value": q}}],
    })


def test_mesh_counts_and_dof_layout():
    g = interval()
    mesh = build_mesh(g, 0.25)
    # 4 elements, 2 vertex dofs + 3 interior
    assert mesh.total_dofs == 5
    assert sum(mesh.n_elements) == 4


def test_textbook_matrices_unit_interval():
    g = interval()
    sys_ = assemble(g, 0.5)  # 2 elements, nodes l, r, mid
    k, m = sys_.dense()
    # vertices first: order (l, r, mid); classic P1 matrices permuted
    h = 0.5
    k_ref = np.array([[1, 0, -1], [0, 1, -1], [-1, -1, 2]]) / h
    m_ref = np.array([[2, 0, 1], [0, 2, 1], [1, 1, 4]]) * h / 6.0
    assert np.allclose(k, k_ref, atol=1e-14)
    assert np.allclose(m, m_ref, atol=1e-14)


def test_sigma_adds_to_vertex_diagonal():
    base = assemble(interval(), 0.25).dense()[0]
    shifted = assemble(interval(sigma_left=0.7), 0.25).dense()[0]
    diff = shifted - base
    assert diff[0, 0] == pytest.approx(0.7)
    assert np.abs(diff).sum() == pytest.approx(0.7)


def test_constant_potential_adds_mass_matrix():
    k0, m = assemble(interval(), 0.2).dense()
    kq, _ = assemble(interval(q=2.5), 0.2).dense()
    assert np.allclose(kq - k0, 2.5 * m, atol=1e-13)


def test_matrices_symmetric_and_mass_positive():
    g = fixture_graph("star3")
    sys_ = assemble(g, 0.05)
    k, m = sys_.dense()
    assert np.allclose(k, k.T, atol=1e-14)
    assert np.allclose(m, m.T, atol=1e-14)
    np.linalg.cholesky(m)  # raises if not positive definite


def test_eigenvalues_upper_bound_and_h2_convergence():
    g = interval()
    exact = np.array([(n * np.pi) ** 2 for n in range(5)])
    errs = []
    for h in (0.02, 0.01):
        vals = np.array(solve_eigen(assemble(g, h), 5))
        # Ritz values bound the true eigenvalues from above
        assert np.all(vals >= exact - 1e-10)
        errs.append(np.abs(vals - exact)[1:].max())
    ratio = errs[0] / errs[1]
    assert 3.3 < ratio < 4.7


def test_banded_path_matches_dense_reference():
    g = fixture_graph("star3")
    sys_ = assemble(g, 0.002)  # ~1500 dofs: banded route
    assert sys_.size > 1400
    got = np.array(solve_eigen(sys_, 6))
    k, m = sys_.dense()
    ref = scipy.linalg.eigh(k, m, eigvals_only=True,
                            subset_by_index=(0, 5))
    assert np.allclose(got, ref, atol=1e-7 * (1 + np.abs(ref).max()))


def test_negative_coupling_gives_negative_ground_state():
    g = fixture_graph("star3")
    vals = solve_eigen(assemble(g, 0.005), 3)
    assert vals[0] == pytest.approx(-0.373875127781922, abs=1e-4)
    assert vals[0] < -1e-6


def test_coarse_ground_estimate_is_close():
    g = fixture_graph("star3")
    est = coarse_ground_estimate(g)
    assert est == pytest.approx(-0.373875127781922, abs=0.05)


def test_mesh_size_cap():
    with pytest.raises(MeshTooLarge):
        assemble(interval(), 1e-6)
