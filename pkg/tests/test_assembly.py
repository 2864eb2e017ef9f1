import numpy as np
import scipy.sparse as sp

from pbbddc.assembly import (assemble_cell, assemble_global,
                             assemble_subdomain, gradient_interpolant,
                             reference_matrices)
from pbbddc.fespace import CoefficientField, EdgeSpace
from pbbddc.mesh import BoxMesh
from pbbddc.partition import geometric_partition


def full_matrices(mesh, alpha=1.0, beta=1.0, f_const=(1.0, 1.0, 1.0)):
    """Assemble over ALL edges (no Dirichlet elimination) for oracle tests."""
    nK = sp.lil_matrix((mesh.n_edges, mesh.n_edges))
    nM = sp.lil_matrix((mesh.n_edges, mesh.n_edges))
    fv = np.zeros(mesh.n_edges)
    h = (mesh.hx, mesh.hy, mesh.hz)
    for c in range(mesh.n_cells):
        cm = assemble_cell(alpha, beta, h, f_const)
        idx = mesh.cell_edges[c]
        nK[np.ix_(idx, idx)] += cm.K
        nM[np.ix_(idx, idx)] += cm.M
        fv[idx] += cm.f
    return nK.tocsr(), nM.tocsr(), fv


def interpolate(mesh, u_fn):
    """Edge interpolant of an affine vector field (midpoint rule is exact)."""
    tail = mesh.vertex_coords[mesh.edge_vertices[:, 0]]
    head = mesh.vertex_coords[mesh.edge_vertices[:, 1]]
    mid = 0.5 * (tail + head)
    tangent = head - tail  # includes the edge length
    return np.einsum("ij,ij->i", u_fn(mid), tangent)


def test_reference_matrices_symmetry_and_definiteness():
    K, M, _ = reference_matrices(0.5, 1.0, 2.0)
    assert np.allclose(K, K.T)
    assert np.allclose(M, M.T)
    assert np.all(np.linalg.eigvalsh(M) > 0)
    eK = np.linalg.eigvalsh(K)
    # curl-curl kernel: gradients of the 8 trilinear nodal functions span a
    # 7-dimensional subspace of the 12 edge functions
    assert np.sum(np.abs(eK) < 1e-12) == 7
    assert np.all(eK > -1e-12)


def test_reference_matrices_scaling_laws():
    # isotropic refinement h -> s*h scales the mass by s and the curl
    # stiffness by 1/s (moment-valued DOFs)
    K1, M1, _ = reference_matrices(1.0, 1.0, 1.0)
    K2, M2, _ = reference_matrices(0.5, 0.5, 0.5)
    assert np.allclose(K2, 2.0 * K1)
    assert np.allclose(M2, 0.5 * M1)


def test_mass_energy_exact_for_constant_fields():
    mesh = BoxMesh(3, 2, 4, Lx=1.5, Ly=1.0, Lz=2.0)
    _, M, _ = full_matrices(mesh, beta=0.7)
    c = np.array([1.0, 2.0, 3.0])
    u = interpolate(mesh, lambda x: np.broadcast_to(c, x.shape))
    vol = mesh.Lx * mesh.Ly * mesh.Lz
    assert np.isclose(u @ (M @ u), 0.7 * vol * (c @ c), rtol=1e-12)


def test_curl_energy_exact_for_rigid_rotation():
    # u = (-y, x, 0) lies in the lowest-order edge space; curl u = (0,0,2)
    mesh = BoxMesh(2, 3, 2, Lx=2.0, Ly=1.0, Lz=1.0)
    K, _, _ = full_matrices(mesh, alpha=1.3)
    u = interpolate(mesh, lambda x: np.column_stack(
        [-x[:, 1], x[:, 0], np.zeros(len(x))]))
    vol = mesh.Lx * mesh.Ly * mesh.Lz
    assert np.isclose(u @ (K @ u), 1.3 * vol * 4.0, rtol=1e-12)


def test_load_vector_exact_for_constant_fields():
    mesh = BoxMesh(2, 2, 3)
    f_const = (0.5, -1.0, 2.0)
    _, _, fv = full_matrices(mesh, f_const=f_const)
    c = np.array([2.0, 1.0, -1.0])
    u = interpolate(mesh, lambda x: np.broadcast_to(c, x.shape))
    assert np.isclose(fv @ u, np.dot(f_const, c), rtol=1e-12)


def test_global_curl_matrix_annihilates_gradients():
    mesh = BoxMesh(4, 3, 3)
    space = EdgeSpace(mesh)
    field = CoefficientField.constant(mesh, 2.0, 1.0)
    K, M, _ = assemble_global(space, field)
    rng = np.random.default_rng(5)
    phi = rng.standard_normal(mesh.n_vertices)
    phi[mesh.vertex_on_boundary] = 0.0
    g = gradient_interpolant(mesh, phi)[space.edge_of_dof]
    assert np.linalg.norm(K @ g) <= 1e-12 * sp.linalg.norm(K) * np.linalg.norm(g)
    assert g @ (M @ g) > 0


def test_subdomain_assembly_sums_to_global():
    mesh = BoxMesh(4, 4, 2)
    space = EdgeSpace(mesh)
    rng = np.random.default_rng(6)
    field = CoefficientField(rng.uniform(0.5, 2.0, mesh.n_cells),
                             rng.uniform(0.5, 2.0, mesh.n_cells))
    K, M, _ = assemble_global(space, field)
    labels = geometric_partition(mesh, 2, 2, 1)
    acc = sp.csr_matrix((space.n_dofs, space.n_dofs))
    for i in range(4):
        Ki, Mi, _, gdofs = assemble_subdomain(space, field, labels, i)
        n = len(gdofs)
        R = sp.csr_matrix((np.ones(n), (gdofs, np.arange(n))),
                          shape=(space.n_dofs, n))
        acc = acc + R @ (Ki + Mi) @ R.T
    diff = acc - (K + M)
    assert abs(diff).max() <= 1e-13 * abs(K + M).max()
