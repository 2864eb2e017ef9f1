"""Assembly of the curl-curl + mass bilinear form on box meshes.

Element matrices are computed with 2x2x2 Gauss quadrature on the brick
[0,hx]x[0,hy]x[0,hz]; the mapping is affine so this is exact for the
lowest-order element. Because cells are geometrically identical, the global
matrices are the reference blocks scaled by the per-cell coefficients.

Shape functions follow the moment convention sigma_e(v) = int_e v . t_e ds
with sigma_e(N_e') = delta_{ee'}; on this mesh global and cell-local edge
orientations agree (tangents point along the positive axes), so no sign
bookkeeping is needed at assembly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fespace import CoefficientField, EdgeSpace
from .linalg import assemble_csr
from .mesh import _EDGE_OFFSETS

_G = 0.5 / np.sqrt(3.0)
GAUSS2 = np.array([0.5 - _G, 0.5 + _G])  # 2-point Gauss on [0,1], weights 1/2


def _hat(t, side):
    return 1.0 - t if side == 0 else t


def _dhat(side):
    return -1.0 if side == 0 else 1.0


def shape_values(points, h):
    """Evaluate the 12 edge shape functions at unit-cube points.

    points: (np, 3) in [0,1]^3 (reference coordinates); h = (hx, hy, hz).
    Returns (np, 12, 3) physical values (covariant scaling 1/h_axis).
    """
    pts = np.asarray(points, dtype=float)
    out = np.zeros((pts.shape[0], 12, 3))
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    for a, (j, k) in enumerate(_EDGE_OFFSETS):
        out[:, a, 0] = _hat(y, j) * _hat(z, k) / h[0]
    for a, (i, k) in enumerate(_EDGE_OFFSETS):
        out[:, 4 + a, 1] = _hat(x, i) * _hat(z, k) / h[1]
    for a, (i, j) in enumerate(_EDGE_OFFSETS):
        out[:, 8 + a, 2] = _hat(x, i) * _hat(y, j) / h[2]
    return out


def shape_curls(points, h):
    """Physical curls of the 12 edge shape functions at unit-cube points."""
    pts = np.asarray(points, dtype=float)
    out = np.zeros((pts.shape[0], 12, 3))
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    hx, hy, hz = h
    for a, (j, k) in enumerate(_EDGE_OFFSETS):
        # N = (f(y,z)/hx, 0, 0), curl = (0, df/dz, -df/dy)
        out[:, a, 1] = _hat(y, j) * _dhat(k) / (hx * hz)
        out[:, a, 2] = -_dhat(j) * _hat(z, k) / (hx * hy)
    for a, (i, k) in enumerate(_EDGE_OFFSETS):
        # N = (0, f(x,z)/hy, 0), curl = (-df/dz, 0, df/dx)
        out[:, 4 + a, 0] = -_hat(x, i) * _dhat(k) / (hy * hz)
        out[:, 4 + a, 2] = _dhat(i) * _hat(z, k) / (hy * hx)
    for a, (i, j) in enumerate(_EDGE_OFFSETS):
        # N = (0, 0, f(x,y)/hz), curl = (df/dy, -df/dx, 0)
        out[:, 8 + a, 0] = _hat(x, i) * _dhat(j) / (hz * hy)
        out[:, 8 + a, 1] = -_dhat(i) * _hat(y, j) / (hz * hx)
    return out


def reference_matrices(hx, hy, hz):
    """Unit-coefficient element blocks (K_ref, M_ref) and int N dx (12, 3)."""
    h = (hx, hy, hz)
    pts = np.array(
        [(x, y, z) for z in GAUSS2 for y in GAUSS2 for x in GAUSS2]
    )
    w = np.full(8, 0.125) * hx * hy * hz
    N = shape_values(pts, h)
    C = shape_curls(pts, h)
    M = np.einsum("q,qac,qbc->ab", w, N, N)
    K = np.einsum("q,qac,qbc->ab", w, C, C)
    Nint = np.einsum("q,qac->ac", w, N)
    return K, M, Nint


@dataclass
class CellMatrices:
    K: np.ndarray  # 12x12 curl-curl block
    M: np.ndarray  # 12x12 mass block
    f: np.ndarray  # 12-vector load


def assemble_cell(alpha_c, beta_c, h, f_const=(1.0, 1.0, 1.0)):
    """Element matrices for one cell with constant coefficients."""
    Kref, Mref, Nint = reference_matrices(*h)
    return CellMatrices(alpha_c * Kref, beta_c * Mref, Nint @ np.asarray(f_const))


def _assemble_over_cells(space: EdgeSpace, field: CoefficientField, cell_ids, f_const):
    """Assemble K, M, f over the free DOFs touched by the given cells.

    Returns (K, M, f, gdofs) where gdofs maps local DOFs to global free DOFs.
    """
    mesh = space.mesh
    Kref, Mref, Nint = reference_matrices(mesh.hx, mesh.hy, mesh.hz)
    fref = Nint @ np.asarray(f_const, dtype=float)

    cell_dofs = space.dof_of_edge[mesh.cell_edges[cell_ids]]  # (nc, 12), -1 Dirichlet
    gdofs = np.unique(cell_dofs[cell_dofs >= 0])
    n_loc = gdofs.size
    local_of_global = np.full(space.n_dofs, -1, dtype=np.int64)
    local_of_global[gdofs] = np.arange(n_loc)
    loc = np.where(cell_dofs >= 0, local_of_global[np.maximum(cell_dofs, 0)], -1)

    rows = np.repeat(loc[:, :, None], 12, axis=2)
    cols = np.repeat(loc[:, None, :], 12, axis=1)
    keep = (rows >= 0) & (cols >= 0)
    alpha = field.alpha[cell_ids]
    beta = field.beta[cell_ids]
    kvals = (alpha[:, None, None] * Kref[None]) [keep]
    mvals = (beta[:, None, None] * Mref[None]) [keep]
    r, c = rows[keep], cols[keep]
    K = assemble_csr(n_loc, r, c, kvals)
    M = assemble_csr(n_loc, r, c, mvals)

    f = np.zeros(n_loc)
    keep_f = loc >= 0
    np.add.at(f, loc[keep_f], np.broadcast_to(fref, (len(cell_ids), 12))[keep_f])
    return K, M, f, gdofs


def assemble_global(space: EdgeSpace, field: CoefficientField, f_const=(1.0, 1.0, 1.0)):
    """Global K (alpha part), M (beta part) and load over free DOFs."""
    all_cells = np.arange(space.mesh.n_cells)
    K, M, f, gdofs = _assemble_over_cells(space, field, all_cells, f_const)
    assert gdofs.size == space.n_dofs
    return K, M, f


def assemble_subdomain(space, field, labels, i, f_const=(1.0, 1.0, 1.0)):
    """Sub-assembled K_i, M_i, f_i in local numbering, plus the R_i map.

    gdofs[l] is the global free DOF of local DOF l (the discrete R_i).
    """
    cell_ids = np.flatnonzero(np.asarray(labels) == i)
    if cell_ids.size == 0:
        raise ValueError(f"subdomain {i} has no cells")
    return _assemble_over_cells(space, field, cell_ids, f_const)


def gradient_interpolant(mesh, nodal_values):
    """Edge-moment interpolant of grad(phi) for nodal phi: phi[head]-phi[tail]."""
    nodal_values = np.asarray(nodal_values, dtype=float)
    ev = mesh.edge_vertices
    return nodal_values[ev[:, 1]] - nodal_values[ev[:, 0]]
