"""Structured hexahedral box mesh with global entity numbering.

Numbering is lexicographic with x fastest. Edges are stored in three blocks
(x-directed, then y-, then z-directed) and carry a global orientation: the
tangent points from the lower to the higher global vertex id, which for this
numbering is always the direction of increasing coordinate.
"""

from __future__ import annotations

import numpy as np

# Local edge enumeration of a hexahedron: 4 x-edges at (j,k) in
# {(0,0),(1,0),(0,1),(1,1)}, then 4 y-edges at (i,k), then 4 z-edges at (i,j).
_EDGE_OFFSETS = [(j, k) for k in (0, 1) for j in (0, 1)]


class BoxMesh:
    """Axis-aligned box meshed into nx * ny * nz hexahedral cells."""

    def __init__(self, nx, ny, nz, Lx=1.0, Ly=1.0, Lz=1.0):
        if min(nx, ny, nz) < 1:
            raise ValueError("cell counts must be >= 1")
        if min(Lx, Ly, Lz) <= 0.0:
            raise ValueError("domain lengths must be > 0")
        self.nx, self.ny, self.nz = int(nx), int(ny), int(nz)
        self.Lx, self.Ly, self.Lz = float(Lx), float(Ly), float(Lz)
        self.hx = self.Lx / self.nx
        self.hy = self.Ly / self.ny
        self.hz = self.Lz / self.nz

        self.n_cells = nx * ny * nz
        self.n_vertices = (nx + 1) * (ny + 1) * (nz + 1)
        self._n_ex = nx * (ny + 1) * (nz + 1)
        self._n_ey = (nx + 1) * ny * (nz + 1)
        self._n_ez = (nx + 1) * (ny + 1) * nz
        self.n_edges = self._n_ex + self._n_ey + self._n_ez
        self.n_faces = (nx + 1) * ny * nz + nx * (ny + 1) * nz + nx * ny * (nz + 1)

        self._build_vertices()
        self._build_edges()
        self._build_cells()

    # ---- global ids ------------------------------------------------------

    def vertex_id(self, ix, iy, iz):
        nx, ny = self.nx, self.ny
        return ix + (nx + 1) * (iy + (ny + 1) * iz)

    def cell_id(self, cx, cy, cz):
        return cx + self.nx * (cy + self.ny * cz)

    def x_edge_id(self, ix, iy, iz):
        return ix + self.nx * (iy + (self.ny + 1) * iz)

    def y_edge_id(self, ix, iy, iz):
        return self._n_ex + ix + (self.nx + 1) * (iy + self.ny * iz)

    def z_edge_id(self, ix, iy, iz):
        return self._n_ex + self._n_ey + ix + (self.nx + 1) * (iy + (self.ny + 1) * iz)

    # ---- derived arrays --------------------------------------------------

    def _build_vertices(self):
        nx, ny, nz = self.nx, self.ny, self.nz
        iz, iy, ix = np.meshgrid(
            np.arange(nz + 1), np.arange(ny + 1), np.arange(nx + 1), indexing="ij"
        )
        ix, iy, iz = ix.ravel(), iy.ravel(), iz.ravel()
        self.vertex_coords = np.column_stack(
            [ix * self.hx, iy * self.hy, iz * self.hz]
        )
        self.vertex_on_boundary = (
            (ix == 0) | (ix == nx) | (iy == 0) | (iy == ny) | (iz == 0) | (iz == nz)
        )

    def _build_edges(self):
        nx, ny, nz = self.nx, self.ny, self.nz
        tails = np.empty(self.n_edges, dtype=np.int64)
        heads = np.empty(self.n_edges, dtype=np.int64)
        axis = np.empty(self.n_edges, dtype=np.int8)
        on_bnd = np.empty(self.n_edges, dtype=bool)

        # x-edges: (ix in [0,nx), iy in [0,ny], iz in [0,nz])
        iz, iy, ix = np.meshgrid(
            np.arange(nz + 1), np.arange(ny + 1), np.arange(nx), indexing="ij"
        )
        ix, iy, iz = ix.ravel(), iy.ravel(), iz.ravel()
        e = self.x_edge_id(ix, iy, iz)
        tails[e] = self.vertex_id(ix, iy, iz)
        heads[e] = self.vertex_id(ix + 1, iy, iz)
        axis[e] = 0
        on_bnd[e] = (iy == 0) | (iy == ny) | (iz == 0) | (iz == nz)

        iz, iy, ix = np.meshgrid(
            np.arange(nz + 1), np.arange(ny), np.arange(nx + 1), indexing="ij"
        )
        ix, iy, iz = ix.ravel(), iy.ravel(), iz.ravel()
        e = self.y_edge_id(ix, iy, iz)
        tails[e] = self.vertex_id(ix, iy, iz)
        heads[e] = self.vertex_id(ix, iy + 1, iz)
        axis[e] = 1
        on_bnd[e] = (ix == 0) | (ix == nx) | (iz == 0) | (iz == nz)

        iz, iy, ix = np.meshgrid(
            np.arange(nz), np.arange(ny + 1), np.arange(nx + 1), indexing="ij"
        )
        ix, iy, iz = ix.ravel(), iy.ravel(), iz.ravel()
        e = self.z_edge_id(ix, iy, iz)
        tails[e] = self.vertex_id(ix, iy, iz)
        heads[e] = self.vertex_id(ix, iy, iz + 1)
        axis[e] = 2
        on_bnd[e] = (ix == 0) | (ix == nx) | (iy == 0) | (iy == ny)

        self.edge_vertices = np.column_stack([tails, heads])
        self.edge_axis = axis
        self.edge_on_boundary = on_bnd
        self.edge_lengths = np.array([self.hx, self.hy, self.hz])[axis]

    def _build_cells(self):
        nx, ny, nz = self.nx, self.ny, self.nz
        cz, cy, cx = np.meshgrid(
            np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij"
        )
        cx = cx.ravel()
        cy = cy.ravel()
        cz = cz.ravel()
        # reorder to cell-id order (x fastest)
        order = np.argsort(self.cell_id(cx, cy, cz), kind="stable")
        cx, cy, cz = cx[order], cy[order], cz[order]
        self.cell_coords = np.column_stack([cx, cy, cz])

        verts = np.empty((self.n_cells, 8), dtype=np.int64)
        for k in (0, 1):
            for j in (0, 1):
                for i in (0, 1):
                    verts[:, i + 2 * j + 4 * k] = self.vertex_id(cx + i, cy + j, cz + k)
        self.cell_vertices = verts

        edges = np.empty((self.n_cells, 12), dtype=np.int64)
        for a, (j, k) in enumerate(_EDGE_OFFSETS):
            edges[:, a] = self.x_edge_id(cx, cy + j, cz + k)
        for a, (i, k) in enumerate(_EDGE_OFFSETS):
            edges[:, 4 + a] = self.y_edge_id(cx + i, cy, cz + k)
        for a, (i, j) in enumerate(_EDGE_OFFSETS):
            edges[:, 8 + a] = self.z_edge_id(cx + i, cy + j, cz)
        self.cell_edges = edges

    def cell_centroids(self):
        c = self.cell_coords
        return np.column_stack(
            [(c[:, 0] + 0.5) * self.hx, (c[:, 1] + 0.5) * self.hy, (c[:, 2] + 0.5) * self.hz]
        )
