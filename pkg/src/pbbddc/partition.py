"""Domain partitions, coefficient-based sub-partitions, and interface globs.

Three cell labelings coexist: the geometric partition (load-balanced blocks),
the PB-partition (constant or bounded-contrast coefficients per part, each
part contained in one geometric subdomain), and the glob classification of
interface entities into corners, coarse edges and coarse faces based on the
set of PB-subdomains that contain each entity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .fespace import CoefficientField, EdgeSpace
from .mesh import BoxMesh


def geometric_partition(mesh: BoxMesh, Nx, Ny, Nz):
    """Label cells with structured blocks of (nx/Nx, ny/Ny, nz/Nz) cells."""
    if mesh.nx % Nx or mesh.ny % Ny or mesh.nz % Nz:
        raise ValueError(
            f"partition ({Nx},{Ny},{Nz}) does not divide mesh "
            f"({mesh.nx},{mesh.ny},{mesh.nz})"
        )
    bx = mesh.cell_coords[:, 0] // (mesh.nx // Nx)
    by = mesh.cell_coords[:, 1] // (mesh.ny // Ny)
    bz = mesh.cell_coords[:, 2] // (mesh.nz // Nz)
    return (bx + Nx * (by + Ny * bz)).astype(np.int64)


def averaged_coefficients(pb_labels, n_pb, field: CoefficientField):
    """Volume-weighted means of (alpha, beta) per PB-subdomain.

    Cells of a box mesh have equal volume, so these are plain means.
    """
    counts = np.bincount(pb_labels, minlength=n_pb).astype(float)
    alpha_bar = np.bincount(pb_labels, weights=field.alpha, minlength=n_pb) / counts
    beta_bar = np.bincount(pb_labels, weights=field.beta, minlength=n_pb) / counts
    return alpha_bar, beta_bar


@dataclass
class PbPartition:
    """Cell labelings: geometric subdomains and PB-subdomains within them."""

    geo_labels: np.ndarray
    pb_labels: np.ndarray
    pb_to_geo: np.ndarray
    alpha_bar: np.ndarray
    beta_bar: np.ndarray

    @property
    def n_geo(self):
        return int(self.geo_labels.max()) + 1

    @property
    def n_pb(self):
        return self.pb_to_geo.size

    @classmethod
    def _from_labels(cls, geo_labels, pb_labels, field):
        pb_labels = np.asarray(pb_labels, dtype=np.int64)
        n_pb = int(pb_labels.max()) + 1
        pb_to_geo = np.full(n_pb, -1, dtype=np.int64)
        pb_to_geo[pb_labels] = geo_labels
        # containment check: every pb-subdomain lies in one geometric subdomain
        for pb in range(n_pb):
            geos = np.unique(geo_labels[pb_labels == pb])
            if geos.size != 1:
                raise ValueError(f"pb-subdomain {pb} spans geometric subdomains {geos}")
        alpha_bar, beta_bar = averaged_coefficients(pb_labels, n_pb, field)
        return cls(np.asarray(geo_labels), pb_labels, pb_to_geo, alpha_bar, beta_bar)


def pb_from_geometric(mesh, geo_labels, field):
    """PB-partition equal to the geometric partition (standard BDDC globs)."""
    return PbPartition._from_labels(geo_labels, geo_labels.copy(), field)


def pb_from_material(mesh, geo_labels, field):
    """PB-subdomains = face-connected components of equal-material cells
    within each geometric subdomain."""
    if field.material is None:
        raise ValueError("field carries no material ids")
    grid_shape = (mesh.nz, mesh.ny, mesh.nx)
    structure = ndimage.generate_binary_structure(3, 1)  # 6-connectivity
    pb_labels = np.full(mesh.n_cells, -1, dtype=np.int64)
    next_id = 0
    for geo in np.unique(geo_labels):
        for mat in np.unique(field.material[geo_labels == geo]):
            mask = ((geo_labels == geo) & (field.material == mat)).reshape(grid_shape)
            comp, ncomp = ndimage.label(mask, structure=structure)
            comp = comp.ravel()
            sel = comp > 0
            pb_labels[sel] = next_id + comp[sel] - 1
            next_id += ncomp
    return PbPartition._from_labels(geo_labels, pb_labels, field)


def _interval_bins(values, vmin, vmax, n_bins):
    """Bin index in 1..n_bins for equal-log-width sub-intervals of
    [vmin, vmax]; a value exactly on a bin boundary joins the lower bin."""
    if n_bins == 1:
        return np.ones(values.size, dtype=np.int64)
    t = n_bins * np.log(values / vmin) / np.log(vmax / vmin)
    t_round = np.rint(t)
    t = np.where(np.abs(t - t_round) < 1e-9, t_round, t)
    return np.clip(np.ceil(t).astype(np.int64), 1, n_bins)


def _n_levels(vmax, vmin, r):
    """Smallest l with (vmax/vmin) < r^l: number of coefficient bins needed
    so the contrast within each bin stays strictly below the threshold."""
    if math.isinf(r):
        return 1
    ratio = vmax / vmin
    ell = 1
    while not ratio < r**ell:
        ell += 1
    return ell


def pb_relaxed(mesh, geo_labels, field, r_alpha, r_beta, split_components=False):
    """Relaxed PB-partition: per geometric subdomain, cells are binned into
    coefficient intervals so the contrast within each bin stays below the
    thresholds; each nonempty (alpha-bin, beta-bin) pair is a PB-subdomain.

    With split_components=True each bin is further split into face-connected
    components (the default keeps bins whole regardless of connectivity).
    """
    if not (r_alpha > 1.0 and r_beta > 1.0):
        raise ValueError("thresholds must be > 1 (inf allowed)")
    pb_labels = np.full(mesh.n_cells, -1, dtype=np.int64)
    grid_shape = (mesh.nz, mesh.ny, mesh.nx)
    structure = ndimage.generate_binary_structure(3, 1)
    next_id = 0
    for geo in np.unique(geo_labels):
        cells = np.flatnonzero(geo_labels == geo)
        a, b = field.alpha[cells], field.beta[cells]
        la = _n_levels(a.max(), a.min(), r_alpha)
        lb = _n_levels(b.max(), b.min(), r_beta)
        ia = _interval_bins(a, a.min(), a.max(), la)
        ib = _interval_bins(b, b.min(), b.max(), lb)
        key = (ia - 1) * lb + (ib - 1)
        uniq, inv = np.unique(key, return_inverse=True)
        if split_components:
            for u in range(uniq.size):
                mask = np.zeros(mesh.n_cells, dtype=bool)
                mask[cells[inv == u]] = True
                comp, ncomp = ndimage.label(mask.reshape(grid_shape), structure=structure)
                comp = comp.ravel()
                pb_labels[mask] = next_id + comp[mask] - 1
                next_id += ncomp
        else:
            pb_labels[cells] = next_id + inv
            next_id += uniq.size
    return PbPartition._from_labels(geo_labels, pb_labels, field)


# ---- glob classification ---------------------------------------------------


def _neighbor_sets(entity_per_cell, labels):
    """Map entity id -> sorted tuple of unique cell labels containing it."""
    k = entity_per_cell.shape[1]
    flat = entity_per_cell.ravel()
    labs = np.repeat(np.asarray(labels), k)
    pairs = np.unique(np.column_stack([flat, labs]), axis=0)
    out = {}
    ids, starts = np.unique(pairs[:, 0], return_index=True)
    starts = np.append(starts, pairs.shape[0])
    for j, eid in enumerate(ids):
        out[int(eid)] = tuple(pairs[starts[j]:starts[j + 1], 1].tolist())
    return out


@dataclass
class Glob:
    """Maximal set of interface entities sharing one PB-neighbor set."""

    gid: int
    kind: str  # "face" | "edge" | "corner"
    neigh_pb: tuple
    neigh_geo: tuple
    edges: np.ndarray      # fine-edge ids (free DOF carriers)
    vertices: np.ndarray   # fine-vertex ids

    @property
    def ndof(self):
        return self.edges.size


@dataclass
class GlobSet:
    globs: list
    edge_glob: dict          # interface fine-edge id -> glob id
    vertex_glob: dict        # interface fine-vertex id -> glob id
    vertex_neigh_pb: dict    # interface fine-vertex id -> tuple of pb ids
    interface_dof_mask: np.ndarray = field(repr=False, default=None)

    def edge_globs(self):
        return [g for g in self.globs if g.kind == "edge"]

    def face_globs(self):
        return [g for g in self.globs if g.kind == "face"]


def classify_globs(mesh: BoxMesh, space: EdgeSpace, pbp: PbPartition) -> GlobSet:
    """Group interface fine entities into globs by their PB-neighbor sets.

    The interface is defined by the geometric partition (entities contained
    in >= 2 geometric subdomains and not on the domain boundary); the
    classification key is the PB-neighbor set.
    """
    edge_geo = _neighbor_sets(mesh.cell_edges, pbp.geo_labels)
    edge_pb = _neighbor_sets(mesh.cell_edges, pbp.pb_labels)
    vert_geo = _neighbor_sets(mesh.cell_vertices, pbp.geo_labels)
    vert_pb = _neighbor_sets(mesh.cell_vertices, pbp.pb_labels)

    iface_edges = [
        e for e in range(mesh.n_edges)
        if not space.dirichlet_mask[e] and len(edge_geo[e]) >= 2
    ]
    iface_verts = [
        v for v in range(mesh.n_vertices)
        if not mesh.vertex_on_boundary[v] and len(vert_geo[v]) >= 2
    ]

    groups = {}
    for e in iface_edges:
        groups.setdefault(edge_pb[e], [[], []])[0].append(e)
    for v in iface_verts:
        groups.setdefault(vert_pb[v], [[], []])[1].append(v)

    globs = []
    edge_glob, vertex_glob = {}, {}
    for key in sorted(groups):
        edges, verts = groups[key]
        gid = len(globs)
        ndof = len(edges)
        if ndof == 0:
            kind = "corner"
        elif len(key) == 2:
            kind = "face"
        else:
            kind = "edge"
        neigh_geo = tuple(sorted({int(pbp.pb_to_geo[p]) for p in key}))
        globs.append(Glob(gid, kind, key, neigh_geo,
                          np.array(edges, dtype=np.int64),
                          np.array(verts, dtype=np.int64)))
        for e in edges:
            edge_glob[e] = gid
        for v in verts:
            vertex_glob[v] = gid

    mask = np.zeros(space.n_dofs, dtype=bool)
    if iface_edges:
        mask[space.dof_of_edge[np.array(iface_edges)]] = True
    vertex_neigh_pb = {v: vert_pb[v] for v in iface_verts}
    return GlobSet(globs, edge_glob, vertex_glob, vertex_neigh_pb, mask)
