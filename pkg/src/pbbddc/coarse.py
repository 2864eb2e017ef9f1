"""Coarse-edge chains, tangential change of basis, and primal constraints.

Each "edge" glob is split into open chains of fine edges.  On every chain a
local change of basis replaces the fine tangential DOFs with one coarse DOF
carrying the tangential average over the chain plus discrete-gradient DOFs
at the interior chain nodes.  Primal constraints then fix the coarse average
and kill the gradient components across subdomains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fespace import EdgeSpace
from .mesh import BoxMesh
from .partition import GlobSet


@dataclass
class CoarseEdge:
    """One open chain of fine edges with a common coarse orientation.

    ``edges[a]`` connects chain vertices ``verts[a]`` and ``verts[a+1]``;
    ``signs[a]`` is +1 when the fine-edge orientation (tail -> head) agrees
    with the chain direction.
    """

    cid: int
    glob_id: int
    edges: np.ndarray
    verts: np.ndarray
    signs: np.ndarray
    lengths: np.ndarray
    dofs: np.ndarray

    @property
    def n_e(self):
        return self.edges.size

    @property
    def n_coarse_dofs(self):
        """Average constraint always; gradient constraint needs >= 2 edges."""
        return 2 if self.n_e > 1 else 1


def _chains_for_glob(edges, glob_vertex_set, vertex_on_boundary, edge_vertices):
    """Split one glob's fine edges into chains.

    Chain breakpoints are vertices of degree 1 (within the glob), vertices of
    degree > 2 (n-furcations), vertices belonging to other globs or to the
    domain boundary.  Closed loops get an arbitrary (lowest-id) breakpoint.
    Traversal ties are broken by smallest endpoint id so the decomposition is
    deterministic.
    """
    count, adj = {}, {}
    for e in edges:
        for v in edge_vertices[e]:
            count[v] = count.get(v, 0) + 1
            adj.setdefault(v, set()).add(e)
    breakpoints = {
        v for v, c in count.items()
        if c != 2 or v not in glob_vertex_set or vertex_on_boundary[v]
    }
    remaining = set(edges)
    chains = []
    while remaining:
        active_breaks = [v for v in breakpoints if count[v] > 0]
        if active_breaks:
            start = min(active_breaks)
        else:  # only closed loops remain
            start = min(v for v, c in count.items() if c > 0)
            breakpoints.add(start)
        cur, chain_v, chain_e = start, [start], []
        while True:
            nxt, e = min(
                (int(edge_vertices[e].sum()) - cur, e)
                for e in adj[cur] if e in remaining
            )
            remaining.discard(e)
            adj[cur].discard(e)
            adj[nxt].discard(e)
            count[cur] -= 1
            count[nxt] -= 1
            cur = nxt
            chain_v.append(cur)
            chain_e.append(e)
            if cur in breakpoints:
                break
        chains.append((chain_v, chain_e))
    return chains


def partition_coarse_edges(mesh: BoxMesh, space: EdgeSpace, globset: GlobSet):
    """Split every edge glob into coarse-edge chains (deterministic order)."""
    coarse = []
    for g in globset.globs:
        if g.kind != "edge":
            continue
        gverts = set(g.vertices.tolist())
        for chain_v, chain_e in _chains_for_glob(
            sorted(g.edges.tolist()), gverts,
            mesh.vertex_on_boundary, mesh.edge_vertices,
        ):
            ev = mesh.edge_vertices[chain_e]
            signs = np.where(ev[:, 0] == np.array(chain_v[:-1]), 1, -1)
            coarse.append(CoarseEdge(
                cid=len(coarse),
                glob_id=g.gid,
                edges=np.array(chain_e, dtype=np.int64),
                verts=np.array(chain_v, dtype=np.int64),
                signs=signs.astype(np.int64),
                lengths=mesh.edge_lengths[chain_e],
                dofs=space.dof_of_edge[chain_e],
            ))
    return coarse


def build_QE(signs, lengths):
    """Chain-local change of basis (old tangential DOFs = QE @ new DOFs).

    Columns 0..n_e-2 are discrete gradients of the interior chain nodes;
    the last column is the coarse function with unit tangential average.
    """
    n_e = signs.size
    Q = np.zeros((n_e, n_e))
    for b in range(1, n_e):
        Q[b - 1, b - 1] = signs[b - 1]
        Q[b, b - 1] = -signs[b]
    Q[:, n_e - 1] = signs * lengths
    return Q


def hat_integrals(lengths):
    """Integrals of the interior-node hat functions along the chain."""
    return 0.5 * (lengths[:-1] + lengths[1:])


def constraint_rows(ce: CoarseEdge):
    """Primal constraint rows over the chain's DOFs, in the original basis.

    Row 0 fixes the tangential average (signed sum of fine DOFs); row 1, for
    chains with interior nodes, kills the gradient components: it is the
    weighted-jump functional pulled back through the change of basis.
    """
    rows = [ce.signs.astype(float)]
    if ce.n_e > 1:
        QE = build_QE(ce.signs, ce.lengths)
        c_new = np.zeros(ce.n_e)
        c_new[: ce.n_e - 1] = -hat_integrals(ce.lengths)
        rows.append(np.linalg.solve(QE.T, c_new))
    return np.array(rows)


class _CoarseEdgeBlock:
    """Per-subdomain restriction of one chain's change of basis."""

    def __init__(self, ce, slots, f_rows, f_cols, f_signs):
        self.ce = ce
        self.slots = slots          # local indices of chain DOFs, chain order
        self.QE = build_QE(ce.signs, ce.lengths)
        self.f_rows = f_rows        # local indices of coupled non-chain DOFs
        self.f_cols = f_cols        # gradient column (0..n_e-2) per row
        self.f_signs = f_signs.astype(float)


class SubdomainBasis:
    """Applies C, C^-1, C^T, C^-T to local vectors of one subdomain.

    DOFs outside the chains keep their identity except for interface DOFs
    adjacent to interior chain nodes, which pick up gradient couplings.
    """

    def __init__(self, blocks):
        self.blocks = blocks

    def fwd(self, u_new):
        u = u_new.copy()
        for b in self.blocks:
            u[b.slots] = b.QE @ u_new[b.slots]
            if b.f_rows.size:
                u[b.f_rows] += b.f_signs * u_new[b.slots[b.f_cols]]
        return u

    def inv(self, u_old):
        u = u_old.copy()
        for b in self.blocks:
            u[b.slots] = np.linalg.solve(b.QE, u_old[b.slots])
            if b.f_rows.size:
                u[b.f_rows] -= b.f_signs * u[b.slots[b.f_cols]]
        return u

    def fwd_T(self, g):
        out = g.copy()
        for b in self.blocks:
            t = b.QE.T @ g[b.slots]
            if b.f_rows.size:
                np.add.at(t, b.f_cols, b.f_signs * g[b.f_rows])
            out[b.slots] = t
        return out

    def inv_T(self, g):
        out = g.copy()
        for b in self.blocks:
            t = g[b.slots].copy()
            if b.f_rows.size:
                np.subtract.at(t, b.f_cols, b.f_signs * out[b.f_rows])
            out[b.slots] = np.linalg.solve(b.QE.T, t)
        return out


class ChangeOfBasis:
    """Global sparse change of basis and its per-subdomain restrictions."""

    def __init__(self, mesh, space, globset, coarse_edges):
        self.coarse_edges = coarse_edges
        n = space.n_dofs
        chain_edge_set = set()
        for ce in coarse_edges:
            chain_edge_set.update(ce.edges.tolist())

        # interface free edges outside all chains, keyed by endpoint vertex
        incident = {}
        for e, gid in globset.edge_glob.items():
            if e in chain_edge_set:
                continue
            tail, head = mesh.edge_vertices[e]
            incident.setdefault(int(tail), []).append((e, -1.0))
            incident.setdefault(int(head), []).append((e, 1.0))

        rows = list(range(n))
        cols = list(range(n))
        vals = [1.0] * n
        self._couplings = []  # per chain: (f_edges, f_cols, f_signs)
        for ce in coarse_edges:
            QE = build_QE(ce.signs, ce.lengths)
            for a in range(ce.n_e):
                rows[ce.dofs[a]] = -1  # drop identity row, re-add block below
            for a in range(ce.n_e):
                for j in range(ce.n_e):
                    if QE[a, j] != 0.0:
                        rows.append(int(ce.dofs[a]))
                        cols.append(int(ce.dofs[j]))
                        vals.append(QE[a, j])
            f_edges, f_cols, f_signs = [], [], []
            for j in range(ce.n_e - 1):
                v_b = int(ce.verts[j + 1])  # interior chain node
                for e, s in incident.get(v_b, []):
                    f_edges.append(e)
                    f_cols.append(j)
                    f_signs.append(s)
                    rows.append(int(space.dof_of_edge[e]))
                    cols.append(int(ce.dofs[j]))
                    vals.append(s)
            self._couplings.append((
                np.array(f_edges, dtype=np.int64),
                np.array(f_cols, dtype=np.int64),
                np.array(f_signs),
            ))
        keep = [k for k, r in enumerate(rows) if r >= 0]
        rows = np.asarray(rows)[keep]
        cols = np.asarray(cols)[keep]
        vals = np.asarray(vals)[keep]
        self.C = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        self._space = space

    def subdomain_view(self, gdofs):
        """Restriction to a subdomain given its global DOF list."""
        pos = {int(g): i for i, g in enumerate(gdofs)}
        blocks = []
        for ce, (f_edges, f_cols, f_signs) in zip(self.coarse_edges, self._couplings):
            if int(ce.dofs[0]) not in pos:
                continue
            slots = np.array([pos[int(d)] for d in ce.dofs], dtype=np.int64)
            fr, fc, fs = [], [], []
            for e, c, s in zip(f_edges, f_cols, f_signs):
                d = int(self._space.dof_of_edge[e])
                if d in pos:
                    fr.append(pos[d])
                    fc.append(int(c))
                    fs.append(s)
            blocks.append(_CoarseEdgeBlock(
                ce, slots,
                np.array(fr, dtype=np.int64),
                np.array(fc, dtype=np.int64),
                np.array(fs),
            ))
        return SubdomainBasis(blocks)
