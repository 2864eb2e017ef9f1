"""Balancing domain decomposition by constraints for edge-element systems.

The preconditioner combines independent subdomain Neumann problems, a coarse
problem built from tangential-average and gradient-killing constraints on
coarse edges, and an interior correction, glued together through a
physics-aware weighted average over the PB-subdomain neighbor sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .assembly import assemble_global, assemble_subdomain
from .coarse import ChangeOfBasis, constraint_rows, partition_coarse_edges
from .fespace import CoefficientField, EdgeSpace
from .linalg import Factorization, NotSpdError, factorize
from .mesh import BoxMesh
from .partition import GlobSet, PbPartition, classify_globs

SCALINGS = ("cardinality", "alpha", "beta", "omega")


def compute_weights(globset: GlobSet, pbp: PbPartition, scaling="omega", h=None):
    """Interface weights per (glob, geometric subdomain), Eq.-(14)-style.

    For a glob shared by PB-subdomains N, the weight of geometric subdomain D
    is sum(chi_D') over D' in N contained in D, divided by sum(chi_D') over
    all of N.  chi is 1 (cardinality), the averaged alpha or beta, or the
    combination alpha + beta*h^2 ("omega").
    """
    if scaling not in SCALINGS:
        raise ValueError(f"unknown scaling {scaling!r}")
    if scaling == "cardinality":
        chi = np.ones(pbp.n_pb)
    elif scaling == "alpha":
        chi = pbp.alpha_bar.copy()
    elif scaling == "beta":
        chi = pbp.beta_bar.copy()
    else:
        if h is None:
            raise ValueError("omega scaling needs the mesh size h")
        chi = pbp.alpha_bar + pbp.beta_bar * h * h
    weights = {}
    for g in globset.globs:
        vals = chi[list(g.neigh_pb)]
        total = vals.sum()
        if not total > 0.0:
            raise ValueError(
                f"zero total weight on glob {g.gid} under {scaling} scaling"
            )
        per_geo = {}
        for pb, v in zip(g.neigh_pb, vals):
            geo = int(pbp.pb_to_geo[pb])
            per_geo[geo] = per_geo.get(geo, 0.0) + v / total
        weights[g.gid] = per_geo
    return weights


def perturb_mass(M_i, M_global, gdofs, iface_local):
    """Replace interface-interface entries of a subdomain mass matrix by the
    corresponding fully assembled global entries."""
    out = M_i.tocoo(copy=True)
    on_iface = np.zeros(gdofs.size, dtype=bool)
    on_iface[iface_local] = True
    sel = on_iface[out.row] & on_iface[out.col]
    if sel.any():
        glob_vals = np.asarray(
            M_global[gdofs[out.row[sel]], gdofs[out.col[sel]]]
        ).ravel()
        data = out.data.copy()
        data[sel] = glob_vals
        out = sp.coo_matrix((data, (out.row, out.col)), shape=out.shape)
    return out.tocsr()


@dataclass
class _Sub:
    """Per-subdomain pieces of the preconditioner."""

    gdofs: np.ndarray
    weights: np.ndarray
    interior: np.ndarray              # local positions of interior DOFs
    interior_fact: Factorization
    saddle_fact: Factorization
    n_loc: int
    Phi: np.ndarray                   # coarse basis, local x local-coarse
    coarse_ids: np.ndarray            # global coarse DOF ids
    basis: object                     # SubdomainBasis (change of basis ops)


class BddcPreconditioner:
    """PB-BDDC preconditioner for the curl-curl plus mass edge-element system.

    Parameters
    ----------
    scaling : weighting of the interface average ("cardinality", "alpha",
        "beta", "omega").
    perturbed : replace the local Neumann mass blocks on the interface by
        fully assembled entries, making the local problems spectrally closer
        to the global one.
    """

    def __init__(self, mesh: BoxMesh, space: EdgeSpace, field: CoefficientField,
                 pbp: PbPartition, scaling="omega", perturbed=False):
        self.mesh, self.space, self.field, self.pbp = mesh, space, field, pbp
        self.scaling, self.perturbed = scaling, perturbed

        K, M, _ = assemble_global(space, field)
        self.A = (K + M).tocsr()

        self.globset = classify_globs(mesh, space, pbp)
        self.coarse_edges = partition_coarse_edges(mesh, space, self.globset)
        self.cob = ChangeOfBasis(mesh, space, self.globset, self.coarse_edges)

        h = min(mesh.hx, mesh.hy, mesh.hz)
        glob_w = compute_weights(self.globset, pbp, scaling, h)

        # global coarse DOF numbering: consecutive per coarse edge
        offsets = np.cumsum([0] + [ce.n_coarse_dofs for ce in self.coarse_edges])
        self.n_coarse = int(offsets[-1])
        ce_of_geo = {}
        for ce in self.coarse_edges:
            for geo in self.globset.globs[ce.glob_id].neigh_geo:
                ce_of_geo.setdefault(geo, []).append(ce)

        dof_glob = np.full(space.n_dofs, -1, dtype=np.int64)
        for e, gid in self.globset.edge_glob.items():
            dof_glob[space.dof_of_edge[e]] = gid

        self.subs = []
        A_c = np.zeros((self.n_coarse, self.n_coarse))
        for i in range(pbp.n_geo):
            Ki, Mi, _, gdofs = assemble_subdomain(space, field, pbp.geo_labels, i)
            n_loc = gdofs.size
            iface_local = np.flatnonzero(self.globset.interface_dof_mask[gdofs])
            interior = np.flatnonzero(~self.globset.interface_dof_mask[gdofs])

            if perturbed:
                Mi_n = perturb_mass(Mi, M.tocsr(), gdofs, iface_local)
            else:
                Mi_n = Mi
            A_t = (Ki + Mi_n).tocsc()

            A_int = (Ki + Mi).tocsr()[interior, :][:, interior].tocsc()
            try:
                interior_fact = factorize(A_int, kind="spd")
            except NotSpdError as err:
                raise NotSpdError(
                    f"interior block of subdomain {i} is not SPD", err.pivot_index,
                    err.pivot_value,
                ) from err

            w = np.ones(n_loc)
            loc_globs = dof_glob[gdofs]
            for p in iface_local:
                w[p] = glob_w[loc_globs[p]].get(i, 0.0)

            chains = ce_of_geo.get(i, [])
            pos = {int(g): k for k, g in enumerate(gdofs)}
            rows, cols, vals, cids = [], [], [], []
            r0 = 0
            for ce in chains:
                cr = constraint_rows(ce)
                for k in range(cr.shape[0]):
                    for a in range(ce.n_e):
                        rows.append(r0 + k)
                        cols.append(pos[int(ce.dofs[a])])
                        vals.append(cr[k, a])
                    cids.append(offsets[ce.cid] + k)
                r0 += cr.shape[0]
            n_ci = r0
            Ci = sp.csr_matrix((vals, (rows, cols)), shape=(n_ci, n_loc))
            S = sp.bmat([[A_t, Ci.T], [Ci, None]], format="csc")
            try:
                saddle_fact = factorize(S, kind="symmetric_indefinite")
            except Exception as err:
                raise RuntimeError(
                    f"singular constrained Neumann problem on subdomain {i} "
                    f"({n_ci} constraints, coarse edges "
                    f"{[ce.cid for ce in chains]})"
                ) from err

            Phi = np.zeros((n_loc, n_ci))
            for k in range(n_ci):
                rhs = np.zeros(n_loc + n_ci)
                rhs[n_loc + k] = 1.0
                Phi[:, k] = saddle_fact.solve(rhs)[:n_loc]
            cids = np.array(cids, dtype=np.int64)
            if n_ci:
                A_c[np.ix_(cids, cids)] += Phi.T @ (A_t @ Phi)

            self.subs.append(_Sub(
                gdofs=gdofs, weights=w, interior=interior,
                interior_fact=interior_fact, saddle_fact=saddle_fact,
                n_loc=n_loc, Phi=Phi, coarse_ids=cids,
                basis=self.cob.subdomain_view(gdofs),
            ))

        self.A_c = A_c
        if self.n_coarse:
            try:
                self.coarse_fact = factorize(sp.csc_matrix(A_c), kind="spd")
            except NotSpdError as err:
                raise NotSpdError(
                    "coarse matrix is not SPD", err.pivot_index, err.pivot_value
                ) from err
        else:
            self.coarse_fact = None

    # -- elementary pieces ---------------------------------------------------

    def interior_correction(self, r):
        """Block-diagonal solve on subdomain-interior DOFs (zero elsewhere)."""
        z = np.zeros_like(r)
        for s in self.subs:
            gi = s.gdofs[s.interior]
            z[gi] = s.interior_fact.solve(r[gi])
        return z

    def weighted_average(self, vecs):
        """Combine per-subdomain (new-basis) vectors into one global vector."""
        y = np.zeros(self.space.n_dofs)
        for s, v in zip(self.subs, vecs):
            y[s.gdofs] += s.weights * v
        return y

    def apply(self, r):
        """One application of the preconditioner to a residual."""
        u1 = self.interior_correction(r)
        s_res = r - self.A @ u1
        t = self.cob.C.T @ s_res

        r_c = np.zeros(self.n_coarse)
        locals_g = []
        for s in self.subs:
            g_i = s.basis.inv_T(s.weights * t[s.gdofs])
            locals_g.append(g_i)
            if s.coarse_ids.size:
                r_c[s.coarse_ids] += s.Phi.T @ g_i

        u_c = self.coarse_fact.solve(r_c) if self.n_coarse else r_c

        y = np.zeros(self.space.n_dofs)
        for s, g_i in zip(self.subs, locals_g):
            rhs = np.zeros(s.n_loc + s.coarse_ids.size)
            rhs[: s.n_loc] = g_i
            v_i = s.saddle_fact.solve(rhs)[: s.n_loc]
            if s.coarse_ids.size:
                v_i = v_i + s.Phi @ u_c[s.coarse_ids]
            y[s.gdofs] += s.weights * s.basis.inv(v_i)

        w = self.cob.C @ y
        z2 = w - self.interior_correction(self.A @ w)
        return u1 + z2
