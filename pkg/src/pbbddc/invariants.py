"""Runtime invariant suite shared by the `check` CLI command and the tests.

Every check returns (name, passed, detail).  The checks encode the
mathematical identities the preconditioner construction relies on: weight
partition of unity, change-of-basis consistency, constraint reproduction,
sub-assembly additivity, gradient preservation of the averaging, and the
spectral lower bound of the unperturbed preconditioner.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse.linalg as spla

from .assembly import assemble_global, assemble_subdomain, gradient_interpolant
from .bddc import SCALINGS, BddcPreconditioner, compute_weights
from .coarse import _chains_for_glob, constraint_rows
from .config import ProblemConfig
from .driver import build_field, build_pb_partition
from .fespace import EdgeSpace
from .linalg import pcg
from .mesh import BoxMesh
from .partition import classify_globs, geometric_partition


def default_battery():
    """Small configurations exercising every scenario and pb mode."""
    mk = ProblemConfig
    return [
        mk(nx=4, ny=4, nz=4, Nx=2, Ny=2, Nz=2, scenario="homogeneous",
           scaling="cardinality"),
        mk(nx=6, ny=6, nz=6, Nx=3, Ny=3, Nz=3, scenario="checkerboard",
           alpha_white=1e2, beta_white=1.0, alpha_black=1e4, beta_black=1e-2,
           pb_mode="material", scaling="omega", perturbed=True),
        mk(nx=6, ny=6, nz=6, Nx=3, Ny=3, Nz=3, scenario="channels", gamma=0.5,
           alpha_white=1e2, beta_white=1e-2, alpha_black=1.0, beta_black=1.0,
           pb_mode="material", scaling="alpha", perturbed=True),
        mk(nx=6, ny=6, nz=6, Nx=2, Ny=2, Nz=2, scenario="sinusoidal", c_max=4.0,
           pb_mode="relaxed", r_alpha=100.0, r_beta=100.0, scaling="omega"),
    ]


class Setup:
    """All pipeline pieces for one configuration, built once."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.mesh = BoxMesh(cfg.nx, cfg.ny, cfg.nz, cfg.Lx, cfg.Ly, cfg.Lz)
        self.space = EdgeSpace(self.mesh)
        self.field = build_field(self.mesh, cfg)
        self.geo = geometric_partition(self.mesh, cfg.Nx, cfg.Ny, cfg.Nz)
        self.pbp = build_pb_partition(self.mesh, self.geo, self.field, cfg)
        self.prec = BddcPreconditioner(
            self.mesh, self.space, self.field, self.pbp,
            scaling=cfg.scaling, perturbed=cfg.perturbed,
        )

    @property
    def label(self):
        return f"{self.cfg.scenario}/{self.cfg.pb_mode}/{self.cfg.scaling}"


def check_weights_partition_of_unity(st: Setup, tol=1e-14):
    h = min(st.mesh.hx, st.mesh.hy, st.mesh.hz)
    worst = 0.0
    for scaling in SCALINGS:
        w = compute_weights(st.prec.globset, st.pbp, scaling, h)
        for gid, per_geo in w.items():
            worst = max(worst, abs(sum(per_geo.values()) - 1.0))
    return worst <= tol, f"max |sum(w)-1| = {worst:.3e}"


def check_basis_roundtrip(st: Setup, tol=1e-12):
    rng = np.random.default_rng(7)
    worst = 0.0
    for s in st.prec.subs:
        x = rng.standard_normal(s.n_loc)
        scale = np.linalg.norm(x)
        worst = max(worst, np.linalg.norm(s.basis.inv(s.basis.fwd(x)) - x) / scale)
        worst = max(worst, np.linalg.norm(s.basis.fwd_T(s.basis.inv_T(x)) - x) / scale)
        # per-subdomain action must agree with the global sparse matrix
        g = np.zeros(st.space.n_dofs)
        g[s.gdofs] = x
        worst = max(worst, np.linalg.norm(
            (st.prec.cob.C @ g)[s.gdofs] - s.basis.fwd(x)) / scale)
    return worst <= tol, f"max round-trip error = {worst:.3e}"


def check_coarse_basis_constraints(st: Setup, tol=1e-10):
    """C_cstr Phi_i = identity, per subdomain."""
    worst = 0.0
    for i, s in enumerate(st.prec.subs):
        n_ci = s.coarse_ids.size
        if n_ci == 0:
            continue
        pos = {int(g): k for k, g in enumerate(s.gdofs)}
        Ci = np.zeros((n_ci, s.n_loc))
        r = 0
        for ce in st.prec.coarse_edges:
            if int(ce.dofs[0]) not in pos:
                continue
            cr = constraint_rows(ce)
            for k in range(cr.shape[0]):
                for a in range(ce.n_e):
                    Ci[r + k, pos[int(ce.dofs[a])]] = cr[k, a]
            r += cr.shape[0]
        worst = max(worst, np.abs(Ci @ s.Phi - np.eye(n_ci)).max())
    return worst <= tol, f"max |C Phi - I| = {worst:.3e}"


def check_subassembly(st: Setup, tol=1e-13):
    """Sum of subdomain stiffness+mass contributions equals the global matrix."""
    K, M, _ = assemble_global(st.space, st.field)
    A = (K + M).tocsr()
    acc = A * 0.0
    import scipy.sparse as sp
    for i in range(st.pbp.n_geo):
        Ki, Mi, _, gdofs = assemble_subdomain(
            st.space, st.field, st.pbp.geo_labels, i)
        n = st.space.n_dofs
        R = sp.csr_matrix(
            (np.ones(gdofs.size), (gdofs, np.arange(gdofs.size))),
            shape=(n, gdofs.size),
        )
        acc = acc + R @ (Ki + Mi) @ R.T
    scale = max(np.abs(A.data).max(), 1.0)
    worst = np.abs((acc - A).data).max() / scale if (acc - A).nnz else 0.0
    return worst <= tol, f"max |sum_i A_i - A| / |A| = {worst:.3e}"


def check_constraint_agreement(st: Setup, tol=1e-12):
    """Constraint values of a continuous function agree across subdomains."""
    rng = np.random.default_rng(11)
    u = rng.standard_normal(st.space.n_dofs)
    worst = 0.0
    for ce in st.prec.coarse_edges:
        cr = constraint_rows(ce)
        vals = None
        for s in st.prec.subs:
            pos = {int(g): k for k, g in enumerate(s.gdofs)}
            if int(ce.dofs[0]) not in pos:
                continue
            v = cr @ u[ce.dofs]
            if vals is None:
                vals = v
            else:
                worst = max(worst, np.abs(v - vals).max() / max(np.abs(vals).max(), 1))
    return worst <= tol, f"max cross-subdomain disagreement = {worst:.3e}"


def check_gradient_preservation(st: Setup, tol=1e-10):
    """Averaging of broken discrete gradients stays curl-free.

    Each subdomain carries the edge interpolant of the gradient of its own
    nodal potential.  Potentials agree on coarse faces, vanish at coarse-edge
    endpoints and on the domain boundary, and differ freely everywhere else
    (subdomain interiors and coarse-edge interior nodes).  For such inputs the
    change of basis makes glob-constant weighting return an exact discrete
    gradient, so the averaged function has zero curl energy.  Allowing the
    potentials to also differ on face interiors (or at coarse-edge endpoints)
    breaks the property for any glob-constant weighting, so the test stays
    within what the operator guarantees.
    """
    from .fespace import CoefficientField
    from .partition import _neighbor_sets

    curl_field = CoefficientField.constant(st.mesh, 1.0, 1.0)
    K, _, _ = assemble_global(st.space, curl_field)
    rng = np.random.default_rng(3)

    chain_ends = set()
    chain_interior = set()
    for ce in st.prec.coarse_edges:
        chain_ends.update((int(ce.verts[0]), int(ce.verts[-1])))
        chain_interior.update(int(v) for v in ce.verts[1:-1])
    vert_geo = _neighbor_sets(st.mesh.cell_vertices, st.pbp.geo_labels)

    # shared part: nonzero only on the interface, zero at chain endpoints
    psi = rng.standard_normal(st.mesh.n_vertices)
    for v in range(st.mesh.n_vertices):
        if len(vert_geo[v]) < 2 or v in chain_ends:
            psi[v] = 0.0
    psi[st.mesh.vertex_on_boundary] = 0.0

    y = np.zeros(st.space.n_dofs)
    for i, s in enumerate(st.prec.subs):
        phi = psi.copy()
        for v in range(st.mesh.n_vertices):
            if (vert_geo[v] == (i,) or v in chain_interior) and not \
                    st.mesh.vertex_on_boundary[v]:
                phi[v] += rng.standard_normal()
        grad = gradient_interpolant(st.mesh, phi)
        u_i = grad[st.space.edge_of_dof[s.gdofs]]
        y[s.gdofs] += s.weights * s.basis.inv(u_i)
    w = st.prec.cob.C @ y
    energy = w @ (K @ w)
    bound = tol * spla.norm(K) * (w @ w)
    return energy <= bound, f"curl energy {energy:.3e} vs bound {bound:.3e}"


def check_pcg_vs_direct(st: Setup, tol=1e-6):
    _, _, f = assemble_global(st.space, st.field)
    x_ref = spla.spsolve(st.prec.A.tocsc(), f)
    x, rep = pcg(lambda v: st.prec.A @ v, st.prec.apply, f, tol=1e-10, maxit=500)
    err = np.linalg.norm(x - x_ref) / np.linalg.norm(x_ref)
    return err <= tol and rep.converged, f"relative error = {err:.3e}"


def check_lambda_min(st: Setup, tol=1e-6):
    """Unperturbed preconditioned operator has lambda_min >= 1."""
    prec = st.prec
    if st.cfg.perturbed:
        prec = BddcPreconditioner(st.mesh, st.space, st.field, st.pbp,
                                  scaling=st.cfg.scaling, perturbed=False)
    _, _, f = assemble_global(st.space, st.field)
    _, rep = pcg(lambda v: prec.A @ v, prec.apply, f, tol=1e-10, maxit=500)
    lam_min = rep.lanczos_eigs[0]
    return lam_min >= 1.0 - tol, f"lambda_min_est = {lam_min:.12f}"


def check_edge_partition_cases():
    """Chain splitting on the four pathological synthetic inputs:
    disconnected components, foreign (V_p-like) nodes, n-furcations, loops."""
    ev = np.array([
        (0, 1), (1, 2),              # component A: open chain
        (10, 11), (11, 12),          # component B: disconnected from A
        (3, 4), (4, 5), (5, 6), (6, 7),  # chain with foreign node 5
        (20, 21), (21, 22), (21, 23),    # Y-furcation at 21
        (30, 31), (31, 32), (32, 33), (30, 33),  # closed loop
    ])
    edges = list(range(len(ev)))
    no_boundary = np.zeros(40, dtype=bool)
    glob_verts = set(range(40)) - {5}
    chains = _chains_for_glob(edges, glob_verts, no_boundary, ev)
    used = [e for _, ce in chains for e in ce]
    detail = f"{len(chains)} chains: {[ce for _, ce in chains]}"
    counts = sorted(len(ce) for _, ce in chains)
    # expected: A -> 1 chain, B -> 1, split at node 5 -> 2, Y -> 3, loop -> 1
    ok = sorted(used) == edges and counts == [1, 1, 1, 2, 2, 2, 2, 4]
    for verts, _ in chains:
        interior = verts[1:-1]
        ok = ok and 5 not in interior and 21 not in interior
    return ok, detail


def run_all(configs=None):
    """Run every invariant on every battery configuration."""
    results = []
    results.append(("edge-partition synthetic cases",) + check_edge_partition_cases())
    checks = [
        ("weight partition of unity", check_weights_partition_of_unity),
        ("change-of-basis round-trip", check_basis_roundtrip),
        ("coarse basis reproduces constraints", check_coarse_basis_constraints),
        ("subdomain assembly additivity", check_subassembly),
        ("constraint cross-subdomain agreement", check_constraint_agreement),
        ("gradient preservation of averaging", check_gradient_preservation),
        ("pcg agrees with direct solve", check_pcg_vs_direct),
        ("unperturbed lambda_min >= 1", check_lambda_min),
    ]
    for cfg in configs or default_battery():
        st = Setup(cfg)
        for name, fn in checks:
            ok, detail = fn(st)
            results.append((f"{name} [{st.label}]", ok, detail))
    return results
