"""Sparse symmetric linear algebra: assembly, direct factorization, PCG.

The direct solvers are thin wrappers around SuperLU; the SPD path checks
pivot signs so that a non-SPD matrix is rejected instead of silently
producing garbage. PCG records the CG coefficients and estimates the extreme
eigenvalues of the preconditioned operator from the associated Lanczos
tridiagonal matrix (no reorthogonalization, estimates only).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigh_tridiagonal


class SingularMatrixError(Exception):
    """Factorization hit an exactly singular (or numerically singular) pivot."""


class NotSpdError(Exception):
    """SPD factorization was requested but a non-positive pivot appeared."""

    def __init__(self, pivot_index: int, pivot_value: float):
        super().__init__(f"non-positive pivot {pivot_value:g} at index {pivot_index}")
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value


class PcgBreakdownError(Exception):
    """CG search direction has non-positive curvature p^T A p."""


def assemble_csr(n, rows, cols, vals):
    """Finalize coordinate triplets into CSR, summing duplicates."""
    A = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
    A = A.tocsr()
    A.sum_duplicates()
    return A


@dataclass
class Factorization:
    """Reusable direct factorization supporting multiple right-hand sides."""

    n: int
    kind: str
    _lu: object = field(repr=False, default=None)

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if self.n == 0:
            return np.zeros_like(b)
        return self._lu.solve(b)


def factorize(A, kind="spd"):
    """Factorize a (structurally symmetric) sparse matrix.

    kind="spd" uses a symmetric-mode LU without off-diagonal pivoting and
    verifies all pivots are positive (Cholesky-equivalent up to scaling).
    kind="symmetric_indefinite" accepts saddle-point systems; SuperLU with
    partial pivoting stands in for a sparse LDL^T, which scipy lacks.
    """
    A = sp.csc_matrix(A)
    n = A.shape[0]
    if A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if n == 0:
        return Factorization(n=0, kind=kind)
    try:
        if kind == "spd":
            lu = spla.splu(
                A,
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options={"SymmetricMode": True},
            )
            d = lu.U.diagonal()
            bad = np.flatnonzero(d <= 0.0)
            if bad.size:
                raise NotSpdError(int(bad[0]), float(d[bad[0]]))
        elif kind == "symmetric_indefinite":
            lu = spla.splu(A)
        else:
            raise ValueError(f"unknown factorization kind: {kind!r}")
    except RuntimeError as exc:  # SuperLU signals singularity this way
        msg = str(exc)
        if "singular" in msg.lower():
            raise SingularMatrixError(msg) from exc
        raise
    return Factorization(n=n, kind=kind, _lu=lu)


@dataclass
class SolveReport:
    """Outcome of a PCG solve, including Lanczos spectral estimates."""

    iterations: int
    converged: bool
    residual_history: list[float]
    lanczos_eigs: tuple[float, float]  # (lambda_min_est, lambda_max_est)

    @property
    def condition_estimate(self):
        lmin, lmax = self.lanczos_eigs
        return lmax / lmin if lmin > 0 else float("inf")


def _lanczos_from_cg(alphas, betas):
    """Extreme eigenvalue estimates of P*A from CG coefficients.

    The CG recurrence coefficients define the Lanczos tridiagonal
    T[k,k] = 1/alpha_k + beta_{k-1}/alpha_{k-1},
    T[k,k+1] = sqrt(beta_k)/alpha_k.
    """
    k = len(alphas)
    if k == 0:
        return (0.0, 0.0)
    diag = np.empty(k)
    diag[0] = 1.0 / alphas[0]
    for j in range(1, k):
        diag[j] = 1.0 / alphas[j] + betas[j - 1] / alphas[j - 1]
    if k == 1:
        return (float(diag[0]), float(diag[0]))
    off = np.array([np.sqrt(betas[j]) / alphas[j] for j in range(k - 1)])
    eigs = eigh_tridiagonal(diag, off, eigvals_only=True)
    return (float(eigs[0]), float(eigs[-1]))


def pcg(apply_A, apply_P, b, tol=1e-6, maxit=500, x0=None):
    """Preconditioned conjugate gradients with relative residual stopping.

    Converged means ||b - A x||_2 <= tol * ||r0||_2 within maxit iterations.
    apply_A and apply_P are callables vector -> vector; both must be SPD on
    the subspace of interest.
    """
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    r = b - apply_A(x) if x0 is not None else b.copy()
    rnorm0 = np.linalg.norm(r)
    history = [float(rnorm0)]
    if rnorm0 == 0.0:
        return x, SolveReport(0, True, history, (0.0, 0.0))

    z = apply_P(r)
    p = z.copy()
    rz = float(r @ z)
    alphas, betas = [], []
    converged = False
    it = 0
    for it in range(1, maxit + 1):
        Ap = apply_A(p)
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            raise PcgBreakdownError(f"p^T A p = {pAp:g} at iteration {it}")
        alpha = rz / pAp
        alphas.append(alpha)
        x += alpha * p
        r -= alpha * Ap
        rnorm = float(np.linalg.norm(r))
        history.append(rnorm)
        if rnorm <= tol * rnorm0:
            converged = True
            break
        z = apply_P(r)
        rz_new = float(r @ z)
        beta = rz_new / rz
        betas.append(beta)
        rz = rz_new
        p = z + beta * p

    eigs = _lanczos_from_cg(alphas, betas)
    return x, SolveReport(it, converged, history, eigs)
