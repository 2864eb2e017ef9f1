import numpy as np
import pytest
import scipy.sparse as sp

from pbbddc.linalg import NotSpdError, factorize, pcg


def random_spd(n, rng):
    B = rng.standard_normal((n, n))
    return B @ B.T + n * np.eye(n)


def test_spd_factorization_matches_dense_solve():
    rng = np.random.default_rng(0)
    A = random_spd(30, rng)
    b = rng.standard_normal(30)
    f = factorize(sp.csc_matrix(A), kind="spd")
    assert np.allclose(f.solve(b), np.linalg.solve(A, b), atol=1e-10)


def test_spd_factorization_rejects_indefinite():
    A = sp.csc_matrix(np.diag([1.0, -1.0, 2.0]))
    with pytest.raises(NotSpdError):
        factorize(A, kind="spd")


def test_indefinite_factorization_solves_saddle_system():
    rng = np.random.default_rng(1)
    A = random_spd(10, rng)
    C = rng.standard_normal((3, 10))
    S = np.block([[A, C.T], [C, np.zeros((3, 3))]])
    b = rng.standard_normal(13)
    f = factorize(sp.csc_matrix(S), kind="symmetric_indefinite")
    assert np.allclose(S @ f.solve(b), b, atol=1e-9)


def test_pcg_agrees_with_direct_solve():
    rng = np.random.default_rng(2)
    A = random_spd(50, rng)
    b = rng.standard_normal(50)
    diag = np.diag(A)
    x, rep = pcg(lambda v: A @ v, lambda r: r / diag, b, tol=1e-12, maxit=200)
    assert rep.converged
    assert np.allclose(x, np.linalg.solve(A, b), atol=1e-8)
    assert np.linalg.norm(b - A @ x) <= 1e-12 * np.linalg.norm(b)


def test_pcg_lanczos_estimates_bound_true_spectrum():
    # eigenvalue estimates from the CG tridiagonal sit inside the true
    # spectrum of P A and tighten toward it
    rng = np.random.default_rng(3)
    A = random_spd(40, rng)
    b = rng.standard_normal(40)
    x, rep = pcg(lambda v: A @ v, lambda r: r, b, tol=1e-14, maxit=200)
    lam = np.linalg.eigvalsh(A)
    lo, hi = rep.lanczos_eigs[0], rep.lanczos_eigs[-1]
    assert lam[0] - 1e-8 <= lo <= hi <= lam[-1] + 1e-8
    assert hi / lo <= lam[-1] / lam[0] + 1e-6
    assert rep.condition_estimate >= 1.0


def test_pcg_zero_rhs():
    A = np.eye(4)
    x, rep = pcg(lambda v: A @ v, lambda r: r, np.zeros(4))
    assert rep.converged and rep.iterations == 0
    assert np.all(x == 0.0)


def test_pcg_reports_nonconvergence():
    rng = np.random.default_rng(4)
    A = random_spd(60, rng)
    b = rng.standard_normal(60)
    x, rep = pcg(lambda v: A @ v, lambda r: r, b, tol=1e-14, maxit=2)
    assert not rep.converged
    assert rep.iterations == 2
