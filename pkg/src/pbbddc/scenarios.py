"""Coefficient-field catalog for the benchmark problem families.

All scenarios sample piecewise-constant (alpha, beta) per cell; the
discontinuous ones also attach material ids so material-based PB-partitions
can be built.
"""

from __future__ import annotations

import numpy as np

from .fespace import CoefficientField
from .mesh import BoxMesh


def scenario_homogeneous(mesh: BoxMesh, alpha=1.0, beta=1.0):
    field = CoefficientField.constant(mesh, alpha, beta)
    field.material = np.zeros(mesh.n_cells, dtype=np.int64)
    return field


def _subdomain_indices(mesh, Nx, Ny, Nz):
    c = mesh.cell_coords
    return (c[:, 0] // (mesh.nx // Nx), c[:, 1] // (mesh.ny // Ny),
            c[:, 2] // (mesh.nz // Nz))


def scenario_checkerboard(mesh, Nx, Ny, Nz, alpha_white, beta_white,
                          alpha_black, beta_black):
    """Subdomain-wise constant coefficients, colored by index parity.

    Even (i+j+k) subdomains are white, odd ones black.
    """
    bx, by, bz = _subdomain_indices(mesh, Nx, Ny, Nz)
    black = ((bx + by + bz) % 2).astype(bool)
    alpha = np.where(black, alpha_black, alpha_white)
    beta = np.where(black, beta_black, beta_white)
    return CoefficientField(alpha.astype(float), beta.astype(float),
                            material=black.astype(np.int64))


def scenario_channels(mesh, Nx, Ny, Nz, gamma, alpha_white, beta_white,
                      alpha_black, beta_black):
    """Axis-aligned channels of square cross-section gamma*H through each
    subdomain's minimal corner (white), over a constant background (black).

    One channel per axis per subdomain row, spanning the full domain.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must be in (0, 1]")
    cells_per = (mesh.nx // Nx, mesh.ny // Ny, mesh.nz // Nz)
    width = [gamma * cp for cp in cells_per]
    for w in width:
        if abs(w - round(w)) > 1e-12:
            raise ValueError(
                f"channel width gamma*H must be a whole number of cells "
                f"(gamma={gamma}, cells per subdomain {cells_per})"
            )
    width = [int(round(w)) for w in width]
    c = mesh.cell_coords
    in_band = [c[:, a] % cells_per[a] < width[a] for a in range(3)]
    white = ((in_band[1] & in_band[2]) | (in_band[0] & in_band[2])
             | (in_band[0] & in_band[1]))
    alpha = np.where(white, alpha_white, alpha_black)
    beta = np.where(white, beta_white, beta_black)
    return CoefficientField(alpha.astype(float), beta.astype(float),
                            material=white.astype(np.int64))


def scenario_sinusoidal(mesh, c_max, n_x=1, n_y=1, which="both"):
    """Smoothly varying coefficients sampled per cell:
    log10(alpha) = (c_max/2) sin(n_x pi x), log10(beta) = (c_max/2) sin(n_y pi y).

    Sampling is at the cell's minimum corner so the per-cell values attain
    the analytic extremes of the sinusoid (the sign changes fall on cell
    faces and the peaks on cell corners whenever nx is a multiple of 2 n_x),
    making the realized contrast exactly 10^c_max.
    """
    if which not in ("alpha", "beta", "both"):
        raise ValueError(f"which must be alpha|beta|both, got {which!r}")
    xc = mesh.cell_coords * np.array([mesh.hx, mesh.hy, mesh.hz])
    log_a = 0.5 * c_max * np.sin(n_x * np.pi * xc[:, 0])
    log_b = 0.5 * c_max * np.sin(n_y * np.pi * xc[:, 1])
    alpha = 10.0 ** log_a if which in ("alpha", "both") else np.ones(mesh.n_cells)
    beta = 10.0 ** log_b if which in ("beta", "both") else np.ones(mesh.n_cells)
    return CoefficientField(alpha, beta)
