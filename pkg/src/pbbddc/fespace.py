"""Lowest-order Nedelec edge space and per-cell coefficient fields."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import BoxMesh


class EdgeSpace:
    """One tangential-moment DOF per mesh edge; order fixed to 1.

    Homogeneous Dirichlet (tangential) conditions eliminate every edge lying
    in a boundary face; the remaining edges are the free DOFs, numbered
    consecutively in edge-id order.
    """

    def __init__(self, mesh: BoxMesh, order: int = 1):
        if order != 1:
            raise NotImplementedError("only lowest-order edge elements are supported")
        self.mesh = mesh
        self.order = order
        self.dirichlet_mask = mesh.edge_on_boundary.copy()
        free = np.flatnonzero(~self.dirichlet_mask)
        self.edge_of_dof = free
        self.dof_of_edge = np.full(mesh.n_edges, -1, dtype=np.int64)
        self.dof_of_edge[free] = np.arange(free.size)
        self.n_dofs = free.size


@dataclass
class CoefficientField:
    """Per-cell constant coefficients alpha (curl-curl) and beta (mass)."""

    alpha: np.ndarray
    beta: np.ndarray
    material: np.ndarray | None = None

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        if self.alpha.shape != self.beta.shape:
            raise ValueError("alpha and beta must have one value per cell")
        if np.any(self.alpha < 0.0):
            raise ValueError("alpha must be >= 0")
        if np.any(self.beta <= 0.0):
            raise ValueError("beta must be > 0")
        if self.material is not None:
            self.material = np.asarray(self.material, dtype=np.int64)

    @classmethod
    def constant(cls, mesh: BoxMesh, alpha: float, beta: float):
        n = mesh.n_cells
        return cls(np.full(n, alpha), np.full(n, beta), np.zeros(n, dtype=np.int64))

    @classmethod
    def from_functions(cls, mesh: BoxMesh, alpha_fn, beta_fn, material_fn=None):
        """Sample analytic coefficient functions at cell centroids."""
        xyz = mesh.cell_centroids()
        alpha = np.asarray([alpha_fn(p) for p in xyz], dtype=float)
        beta = np.asarray([beta_fn(p) for p in xyz], dtype=float)
        material = None
        if material_fn is not None:
            material = np.asarray([material_fn(p) for p in xyz], dtype=np.int64)
        return cls(alpha, beta, material)
