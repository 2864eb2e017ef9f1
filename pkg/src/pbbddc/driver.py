"""Run orchestration: config -> mesh -> partitions -> preconditioner -> PCG,
with JSON reports and append-mode CSV for parameter sweeps."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .assembly import assemble_global
from .bddc import BddcPreconditioner
from .config import ProblemConfig
from .fespace import EdgeSpace
from .linalg import pcg
from .mesh import BoxMesh
from .partition import (geometric_partition, pb_from_geometric,
                        pb_from_material, pb_relaxed)
from .scenarios import (scenario_channels, scenario_checkerboard,
                        scenario_homogeneous, scenario_sinusoidal)

CSV_COLUMNS = ("scenario", "P", "H_over_h", "scaling", "perturbed", "pb_mode",
               "r_alpha", "r_beta", "contrast", "iterations", "lambda_min",
               "lambda_max", "coarse_size", "n_dofs", "setup_s", "solve_s")


def _effective_colors(cfg: ProblemConfig):
    """Four color coefficients, honoring the contrast-exponent shorthand.

    With scenario.exponent = i set, the checkerboard uses unit white
    coefficients and black (10^i, 10^-i); channels use unit black
    coefficients and white (10^i, 10^-i).  Contrast is 10^(2i) either way.
    """
    aw, bw = cfg.alpha_white, cfg.beta_white
    ab, bb = cfg.alpha_black, cfg.beta_black
    if not math.isnan(cfg.exponent):
        if cfg.scenario == "checkerboard":
            aw = bw = 1.0
            ab, bb = 10.0 ** cfg.exponent, 10.0 ** -cfg.exponent
        elif cfg.scenario == "channels":
            ab = bb = 1.0
            aw, bw = 10.0 ** cfg.exponent, 10.0 ** -cfg.exponent
    return aw, bw, ab, bb


def build_field(mesh, cfg: ProblemConfig):
    aw, bw, ab, bb = _effective_colors(cfg)
    if cfg.scenario == "homogeneous":
        return scenario_homogeneous(mesh, cfg.alpha, cfg.beta)
    if cfg.scenario == "checkerboard":
        return scenario_checkerboard(mesh, cfg.Nx, cfg.Ny, cfg.Nz, aw, bw, ab, bb)
    if cfg.scenario == "channels":
        return scenario_channels(mesh, cfg.Nx, cfg.Ny, cfg.Nz, cfg.gamma,
                                 aw, bw, ab, bb)
    return scenario_sinusoidal(mesh, cfg.c_max, cfg.n_x or cfg.Nx,
                               cfg.n_y or cfg.Ny, cfg.which)


def contrast_of(cfg: ProblemConfig):
    """Coefficient contrast reported in sweep CSVs (scenario convention)."""
    aw, bw, ab, bb = _effective_colors(cfg)
    if cfg.scenario == "checkerboard":
        return ab / bb
    if cfg.scenario == "channels":
        return aw / bw
    if cfg.scenario == "sinusoidal":
        return 10.0 ** cfg.c_max
    return max(cfg.alpha, cfg.beta) / min(cfg.alpha, cfg.beta)


def build_pb_partition(mesh, geo_labels, field, cfg: ProblemConfig):
    if cfg.pb_mode == "geometric":
        return pb_from_geometric(mesh, geo_labels, field)
    if cfg.pb_mode == "material":
        if field.material is None:
            raise ValueError(
                f"scenario {cfg.scenario!r} has no material ids; "
                "use pb.mode=geometric or relaxed"
            )
        return pb_from_material(mesh, geo_labels, field)
    return pb_relaxed(mesh, geo_labels, field, cfg.r_alpha, cfg.r_beta,
                      cfg.split_components)


@dataclass
class RunReport:
    """Solver metrics of one run, serializable for reports and sweeps."""

    iterations: int
    converged: bool
    lambda_min: float
    lambda_max: float
    condition: float
    coarse_size: int
    n_dofs: int
    sub_n_dofs: list
    n_pb: int
    contrast: float
    setup_s: float
    solve_s: float
    config: dict = field(default_factory=dict)

    def to_json(self):
        payload = {
            "iterations": self.iterations,
            "converged": self.converged,
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "condition": self.condition,
            "coarse_size": self.coarse_size,
            "n_dofs": self.n_dofs,
            "sub_n_dofs": self.sub_n_dofs,
            "n_pb": self.n_pb,
            "contrast": self.contrast,
            "timing": {"setup_s": self.setup_s, "solve_s": self.solve_s},
            "config": self.config,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def run(cfg: ProblemConfig) -> RunReport:
    """Full pipeline for one configuration."""
    t0 = time.perf_counter()
    mesh = BoxMesh(cfg.nx, cfg.ny, cfg.nz, cfg.Lx, cfg.Ly, cfg.Lz)
    space = EdgeSpace(mesh)
    fld = build_field(mesh, cfg)
    geo = geometric_partition(mesh, cfg.Nx, cfg.Ny, cfg.Nz)
    pbp = build_pb_partition(mesh, geo, fld, cfg)
    prec = BddcPreconditioner(mesh, space, fld, pbp,
                              scaling=cfg.scaling, perturbed=cfg.perturbed)
    _, _, f = assemble_global(space, fld)
    setup_s = time.perf_counter() - t0

    t0 = time.perf_counter()
    _, rep = pcg(lambda x: prec.A @ x, prec.apply, f,
                 tol=cfg.tol, maxit=cfg.maxit)
    solve_s = time.perf_counter() - t0

    lam_min, lam_max = rep.lanczos_eigs
    return RunReport(
        iterations=rep.iterations,
        converged=rep.converged,
        lambda_min=float(lam_min),
        lambda_max=float(lam_max),
        condition=float(rep.condition_estimate),
        coarse_size=prec.n_coarse,
        n_dofs=space.n_dofs,
        sub_n_dofs=[int(s.n_loc) for s in prec.subs],
        n_pb=pbp.n_pb,
        contrast=contrast_of(cfg),
        setup_s=setup_s,
        solve_s=solve_s,
        config=cfg.echo(),
    )


def _csv_cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def append_csv_row(path, cfg: ProblemConfig, report: RunReport):
    """Append one sweep row, writing the header when the file is new."""
    row = {
        "scenario": cfg.scenario,
        "P": cfg.Nx * cfg.Ny * cfg.Nz,
        "H_over_h": cfg.nx // cfg.Nx,
        "scaling": cfg.scaling,
        "perturbed": cfg.perturbed,
        "pb_mode": cfg.pb_mode,
        "r_alpha": cfg.r_alpha,
        "r_beta": cfg.r_beta,
        "contrast": report.contrast,
        "iterations": report.iterations,
        "lambda_min": report.lambda_min,
        "lambda_max": report.lambda_max,
        "coarse_size": report.coarse_size,
        "n_dofs": report.n_dofs,
        "setup_s": report.setup_s,
        "solve_s": report.solve_s,
    }
    import os
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        if new:
            fh.write(",".join(CSV_COLUMNS) + "\n")
        fh.write(",".join(_csv_cell(row[c]) for c in CSV_COLUMNS) + "\n")


def sweep(cfg: ProblemConfig, key, values, csv_path=None):
    """Run the config once per value of one overridden key, appending each
    result to the sweep CSV.  Returns the list of reports."""
    csv_path = csv_path or cfg.csv_path or "sweep.csv"
    reports = []
    for v in values:
        c = cfg.with_overrides([f"{key}={v}"])
        rep = run(c)
        append_csv_row(csv_path, c, rep)
        reports.append(rep)
    return reports
