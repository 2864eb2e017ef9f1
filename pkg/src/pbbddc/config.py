"""Flat key=value configuration with namespaced keys and CLI overrides."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

SCENARIOS = ("homogeneous", "checkerboard", "channels", "sinusoidal")
PB_MODES = ("geometric", "material", "relaxed")


def _parse_bool(s):
    if s.lower() in ("true", "1", "yes"):
        return True
    if s.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


# key -> (attribute, parser, default); None default means required
_SCHEMA = {
    "mesh.nx": ("nx", int, None),
    "mesh.ny": ("ny", int, None),
    "mesh.nz": ("nz", int, None),
    "mesh.Lx": ("Lx", float, 1.0),
    "mesh.Ly": ("Ly", float, 1.0),
    "mesh.Lz": ("Lz", float, 1.0),
    "partition.Nx": ("Nx", int, None),
    "partition.Ny": ("Ny", int, None),
    "partition.Nz": ("Nz", int, None),
    "fe.order": ("order", int, 1),
    "scenario.kind": ("scenario", str, "homogeneous"),
    "scenario.alpha": ("alpha", float, 1.0),
    "scenario.beta": ("beta", float, 1.0),
    "scenario.alpha_white": ("alpha_white", float, 1.0),
    "scenario.beta_white": ("beta_white", float, 1.0),
    "scenario.alpha_black": ("alpha_black", float, 1.0),
    "scenario.beta_black": ("beta_black", float, 1.0),
    "scenario.exponent": ("exponent", float, math.nan),
    "scenario.gamma": ("gamma", float, 0.5),
    "scenario.c_max": ("c_max", float, 6.0),
    "scenario.n_x": ("n_x", int, 0),
    "scenario.n_y": ("n_y", int, 0),
    "scenario.which": ("which", str, "both"),
    "scaling.kind": ("scaling", str, "omega"),
    "bddc.perturbed": ("perturbed", _parse_bool, False),
    "pb.mode": ("pb_mode", str, "geometric"),
    "pb.r_alpha": ("r_alpha", float, math.inf),
    "pb.r_beta": ("r_beta", float, math.inf),
    "pb.split_components": ("split_components", _parse_bool, False),
    "solver.tol": ("tol", float, 1e-6),
    "solver.maxit": ("maxit", int, 500),
    "output.report": ("report_path", str, ""),
    "output.csv": ("csv_path", str, ""),
}
_ATTR_TO_KEY = {attr: key for key, (attr, _, _) in _SCHEMA.items()}


@dataclass
class ProblemConfig:
    """Typed view of the flat key=value configuration."""

    nx: int
    ny: int
    nz: int
    Nx: int
    Ny: int
    Nz: int
    Lx: float = 1.0
    Ly: float = 1.0
    Lz: float = 1.0
    order: int = 1
    scenario: str = "homogeneous"
    alpha: float = 1.0
    beta: float = 1.0
    alpha_white: float = 1.0
    beta_white: float = 1.0
    alpha_black: float = 1.0
    beta_black: float = 1.0
    exponent: float = math.nan   # nan = not set
    gamma: float = 0.5
    c_max: float = 6.0
    n_x: int = 0   # 0 = one period per partition subdomain (N_x)
    n_y: int = 0
    which: str = "both"
    scaling: str = "omega"
    perturbed: bool = False
    pb_mode: str = "geometric"
    r_alpha: float = math.inf
    r_beta: float = math.inf
    split_components: bool = False
    tol: float = 1e-6
    maxit: int = 500
    report_path: str = ""
    csv_path: str = ""

    def __post_init__(self):
        if self.order != 1:
            raise ValueError("only lowest-order edge elements are supported")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.pb_mode not in PB_MODES:
            raise ValueError(f"unknown pb mode {self.pb_mode!r}")

    @classmethod
    def from_items(cls, items: dict):
        kwargs = {}
        for key, raw in items.items():
            if key not in _SCHEMA:
                raise KeyError(f"unknown config key {key!r}")
            attr, parser, _ = _SCHEMA[key]
            kwargs[attr] = parser(raw)
        missing = [k for k, (a, _, d) in _SCHEMA.items()
                   if d is None and a not in kwargs]
        if missing:
            raise KeyError(f"missing required config keys: {missing}")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path, overrides=()):
        items = parse_config_file(path)
        items.update(parse_overrides(overrides))
        return cls.from_items(items)

    def with_overrides(self, overrides):
        """New config with --key=value strings applied on top."""
        items = self.echo()
        items.update(parse_overrides(overrides))
        return ProblemConfig.from_items(items)

    def echo(self):
        """Flat key=value dict reproducing this configuration exactly."""
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[_ATTR_TO_KEY[f.name]] = (
                str(v).lower() if isinstance(v, bool) else repr(v)
                if isinstance(v, float) else str(v)
            )
        return out


def parse_config_file(path):
    items = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, val = line.split("=", 1)
            items[key.strip()] = val.strip()
    return items


def parse_overrides(args):
    items = {}
    for arg in args:
        body = arg[2:] if arg.startswith("--") else arg
        if "=" not in body:
            raise ValueError(f"override must look like --key=value: {arg!r}")
        key, val = body.split("=", 1)
        items[key.strip()] = val.strip()
    return items
