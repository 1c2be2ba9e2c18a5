"""Run configuration: JSON loading with a strict schema and validation.

Precedence is CLI flags > config file > defaults. Unknown keys anywhere in
the file are rejected so that typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .dynamics import SCHEMES, SystemParams
from .fbm import METHODS
from .lattice import BOUNDARIES, build_coefficients

__all__ = ["CoefficientSpec", "RunConfig", "load_config", "EXPERIMENTS"]

EXPERIMENTS = ("fbm", "simulate", "contraction", "pullback", "radius", "verify")


@dataclass
class CoefficientSpec:
    shape: str = "power_decay"
    amplitude: float = 1.0
    decay_q: float = 1.0

    def build(self, half_width: int) -> np.ndarray:
        return build_coefficients(self.shape, self.amplitude, half_width, self.decay_q)


@dataclass
class RunConfig:
    experiment: str = "simulate"
    seed: int = 0
    out_dir: str = "runs/out"
    # system parameters
    lam: float = 1.0
    varrho: float = 1.0
    sigma: float = 1.0
    gamma: float = 0.5
    c_f: float = 1.5
    p: int = 1
    hurst: float = 0.75
    # lattice
    half_width: int = 32
    boundary: str = "dirichlet"
    # noise / grid
    dt: float = 2.0**-8
    method: str = "davies_harte"
    shared_driver: bool = True
    a: CoefficientSpec = field(default_factory=CoefficientSpec)
    b: CoefficientSpec = field(default_factory=CoefficientSpec)
    # experiment knobs
    scheme: str = "rk4"
    t_final: float = 10.0
    n_steps: int = 256
    horizons: list[float] = field(default_factory=lambda: [10.0, 20.0, 30.0])
    ball_radius: float = 10.0
    quad_horizon: float = 25.0
    equilibrium_t: float = 1.0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if not 0.5 < self.hurst < 1.0:
            raise ValueError(f"hurst must lie in (1/2, 1), got {self.hurst}")
        for name in ("lam", "varrho", "sigma", "gamma", "c_f"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.half_width < 1:
            raise ValueError(f"n-sites half width must be >= 1, got {self.half_width}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a nonnegative 64-bit integer")
        for spec in (self.a, self.b):
            if spec.shape == "power_decay" and spec.decay_q <= 0.5:
                raise ValueError(
                    f"decay_q must exceed 1/2 for square-summability, got {spec.decay_q}"
                )
        if sorted(self.horizons) != list(self.horizons) or len(self.horizons) == 0:
            raise ValueError("horizons must be a nonempty increasing list")

    def system_params(self) -> SystemParams:
        return SystemParams(
            lam=self.lam,
            varrho=self.varrho,
            sigma=self.sigma,
            gamma=self.gamma,
            c_f=self.c_f,
            p=self.p,
            hurst=self.hurst,
        )

    def to_dict(self) -> dict:
        return asdict(self)


_TOP_KEYS = {
    "experiment", "seed", "out_dir", "lattice", "params", "grid",
    "coefficients", "knobs",
}
_PARAM_KEYS = {"lambda", "varrho", "sigma", "gamma", "c_f", "p", "hurst"}
_LATTICE_KEYS = {"n_sites", "boundary"}
_GRID_KEYS = {"dt", "method", "shared_driver"}
_COEF_KEYS = {"shape", "amplitude", "decay_q"}
_KNOB_KEYS = {
    "scheme", "t_final", "n_steps", "horizons", "ball_radius",
    "quad_horizon", "equilibrium_t",
}


def _reject_unknown(d: dict, allowed: set, where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown config key(s) in {where}: {sorted(unknown)}")


def load_config(path) -> RunConfig:
    """Load and validate a JSON run configuration (strict schema)."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"config parse error at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ValueError("config root must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "top level")

    kwargs: dict = {}
    for key in ("experiment", "seed", "out_dir"):
        if key in raw:
            kwargs[key] = raw[key]
    params = raw.get("params", {})
    _reject_unknown(params, _PARAM_KEYS, "params")
    if "lambda" in params:
        kwargs["lam"] = params["lambda"]
    for key in ("varrho", "sigma", "gamma", "c_f", "p", "hurst"):
        if key in params:
            kwargs[key] = params[key]
    lattice = raw.get("lattice", {})
    _reject_unknown(lattice, _LATTICE_KEYS, "lattice")
    if "n_sites" in lattice:
        kwargs["half_width"] = lattice["n_sites"]
    if "boundary" in lattice:
        kwargs["boundary"] = lattice["boundary"]
    grid = raw.get("grid", {})
    _reject_unknown(grid, _GRID_KEYS, "grid")
    kwargs.update({k: grid[k] for k in grid})
    coeffs = raw.get("coefficients", {})
    _reject_unknown(coeffs, {"a", "b"}, "coefficients")
    for name in ("a", "b"):
        if name in coeffs:
            _reject_unknown(coeffs[name], _COEF_KEYS, f"coefficients.{name}")
            kwargs[name] = CoefficientSpec(**coeffs[name])
    knobs = raw.get("knobs", {})
    _reject_unknown(knobs, _KNOB_KEYS, "knobs")
    kwargs.update(knobs)
    return RunConfig(**kwargs)
