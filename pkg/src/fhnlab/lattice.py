"""Truncated ell^2 lattice operators and the weighted product phase space.

Sites run over i = -N..N. The second-difference operator A and the forward/
backward difference operators B, B* act with either zero extension
(dirichlet, the default) or periodic wraparound; with zero extension the
identities A = B B* = B* B, the adjointness (B*u, u') = (u, Bu'), and
(Au, u) >= 0 all hold exactly on the truncated window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LatticeConfig",
    "LatticeVector",
    "EState",
    "apply_A",
    "apply_B",
    "apply_Bstar",
    "e_norm",
    "e_norm_sq",
    "e_inner",
    "build_coefficients",
]

BOUNDARIES = ("dirichlet", "periodic")


@dataclass(frozen=True)
class LatticeConfig:
    half_width: int
    boundary: str = "dirichlet"

    def __post_init__(self):
        if self.half_width < 1:
            raise ValueError(f"half_width must be >= 1, got {self.half_width}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")

    @property
    def n_sites(self) -> int:
        return 2 * self.half_width + 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)


@dataclass
class LatticeVector:
    values: np.ndarray
    config: LatticeConfig

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.values) != self.config.n_sites:
            raise ValueError("values length must be 2N+1")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("lattice vector entries must be finite")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def dump_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("site,value\n")
            for i, v in zip(self.config.sites, self.values):
                fh.write(f"{i},{v:.17g}\n")


def _as_array(u) -> np.ndarray:
    return u.values if isinstance(u, LatticeVector) else np.asarray(u, dtype=float)


def apply_A(u, config: LatticeConfig) -> np.ndarray:
    """(Au)_i = -u_{i-1} + 2 u_i - u_{i+1} under the configured boundary."""
    x = _as_array(u)
    out = 2.0 * x
    if config.boundary == "periodic":
        out -= np.roll(x, 1)
        out -= np.roll(x, -1)
    else:
        out[1:] -= x[:-1]
        out[:-1] -= x[1:]
    return out


def apply_B(u, config: LatticeConfig) -> np.ndarray:
    """(Bu)_i = u_{i+1} - u_i."""
    x = _as_array(u)
    if config.boundary == "periodic":
        return np.roll(x, -1) - x
    out = -x.copy()
    out[:-1] += x[1:]
    return out


def apply_Bstar(u, config: LatticeConfig) -> np.ndarray:
    """(B*u)_i = u_{i-1} - u_i."""
    x = _as_array(u)
    if config.boundary == "periodic":
        return np.roll(x, 1) - x
    out = -x.copy()
    out[1:] += x[:-1]
    return out


@dataclass
class EState:
    """A point (u, v) in E = ell^2 x ell^2 with the varrho-weighted norm."""

    u: np.ndarray
    v: np.ndarray
    varrho: float

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.u.shape != self.v.shape:
            raise ValueError("u and v must share one lattice")
        if not self.varrho > 0:
            raise ValueError(f"varrho must be positive, got {self.varrho}")

    def copy(self) -> "EState":
        return EState(self.u.copy(), self.v.copy(), self.varrho)

    def __sub__(self, other: "EState") -> "EState":
        _check_compatible(self, other)
        return EState(self.u - other.u, self.v - other.v, self.varrho)

    def __add__(self, other: "EState") -> "EState":
        _check_compatible(self, other)
        return EState(self.u + other.u, self.v + other.v, self.varrho)


def _check_compatible(a: EState, b: EState) -> None:
    if a.varrho != b.varrho:
        raise ValueError(f"weight mismatch: {a.varrho} vs {b.varrho}")
    if a.u.shape != b.u.shape:
        raise ValueError("lattice size mismatch")


def e_norm_sq(psi: EState) -> float:
    """||psi||_E^2 = ||u||^2 + (1/varrho) ||v||^2."""
    return float(psi.u @ psi.u + (psi.v @ psi.v) / psi.varrho)


def e_norm(psi: EState) -> float:
    return math.sqrt(e_norm_sq(psi))


def e_inner(psi: EState, phi: EState) -> float:
    _check_compatible(psi, phi)
    return float(psi.u @ phi.u + (psi.v @ phi.v) / psi.varrho)


def build_coefficients(
    shape: str, amplitude: float, half_width: int, decay_q: float | None = None
) -> np.ndarray:
    """Square-summable coefficient sequences on sites -N..N.

    power_decay: a_i = amplitude / (1+|i|)^q, requiring q > 1/2 so that the
    infinite-lattice sequence stays in ell^2.
    """
    sites = np.arange(-half_width, half_width + 1)
    if shape == "single_site":
        out = np.zeros(2 * half_width + 1)
        out[half_width] = amplitude
        return out
    if shape == "constant_window":
        return np.full(2 * half_width + 1, float(amplitude))
    if shape == "power_decay":
        if decay_q is None or decay_q <= 0.5:
            raise ValueError(
                f"power_decay requires decay_q > 1/2 for square-summability, got {decay_q}"
            )
        return amplitude / (1.0 + np.abs(sites)) ** decay_q
    raise ValueError(f"unknown coefficient shape {shape!r}")
