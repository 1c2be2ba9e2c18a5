"""Drift, pathwise transformation, and numerical integration of the system.

The stochastic system with additive fractional noise is integrated through
the exact change of variables (u~, v~) = (u - W1, v - W2), which turns it
into a random ODE with continuous coefficients:

    du~/dt = -A(u~ + W1) - lambda (u~ + W1) + f(u~ + W1) - v~ - W2
    dv~/dt = varrho (u~ + W1) - sigma (v~ + W2)

No stochastic integral is ever evaluated. The solution map cocycle_phi
satisfies the cocycle property over the Wiener shift exactly for the
discrete scheme, because the shift acts on the transformed system as a
conjugation by constants.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fbm import NoiseField, TimeGrid
from .lattice import EState, LatticeConfig, apply_A, e_norm_sq

__all__ = [
    "SystemParams",
    "Nonlinearity",
    "Trajectory",
    "drift_G",
    "transformed_drift",
    "integrate",
    "cocycle_phi",
    "check_dissipativity",
    "energy_bound_check",
    "DissipativityReport",
    "EnergyBoundReport",
    "cubic_nonlinearity",
    "classical_fhn_nonlinearity",
    "linear_nonlinearity",
]

BLOWUP_LIMIT = 1e8
SCHEMES = ("euler", "rk4")

# Floating-point slack on the exact dissipativity inequality.
DISSIPATIVITY_SLACK = 1e-9


@dataclass(frozen=True)
class SystemParams:
    lam: float = 1.0
    varrho: float = 1.0
    sigma: float = 1.0
    gamma: float = 0.5
    c_f: float = 1.5
    p: int = 1
    hurst: float = 0.75

    def __post_init__(self):
        for name in ("lam", "varrho", "sigma", "gamma", "c_f"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p}")
        if not 0.5 < self.hurst < 1.0:
            raise ValueError(f"hurst must lie in (1/2, 1), got {self.hurst}")

    @property
    def alpha(self) -> float:
        """Contraction rate alpha = min(lambda, sigma)."""
        return min(self.lam, self.sigma)


@dataclass(frozen=True)
class Nonlinearity:
    """Componentwise scalar nonlinearity with declared (gamma, c_f, p)."""

    fn: Callable[[np.ndarray], np.ndarray]
    gamma: float
    c_f: float
    p: int
    name: str = "custom"

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.fn(u)


def cubic_nonlinearity(gamma: float = 0.5) -> Nonlinearity:
    """f(u) = -u^3 - gamma*u; satisfies the one-sided condition exactly."""
    return Nonlinearity(
        fn=lambda u: -u * u * u - gamma * u,
        gamma=gamma,
        c_f=1.0 + gamma,
        p=1,
        name="cubic",
    )


def linear_nonlinearity(gamma: float = 0.5) -> Nonlinearity:
    """f(u) = -gamma*u; useful for closed-form linear oracles."""
    return Nonlinearity(fn=lambda u: -gamma * u, gamma=gamma, c_f=gamma + 1.0, p=1, name="linear")


def classical_fhn_nonlinearity(a: float = 0.5, gamma: float = 0.5) -> Nonlinearity:
    """The textbook cubic u(1-u)(u-a).

    Not certified: it violates the strict one-sided dissipativity condition
    globally, and check_dissipativity rejects it.
    """
    return Nonlinearity(
        fn=lambda u: u * (1.0 - u) * (u - a),
        gamma=gamma,
        c_f=2.0 + abs(a),
        p=1,
        name="classical_fhn",
    )


def drift_G(psi: EState, params: SystemParams, f: Nonlinearity, config: LatticeConfig) -> EState:
    """G(Psi) = L Psi + F(Psi) = (-Au - lambda u + f(u) - v, varrho u - sigma v)."""
    du = -apply_A(psi.u, config) - params.lam * psi.u + f(psi.u) - psi.v
    dv = params.varrho * psi.u - params.sigma * psi.v
    return EState(du, dv, psi.varrho)


def transformed_drift(
    u_t: np.ndarray,
    v_t: np.ndarray,
    t: float,
    noise: NoiseField,
    params: SystemParams,
    f: Nonlinearity,
    config: LatticeConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand side of the transformed random ODE at time t.

    Noise values are looked up on the sampled grid (linear interpolation off
    grid points). With W1 = W2 = 0 this reduces exactly to drift_G.
    """
    w1 = noise.w1_at(t)
    w2 = noise.w2_at(t)
    return _rhs(u_t, v_t, w1, w2, params, f, config)


def _rhs(u_t, v_t, w1, w2, params, f, config):
    s = u_t + w1
    du = -apply_A(s, config) - params.lam * s + f(s) - v_t - w2
    dv = params.varrho * s - params.sigma * (v_t + w2)
    return du, dv


@dataclass
class Trajectory:
    """Solution samples on a uniform grid; u, v are (n_steps+1, n_sites)."""

    grid: TimeGrid
    u: np.ndarray
    v: np.ndarray
    params: SystemParams
    varrho: float = field(init=False)

    def __post_init__(self):
        if self.u.shape != self.v.shape or len(self.u) != self.grid.n_steps + 1:
            raise ValueError("trajectory arrays must be (n_steps+1, n_sites)")
        self.varrho = self.params.varrho

    def state(self, k: int) -> EState:
        return EState(self.u[k], self.v[k], self.varrho)

    @property
    def final_state(self) -> EState:
        return self.state(self.grid.n_steps)

    def state_at(self, t: float) -> EState:
        return self.state(self.grid.index_of(t))

    def e_norm_sq_series(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.u, self.u) + np.einsum(
            "ij,ij->i", self.v, self.v
        ) / self.varrho

    def dump_csv(self, path, sites=None) -> None:
        times = self.grid.times
        n_sites = self.u.shape[1]
        site_ids = sites if sites is not None else np.arange(n_sites) - (n_sites - 1) // 2
        with open(path, "w") as fh:
            fh.write("t,site,u,v\n")
            for k, t in enumerate(times):
                for j, i in enumerate(site_ids):
                    fh.write(f"{t:.17g},{i},{self.u[k, j]:.17g},{self.v[k, j]:.17g}\n")

    def summary(self, seed=None) -> dict:
        return {
            "params": vars(self.params) | {"alpha": self.params.alpha},
            "seed": seed,
            "e_norm_series": [
                [float(t), float(x)]
                for t, x in zip(self.grid.times, np.sqrt(self.e_norm_sq_series()))
            ],
        }


def integrate(
    psi0: EState,
    noise: NoiseField,
    t0: float,
    t1: float,
    params: SystemParams,
    f: Nonlinearity,
    config: LatticeConfig,
    scheme: str = "rk4",
) -> Trajectory:
    """Integrate from t0 to t1 on the noise grid, returning (u, v) samples.

    The transformed variables are stepped with the chosen explicit scheme;
    the physical solution u = u~ + W1, v = v~ + W2 is recovered at every
    grid point. Deterministic in all inputs.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    g = noise.grid
    k0, k1 = g.index_of(t0), g.index_of(t1)
    if k1 <= k0:
        raise ValueError("t1 must be > t0")
    dt = g.dt
    n = k1 - k0

    w1g = noise.w1_grid()[:, k0 : k1 + 1].T.copy()  # (n+1, n_sites)
    w2g = noise.w2_grid()[:, k0 : k1 + 1].T.copy()
    varrho = psi0.varrho

    ut = psi0.u - w1g[0]
    vt = psi0.v - w2g[0]
    u_out = np.empty((n + 1, len(ut)))
    v_out = np.empty_like(u_out)
    u_out[0], v_out[0] = psi0.u, psi0.v

    lam, rho, sig = params.lam, params.varrho, params.sigma
    fn = f.fn
    periodic = config.boundary == "periodic"

    def rhs(u, v, w1, w2):
        s = u + w1
        if periodic:
            As = 2.0 * s - np.roll(s, 1) - np.roll(s, -1)
        else:
            As = 2.0 * s
            As[1:] -= s[:-1]
            As[:-1] -= s[1:]
        du = -As - lam * s + fn(s) - v - w2
        dv = rho * s - sig * (v + w2)
        return du, dv

    if scheme == "euler":
        for k in range(n):
            du, dv = rhs(ut, vt, w1g[k], w2g[k])
            ut = ut + dt * du
            vt = vt + dt * dv
            u_out[k + 1] = ut + w1g[k + 1]
            v_out[k + 1] = vt + w2g[k + 1]
            _guard(u_out[k + 1], v_out[k + 1], varrho, g.t_start + (k0 + k + 1) * dt)
    else:
        half = 0.5 * dt
        w1m = 0.5 * (w1g[:-1] + w1g[1:])  # linear interpolation at midpoints
        w2m = 0.5 * (w2g[:-1] + w2g[1:])
        sixth = dt / 6.0
        for k in range(n):
            k1u, k1v = rhs(ut, vt, w1g[k], w2g[k])
            k2u, k2v = rhs(ut + half * k1u, vt + half * k1v, w1m[k], w2m[k])
            k3u, k3v = rhs(ut + half * k2u, vt + half * k2v, w1m[k], w2m[k])
            k4u, k4v = rhs(ut + dt * k3u, vt + dt * k3v, w1g[k + 1], w2g[k + 1])
            ut = ut + sixth * (k1u + 2.0 * (k2u + k3u) + k4u)
            vt = vt + sixth * (k1v + 2.0 * (k2v + k3v) + k4v)
            u_out[k + 1] = ut + w1g[k + 1]
            v_out[k + 1] = vt + w2g[k + 1]
            _guard(u_out[k + 1], v_out[k + 1], varrho, g.t_start + (k0 + k + 1) * dt)

    grid = TimeGrid(t_start=g.t_start + k0 * dt, dt=dt, n_steps=n)
    return Trajectory(grid=grid, u=u_out, v=v_out, params=params)


class BlowUpError(RuntimeError):
    pass


def _guard(u, v, varrho, t):
    nrm = u @ u + (v @ v) / varrho
    if not np.isfinite(nrm) or nrm > BLOWUP_LIMIT**2:
        raise BlowUpError(f"state norm exceeded {BLOWUP_LIMIT:.0e} at t={t}")


def cocycle_phi(
    t: float,
    noise: NoiseField,
    psi0: EState,
    params: SystemParams,
    f: Nonlinearity,
    config: LatticeConfig,
    scheme: str = "rk4",
) -> EState:
    """The time-t solution map phi(t, omega, psi0), t >= 0 and grid-aligned."""
    if t < 0:
        raise ValueError("cocycle map requires t >= 0")
    if t == 0.0:
        return psi0.copy()
    return integrate(psi0, noise, 0.0, t, params, f, config, scheme).final_state


@dataclass
class DissipativityReport:
    passed: bool
    dissipativity_ok: bool
    growth_ok: bool
    worst_margin: float
    worst_pair: tuple[float, float]
    worst_growth_margin: float
    worst_growth_point: float
    trials: int

    def to_dict(self) -> dict:
        return vars(self).copy()


def check_dissipativity(
    f: Nonlinearity, trials: int = 10**6, range_: float = 50.0, seed: int = 0
) -> DissipativityReport:
    """Randomized audit of the one-sided dissipativity and growth conditions.

    Samples scalar pairs uniformly on [-range, range]^2 and checks
    (f(u)-f(v))(u-v) <= -gamma (u-v)^2 and |f(u)| <= c_f (|u|^(2p+1) + 1),
    with a small absolute floating-point slack.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst_margin = -math.inf
    worst_pair = (0.0, 0.0)
    worst_growth = -math.inf
    worst_point = 0.0
    chunk = 200_000
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        u = rng.uniform(-range_, range_, m)
        v = rng.uniform(-range_, range_, m)
        d = u - v
        margin = (f(u) - f(v)) * d + f.gamma * d * d  # must be <= 0
        i = int(np.argmax(margin))
        if margin[i] > worst_margin:
            worst_margin = float(margin[i])
            worst_pair = (float(u[i]), float(v[i]))
        growth = np.abs(f(u)) - f.c_f * (np.abs(u) ** (2 * f.p + 1) + 1.0)  # must be <= 0
        j = int(np.argmax(growth))
        if growth[j] > worst_growth:
            worst_growth = float(growth[j])
            worst_point = float(u[j])
        done += m
    diss_ok = worst_margin <= DISSIPATIVITY_SLACK
    growth_ok = worst_growth <= DISSIPATIVITY_SLACK
    return DissipativityReport(
        passed=diss_ok and growth_ok,
        dissipativity_ok=diss_ok,
        growth_ok=growth_ok,
        worst_margin=worst_margin,
        worst_pair=worst_pair,
        worst_growth_margin=worst_growth,
        worst_growth_point=worst_point,
        trials=trials,
    )


@dataclass
class EnergyBoundReport:
    fitted_m: float
    lhs_sup: float
    bracket: float
    horizon: float

    def to_dict(self) -> dict:
        return vars(self).copy()


def energy_bound_check(traj: Trajectory, noise: NoiseField) -> EnergyBoundReport:
    """Fit the smallest M with sup_t ||Psi||_E^2 <= M * [data bracket].

    The bracket collects the initial energy, the sup of the noise norms, and
    the time integral of ||W1||^(4p+2) + ||W1||^2 + ||W2||^2 + 1; the theory
    guarantees a fitted M bounded independently of the horizon.
    """
    g = traj.grid
    k0 = noise.grid.index_of(g.t_start)
    k1 = noise.grid.index_of(g.t_end)
    w1 = noise.w1_grid()[:, k0 : k1 + 1]
    w2 = noise.w2_grid()[:, k0 : k1 + 1]
    w1_sq = np.einsum("ij,ij->j", w1, w1)
    w2_sq = np.einsum("ij,ij->j", w2, w2)
    p = traj.params.p
    integrand = w1_sq ** (2 * p + 1) + w1_sq + w2_sq + 1.0
    integral = float(np.trapezoid(integrand, dx=g.dt))
    bracket = e_norm_sq(traj.state(0)) + float(np.max(w1_sq + w2_sq)) + integral
    lhs = float(np.max(traj.e_norm_sq_series()))
    return EnergyBoundReport(
        fitted_m=lhs / bracket, lhs_sup=lhs, bracket=bracket, horizon=g.t_end - g.t_start
    )


def report_json(report, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
