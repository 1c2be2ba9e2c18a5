"""Exact-covariance synthesis of fractional Brownian motion on uniform grids.

Provides one-sided and two-sided fBm samplers (Davies-Harte circulant
embedding as the fast production method; Hosking recursion and dense
Cholesky as independent O(n^2)/O(n^3) oracles), the Wiener shift acting on
sampled paths, and the lattice-valued noise field W1, W2 built by scaling
independent per-site drivers with square-summable coefficient sequences.

All sampling is a pure function of (seed, grid, hurst, method); paths are
immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "TimeGrid",
    "FbmPath",
    "NoiseField",
    "fbm_covariance",
    "fgn_autocovariance",
    "sample_fbm",
    "two_sided_fbm",
    "shift_path",
    "sample_noise_field",
    "METHODS",
]

METHODS = ("davies_harte", "hosking", "cholesky")

# Relative clamp threshold for slightly negative circulant eigenvalues.
EPS_EMBED_REL = 1e-10

# Tolerance (relative to dt) for deciding whether a time is grid-aligned.
_ALIGN_RTOL = 1e-9


class EmbeddingError(RuntimeError):
    """Circulant embedding produced a significantly negative eigenvalue."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid t_k = t_start + k*dt, k = 0..n_steps."""

    t_start: float
    dt: float
    n_steps: int

    def __post_init__(self):
        if not (math.isfinite(self.t_start) and math.isfinite(self.dt)):
            raise ValueError("grid parameters must be finite")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.t_start < 0 < self.t_end and not self.is_aligned(0.0):
            raise ValueError(
                "grids spanning 0 must contain 0 as a grid point "
                f"(t_start={self.t_start}, dt={self.dt})"
            )

    @property
    def t_end(self) -> float:
        return self.t_start + self.n_steps * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_steps + 1)

    def is_aligned(self, t: float) -> bool:
        k = (t - self.t_start) / self.dt
        return abs(k - round(k)) <= _ALIGN_RTOL * max(1.0, abs(k))

    def index_of(self, t: float) -> int:
        """Index of a grid-aligned time; raises if t is off-grid or outside."""
        k = (t - self.t_start) / self.dt
        ki = round(k)
        if abs(k - ki) > _ALIGN_RTOL * max(1.0, abs(k)):
            raise ValueError(f"t={t} is not aligned with the grid (dt={self.dt})")
        if not 0 <= ki <= self.n_steps:
            raise ValueError(f"t={t} outside grid window [{self.t_start}, {self.t_end}]")
        return int(ki)

    def contains_zero(self) -> bool:
        return self.t_start <= 0 <= self.t_end and self.is_aligned(0.0)


@dataclass(frozen=True)
class FbmPath:
    """A sampled fBm path on a uniform grid; value at t=0 is exactly 0.

    `raw` keeps the originally sampled values so that repeated Wiener shifts
    re-anchor with a single subtraction, making the flow property bitwise
    exact.
    """

    grid: TimeGrid
    hurst: float
    values: np.ndarray
    seed: int
    site_index: int = 0
    method: str = "davies_harte"
    raw: np.ndarray | None = None

    def __post_init__(self):
        if len(self.values) != self.grid.n_steps + 1:
            raise ValueError("values length must equal n_steps + 1")
        self.values.setflags(write=False)

    def value_at(self, t: float | np.ndarray) -> float | np.ndarray:
        """Linearly interpolated value; t must lie inside the sampled window."""
        g = self.grid
        t = np.asarray(t, dtype=float)
        if np.any(t < g.t_start - _ALIGN_RTOL * g.dt) or np.any(
            t > g.t_end + _ALIGN_RTOL * g.dt
        ):
            raise ValueError("t outside the sampled window")
        x = np.clip((t - g.t_start) / g.dt, 0.0, g.n_steps)
        k = np.minimum(x.astype(int), g.n_steps - 1)
        frac = x - k
        out = (1.0 - frac) * self.values[k] + frac * self.values[k + 1]
        return float(out) if out.ndim == 0 else out

    def dump_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("t,value\n")
            for t, v in zip(self.grid.times, self.values):
                fh.write(f"{t:.17g},{v:.17g}\n")


def _check_hurst(hurst: float, lo: float = 0.0, hi: float = 1.0) -> None:
    if not (math.isfinite(hurst) and lo < hurst < hi):
        raise ValueError(f"hurst must lie in ({lo}, {hi}), got {hurst}")


def fbm_covariance(s: float, t: float, hurst: float) -> float:
    """Cov(beta(s), beta(t)) = (|t|^2H + |s|^2H - |t-s|^2H) / 2."""
    if not (math.isfinite(s) and math.isfinite(t)):
        raise ValueError("s and t must be finite")
    _check_hurst(hurst)
    h2 = 2.0 * hurst
    return 0.5 * (abs(t) ** h2 + abs(s) ** h2 - abs(t - s) ** h2)


def fgn_autocovariance(k: int, hurst: float, dt: float) -> float:
    """Autocovariance at integer lag k of fBm increments on a dt-grid."""
    if k < 0 or k != int(k):
        raise ValueError(f"lag must be a nonnegative integer, got {k}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    _check_hurst(hurst)
    h2 = 2.0 * hurst
    k = int(k)
    return 0.5 * dt**h2 * (abs(k + 1) ** h2 - 2.0 * abs(k) ** h2 + abs(k - 1) ** h2)


def _fgn_gamma(hurst: float, n: int) -> np.ndarray:
    """Unit-lag fGn autocovariance sequence gamma_0..gamma_{n-1}."""
    k = np.arange(n, dtype=float)
    h2 = 2.0 * hurst
    return 0.5 * ((k + 1) ** h2 - 2.0 * k**h2 + np.abs(k - 1) ** h2)


def _fgn_davies_harte(hurst: float, n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """(size, n) unit-lag fGn via circulant embedding, O(n log n) per path."""
    gamma = _fgn_gamma(hurst, n + 1)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = np.fft.rfft(row).real
    floor = -EPS_EMBED_REL * eig.max()
    if eig.min() < floor:
        raise EmbeddingError(
            f"circulant embedding not nonnegative definite: min eigenvalue "
            f"{eig.min():.3e} below tolerance {floor:.3e} (H={hurst}, n={n})"
        )
    eig = np.clip(eig, 0.0, None)

    m = 2 * n
    z = rng.standard_normal((size, m)) + 1j * rng.standard_normal((size, m))
    # Real part of the weighted DFT of complex normals has circulant
    # covariance with first row `row`; truncating to n gives exact fGn.
    w = np.fft.fft(np.sqrt(np.concatenate([eig, eig[-2:0:-1]]) / m) * z, axis=1)
    return w.real[:, :n]


def _fgn_hosking(hurst: float, n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """(size, n) unit-lag fGn via the Hosking recursion, O(n^2)."""
    gamma = _fgn_gamma(hurst, n)
    out = np.empty((size, n))
    z = rng.standard_normal((size, n))

    out[:, 0] = math.sqrt(gamma[0]) * z[:, 0]
    phi = np.zeros(n)
    var = gamma[0]
    for k in range(1, n):
        phi_k = (gamma[k] - phi[:k - 1] @ gamma[k - 1:0:-1]) / var
        prev = phi[:k - 1].copy()
        phi[:k - 1] = prev - phi_k * prev[::-1]
        phi[k - 1] = phi_k
        var *= 1.0 - phi_k**2
        mean = out[:, :k] @ phi[k - 1::-1]
        out[:, k] = mean + math.sqrt(var) * z[:, k]
    return out


def _fgn_cholesky(hurst: float, n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """(size, n) unit-lag fGn via dense Cholesky of the exact covariance."""
    gamma = _fgn_gamma(hurst, n)
    idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    cov = gamma[idx]
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise EmbeddingError(f"fGn covariance not positive definite (H={hurst}, n={n})") from exc
    return rng.standard_normal((size, n)) @ chol.T


_FGN_SAMPLERS = {
    "davies_harte": _fgn_davies_harte,
    "hosking": _fgn_hosking,
    "cholesky": _fgn_cholesky,
}


def sample_fgn_batch(
    hurst: float, n: int, dt: float, rng: np.random.Generator, method: str, size: int = 1
) -> np.ndarray:
    """(size, n) stationary fGn increments with Var = dt^2H."""
    if method not in _FGN_SAMPLERS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    _check_hurst(hurst)
    return dt**hurst * _FGN_SAMPLERS[method](hurst, n, rng, size)


def sample_fbm(grid: TimeGrid, hurst: float, seed: int, method: str = "davies_harte") -> FbmPath:
    """One-sided fBm on a grid starting at t=0; deterministic in all inputs."""
    if grid.t_start != 0.0:
        raise ValueError("one-sided sampling requires a grid starting at 0")
    _check_hurst(hurst, 0.5, 1.0)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    fgn = sample_fgn_batch(hurst, grid.n_steps, grid.dt, rng, method, size=1)[0]
    values = np.concatenate([[0.0], np.cumsum(fgn)])
    return FbmPath(grid=grid, hurst=hurst, values=values, seed=seed, method=method)


def two_sided_fbm(
    hurst: float, grid: TimeGrid, seed: int, method: str = "davies_harte"
) -> FbmPath:
    """Two-sided fBm on a grid containing 0.

    One stationary fGn stream spans the whole window; the cumulative sum is
    anchored so that beta(0) = 0. This reproduces the two-sided covariance
    (|t|^2H + |s|^2H - |t-s|^2H)/2 exactly, including the negative cross-side
    correlation for H > 1/2.
    """
    if not grid.contains_zero():
        raise ValueError("two-sided grid must contain 0 as a grid point")
    _check_hurst(hurst, 0.5, 1.0)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    fgn = sample_fgn_batch(hurst, grid.n_steps, grid.dt, rng, method, size=1)[0]
    cum = np.concatenate([[0.0], np.cumsum(fgn)])
    values = cum - cum[grid.index_of(0.0)]
    return FbmPath(grid=grid, hurst=hurst, values=values, seed=seed, method=method)


def shift_path(path: FbmPath, t_shift: float) -> FbmPath:
    """Wiener shift: (theta_t w)(s) = w(s + t) - w(t), on the shifted grid.

    t_shift must be grid-aligned and lie inside the sampled window; the
    result covers [t_start - t_shift, t_end - t_shift] exactly, so the flow
    property shift(shift(p, t), s) == shift(p, t + s) holds bitwise on the
    overlap.
    """
    g = path.grid
    if t_shift == 0.0:
        return path
    k = (t_shift - 0.0) / g.dt
    ki = round(k)
    if abs(k - ki) > _ALIGN_RTOL * max(1.0, abs(k)):
        raise ValueError(f"t_shift={t_shift} is not an integer multiple of dt={g.dt}")
    base = path.raw if path.raw is not None else path.values
    anchor = g.index_of(t_shift)  # same positional index in base and values
    new_grid = TimeGrid(t_start=g.t_start - t_shift, dt=g.dt, n_steps=g.n_steps)
    return replace(path, grid=new_grid, values=base - base[anchor], raw=base)


def derive_site_seed(master_seed: int, site_index: int, component: int = 0) -> int:
    """Counter-based, collision-free per-site stream seed."""
    if master_seed < 0:
        raise ValueError("master_seed must be a nonnegative 64-bit integer")
    ss = np.random.SeedSequence((master_seed, site_index + 2**31, component))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class NoiseField:
    """ell^2-valued noise W1_i(t) = a_i beta_i(t), W2_i(t) = b_i beta'_i(t).

    With shared_driver (the default) the same per-site path drives both
    components; otherwise beta'_i is an independent stream.
    """

    paths: dict[int, FbmPath]
    a: np.ndarray
    b: np.ndarray
    shared_driver: bool = True
    paths_v: dict[int, FbmPath] | None = None
    _beta1: np.ndarray = field(init=False, repr=False)
    _beta2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        sites = self.sites
        n = len(sites)
        if len(self.a) != n or len(self.b) != n:
            raise ValueError(
                f"coefficient length mismatch: lattice has {n} sites, "
                f"a has {len(self.a)}, b has {len(self.b)}"
            )
        if not self.shared_driver and self.paths_v is None:
            raise ValueError("independent drivers requested but no second path family given")
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self._beta1 = np.stack([self.paths[i].values for i in sites])
        src2 = self.paths if self.shared_driver else self.paths_v
        self._beta2 = self._beta1 if self.shared_driver else np.stack(
            [src2[i].values for i in sites]
        )

    @property
    def sites(self) -> list[int]:
        return sorted(self.paths)

    @property
    def grid(self) -> TimeGrid:
        return next(iter(self.paths.values())).grid

    def w1_grid(self) -> np.ndarray:
        """(n_sites, n_points) matrix of W1 values on the grid."""
        return self.a[:, None] * self._beta1

    def w2_grid(self) -> np.ndarray:
        return self.b[:, None] * self._beta2

    def w1_at(self, t: float) -> np.ndarray:
        return self.a * self._interp(self._beta1, t)

    def w2_at(self, t: float) -> np.ndarray:
        return self.b * self._interp(self._beta2, t)

    def _interp(self, beta: np.ndarray, t: float) -> np.ndarray:
        g = self.grid
        x = (t - g.t_start) / g.dt
        if x < -_ALIGN_RTOL or x > g.n_steps + _ALIGN_RTOL:
            raise ValueError(f"t={t} outside the sampled noise window")
        x = min(max(x, 0.0), float(g.n_steps))
        k = min(int(x), g.n_steps - 1)
        frac = x - k
        return (1.0 - frac) * beta[:, k] + frac * beta[:, k + 1]

    def shifted(self, t_shift: float) -> "NoiseField":
        """Apply the Wiener shift to every per-site driver."""
        paths = {i: shift_path(p, t_shift) for i, p in self.paths.items()}
        paths_v = (
            None
            if self.paths_v is None
            else {i: shift_path(p, t_shift) for i, p in self.paths_v.items()}
        )
        return NoiseField(
            paths=paths, a=self.a, b=self.b, shared_driver=self.shared_driver, paths_v=paths_v
        )

    def dump_csv(self, path) -> None:
        w1, w2 = self.w1_grid(), self.w2_grid()
        sites, times = self.sites, self.grid.times
        with open(path, "w") as fh:
            fh.write("t,site,w1,w2\n")
            for k, t in enumerate(times):
                for j, i in enumerate(sites):
                    fh.write(f"{t:.17g},{i},{w1[j, k]:.17g},{w2[j, k]:.17g}\n")


def sample_noise_field(
    a: np.ndarray,
    b: np.ndarray,
    hurst: float,
    grid: TimeGrid,
    master_seed: int,
    shared_driver: bool = True,
    method: str = "davies_harte",
) -> NoiseField:
    """Sample independent per-site two-sided drivers and wrap as a NoiseField.

    Per-site seeds derive from (master_seed, site, component) so streams are
    reproducible and collision-free regardless of lattice size.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) != len(b):
        raise ValueError(f"a and b must have equal length, got {len(a)} and {len(b)}")
    if len(a) % 2 != 1:
        raise ValueError("coefficient sequences must cover sites -N..N (odd length)")
    half = (len(a) - 1) // 2
    sites = range(-half, half + 1)

    def sample_site(i: int, component: int) -> FbmPath:
        seed = derive_site_seed(master_seed, i, component)
        return replace(two_sided_fbm(hurst, grid, seed, method), site_index=i)

    paths = {i: sample_site(i, 0) for i in sites}
    paths_v = None if shared_driver else {i: sample_site(i, 1) for i in sites}
    return NoiseField(paths=paths, a=a, b=b, shared_driver=shared_driver, paths_v=paths_v)
