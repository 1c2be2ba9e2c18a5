"""Fractional Ornstein-Uhlenbeck evaluation: exactness limits, the
integration-by-parts quadrature, stationarity, growth bounds."""

import math

import numpy as np
import pytest

from fhnlab.dynamics import SystemParams
from fhnlab.fbm import FbmPath, TimeGrid, sample_noise_field, shift_path, two_sided_fbm
from fhnlab.fou import (
    fou_forward,
    fou_stationary,
    growth_bound_fit,
    stationary_pair,
)


def constant_driver(grid, value=0.0):
    vals = np.full(grid.n_steps + 1, float(value))
    if grid.contains_zero():
        vals[grid.index_of(0.0)] = value
    return FbmPath(grid=grid, hurst=0.75, values=vals, seed=0)


def smooth_driver(grid, fn):
    return FbmPath(grid=grid, hurst=0.75, values=fn(grid.times), seed=0)


def test_zero_driver_pure_decay():
    grid = TimeGrid(0.0, 2.0**-8, 512)
    driver = constant_driver(grid, 0.0)
    out = fou_forward(3.0, rate=1.5, driver=driver)
    exact = 3.0 * np.exp(-1.5 * grid.times)
    assert np.max(np.abs(out.values - exact)) < 1e-14


def test_small_rate_limit_recovers_driver():
    # as rate -> 0, x(t) - x0 -> W(t)
    grid = TimeGrid(0.0, 2.0**-6, 128)
    driver = two_sided_fbm(0.75, grid, seed=4)
    out = fou_forward(0.0, rate=1e-8, driver=driver)
    assert np.max(np.abs(out.values - driver.values)) < 1e-6


def test_ibp_quadrature_against_closed_form():
    # driver w(t) = sin t: int_0^t e^{rs} d sin(s) = int_0^t e^{rs} cos s ds
    # = [e^{rs}(r cos s + sin s)/(1+r^2)]_0^t
    r = 2.0
    grid = TimeGrid(0.0, 2.0**-10, 2**11)
    driver = smooth_driver(grid, np.sin)
    out = fou_forward(0.0, rate=r, driver=driver)
    t = grid.times
    integral = (np.exp(r * t) * (r * np.cos(t) + np.sin(t)) - r) / (1 + r * r)
    exact = np.exp(-r * t) * integral
    err = np.max(np.abs(out.values - exact))
    print(f"IBP vs closed form: max error {err:.3e}")
    assert err < 1e-6


def test_ibp_matches_left_point_stieltjes_sums():
    # independent route: left-point Riemann-Stieltjes sums on a refined grid
    r = 1.0
    grid = TimeGrid(0.0, 2.0**-10, 2**10)
    driver = two_sided_fbm(0.75, grid, seed=8)
    out = fou_forward(0.0, rate=r, driver=driver)
    t, w = grid.times, driver.values
    rs = np.concatenate([[0.0], np.cumsum(np.exp(r * t[:-1]) * np.diff(w))])
    alt = np.exp(-r * t) * rs
    err = np.max(np.abs(out.values - alt))
    print(f"IBP vs left-point sums: max deviation {err:.3e}")
    assert err < 5e-3  # both are O(dt)-consistent estimators of the same limit


def test_stationary_one_step_identity():
    # x_bar(t) = e^{-r dt} x_bar(t - dt) + e^{-rt} int_{t-dt}^t e^{rs} dW
    r = 1.0
    grid = TimeGrid(-40.0, 2.0**-6, 41 * 2**6)
    driver = two_sided_fbm(0.75, grid, seed=13)
    eval_grid = TimeGrid(0.0, 2.0**-6, 2**6)
    x = fou_stationary(r, driver, eval_grid, t_trunc=40.0).values
    t = eval_grid.times
    dt = eval_grid.dt
    # trapezoid version of the incremental integral, matching the quadrature
    w0 = driver.values[driver.grid.index_of(0.0) : driver.grid.index_of(1.0) + 1]
    ew = np.exp(r * t)
    inc = ew[1:] * w0[1:] - ew[:-1] * w0[:-1] - r * 0.5 * dt * (
        ew[1:] * w0[1:] + ew[:-1] * w0[:-1]
    )
    lhs = x[1:]
    rhs = math.exp(-r * dt) * x[:-1] + np.exp(-r * t[1:]) * inc
    err = np.max(np.abs(lhs - rhs))
    print(f"one-step stationarity identity: max deviation {err:.3e}")
    assert err < 1e-12


def test_stationary_shift_consistency():
    # x_bar(t)(theta_{-s} w) == x_bar(t - s)(w) up to truncation tails
    # quadrature error scales like dt^2, so a fine grid is needed for 1e-6
    r, s = 1.0, 2.0
    dt = 2.0**-10
    grid = TimeGrid(-40.0, dt, round(42 / dt))
    driver = two_sided_fbm(0.75, grid, seed=21)
    eval_grid = TimeGrid(0.0, dt, 2**10)
    shifted_eval = fou_stationary(
        r, shift_path(driver, -s), eval_grid, t_trunc=35.0
    ).values
    wide = TimeGrid(-s, dt, 2**10 + round(s / dt))
    plain = fou_stationary(r, driver, wide, t_trunc=35.0).values
    k = wide.index_of(-s)
    err = np.max(np.abs(shifted_eval - plain[k : k + eval_grid.n_steps + 1]))
    print(f"shift consistency: max deviation {err:.3e}")
    assert err < 1e-6


def test_stationary_truncation_guard():
    grid = TimeGrid(-5.0, 2.0**-4, 96)
    driver = two_sided_fbm(0.75, grid, seed=2)
    eval_grid = TimeGrid(0.0, 2.0**-4, 16)
    with pytest.raises(ValueError, match="truncation horizon too short"):
        fou_stationary(0.5, driver, eval_grid, t_trunc=5.0)


def test_forward_requires_zero_start():
    grid = TimeGrid(0.0, 0.25, 8)
    driver = constant_driver(grid)
    with pytest.raises(ValueError, match="starts at t=0"):
        fou_forward(0.0, 1.0, driver, grid=TimeGrid(0.25, 0.25, 4))


def test_rate_validation():
    grid = TimeGrid(0.0, 0.25, 8)
    driver = constant_driver(grid)
    with pytest.raises(ValueError, match="rate must be positive"):
        fou_forward(0.0, -1.0, driver)


def test_stationary_pair_matches_componentwise():
    params = SystemParams(lam=1.0, sigma=2.0)
    grid = TimeGrid(-40.0, 2.0**-5, 41 * 2**5)
    a = np.array([0.5, 1.0, 0.5])
    b = np.array([1.0, 2.0, 1.0])
    noise = sample_noise_field(a, b, 0.75, grid, master_seed=3)
    eval_grid = TimeGrid(0.0, 2.0**-5, 2**5)
    pair = stationary_pair(params, noise, eval_grid, t_trunc=40.0)
    # sitewise: u_bar_i is the rate-lambda fOU of W1_i = a_i beta_i
    for j, i in enumerate(noise.sites):
        scaled = FbmPath(
            grid=grid, hurst=0.75, values=a[j] * noise.paths[i].values, seed=0
        )
        ref = fou_stationary(params.lam, scaled, eval_grid, t_trunc=40.0)
        assert np.allclose(pair.u[:, j], ref.values, atol=1e-12)
    assert pair.u.shape == (eval_grid.n_steps + 1, 3)


def test_marginal_variance_time_invariance():
    # Monte Carlo: Var x_bar(t) must not depend on t
    r, m = 1.0, 800
    grid = TimeGrid(-30.0, 2.0**-4, 34 * 2**4)
    eval_grid = TimeGrid(0.0, 2.0**-4, 4 * 2**4)
    samples = np.empty((m, 2))
    for j in range(m):
        driver = two_sided_fbm(0.75, grid, seed=50_000 + j)
        x = fou_stationary(r, driver, eval_grid, t_trunc=28.0).values
        samples[j] = x[0], x[-1]
    v0, v1 = samples.var(axis=0)
    se = v0 * math.sqrt(2.0 / m)
    z = abs(v1 - v0) / se
    print(f"stationary variance: {v0:.4f} vs {v1:.4f} (z={z:.2f})")
    assert z < 5.0


def test_growth_bound_fit_normalizations():
    times = np.linspace(-10.0, 10.0, 201)
    values = (1.0 + np.abs(times)) ** 2 * 0.5
    est = growth_bound_fit(values, times, normalization="quadratic")
    assert est.rho == pytest.approx(0.5)
    est2 = growth_bound_fit(np.vstack([values, values]), times, "quartic")
    assert est2.rho >= est.rho  # quartic denominator is smaller near t=0
    with pytest.raises(ValueError, match="normalization"):
        growth_bound_fit(values, times, "cubic")
