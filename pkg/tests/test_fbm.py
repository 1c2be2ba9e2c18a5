"""Noise synthesis: covariance law, shift semantics, determinism."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fhnlab.fbm import (
    METHODS,
    FbmPath,
    TimeGrid,
    derive_site_seed,
    fbm_covariance,
    fgn_autocovariance,
    sample_fbm,
    sample_fgn_batch,
    sample_noise_field,
    shift_path,
    two_sided_fbm,
)


def test_covariance_brownian_limit():
    # H = 1/2 degenerates to min(s, t) for s, t >= 0
    for s, t in [(0.25, 1.0), (2.0, 3.5), (1.0, 1.0)]:
        assert fbm_covariance(s, t, 0.5) == pytest.approx(min(s, t), abs=1e-15)


def test_covariance_two_sided_example():
    # opposite-side correlation is negative for H > 1/2
    c = fbm_covariance(1.0, -1.0, 0.75)
    assert c == pytest.approx((1 + 1 - 2**1.5) / 2, abs=1e-14)
    assert c < 0


@given(
    s=st.floats(-5, 5), t=st.floats(-5, 5),
    h=st.floats(0.51, 0.99),
)
def test_covariance_symmetry_and_diagonal(s, t, h):
    assert fbm_covariance(s, t, h) == pytest.approx(fbm_covariance(t, s, h), rel=1e-12, abs=1e-12)
    assert fbm_covariance(t, t, h) == pytest.approx(abs(t) ** (2 * h), rel=1e-12, abs=1e-12)


def test_fgn_autocovariance_sums_to_fbm_variance():
    h, dt, n = 0.7, 0.125, 16
    total = sum(
        fgn_autocovariance(abs(i - j), h, dt) for i in range(n) for j in range(n)
    )
    assert total == pytest.approx(fbm_covariance(n * dt, n * dt, h), rel=1e-10)


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("hurst", [0.6, 0.75, 0.9])
def test_fgn_empirical_autocovariance(method, hurst):
    n, m, dt = 16, 4000, 1.0
    rng = np.random.default_rng(12345)
    x = sample_fgn_batch(hurst, n, dt, rng, method, size=m)
    worst = 0.0
    for lag in range(4):
        emp = np.mean(x[:, : n - lag] * x[:, lag:], axis=(0, 1)) if lag else np.mean(x * x)
        theory = fgn_autocovariance(lag, hurst, dt)
        # crude 5 sigma band for the mean of m*(n-lag) correlated products
        se = np.std(x[:, : n - lag] * x[:, lag:]) / np.sqrt(m)
        z = abs(emp - theory) / se
        worst = max(worst, z)
        assert z < 5.0, f"{method} H={hurst} lag={lag}: z={z:.2f}"
    print(f"{method} H={hurst}: worst lag z-score {worst:.2f}")


def test_sampling_is_deterministic():
    grid = TimeGrid(0.0, 0.25, 32)
    for method in METHODS:
        p1 = sample_fbm(grid, 0.75, seed=99, method=method)
        p2 = sample_fbm(grid, 0.75, seed=99, method=method)
        assert np.array_equal(p1.values, p2.values)
        p3 = sample_fbm(grid, 0.75, seed=100, method=method)
        assert not np.array_equal(p1.values, p3.values)


def test_two_sided_anchored_at_zero():
    grid = TimeGrid(-2.0, 0.25, 16)
    path = two_sided_fbm(0.75, grid, seed=5)
    assert path.values[grid.index_of(0.0)] == 0.0


def test_two_sided_cross_covariance():
    # Cov(beta(1), beta(-1)) = (1 + 1 - 2^{2H})/2, negative for H > 1/2
    h, m = 0.75, 6000
    grid = TimeGrid(-1.0, 0.125, 16)
    k_m1, k_p1 = grid.index_of(-1.0), grid.index_of(1.0)
    vals = np.empty((m, 2))
    for j in range(m):
        p = two_sided_fbm(h, grid, seed=70_000 + j, method="davies_harte")
        vals[j] = p.values[k_m1], p.values[k_p1]
    emp = np.mean(vals[:, 0] * vals[:, 1])
    theory = fbm_covariance(1.0, -1.0, h)
    se = np.std(vals[:, 0] * vals[:, 1]) / np.sqrt(m)
    assert abs(emp - theory) < 5 * se
    print(f"cross covariance: emp {emp:.4f} vs theory {theory:.4f} (se {se:.4f})")


def test_shift_definition():
    # (theta_t w)(s) = w(s + t) - w(t)
    grid = TimeGrid(-4.0, 0.5, 16)
    p = two_sided_fbm(0.8, grid, seed=11)
    q = shift_path(p, 1.0)
    assert q.value_at(2.0) == p.value_at(3.0) - p.value_at(1.0)
    assert q.value_at(0.0) == 0.0


def test_shift_flow_property_bitwise():
    grid = TimeGrid(-4.0, 0.25, 32)
    p = two_sided_fbm(0.75, grid, seed=21)
    once = shift_path(shift_path(p, 0.5), 0.75)
    direct = shift_path(p, 1.25)
    assert np.array_equal(once.values, direct.values)
    back = shift_path(once, -1.25)
    assert np.array_equal(back.values, p.values)


def test_shift_requires_grid_alignment():
    grid = TimeGrid(-1.0, 0.25, 8)
    p = two_sided_fbm(0.75, grid, seed=3)
    with pytest.raises(ValueError):
        shift_path(p, 0.3)


def test_grid_index_and_alignment():
    grid = TimeGrid(-1.0, 0.125, 16)
    assert grid.index_of(-1.0) == 0
    assert grid.index_of(1.0) == 16
    assert grid.contains_zero()
    with pytest.raises(ValueError):
        grid.index_of(0.3)
    with pytest.raises(ValueError):
        grid.index_of(1.5)


@given(k=st.integers(0, 64))
@settings(max_examples=30)
def test_grid_index_roundtrip(k):
    grid = TimeGrid(-3.0, 2.0**-6, 64)
    assert grid.index_of(grid.times[k]) == k


def test_site_seeds_distinct():
    seeds = {derive_site_seed(7, i, c) for i in range(-20, 21) for c in (0, 1)}
    assert len(seeds) == 82


def test_noise_field_scaling_and_sharing():
    grid = TimeGrid(-1.0, 0.25, 8)
    a = np.array([0.5, 1.0, 2.0])
    b = np.array([1.0, 1.0, 1.0])
    field = sample_noise_field(a, b, 0.75, grid, master_seed=4)
    w1, w2 = field.w1_grid(), field.w2_grid()
    # shared driver: W1_i / a_i == W2_i / b_i sitewise
    assert np.allclose(w1 / a[:, None], w2 / b[:, None])
    assert np.array_equal(field.w1_at(0.5), w1[:, grid.index_of(0.5)])


def test_noise_field_independent_drivers():
    grid = TimeGrid(-1.0, 0.25, 8)
    a = np.ones(3)
    field = sample_noise_field(a, a, 0.75, grid, master_seed=4, shared_driver=False)
    assert not np.allclose(field.w1_grid(), field.w2_grid())


def test_noise_field_shift_matches_pathwise_shift():
    grid = TimeGrid(-2.0, 0.25, 16)
    field = sample_noise_field(np.ones(3), np.ones(3), 0.75, grid, master_seed=9)
    shifted = field.shifted(1.0)
    for i in field.sites:
        expected = shift_path(field.paths[i], 1.0)
        assert np.array_equal(shifted.paths[i].values, expected.values)


def test_noise_field_rejects_length_mismatch():
    grid = TimeGrid(-1.0, 0.25, 8)
    with pytest.raises(ValueError, match="equal length"):
        sample_noise_field(np.ones(3), np.ones(5), 0.75, grid, master_seed=0)
    with pytest.raises(ValueError, match="odd"):
        sample_noise_field(np.ones(4), np.ones(4), 0.75, grid, master_seed=0)


def test_hurst_domain_enforced():
    grid = TimeGrid(0.0, 0.25, 8)
    for bad in (0.5, 1.0, 0.3):
        with pytest.raises(ValueError):
            sample_fbm(grid, bad, seed=0)


def test_value_at_outside_window_rejected():
    grid = TimeGrid(0.0, 0.25, 8)
    p = sample_fbm(grid, 0.75, seed=0)
    with pytest.raises(ValueError):
        p.value_at(3.0)


def test_dump_csv_roundtrip(tmp_path):
    grid = TimeGrid(0.0, 0.5, 4)
    p = sample_fbm(grid, 0.75, seed=1)
    out = tmp_path / "p.csv"
    p.dump_csv(out)
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 0], grid.times)
    assert np.array_equal(data[:, 1], p.values)
