import numpy as np
import pytest

from goursat_spde.ensemble import (
    EmptyEnsembleError,
    EnsembleSpec,
    _Moments,
    run_ensemble,
    sample_points,
    sd_growth_fit,
)
from goursat_spde.grid import build_grid, constant_boundary
from goursat_spde.noise import NoiseConfig, sample_increments
from goursat_spde.solver import Record, solve
from goursat_spde.source import Affine, Exponential, Quadratic, Zero


def _stack(spec, bc, src, sigma, n, seed):
    return np.array([
        solve(spec, bc, src, sigma, sample_increments(spec, NoiseConfig(sigma, seed, k))).field.values
        for k in range(n)
    ])


def test_zero_sigma_is_deterministic():
    spec = build_grid(3, 3, 30, 30)
    bc = constant_boundary(spec, 1.0)
    stats = run_ensemble(spec, bc, Affine(-1), 0.0, EnsembleSpec(7, 1))
    det = solve(spec, bc, Affine(-1)).field.values
    assert np.array_equal(stats.mean.values, det)
    assert np.all(stats.sd.values == 0)
    assert stats.n_completed == 7 and stats.n_singular == 0


def test_moments_match_brute_force():
    spec = build_grid(2, 2, 20, 20)
    bc = constant_boundary(spec, 1.0)
    stats = run_ensemble(spec, bc, Affine(1), 0.5, EnsembleSpec(37, 4))
    trials = _stack(spec, bc, Affine(1), 0.5, 37, 4)
    np.testing.assert_allclose(stats.mean.values, trials.mean(axis=0), rtol=1e-12)
    np.testing.assert_allclose(stats.sd.values, trials.std(axis=0, ddof=1), rtol=1e-10, atol=1e-14)
    assert np.all(stats.counts == 37)


def test_singular_trials_excluded_pointwise():
    spec = build_grid(10, 10, 100, 100)
    bc = constant_boundary(spec, 0.1)
    stats = run_ensemble(spec, bc, Quadratic(1), 0.1, EnsembleSpec(12, 5))
    trials = _stack(spec, bc, Quadratic(1), 0.1, 12, 5)
    n_sing = sum(np.isnan(t).any() for t in trials)
    assert stats.n_singular == n_sing >= 1
    assert stats.n_completed + stats.n_singular == 12
    np.testing.assert_array_equal(stats.counts.reshape(spec.shape), np.sum(np.isfinite(trials), axis=0))
    np.testing.assert_allclose(stats.mean.values, np.nanmean(trials, axis=0), rtol=1e-10, atol=1e-12)
    with np.errstate(invalid="ignore"):
        sd = np.nanstd(trials, axis=0, ddof=1)
    np.testing.assert_allclose(stats.sd.values, sd, rtol=1e-8, atol=1e-10)
    assert set(stats.singular_sites) == {k for k, t in enumerate(trials) if np.isnan(t).any()}


def test_empty_ensemble_raises():
    spec = build_grid(5, 5, 50, 50)
    with pytest.raises(EmptyEnsembleError):
        run_ensemble(spec, constant_boundary(spec, 1.0), Exponential(), 0.1, EnsembleSpec(3, 0))


@pytest.mark.parametrize("threads", [1, 4, 8])
def test_thread_count_does_not_change_statistics(threads):
    spec = build_grid(2, 2, 40, 40)
    bc = constant_boundary(spec, 1.0)
    ref = run_ensemble(spec, bc, Affine(-1), 0.3, EnsembleSpec(29, 12), threads=1)
    got = run_ensemble(spec, bc, Affine(-1), 0.3, EnsembleSpec(29, 12), threads=threads)
    assert got.mean_flat.tobytes() == ref.mean_flat.tobytes()
    assert got.sd_flat.tobytes() == ref.sd_flat.tobytes()


def test_chunked_merge_close_to_sequential():
    rng = np.random.default_rng(0)
    data = rng.normal(5, 2, size=(50, 13))
    seq = _Moments(13)
    for row in data:
        seq.push(row)
    merged = _Moments(13)
    for block in (data[:8], data[8:16], data[16:50]):
        part = _Moments(13)
        for row in block:
            part.push(row)
        merged.merge(part)
    np.testing.assert_allclose(merged.mean, seq.mean, rtol=1e-13)
    np.testing.assert_allclose(merged.m2, seq.m2, rtol=1e-10)


def test_ci_halfwidth_convention():
    spec = build_grid(1, 1, 20, 20)
    stats = run_ensemble(spec, constant_boundary(spec, 0.0), Zero(), 3.0, EnsembleSpec(50, 1))
    row = stats.at(1, 1)
    assert row["ci95_halfwidth"] == pytest.approx(1.96 * row["sd"] / np.sqrt(50), rel=1e-15)


def test_ci_halfwidth_reference_values():
    # exact SD 3 with 500 trials, SD 6 with 200 trials
    assert 1.96 * 3 / np.sqrt(500) == pytest.approx(0.263, abs=5e-4)
    assert 1.96 * 6 / np.sqrt(200) == pytest.approx(0.832, abs=5e-4)


def test_record_modes_agree():
    spec = build_grid(2, 2, 30, 40)
    bc = constant_boundary(spec, 1.0)
    full = run_ensemble(spec, bc, Affine(-1), 0.2, EnsembleSpec(10, 3))
    sl = run_ensemble(spec, bc, Affine(-1), 0.2,
                      EnsembleSpec(10, 3, Record.of_slices([("t", 2.0), ("x", 1.0)], points=[(0.5, 0.5)])))
    seg = sl.segment("t=2")
    np.testing.assert_array_equal(seg["mean"], full.mean.values[:, -1])
    np.testing.assert_array_equal(sl.segment("x=1")["sd"], full.sd.values[15, :])
    assert sl.at(0.5, 0.5)["mean"] == full.at(0.5, 0.5)["mean"]
    with pytest.raises(ValueError):
        sl.mean


def test_sheet_sd_matches_analytic():
    spec = build_grid(1, 1, 10, 10)
    n = 400
    stats = run_ensemble(spec, constant_boundary(spec, 0.0), Zero(), 2.0, EnsembleSpec(n, 21))
    X, T = np.meshgrid(spec.x, spec.t, indexing="ij")
    exact = 2.0 * np.sqrt(X * T)
    se = exact / np.sqrt(2 * (n - 1))
    inner = (X > 0) & (T > 0)
    within = np.abs(stats.sd.values - exact)[inner] <= 3 * se[inner]
    assert within.mean() >= 0.98


def test_affine_mean_within_four_standard_errors():
    spec = build_grid(3, 3, 30, 30)
    bc = constant_boundary(spec, 1.0)
    stats = run_ensemble(spec, bc, Affine(-1), 0.2, EnsembleSpec(60, 8))
    det = solve(spec, bc, Affine(-1)).field.values
    se = stats.sd.values / np.sqrt(stats.n_completed)
    ok = (np.abs(stats.mean.values - det) <= 4 * se) | (se == 0)
    assert ok.mean() >= 0.99


def test_reproducible_given_seed():
    spec = build_grid(1, 1, 15, 15)
    bc = constant_boundary(spec, 0.0)
    a = run_ensemble(spec, bc, Zero(), 1.0, EnsembleSpec(9, 77))
    b = run_ensemble(spec, bc, Zero(), 1.0, EnsembleSpec(9, 77))
    c = run_ensemble(spec, bc, Zero(), 1.0, EnsembleSpec(9, 78))
    assert a.mean_flat.tobytes() == b.mean_flat.tobytes()
    assert not np.array_equal(a.mean_flat, c.mean_flat)


def test_sample_points_matches_full_trials():
    spec = build_grid(1, 1, 12, 12)
    bc = constant_boundary(spec, 0.0)
    W = sample_points(spec, bc, Zero(), 1.0, [(1, 1), (0.5, 0.25)], 5, master_seed=2)
    full = _stack(spec, bc, Zero(), 1.0, 5, 2)
    np.testing.assert_array_equal(W[:, 0], full[:, 12, 12])
    np.testing.assert_array_equal(W[:, 1], full[:, 6, 3])


def test_invalid_spec():
    with pytest.raises(ValueError):
        EnsembleSpec(0)
    with pytest.raises(ValueError):
        EnsembleSpec(3, -1)


def test_sd_growth_fit_exact_line():
    assert sd_growth_fit([0.5, 1, 2, 3], [3, 6, 12, 18]) == pytest.approx(6.0)
    assert sd_growth_fit([0, 1, 2], [0, 2, 4]) == pytest.approx(2.0)


@pytest.mark.parametrize("sigmas, sds", [([1, 2], [1, 2]), ([0, 0, 0], [0, 0, 0]), ([0, 0, 1], [0, 0, 1])])
def test_sd_growth_fit_rejects_degenerate(sigmas, sds):
    with pytest.raises(ValueError):
        sd_growth_fit(sigmas, sds)
