"""Distortion sweeps: exact oracle, Monte Carlo, reproducibility, and fits."""

import numpy as np
import pytest

from arqde import (
    AntennaConfig,
    SimConfig,
    assign_layers,
    decoded_layers,
    distortion_of,
    fit_exponent,
    outage_prob_siso_exact,
    run_sim,
)

CFG11 = AntennaConfig(1, 1)
CFG22 = AntennaConfig(2, 2)


def test_decoded_layers_boundaries():
    rates = [1.0, 1.0, 1.0]
    assert decoded_layers(0.5, rates) == 0
    assert decoded_layers(2.5, rates) == 2
    assert decoded_layers(3.0, rates) == 3  # boundary equality decodes
    assert decoded_layers(9.9, rates) == 3
    with pytest.raises(ValueError):
        decoded_layers(1.0, [0.5, -0.1])


def test_distortion_levels():
    rates = [1.0, 2.0]
    assert distortion_of(0, rates, 0.5) == 1.0
    assert distortion_of(1, rates, 0.5) == pytest.approx(2.0 ** -0.5, abs=1e-15)
    assert distortion_of(2, rates, 0.5) == pytest.approx(2.0 ** -1.5, abs=1e-15)
    with pytest.raises(ValueError):
        distortion_of(3, rates, 0.5)


def test_sim_config_validation():
    with pytest.raises(ValueError):
        SimConfig(CFG11, 0.0, [0.5], [10.0], 100, 0)
    with pytest.raises(ValueError):
        SimConfig(CFG11, 0.5, [0.5], [10.0], 0, 0)
    with pytest.raises(ValueError):
        SimConfig(CFG11, 0.5, [0.5], [10.0], 100, 0, oracle="nope")
    with pytest.raises(ValueError):
        SimConfig(CFG22, 1.0, [0.5], [10.0], 100, 0, oracle="exact")
    with pytest.raises(ValueError):
        SimConfig(CFG11, 0.5, [0.5], [10.0], 100, 0, threads=0)


def test_run_sim_rejects_low_snr():
    with pytest.raises(ValueError):
        run_sim(SimConfig(CFG11, 0.5, [0.5], [0.0], 100, 0))
    with pytest.raises(ValueError):
        run_sim(SimConfig(CFG11, 0.5, [0.5], [], 100, 0))


def test_negative_gains_rejected():
    with pytest.raises(ValueError):
        SimConfig(CFG11, 0.5, [0.5, -0.2], [10.0], 100, 0).gains


def test_exact_mode_matches_independent_sum():
    """Dual route: exact-mode averages against a direct probability sum."""
    alloc = assign_layers(CFG11, 0.5, 4)
    got = run_sim(SimConfig(CFG11, 0.5, alloc, [20.0], 1000, 0, oracle="exact"))
    snr = 100.0
    cum = np.cumsum(alloc.rates) * np.log2(snr)
    cdf = [outage_prob_siso_exact(snr, r) for r in cum]
    probs = np.diff([0.0, *cdf, 1.0])
    levels = [1.0, *(2.0 ** (-0.5 * cum))]
    assert got.points[0].mean_distortion == pytest.approx(float(np.dot(probs, levels)), abs=1e-15)


def test_mc_agrees_with_exact_within_error():
    alloc = assign_layers(CFG11, 0.5, 4)
    mc = run_sim(SimConfig(CFG11, 0.5, alloc, [20.0], 100_000, 11)).points[0]
    ex = run_sim(SimConfig(CFG11, 0.5, alloc, [20.0], 100_000, 11, oracle="exact")).points[0]
    assert mc.mean_distortion == pytest.approx(0.245439513550827, abs=1e-15)
    assert ex.mean_distortion == pytest.approx(0.24426761398606725, abs=1e-15)
    assert abs(mc.mean_distortion - ex.mean_distortion) < 4 * mc.std_error


def test_mc_runs_are_bit_reproducible_and_thread_invariant():
    alloc = assign_layers(CFG22, 2.0, 4)
    a = run_sim(SimConfig(CFG22, 2.0, alloc, [5.0, 15.0], 200_000, 9))
    b = run_sim(SimConfig(CFG22, 2.0, alloc, [5.0, 15.0], 200_000, 9))
    c = run_sim(SimConfig(CFG22, 2.0, alloc, [5.0, 15.0], 200_000, 9, threads=4))
    for other in (b, c):
        for p, q in zip(a.points, other.points):
            assert p.mean_distortion == q.mean_distortion
            assert np.array_equal(p.layer_histogram, q.layer_histogram)


def test_common_randomness_across_grids():
    # the same seed reuses the same channel blocks at every grid point, so a
    # point's histogram does not depend on which other points are in the grid
    alloc = assign_layers(CFG22, 2.0, 4)
    solo = run_sim(SimConfig(CFG22, 2.0, alloc, [20.0], 150_000, 13)).points[0]
    grid = run_sim(SimConfig(CFG22, 2.0, alloc, [10.0, 20.0, 30.0], 150_000, 13)).points[1]
    assert solo.mean_distortion == grid.mean_distortion
    assert np.array_equal(solo.layer_histogram, grid.layer_histogram)


def test_histogram_accounting():
    alloc = assign_layers(CFG22, 2.0, 4)
    pt = run_sim(SimConfig(CFG22, 2.0, alloc, [15.0], 70_000, 3)).points[0]
    hist = pt.layer_histogram
    assert hist.sum() == 70_000
    assert hist.dtype == np.int64
    cum_rates = np.cumsum(alloc.rates) * np.log2(10.0 ** 1.5)
    levels = np.concatenate([[1.0], 2.0 ** (-2.0 * cum_rates)])
    probs = hist / 70_000
    mean = float(probs @ levels)
    second = float(probs @ levels**2)
    assert pt.mean_distortion == pytest.approx(mean, abs=1e-15)
    assert pt.std_error == pytest.approx(np.sqrt((second - mean * mean) / 70_000), abs=1e-18)


def test_fitted_exponent_frozen_values():
    grid = [60, 70, 80, 90, 100, 110, 120]
    r2 = run_sim(SimConfig(CFG11, 0.5, assign_layers(CFG11, 0.5, 2), grid, 10, 0, oracle="exact"))
    r8 = run_sim(SimConfig(CFG11, 0.5, assign_layers(CFG11, 0.5, 8), grid, 10, 0, oracle="exact"))
    r1 = run_sim(SimConfig(CFG11, 0.5, [2.0 / 3.0], grid, 10, 0, oracle="exact"))
    assert r2.fitted_exponent == pytest.approx(0.25416838695557586, abs=1e-12)
    assert r8.fitted_exponent == pytest.approx(0.4804098222910476, abs=1e-12)
    assert r1.fitted_exponent == pytest.approx(0.3328628138509716, abs=1e-12)
    assert r2.fit_residuals is not None and len(r2.fit_residuals) == 7


def test_fit_needs_three_points():
    rep = run_sim(SimConfig(CFG11, 0.5, [0.5], [10.0, 20.0], 100, 0, oracle="exact"))
    assert rep.fitted_exponent is None
    with pytest.raises(ValueError):
        fit_exponent(rep)


def test_exact_mode_histogram_is_expected_counts():
    pt = run_sim(SimConfig(CFG11, 0.5, [0.5], [10.0], 1000, 0, oracle="exact")).points[0]
    assert pt.std_error == 0.0
    assert pt.layer_histogram.sum() == pytest.approx(1000.0, abs=1e-9)
