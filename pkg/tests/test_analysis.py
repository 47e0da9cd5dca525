"""Comb metrics, fringe spacing, decay fits and the efficiency formula."""

import numpy as np
import pytest

from afcsim import IonParameters, NotACombError, comb_profile, flat_profile, make_grid
from afcsim.analysis import (afc_efficiency_analytic, analyze_comb,
                             efficiency_vs_storage, fit_exponential,
                             fringe_spacing)
from afcsim.sequences import BurnConfig


def test_analyze_comb_recovers_construction():
    grid = make_grid(100e6, 8192)
    spacing, fwhm, od, bg = 8e6, 2e6, 1.5, 0.3
    prof = comb_profile(grid, spacing, od, fwhm, background_od=bg,
                        shape="gaussian", bandwidth_hz=60e6)
    comb = analyze_comb(grid.detunings, prof.od)
    assert comb.spacing_hz == pytest.approx(spacing, rel=1e-3)
    assert comb.od_contrast == pytest.approx(od, rel=0.02)
    assert comb.background_od == pytest.approx(bg, abs=0.02)
    assert comb.finesse == pytest.approx(spacing / fwhm, rel=0.03)
    assert comb.n_teeth == 7
    centers = np.array([t.center_hz for t in comb.teeth])
    assert np.abs(centers - np.round(centers / spacing) * spacing).max() < grid.df


def test_analyze_comb_window():
    grid = make_grid(100e6, 8192)
    prof = comb_profile(grid, 8e6, 1.0, 2e6, bandwidth_hz=60e6)
    comb = analyze_comb(grid.detunings, prof.od, window_hz=(-13e6, 13e6))
    assert comb.n_teeth == 3


def test_not_a_comb():
    grid = make_grid(100e6, 1024)
    with pytest.raises(NotACombError):
        analyze_comb(grid.detunings, np.ones(grid.n_points))
    with pytest.raises(NotACombError):
        analyze_comb(grid.detunings, np.linspace(0, 1, grid.n_points))
    with pytest.raises(NotACombError):
        analyze_comb(np.arange(3.0), np.array([0.0, 1.0, 0.0]))


def test_analyze_comb_needs_uniform_axis():
    f = np.array([0.0, 1.0, 3.0, 6.0, 10.0, 15.0])
    with pytest.raises(ValueError, match="uniform"):
        analyze_comb(f, np.ones(6))


def test_fringe_spacing_exact():
    f = np.linspace(-200e6, 200e6, 16384)
    T = 130e-9
    power = np.cos(np.pi * f * T) ** 2
    step = f[1] - f[0]
    got = fringe_spacing(f, power)
    assert abs(got - 1.0 / T) < 0.1 * step  # parabolic refinement beats the grid
    with pytest.raises(ValueError, match="four"):
        fringe_spacing(f[:200], power[:200])


def test_fit_exponential_exact():
    x = np.linspace(0, 2e-6, 20)
    y = 3.0 * np.exp(-x / 350e-9)
    fit = fit_exponential(x, y)
    assert fit.amplitude == pytest.approx(3.0, rel=1e-12)
    assert fit.decay_constant == pytest.approx(350e-9, rel=1e-12)
    assert fit.residual_rms < 1e-12


def test_fit_exponential_noise_coverage():
    # multiplicative noise: the quoted 1-sigma must cover the truth at the
    # usual rate.  40 draws, 3-sigma misses should be rare.
    tau = 350e-9
    x = np.linspace(100e-9, 1.5e-6, 25)
    hits = 0
    for seed in range(40):
        rng = np.random.default_rng(seed)
        y = np.exp(-x / tau) * np.exp(rng.normal(0, 0.05, x.size))
        fit = fit_exponential(x, y)
        if abs(fit.decay_constant - tau) < 3 * fit.std_error:
            hits += 1
    assert hits >= 38


def test_fit_exponential_rejects_growth():
    x = np.linspace(0, 1, 10)
    with pytest.raises(ValueError):
        fit_exponential(x, np.exp(+x))


def test_fit_exponential_with_negative_samples():
    # noisy tail dipping below zero must not break the fit
    rng = np.random.default_rng(5)
    x = np.linspace(0, 5.0, 30)
    y = np.exp(-x / 0.8) + rng.normal(0, 0.01, x.size)
    y[-1] = -0.005
    fit = fit_exponential(x, y)
    assert fit.decay_constant == pytest.approx(0.8, rel=0.15)


def test_efficiency_formula_spot_values():
    # d = 2, F = 2: d~ = 1, eta = e^-1 * sinc^2(1/2) = e^-1 * (2/pi)^2
    want = np.exp(-1.0) * (2 / np.pi) ** 2
    assert afc_efficiency_analytic(2.0, 2.0) == pytest.approx(want, rel=1e-12)
    # background just multiplies exp(-d0)
    assert (afc_efficiency_analytic(2.0, 2.0, background_od=0.5)
            == pytest.approx(want * np.exp(-0.5), rel=1e-12))


def test_efficiency_formula_bounds():
    # optimum d~ = 2 at large finesse approaches 4/e^2 ~ 0.54
    best = max(afc_efficiency_analytic(2.0 * fin, fin) for fin in (10, 50, 200))
    assert best < 4 / np.e ** 2
    assert best == pytest.approx(4 / np.e ** 2, rel=1e-3)
    assert afc_efficiency_analytic(0.0, 2.0) == 0.0
    with pytest.raises(ValueError):
        afc_efficiency_analytic(1.0, 0.9)
    with pytest.raises(ValueError):
        afc_efficiency_analytic(-1.0, 2.0)


def test_efficiency_monotone_in_background():
    vals = [afc_efficiency_analytic(1.7, 1.7, bg) for bg in (0.0, 0.4, 0.8)]
    assert vals[0] > vals[1] > vals[2]


def test_efficiency_vs_storage_pipeline(ions):
    # cut-down version of the full sweep: finesse drops and efficiency falls
    # as the teeth crowd toward the homogeneous floor at long storage times
    grid = make_grid(200e6, 8192)
    prof = flat_profile(grid, 1.0)
    cfg = BurnConfig(90e-9, 10e-9, 150, 3e-6, 1e-6)
    pts = efficiency_vs_storage([90e-9, 250e-9], cfg, prof, ions,
                                target_contrast=0.23)
    assert len(pts) == 2
    assert pts[0].storage_time_s == 90e-9
    assert all(p.efficiency > 0 for p in pts)
    assert all(p.finesse > 1 for p in pts)
    assert pts[0].efficiency > pts[1].efficiency
    assert pts[0].finesse > pts[1].finesse


def test_efficiency_vs_storage_empty():
    grid = make_grid(200e6, 1024)
    cfg = BurnConfig(90e-9, 10e-9, 150, 3e-6, 1e-6)
    with pytest.raises(ValueError):
        efficiency_vs_storage([], cfg, flat_profile(grid, 1.0),
                              IonParameters(700e-9, 1e-4), 0.23)
