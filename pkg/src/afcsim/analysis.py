"""Comb metrics, decay fitting and the analytic AFC efficiency model."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import curve_fit
from scipy.signal import find_peaks, peak_widths

from . import memory
from .errors import NotACombError
from .sequences import BurnConfig, aom_filter, burn_spectrum, envelope, probe_pulse
from .spectral import InhomogeneousProfile, IonParameters


@dataclass(frozen=True)
class Tooth:
    center_hz: float
    fwhm_hz: float
    peak_od: float
    prominence: float


@dataclass(frozen=True)
class CombAnalysis:
    """Aggregate and per-tooth comb metrics."""

    spacing_hz: float
    finesse: float
    od_contrast: float
    background_od: float
    teeth: tuple[Tooth, ...]

    @property
    def n_teeth(self) -> int:
        return len(self.teeth)


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    decay_constant: float
    std_error: float
    residual_rms: float


def analyze_comb(frequencies_hz: NDArray, od: NDArray,
                 window_hz: tuple[float, float] | None = None) -> CombAnalysis:
    """Detect comb teeth and report spacing, finesse and OD contrast.

    Teeth are local maxima with prominence at least 10% of the OD swing in
    the window.  Tooth FWHM is the width at half prominence (linearly
    interpolated), the right reading for combs sitting on a background.
    Spacing is the median adjacent-peak distance and finesse uses the mean
    FWHM.  Fewer than three teeth is not a comb.
    """
    f = np.asarray(frequencies_hz, dtype=np.float64)
    y = np.asarray(od, dtype=np.float64)
    if f.shape != y.shape or f.ndim != 1:
        raise ValueError("frequencies and od must be matching 1-d arrays")
    df = np.diff(f)
    if df.size == 0 or not np.allclose(df, df[0], rtol=1e-6):
        raise ValueError("analyze_comb needs a uniformly spaced frequency axis")
    if window_hz is not None:
        lo, hi = window_hz
        sel = (f >= lo) & (f <= hi)
        f, y = f[sel], y[sel]
    if f.size < 5:
        raise NotACombError("window contains too few samples")
    swing = float(y.max() - y.min())
    if swing <= 0:
        raise NotACombError("spectrum is flat; no comb structure")
    peaks, props = find_peaks(y, prominence=0.1 * swing)
    if peaks.size < 3:
        raise NotACombError(f"found only {peaks.size} teeth; need at least 3")
    widths, _, _, _ = peak_widths(y, peaks, rel_height=0.5,
                                  prominence_data=(props["prominences"],
                                                   props["left_bases"], props["right_bases"]))
    step = float(df[0])
    fwhm = widths * step
    centers = f[peaks]
    spacing = float(np.median(np.diff(centers)))
    troughs = np.array([y[a:b + 1].min() for a, b in zip(peaks[:-1], peaks[1:])])
    background = float(troughs.mean())
    contrast = float(y[peaks].mean() - background)
    teeth = tuple(Tooth(float(c), float(w), float(y[p]), float(pr))
                  for c, w, p, pr in zip(centers, fwhm, peaks, props["prominences"]))
    return CombAnalysis(spacing_hz=spacing, finesse=spacing / float(fwhm.mean()),
                        od_contrast=contrast, background_od=background, teeth=teeth)


def fringe_spacing(frequencies_hz: NDArray, power: NDArray,
                   min_height_frac: float = 0.05) -> float:
    """Median spacing of spectral fringes, with 3-point parabolic peak refinement.

    Works on any uniformly spaced power spectrum with several fringes above
    min_height_frac of the maximum.
    """
    f = np.asarray(frequencies_hz, dtype=np.float64)
    p = np.asarray(power, dtype=np.float64)
    step = f[1] - f[0]
    peaks, _ = find_peaks(p, height=min_height_frac * p.max())
    if peaks.size < 4:
        raise ValueError("need at least four fringes to measure a spacing")
    inner = peaks[(peaks > 0) & (peaks < p.size - 1)]
    num = p[inner - 1] - p[inner + 1]
    den = p[inner - 1] - 2 * p[inner] + p[inner + 1]
    offset = np.where(np.abs(den) > 0, 0.5 * num / np.where(den == 0, 1, den), 0.0)
    refined = f[inner] + offset * step
    return float(np.median(np.diff(refined)))


def fit_exponential(x: NDArray, y: NDArray) -> FitResult:
    """Least-squares fit of y = A exp(-x / tau).

    All-positive data is fit in log space (exact for multiplicative noise);
    otherwise a nonlinear fit seeded from the positive subset.  std_error is
    the 1-sigma uncertainty of tau from the linearized covariance.  Raises on
    non-decaying data.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size or x.size < 3:
        raise ValueError("need at least three (x, y) samples")
    if np.all(y > 0):
        ly = np.log(y)
        (slope, icept), cov = np.polyfit(x, ly, 1, cov=True)
        if slope >= 0:
            raise ValueError("data is not decaying; fitted decay constant would be <= 0")
        tau = -1.0 / slope
        amp = float(np.exp(icept))
        std = float(np.sqrt(cov[0, 0]) / slope ** 2)
    else:
        pos = y > 0
        if pos.sum() < 3:
            raise ValueError("too few positive samples to seed the fit")
        s0 = np.polyfit(x[pos], np.log(y[pos]), 1)[0]
        if s0 >= 0:
            raise ValueError("data is not decaying; fitted decay constant would be <= 0")
        p0 = (float(y[pos].max()), -1.0 / s0)
        (amp, tau), pcov = curve_fit(lambda t, a, td: a * np.exp(-t / td), x, y, p0=p0,
                                     maxfev=10000)
        if tau <= 0:
            raise ValueError("data is not decaying; fitted decay constant would be <= 0")
        std = float(np.sqrt(pcov[1, 1]))
        amp = float(amp)
    resid = y - amp * np.exp(-x / tau)
    return FitResult(amplitude=amp, decay_constant=float(tau), std_error=std,
                     residual_rms=float(np.sqrt(np.mean(resid ** 2))))


def afc_efficiency_analytic(tooth_od: float, finesse: float,
                            background_od: float = 0.0) -> float:
    """First-echo efficiency of a square-tooth comb.

    eta = d~^2 exp(-d~) sinc^2(pi/F) exp(-d0) with d~ = tooth_od/finesse;
    sinc(x) = sin(x)/x.  Bounded by 4/e^2 ~ 0.54 at zero background.
    """
    if finesse <= 1:
        raise ValueError("finesse must exceed 1 (teeth narrower than the spacing)")
    if tooth_od < 0 or background_od < 0:
        raise ValueError("optical depths must be non-negative")
    d_eff = tooth_od / finesse
    return float(d_eff ** 2 * np.exp(-d_eff) * np.sinc(1.0 / finesse) ** 2
                 * np.exp(-background_od))


@dataclass(frozen=True)
class StorageEfficiencyPoint:
    storage_time_s: float
    efficiency: float
    finesse: float
    od_contrast: float


def efficiency_vs_storage(storage_times_s, base_cfg: BurnConfig,
                          profile: InhomogeneousProfile, ions: IonParameters,
                          target_contrast: float, hole_depth_cap: float = 1.0,
                          probe_duration_s: float = 10e-9,
                          aom_bandwidth_hz: float = 0.0,
                          calibrate_at_s: float | None = None
                          ) -> list[StorageEfficiencyPoint]:
    """Burned-comb efficiency versus programmed storage time.

    kappa is calibrated once at calibrate_at_s (default: the first storage
    time) and reused across the sweep, mirroring a fixed burn power; the
    efficiency drop at long storage times then comes from the shrinking
    finesse as teeth crowd toward the homogeneous floor.
    """
    times = [float(t) for t in storage_times_s]
    if not times:
        raise ValueError("storage_times_s is empty")

    def spectrum_for(t_storage: float):
        cfg = replace(base_cfg, pair_separation_s=t_storage)
        spec = burn_spectrum(cfg, profile.grid)
        if aom_bandwidth_hz > 0:
            spec = aom_filter(spec, aom_bandwidth_hz)
        return memory.ion_response_spectrum(spec, ions)

    t_cal = float(calibrate_at_s) if calibrate_at_s is not None else times[0]
    model = memory.calibrate_burn(profile, spectrum_for(t_cal), target_contrast,
                                  hole_depth_cap)
    probe = envelope(probe_pulse(probe_duration_s), probe_duration_s / 10)
    out = []
    for t_storage in times:
        burned = memory.burn(profile, spectrum_for(t_storage), model)
        res = memory.store_recall(burned, ions, probe, expected_delay_hint_s=t_storage)
        spacing = 1.0 / t_storage
        window = (-2.6 * spacing, 2.6 * spacing)
        det = profile.grid.detunings
        sel = (det >= window[0]) & (det <= window[1])
        comb = analyze_comb(det[sel], memory.probe_scan(burned, ions, det[sel]))
        out.append(StorageEfficiencyPoint(t_storage, res.efficiency,
                                          comb.finesse, comb.od_contrast))
    return out
