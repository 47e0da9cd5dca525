"""Hole burning, weak-pulse propagation and AFC store/recall.

Propagation is linear: the output spectrum is the input spectrum times
exp(-depth/2), with the complex depth built by spectral.complex_depth.  The
Kramers-Kronig imaginary part makes the response causal, so the AFC echo
appears only at positive delay ~ 1/tooth-spacing after the input.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.ndimage import gaussian_filter1d
from scipy.signal import fftconvolve, find_peaks

from . import fourier
from .errors import NumericsError
from .sequences import EnvelopeSpectrum, FieldTrace
from .spectral import (InhomogeneousProfile, IonParameters, complex_depth,
                       lorentzian_kernel)

__all__ = [
    "BurnModel", "EchoResult", "FieldTrace", "TransmitResult", "burn",
    "calibrate_burn", "ion_response_spectrum", "probe_scan", "store_recall",
    "transmit",
]

WEAK_PULSE_AREA_RAD = 0.1


@dataclass(frozen=True)
class BurnModel:
    """Saturable exponential hole burning.

    kappa converts normalized drive power S-bar into hole depth; hole_depth_cap
    is the burnable population fraction (1 = holes can reach zero OD).
    """

    kappa: float
    hole_depth_cap: float = 1.0

    def __post_init__(self) -> None:
        if self.kappa < 0:
            raise ValueError("kappa must be non-negative")
        if not (0 < self.hole_depth_cap <= 1):
            raise ValueError("hole_depth_cap must be in (0, 1]")


@dataclass(frozen=True)
class EchoResult:
    """Outcome of one store/recall attempt.

    echo_time_s is NaN and efficiency 0 when no echo was detected.  Energies
    are referenced to the band-limited input energy (the input as the
    simulation band sees it).
    """

    echo_time_s: float
    efficiency: float
    transmitted_fraction: float
    output: FieldTrace = field(repr=False)

    @property
    def echo_detected(self) -> bool:
        return np.isfinite(self.echo_time_s) and self.efficiency > 0


def ion_response_spectrum(spec: EnvelopeSpectrum, ions: IonParameters) -> EnvelopeSpectrum:
    """Drive power as experienced by ion classes: |A|^2 convolved with the
    homogeneous Lorentzian (unit area).  An ion at detuning delta pumps on the
    spectral density within its own linewidth, so burning a spectrally sharp
    feature still makes a hole at least gamma_h wide.  Phase is discarded;
    burning only consumes power."""
    grid = spec.grid
    n = grid.n_points
    kern = lorentzian_kernel(grid.df, ions.gamma_h_hz, n).real
    padded = np.concatenate([np.zeros(n), spec.power, np.zeros(n)])
    smoothed = fftconvolve(padded, kern, mode="same")[n:2 * n]
    return EnvelopeSpectrum(grid, np.sqrt(np.maximum(smoothed, 0.0)))


def burn(profile: InhomogeneousProfile, spec: EnvelopeSpectrum,
         model: BurnModel) -> InhomogeneousProfile:
    """Apply the burn law d' = d * [(1 - cap) + cap * exp(-kappa * S_bar)].

    S_bar is |amplitude|^2 normalized to unit peak.  Burning never increases
    any sample; kappa -> infinity leaves the (1 - cap) floor.
    """
    if spec.grid != profile.grid:
        raise ValueError("burn spectrum and profile live on different grids")
    s = spec.power
    peak = s.max()
    if peak <= 0:
        raise ValueError("burn spectrum carries no power")
    factor = (1 - model.hole_depth_cap) + model.hole_depth_cap * np.exp(-model.kappa * s / peak)
    return InhomogeneousProfile(profile.grid, profile.od * factor, profile.length_m)


def calibrate_burn(profile: InhomogeneousProfile, spec: EnvelopeSpectrum,
                   target_contrast: float, hole_depth_cap: float = 1.0,
                   window_hz: tuple[float, float] | None = None,
                   tol: float = 1e-3) -> BurnModel:
    """Find kappa so the burned comb's od_contrast hits target_contrast.

    Contrast is measured by analyze_comb on the burned profile samples over
    window_hz (default: about five central teeth, estimated from the burn
    spectrum's own fringe spacing).  Contrast rises with kappa and then falls
    once the teeth themselves start burning, so the bracket scan stays on the
    rising branch and reports the achievable maximum when the target is out
    of reach.
    """
    from .analysis import analyze_comb, fringe_spacing  # import cycle: analysis uses memory

    if not (0 < target_contrast):
        raise ValueError("target_contrast must be positive")
    if window_hz is None:
        est = fringe_spacing(profile.grid.detunings, spec.power)
        window_hz = (-2.6 * est, 2.6 * est)

    def contrast(kappa: float) -> float:
        burned = burn(profile, spec, BurnModel(kappa, hole_depth_cap))
        return analyze_comb(profile.grid.detunings, burned.od, window_hz).od_contrast

    k_lo = 0.0
    k_hi = 1e-3
    best_k, best_c = 0.0, 0.0
    while k_hi < 1e5:
        c_hi = contrast(k_hi)
        if c_hi > best_c:
            best_k, best_c = k_hi, c_hi
        if c_hi >= target_contrast:
            break
        if c_hi < best_c - tol:  # past the contrast peak; target unreachable
            k_hi = -1.0
            break
        k_lo = k_hi
        k_hi *= 2
    else:
        k_hi = -1.0
    if k_hi < 0:
        raise ValueError(
            f"target contrast {target_contrast:g} unreachable; max achievable about "
            f"{best_c:.4g} at kappa = {best_k:.4g} with cap {hole_depth_cap:g}")
    for _ in range(80):
        if abs(c_hi - target_contrast) <= tol:
            break
        k_mid = 0.5 * (k_lo + k_hi)
        c_mid = contrast(k_mid)
        if c_mid < target_contrast:
            k_lo = k_mid
        else:
            k_hi, c_hi = k_mid, c_mid
    return BurnModel(k_hi, hole_depth_cap)


# --- propagation ------------------------------------------------------------

def _band_amplitude(trace: FieldTrace, grid) -> NDArray[np.complex128]:
    """Input spectrum at the grid detunings."""
    n = grid.n_points
    dt_grid = 1.0 / grid.span_hz
    if trace.samples.size == n and abs(trace.dt_s - dt_grid) < 1e-12 * dt_grid:
        return fourier.analyze(trace.samples, grid.span_hz, trace.t0_s)
    return fourier.dft_analyze(trace.samples, trace.dt_s, trace.t0_s, grid.detunings)


def _transmit(profile: InhomogeneousProfile, ions: IonParameters,
              trace: FieldTrace) -> tuple[FieldTrace, float]:
    grid = profile.grid
    record = 1.0 / grid.df
    if trace.duration_s > record:
        raise ValueError(
            f"input trace ({trace.duration_s:g} s) exceeds the grid time record "
            f"1/df = {record:g} s; use a finer grid (more points) to avoid FFT wrap")
    depth = complex_depth(profile, ions).depth
    a_in = _band_amplitude(trace, grid)
    ref_energy = float(np.sum(np.abs(a_in) ** 2) * grid.df)
    if ref_energy == 0.0:
        raise ValueError("input trace carries no in-band energy")
    a_out = a_in * np.exp(-depth / 2)
    out = fourier.synthesize(a_out, grid.span_hz, trace.t0_s)
    out_trace = FieldTrace(dt_s=1.0 / grid.span_hz, t0_s=trace.t0_s, samples=out)
    if out_trace.energy > ref_energy * (1 + 1e-9) + 1e-300:
        raise NumericsError("propagation gained energy; passivity violated")
    return out_trace, ref_energy


@dataclass(frozen=True)
class TransmitResult:
    """Propagated field plus the energy scale it is measured against."""

    output: FieldTrace = field(repr=False)
    band_input_energy: float = 0.0

    @property
    def transmitted_energy_fraction(self) -> float:
        """Total output energy over band-limited input energy.  For a
        structured profile this includes any recalled echoes."""
        return self.output.energy / self.band_input_energy


def transmit(profile: InhomogeneousProfile, ions: IonParameters,
             trace: FieldTrace) -> TransmitResult:
    """Propagate a weak pulse through the medium.

    The output lives on the grid's conjugate time base (dt = 1/span, one full
    1/df record starting at the input's t0), long enough to hold the AFC echo
    train.  Energies are referenced to the input as the simulation band sees
    it, so a flat optical depth D transmits exactly exp(-D).  Output energy
    never exceeds the band-limited input energy.
    """
    out, ref = _transmit(profile, ions, trace)
    return TransmitResult(output=out, band_input_energy=ref)


def probe_scan(profile: InhomogeneousProfile, ions: IonParameters,
               frequencies_hz: NDArray, probe_bandwidth_hz: float = 0.0) -> NDArray[np.float64]:
    """Measured OD(f) = -ln(power transmission) of a narrow probe at each frequency.

    With zero probe bandwidth this is Re(depth) interpolated; a finite
    bandwidth averages the power transmission under a Gaussian probe line
    (power FWHM = probe_bandwidth_hz) before taking the log.
    """
    grid = profile.grid
    f = np.asarray(frequencies_hz, dtype=np.float64)
    det = grid.detunings
    if f.min() < det[0] or f.max() > det[-1]:
        raise ValueError("probe frequency outside the profile grid")
    od = complex_depth(profile, ions).depth.real
    if probe_bandwidth_hz <= 0:
        return np.interp(f, det, od)
    sigma_samples = probe_bandwidth_hz / (np.sqrt(8 * np.log(2)) * grid.df)
    smooth = gaussian_filter1d(np.exp(-od), sigma_samples, mode="nearest", truncate=6.0)
    return -np.log(np.interp(f, det, smooth))


def store_recall(profile: InhomogeneousProfile, ions: IonParameters, trace: FieldTrace,
                 expected_delay_hint_s: float | None = None) -> EchoResult:
    """Send a weak pulse through a comb and account for the first recalled echo.

    The transmitted pulse is everything within +/-2 input durations of the
    input power centroid; the echo is the tallest local maximum after that
    window (the hint only arbitrates between multiple echo orders).  A
    monotone free-induction tail has no interior maximum and therefore never
    counts.  echo_time_s is the centroid-to-centroid delay, unbiased for an
    echo that replicates the input shape.
    """
    area = float(np.sum(np.abs(trace.samples)) * trace.dt_s)
    if area > WEAK_PULSE_AREA_RAD:
        warnings.warn(
            f"input pulse area {area:.3g} rad exceeds {WEAK_PULSE_AREA_RAD} rad; "
            "linear (weak-probe) propagation is a poor approximation", stacklevel=2)
    out, ref_energy = _transmit(profile, ions, trace)
    power = np.abs(out.samples) ** 2
    times = out.times_s
    in_power = np.abs(trace.samples) ** 2
    c_in = float(np.sum(trace.times_s * in_power) / np.sum(in_power))
    dur = trace.duration_s

    in_window = np.abs(times - c_in) <= 2 * dur
    transmitted = float(np.sum(power[in_window]) * out.dt_s / ref_energy)

    start = int(np.searchsorted(times, c_in + 2 * dur))
    floor = 1e-8 * float(in_power.max())
    peaks, _ = find_peaks(power[start:], height=floor)
    if peaks.size == 0:
        return EchoResult(float("nan"), 0.0, transmitted, out)
    peaks += start
    if expected_delay_hint_s is not None:
        pick = peaks[np.argmin(np.abs(times[peaks] - c_in - expected_delay_hint_s))]
    else:
        pick = peaks[np.argmax(power[peaks])]
    echo_window = np.abs(times - times[pick]) <= 2 * dur
    pw = power[echo_window]
    c_echo = float(np.sum(times[echo_window] * pw) / np.sum(pw))
    efficiency = float(np.sum(pw) * out.dt_s / ref_energy)
    if efficiency + transmitted > 1 + 1e-6:
        raise NumericsError("echo plus transmitted energy exceeds the input energy")
    return EchoResult(c_echo - c_in, efficiency, transmitted, out)
