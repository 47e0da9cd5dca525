"""Pulse sequences, their complex baseband envelopes and exact spectra.

Spectra are evaluated as continuous-Fourier-transform samples at the grid
frequencies using closed-form pulse transforms, so fringe positions carry no
envelope-sampling quantization.  Carrier offsets rotate as exp(-2j*pi*f0*t),
matching the package synthesis convention (a +f0 tone lands at +f0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .spectral import SpectralGrid

SHAPES = ("square", "square_with_rise")
DEFAULT_RISE_S = 2e-9

_FMT = "%.17g"


@dataclass(frozen=True)
class Pulse:
    """One modulator pulse of the drive field."""

    t_start_s: float
    duration_s: float
    peak_rabi_rad_s: float
    carrier_offset_hz: float = 0.0
    phase_rad: float = 0.0
    shape: str = "square"
    rise_s: float | None = None

    def __post_init__(self) -> None:
        if not (self.duration_s > 0):
            raise ValueError("duration_s must be positive")
        if self.peak_rabi_rad_s < 0:
            raise ValueError("peak_rabi_rad_s must be non-negative")
        if self.shape not in SHAPES:
            raise ValueError(f"unknown pulse shape {self.shape!r}")
        if self.shape == "square_with_rise":
            rise = DEFAULT_RISE_S if self.rise_s is None else self.rise_s
            if not (0 < rise <= self.duration_s / 2):
                raise ValueError("rise_s must be in (0, duration/2]")
            object.__setattr__(self, "rise_s", rise)
        elif self.rise_s is not None:
            raise ValueError("rise_s only applies to square_with_rise pulses")

    @property
    def t_end_s(self) -> float:
        return self.t_start_s + self.duration_s


@dataclass(frozen=True)
class Sequence:
    """Time-ordered, non-overlapping pulses plus a total duration."""

    pulses: tuple[Pulse, ...]
    t_end_s: float | None = None

    def __post_init__(self) -> None:
        pulses = tuple(sorted(self.pulses, key=lambda p: p.t_start_s))
        if not pulses:
            raise ValueError("sequence needs at least one pulse")
        for a, b in zip(pulses, pulses[1:]):
            if b.t_start_s < a.t_end_s - 1e-15:
                raise ValueError(
                    f"pulses overlap: one ends at {a.t_end_s:g} s, next starts at {b.t_start_s:g} s")
        if pulses[0].t_start_s < 0:
            raise ValueError("pulses must start at t >= 0")
        last_end = pulses[-1].t_end_s
        t_end = last_end if self.t_end_s is None else self.t_end_s
        if t_end < last_end:
            raise ValueError("t_end_s must not cut off the last pulse")
        object.__setattr__(self, "pulses", pulses)
        object.__setattr__(self, "t_end_s", float(t_end))

    @property
    def min_duration_s(self) -> float:
        return min(p.duration_s for p in self.pulses)


@dataclass(frozen=True)
class BurnConfig:
    """Comb-writing train: n_pairs pulse pairs, intra-pair separation sets 1/spacing."""

    pair_separation_s: float
    pulse_duration_s: float
    n_pairs: int
    pair_wait_s: float
    peak_power_w: float

    def __post_init__(self) -> None:
        if not (self.pulse_duration_s > 0):
            raise ValueError("pulse_duration_s must be positive")
        if self.pair_separation_s < self.pulse_duration_s:
            raise ValueError("pair_separation_s must be at least one pulse duration")
        if self.n_pairs < 1:
            raise ValueError("n_pairs must be at least 1")
        if self.pair_wait_s < self.pair_separation_s + self.pulse_duration_s:
            raise ValueError("pair_wait_s must exceed pair_separation_s + pulse_duration_s")
        if self.peak_power_w < 0:
            raise ValueError("peak_power_w must be non-negative")


@dataclass(frozen=True)
class FieldTrace:
    """Complex baseband field samples on a uniform time base."""

    dt_s: float
    t0_s: float
    samples: NDArray[np.complex128] = field(repr=False)

    def __post_init__(self) -> None:
        if not (self.dt_s > 0):
            raise ValueError("dt_s must be positive")
        samples = np.array(self.samples, dtype=np.complex128, copy=True)
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def times_s(self) -> NDArray[np.float64]:
        return self.t0_s + self.dt_s * np.arange(self.samples.size)

    @property
    def duration_s(self) -> float:
        return self.dt_s * self.samples.size

    @property
    def energy(self) -> float:
        """sum |s|^2 dt, in (sample unit)^2 * s."""
        return float(np.sum(np.abs(self.samples) ** 2) * self.dt_s)


@dataclass(frozen=True)
class EnvelopeSpectrum:
    """Complex field amplitude A(f) on a spectral grid; |A|^2 integrates to energy."""

    grid: SpectralGrid
    amplitude: NDArray[np.complex128] = field(repr=False)

    def __post_init__(self) -> None:
        amp = np.array(self.amplitude, dtype=np.complex128, copy=True)
        if amp.shape != (self.grid.n_points,):
            raise ValueError("amplitude must have one value per grid point")
        amp.flags.writeable = False
        object.__setattr__(self, "amplitude", amp)

    @property
    def power(self) -> NDArray[np.float64]:
        return np.abs(self.amplitude) ** 2

    @property
    def total_power(self) -> float:
        """sum |A|^2 df = pulse energy by Parseval."""
        return float(np.sum(self.power) * self.grid.df)


# --- sequence builders ------------------------------------------------------

def probe_pulse(duration_s: float, carrier_offset_hz: float = 0.0,
                peak_rabi_rad_s: float = 1.0, shape: str = "square",
                rise_s: float | None = None) -> Sequence:
    """Single input pulse starting at t = 0."""
    return Sequence((Pulse(0.0, duration_s, peak_rabi_rad_s, carrier_offset_hz,
                           0.0, shape, rise_s),))


def echo_sequence(t1_s: float, t2_s: float, tau_s: float, omega_rad_s: float) -> Sequence:
    """Two-pulse echo drive: durations t1 and t2, second pulse starts at tau."""
    if tau_s <= t1_s + t2_s:
        raise ValueError(
            f"tau = {tau_s:g} s must exceed t1 + t2 = {t1_s + t2_s:g} s (pulses must not overlap)")
    return Sequence((Pulse(0.0, t1_s, omega_rad_s),
                     Pulse(tau_s, t2_s, omega_rad_s)))


def afc_burn_sequence(cfg: BurnConfig, peak_rabi_rad_s: float = 1.0,
                      carrier_offset_hz: float = 0.0,
                      phase_seed: int | None = None) -> Sequence:
    """Full comb-writing train: pair k occupies [k*wait, k*wait + T + duration].

    Pulses within a pair share a phase; with phase_seed set, each pair gets
    an independent random phase (the wait exceeds T2, so inter-pair phase is
    physically irrelevant and must not move the comb).
    """
    rng = np.random.default_rng(phase_seed)
    pulses = []
    for k in range(cfg.n_pairs):
        t0 = k * cfg.pair_wait_s
        phase = float(rng.uniform(0, 2 * np.pi)) if phase_seed is not None else 0.0
        for t in (t0, t0 + cfg.pair_separation_s):
            pulses.append(Pulse(t, cfg.pulse_duration_s, peak_rabi_rad_s,
                                carrier_offset_hz, phase))
    return Sequence(tuple(pulses), t_end_s=cfg.n_pairs * cfg.pair_wait_s)


# --- envelope sampling ------------------------------------------------------

def envelope(seq: Sequence, dt_s: float) -> FieldTrace:
    """Sample the complex baseband envelope on [0, t_end) at step dt.

    Half-open pulse windows: a 10 ns square pulse at dt = 1 ns contributes
    exactly 10 unit samples.  dt must resolve the shortest pulse (<= min
    duration / 10).
    """
    if dt_s > seq.min_duration_s / 10 * (1 + 1e-12):
        raise ValueError(
            f"dt = {dt_s:g} s too coarse for the shortest pulse "
            f"({seq.min_duration_s:g} s); need dt <= duration/10")
    n = int(np.ceil(seq.t_end_s / dt_s - 1e-9))
    t = np.arange(n) * dt_s
    samples = np.zeros(n, dtype=np.complex128)
    eps = 1e-6 * dt_s
    for p in seq.pulses:
        i0 = int(np.searchsorted(t, p.t_start_s - eps))
        i1 = int(np.searchsorted(t, p.t_end_s - eps))
        tt = t[i0:i1]
        g = np.ones(i1 - i0)
        if p.shape == "square_with_rise":
            u = tt - p.t_start_s
            rise = p.rise_s
            up = u < rise
            down = u > p.duration_s - rise
            g[up] = 0.5 * (1 - np.cos(np.pi * u[up] / rise))
            g[down] = 0.5 * (1 - np.cos(np.pi * (p.duration_s - u[down]) / rise))
        samples[i0:i1] += (p.peak_rabi_rad_s * g
                           * np.exp(1j * (p.phase_rad - 2 * np.pi * p.carrier_offset_hz * tt)))
    return FieldTrace(dt_s=dt_s, t0_s=0.0, samples=samples)


# --- exact spectra ----------------------------------------------------------

def _segment_ft(mu: NDArray, length_s: float) -> NDArray[np.complex128]:
    """integral_0^L exp(2j pi mu u) du = L exp(j pi mu L) sinc(mu L)."""
    x = mu * length_s
    return length_s * np.exp(1j * np.pi * x) * np.sinc(x)


def _pulse_shape_ft(nu: NDArray, p: Pulse) -> NDArray[np.complex128]:
    """G(nu) = integral_0^dur g(u) exp(2j pi nu u) du for the unit pulse shape."""
    if p.shape == "square":
        return _segment_ft(nu, p.duration_s)
    rise = p.rise_s
    flat = p.duration_s - 2 * rise
    shift = 1.0 / (2 * rise)
    f_rise = (0.5 * _segment_ft(nu, rise)
              - 0.25 * (_segment_ft(nu + shift, rise) + _segment_ft(nu - shift, rise)))
    f_flat = np.exp(2j * np.pi * nu * rise) * _segment_ft(nu, flat) if flat > 0 else 0.0
    f_fall = np.exp(2j * np.pi * nu * p.duration_s) * np.conj(f_rise)
    return f_rise + f_flat + f_fall


def power_spectrum(seq: Sequence, grid: SpectralGrid) -> EnvelopeSpectrum:
    """Exact A(f) = integral env(t) exp(2j pi f t) dt sampled at the grid detunings."""
    f = grid.detunings
    amp = np.zeros(grid.n_points, dtype=np.complex128)
    for p in seq.pulses:
        nu = f - p.carrier_offset_hz
        amp += (p.peak_rabi_rad_s * np.exp(1j * p.phase_rad)
                * np.exp(2j * np.pi * nu * p.t_start_s) * _pulse_shape_ft(nu, p))
    return EnvelopeSpectrum(grid, amp)


def burn_spectrum(cfg: BurnConfig, grid: SpectralGrid, peak_rabi_rad_s: float = 1.0,
                  carrier_offset_hz: float = 0.0) -> EnvelopeSpectrum:
    """Accumulated drive spectrum of the burn train for hole burning.

    pair_wait >> T2: successive pairs cannot interfere in the medium, so the
    train deposits n_pairs times the power spectrum of a single pair.  The
    1/T fringes survive; the 1/wait Dirichlet fine structure of the coherent
    full-train transform (which no ion of finite linewidth resolves) does
    not.  amplitude = sqrt(n_pairs) * A_pair keeps Parseval exact.
    """
    pair = Sequence((
        Pulse(0.0, cfg.pulse_duration_s, peak_rabi_rad_s, carrier_offset_hz),
        Pulse(cfg.pair_separation_s, cfg.pulse_duration_s, peak_rabi_rad_s, carrier_offset_hz),
    ))
    spec = power_spectrum(pair, grid)
    return EnvelopeSpectrum(grid, np.sqrt(cfg.n_pairs) * spec.amplitude)


def aom_filter(spec: EnvelopeSpectrum, bandwidth_hz: float,
               center_hz: float = 0.0) -> EnvelopeSpectrum:
    """Gaussian modulator response with the given power FWHM (power halves at +/-bw/2)."""
    if not (bandwidth_hz > 0):
        raise ValueError("bandwidth_hz must be positive")
    x = (spec.grid.detunings - center_hz) / bandwidth_hz
    return EnvelopeSpectrum(spec.grid, spec.amplitude * np.exp(-2 * np.log(2) * x * x))


# --- text serialization -----------------------------------------------------

def save_sequence(seq: Sequence, path) -> None:
    lines = [f"# t_end_s={_FMT % seq.t_end_s}",
             "t_start_s,duration_s,peak_rabi_rad_s,carrier_offset_hz,phase_rad,shape,rise_s"]
    for p in seq.pulses:
        rise = "" if p.rise_s is None else _FMT % p.rise_s
        lines.append(",".join([_FMT % p.t_start_s, _FMT % p.duration_s,
                               _FMT % p.peak_rabi_rad_s, _FMT % p.carrier_offset_hz,
                               _FMT % p.phase_rad, p.shape, rise]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_sequence(path) -> Sequence:
    t_end = None
    pulses = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("t_start_s"):
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                if key.strip() == "t_end_s":
                    t_end = float(val)
                continue
            parts = line.split(",")
            rise = float(parts[6]) if len(parts) > 6 and parts[6] else None
            pulses.append(Pulse(float(parts[0]), float(parts[1]), float(parts[2]),
                                float(parts[3]), float(parts[4]), parts[5], rise))
    return Sequence(tuple(pulses), t_end_s=t_end)


def save_spectrum(spec: EnvelopeSpectrum, path) -> None:
    lines = [f"# span_hz={_FMT % spec.grid.span_hz}",
             f"# n_points={spec.grid.n_points}",
             "frequency_hz,re,im,power"]
    power = spec.power
    for f, a, p in zip(spec.grid.detunings, spec.amplitude, power):
        lines.append(f"{_FMT % f},{_FMT % a.real},{_FMT % a.imag},{_FMT % p}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def save_trace(trace: FieldTrace, path) -> None:
    lines = ["t_s,re,im,power"]
    for t, s in zip(trace.times_s, trace.samples):
        lines.append(f"{_FMT % t},{_FMT % s.real},{_FMT % s.imag},{_FMT % abs(s) ** 2}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
