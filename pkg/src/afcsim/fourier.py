"""Fourier conventions shared by the spectral and propagation code.

Everything in this package uses the physics pairing

    x(t) = integral A(f) exp(-2j*pi*f*t) df
    A(f) = integral x(t) exp(+2j*pi*f*t) dt

so that a response whose poles sit in the lower half of the complex
frequency plane (e.g. the absorptive Lorentzian kernel) is causal: it can
only produce output at t >= 0.  Grid frequencies follow the half-open
convention f_k = (k - n//2) * df.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray


def grid_frequencies(span_hz: float, n_points: int) -> NDArray[np.float64]:
    """Detuning samples (k - n//2)*df for a span/n_points grid."""
    df = span_hz / n_points
    return (np.arange(n_points) - n_points // 2) * df


def synthesize(amplitude: NDArray, span_hz: float, t0_s: float = 0.0) -> NDArray[np.complex128]:
    """Time samples x[m] = sum_k A_k exp(-2j pi f_k t_m) df at t_m = t0 + m/span.

    Returns n samples covering one full record 1/df = n/span.
    """
    amplitude = np.asarray(amplitude, dtype=np.complex128)
    n = amplitude.size
    df = span_hz / n
    freqs = grid_frequencies(span_hz, n)
    b = amplitude * np.exp(-2j * np.pi * freqs * t0_s)
    # sum_k B_k exp(-2j pi (k - n//2) m / n) = fft(ifftshift(B))[m]
    return df * np.fft.fft(np.fft.ifftshift(b))


def analyze(samples: NDArray, span_hz: float, t0_s: float = 0.0) -> NDArray[np.complex128]:
    """Inverse of synthesize: A_k = sum_m x_m exp(+2j pi f_k t_m) dt."""
    samples = np.asarray(samples, dtype=np.complex128)
    n = samples.size
    dt = 1.0 / span_hz
    freqs = grid_frequencies(span_hz, n)
    a = n * np.fft.fftshift(np.fft.ifft(samples)) * dt
    return a * np.exp(2j * np.pi * freqs * t0_s)


def dft_analyze(samples: NDArray, dt_s: float, t0_s: float,
                freqs_hz: NDArray) -> NDArray[np.complex128]:
    """Direct-sum A(f) = sum_m x_m exp(+2j pi f t_m) dt at arbitrary frequencies.

    Used when the input time base does not match the grid's conjugate base.
    Chunked over frequency to bound memory.
    """
    samples = np.asarray(samples, dtype=np.complex128)
    times = t0_s + dt_s * np.arange(samples.size)
    out = np.empty(len(freqs_hz), dtype=np.complex128)
    step = max(1, int(4e6 // max(samples.size, 1)))
    for i in range(0, len(freqs_hz), step):
        f = np.asarray(freqs_hz[i:i + step], dtype=np.float64)
        out[i:i + step] = (np.exp(2j * np.pi * np.outer(f, times)) @ samples) * dt_s
    return out
