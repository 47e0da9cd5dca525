"""Pulse containers, envelope sampling and the closed-form spectra."""

import numpy as np
import pytest

from afcsim import fourier, make_grid
from afcsim.sequences import (BurnConfig, Pulse, Sequence, afc_burn_sequence,
                              aom_filter, burn_spectrum, echo_sequence,
                              envelope, load_sequence, power_spectrum,
                              probe_pulse, save_sequence, save_spectrum,
                              save_trace)


def test_pulse_validation():
    with pytest.raises(ValueError):
        Pulse(0.0, -1e-9, 1.0)
    with pytest.raises(ValueError):
        Pulse(0.0, 10e-9, -1.0)
    with pytest.raises(ValueError):
        Pulse(0.0, 10e-9, 1.0, shape="blob")
    with pytest.raises(ValueError):
        Pulse(0.0, 10e-9, 1.0, rise_s=2e-9)  # rise only for square_with_rise
    with pytest.raises(ValueError):
        Pulse(0.0, 10e-9, 1.0, shape="square_with_rise", rise_s=6e-9)
    p = Pulse(0.0, 10e-9, 1.0, shape="square_with_rise")
    assert p.rise_s == 2e-9  # default rise


def test_sequence_ordering_and_overlap():
    a = Pulse(50e-9, 10e-9, 1.0)
    b = Pulse(0.0, 10e-9, 1.0)
    seq = Sequence((a, b))
    assert seq.pulses[0].t_start_s == 0.0
    assert seq.t_end_s == 60e-9
    with pytest.raises(ValueError, match="overlap"):
        Sequence((Pulse(0.0, 10e-9, 1.0), Pulse(5e-9, 10e-9, 1.0)))
    with pytest.raises(ValueError):
        Sequence((Pulse(-1e-9, 10e-9, 1.0),))
    with pytest.raises(ValueError):
        Sequence((Pulse(0.0, 10e-9, 1.0),), t_end_s=5e-9)


def test_echo_sequence_guard():
    with pytest.raises(ValueError, match="overlap"):
        echo_sequence(100e-9, 100e-9, 150e-9, 1e6)
    seq = echo_sequence(2e-9, 4e-9, 300e-9, 1e6)
    assert seq.pulses[1].t_start_s == 300e-9


def test_burn_config_validation():
    ok = dict(pair_separation_s=130e-9, pulse_duration_s=10e-9,
              n_pairs=150, pair_wait_s=3e-6, peak_power_w=1e-6)
    BurnConfig(**ok)
    for key, bad in [("pair_separation_s", 5e-9), ("n_pairs", 0),
                     ("pair_wait_s", 100e-9), ("peak_power_w", -1.0)]:
        with pytest.raises(ValueError):
            BurnConfig(**{**ok, key: bad})


def test_burn_train_layout():
    cfg = BurnConfig(130e-9, 10e-9, 150, 3e-6, 1e-6)
    seq = afc_burn_sequence(cfg)
    assert len(seq.pulses) == 300
    assert seq.t_end_s == pytest.approx(450e-6)
    # pair k: pulses at k*wait and k*wait + T
    assert seq.pulses[2].t_start_s == pytest.approx(3e-6)
    assert seq.pulses[3].t_start_s == pytest.approx(3e-6 + 130e-9)


def test_envelope_square_sampling():
    tr = envelope(probe_pulse(10e-9), 1e-9)
    assert tr.samples.size == 10
    assert np.allclose(tr.samples, 1.0)
    assert tr.energy == pytest.approx(10e-9)
    with pytest.raises(ValueError, match="too coarse"):
        envelope(probe_pulse(10e-9), 2e-9)


def test_envelope_carrier_rotation():
    f0 = 20e6
    tr = envelope(probe_pulse(100e-9, carrier_offset_hz=f0), 1e-9)
    t = tr.times_s
    assert np.abs(tr.samples - np.exp(-2j * np.pi * f0 * t)).max() < 1e-12


def test_envelope_rise_shape():
    tr = envelope(probe_pulse(20e-9, shape="square_with_rise", rise_s=5e-9), 0.5e-9)
    s = tr.samples.real
    assert s[0] == 0.0
    assert s.max() == pytest.approx(1.0)
    assert np.all(np.diff(s[:10]) >= 0)  # monotone rise
    assert np.all(s >= -1e-15)


def test_square_spectrum_closed_form():
    # A(f) = Omega * tau * exp(i pi f tau) * sinc(f tau)
    grid = make_grid(400e6, 4096)
    tau, om = 10e-9, 2.0
    spec = power_spectrum(probe_pulse(tau, peak_rabi_rad_s=om), grid)
    f = grid.detunings
    want = om * tau * np.exp(1j * np.pi * f * tau) * np.sinc(f * tau)
    assert np.abs(spec.amplitude - want).max() < 1e-12 * np.abs(want).max()


def test_spectrum_first_null():
    grid = make_grid(400e6, 16384)
    tau = 10e-9
    spec = power_spectrum(probe_pulse(tau), grid)
    k = np.argmin(np.abs(grid.detunings - 1.0 / tau))
    assert spec.power[k] < 1e-6 * spec.power.max()


def test_pair_fringes_closed_form():
    grid = make_grid(400e6, 8192)
    tau, T = 10e-9, 130e-9
    pair = Sequence((Pulse(0.0, tau, 1.0), Pulse(T, tau, 1.0)))
    spec = power_spectrum(pair, grid)
    f = grid.detunings
    single = tau * np.sinc(f * tau)
    want = 4 * single ** 2 * np.cos(np.pi * f * T) ** 2
    assert np.abs(spec.power - want).max() < 1e-12 * want.max()


def test_spectrum_matches_sampled_dft():
    # oracle: brute-force transform of a finely sampled smooth envelope
    grid = make_grid(200e6, 512)
    seq = probe_pulse(40e-9, shape="square_with_rise", rise_s=8e-9)
    spec = power_spectrum(seq, grid)
    tr = envelope(seq, 0.01e-9)
    slow = fourier.dft_analyze(tr.samples, tr.dt_s, 0.0, grid.detunings)
    err = np.linalg.norm(spec.amplitude - slow) / np.linalg.norm(slow)
    assert err < 1e-3


def test_time_shift_phase():
    grid = make_grid(200e6, 2048)
    T = 90e-9
    a0 = power_spectrum(probe_pulse(10e-9), grid).amplitude
    aT = power_spectrum(Sequence((Pulse(T, 10e-9, 1.0),)), grid).amplitude
    f = grid.detunings
    assert np.abs(aT - a0 * np.exp(2j * np.pi * f * T)).max() < 1e-12 * np.abs(a0).max()


def test_parseval_on_smooth_pulse():
    # square pulses park percent-level energy beyond any finite band, so the
    # energy bookkeeping is pinned on a smooth pulse instead
    grid = make_grid(400e6, 8192)
    seq = probe_pulse(50e-9, shape="square_with_rise", rise_s=10e-9)
    spec = power_spectrum(seq, grid)
    tr = envelope(seq, 0.05e-9)
    assert spec.total_power == pytest.approx(tr.energy, rel=1e-3)


def test_burn_spectrum_is_incoherent_pair_sum():
    grid = make_grid(400e6, 4096)
    cfg = BurnConfig(130e-9, 10e-9, 150, 3e-6, 1e-6)
    full = burn_spectrum(cfg, grid)
    pair = power_spectrum(Sequence((Pulse(0.0, 10e-9, 1.0),
                                    Pulse(130e-9, 10e-9, 1.0))), grid)
    assert np.allclose(full.amplitude, np.sqrt(150) * pair.amplitude)
    assert full.total_power == pytest.approx(150 * pair.total_power)


def test_pair_phase_does_not_move_spectrum():
    # pulses within a pair share their random phase; power is phase-blind
    grid = make_grid(400e6, 4096)
    cfg = BurnConfig(130e-9, 10e-9, 1, 3e-6, 1e-6)
    p0 = power_spectrum(afc_burn_sequence(cfg), grid).power
    p1 = power_spectrum(afc_burn_sequence(cfg, phase_seed=42), grid).power
    assert np.abs(p1 - p0).max() < 1e-12 * p0.max()


def test_aom_filter_half_power_points():
    grid = make_grid(400e6, 4096)
    flat = power_spectrum(probe_pulse(1e-6), grid)  # narrow line, irrelevant
    from afcsim.sequences import EnvelopeSpectrum
    ones = EnvelopeSpectrum(grid, np.ones(grid.n_points, dtype=complex))
    filt = aom_filter(ones, 50e6)
    k = np.argmin(np.abs(grid.detunings - 25e6))
    assert filt.power[k] == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(ValueError):
        aom_filter(flat, 0.0)


def test_sequence_file_round_trip(tmp_path):
    seq = Sequence((Pulse(0.0, 10e-9, 2.0, 5e6, 0.5),
                    Pulse(50e-9, 20e-9, 1.0, shape="square_with_rise", rise_s=3e-9)),
                   t_end_s=100e-9)
    path = tmp_path / "seq.csv"
    save_sequence(seq, path)
    back = load_sequence(path)
    assert back == seq


def test_spectrum_and_trace_files(tmp_path):
    grid = make_grid(100e6, 256)
    spec = power_spectrum(probe_pulse(20e-9), grid)
    save_spectrum(spec, tmp_path / "spec.csv")
    text = (tmp_path / "spec.csv").read_text()
    assert text.startswith("# span_hz=")
    assert len(text.strip().splitlines()) == 3 + grid.n_points

    tr = envelope(probe_pulse(20e-9), 1e-9)
    save_trace(tr, tmp_path / "trace.csv")
    lines = (tmp_path / "trace.csv").read_text().strip().splitlines()
    assert lines[0] == "t_s,re,im,power"
    assert len(lines) == 1 + tr.samples.size
