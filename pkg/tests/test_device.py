"""Power-to-Rabi calibration and coupling bookkeeping."""

import math

import pytest

from afcsim.device import (DeviceModel, equal_rabi_power_ratio,
                           pulse_area_rad, rabi_cyclic_hz)


def test_anchor_point_exact():
    dev = DeviceModel()
    assert dev.rabi_from_power(1e-6) == pytest.approx(4.49e7, rel=1e-12)


def test_sqrt_power_scaling():
    dev = DeviceModel()
    base = dev.rabi_from_power(1e-6)
    assert dev.rabi_from_power(4e-6) == pytest.approx(2 * base, rel=1e-12)
    assert dev.rabi_from_power(0.25e-6) == pytest.approx(0.5 * base, rel=1e-12)


def test_power_rabi_round_trip():
    dev = DeviceModel()
    for om in (1e6, 4.49e7, 2.2e8):
        assert dev.rabi_from_power(dev.power_for_rabi(om)) == pytest.approx(om, rel=1e-12)


def test_mode_area_power_ratio():
    # equal Rabi rate in a 70 um^2 free-space mode needs 1000x the power
    # of the 0.07 um^2 waveguide mode
    assert equal_rabi_power_ratio(70e-12, 0.07e-12) == pytest.approx(1000.0, rel=1e-12)
    with pytest.raises(ValueError):
        equal_rabi_power_ratio(-1.0, 1.0)


def test_coupling_chain():
    dev = DeviceModel()
    inside = dev.in_waveguide_power(1e-3)
    assert inside == pytest.approx(1e-6)
    assert dev.detected_power(inside) == pytest.approx(1e-9)


def test_pi_pulse_area():
    # the calibration Rabi rate reaches area pi in about 70 ns
    area = pulse_area_rad(4.49e7, 70e-9)
    assert area == pytest.approx(math.pi, rel=2e-3)
    assert rabi_cyclic_hz(2 * math.pi) == pytest.approx(1.0)


def test_device_validation():
    with pytest.raises(ValueError):
        DeviceModel(mode_area_m2=0.0)
    with pytest.raises(ValueError):
        DeviceModel(coupling_in=1.5)
    with pytest.raises(ValueError):
        DeviceModel().rabi_from_power(-1e-6)
