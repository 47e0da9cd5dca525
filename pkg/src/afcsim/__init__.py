"""Simulation and analysis toolkit for frequency-comb optical memories.

Spectral profiles and complex propagation depths live in `spectral`, pulse
sequences and their spectra in `sequences`, hole burning and store/recall in
`memory`, ensemble Bloch dynamics in `bloch`, comb/decay analysis in
`analysis`, the power-to-Rabi device calibration in `device`, and the
config-driven experiment runner in `cli`.
"""

from .analysis import (CombAnalysis, FitResult, StorageEfficiencyPoint, Tooth,
                       afc_efficiency_analytic, analyze_comb,
                       efficiency_vs_storage, fit_exponential, fringe_spacing)
from .bloch import (BlochEnsembleState, EchoScanResult, EnsembleTrace,
                    TwoPulseEcho, evolve, rabi_scan, tau_scan, two_pulse_echo)
from .device import (DeviceModel, equal_rabi_power_ratio, pulse_area_rad,
                     rabi_cyclic_hz)
from .errors import ConfigError, NoEchoError, NotACombError, NumericsError
from .memory import (BurnModel, EchoResult, TransmitResult, burn,
                     calibrate_burn, ion_response_spectrum, probe_scan,
                     store_recall, transmit)
from .sequences import (BurnConfig, EnvelopeSpectrum, FieldTrace, Pulse,
                        Sequence, afc_burn_sequence, aom_filter, burn_spectrum,
                        echo_sequence, envelope, load_sequence, power_spectrum,
                        probe_pulse, save_sequence, save_spectrum, save_trace)
from .spectral import (ComplexDepthSpectrum, InhomogeneousProfile,
                       IonParameters, SpectralGrid, comb_profile,
                       complex_depth, flat_profile, load_profile, make_grid,
                       save_profile)

__version__ = "0.1.0"

__all__ = [
    "BlochEnsembleState", "BurnConfig", "BurnModel", "CombAnalysis",
    "ComplexDepthSpectrum", "ConfigError", "DeviceModel", "EchoResult",
    "EchoScanResult", "EnsembleTrace", "EnvelopeSpectrum", "FieldTrace",
    "FitResult", "InhomogeneousProfile", "IonParameters", "NoEchoError",
    "NotACombError", "NumericsError", "Pulse", "Sequence", "SpectralGrid",
    "StorageEfficiencyPoint", "Tooth", "TransmitResult", "TwoPulseEcho",
    "afc_burn_sequence", "afc_efficiency_analytic", "analyze_comb",
    "aom_filter", "burn", "burn_spectrum", "calibrate_burn", "comb_profile",
    "complex_depth", "echo_sequence", "efficiency_vs_storage", "envelope",
    "equal_rabi_power_ratio", "evolve", "fit_exponential", "flat_profile",
    "fringe_spacing", "ion_response_spectrum", "load_profile",
    "load_sequence", "make_grid", "power_spectrum", "probe_pulse",
    "probe_scan", "pulse_area_rad", "rabi_cyclic_hz", "rabi_scan",
    "save_profile", "save_sequence", "save_spectrum", "save_trace",
    "store_recall", "tau_scan", "transmit", "two_pulse_echo",
]
