"""RANDI 3.1 parametric source spectrum for merchant traffic.

Spectral density level at 1 m:

    SL(f) = L_S0(f) + 60 log10(v/12) + 20 log10(l/91.4) + d_f * d_l + 3.0

with the reference spectrum L_S0 piecewise at 500 Hz, a length-driven
amplitude correction d_l = l^1.15 / 995, and a frequency gate d_f that fades
the correction out between 28.4 and 191.6 Hz. Speed in knots, length in
meters. Covers cargo, tanker, and passenger classes.
"""

from __future__ import annotations

import math

from ..errors import DomainError, MissingAttributeError
from ..records import VesselRecord

__all__ = ["reference_spectrum", "randi_psd"]


def reference_spectrum(f_hz: float) -> float:
    """Baseline spectrum level L_S0(f), dB re 1 uPa^2/Hz at 1 m."""
    if f_hz < 500.0:
        log_f = math.log10(f_hz)
        return -10.0 * math.log10(
            10.0 ** (-1.06 * log_f - 14.34) + 10.0 ** (3.32 * log_f - 21.425)
        )
    return 173.2 - 18.0 * math.log10(f_hz)


def _frequency_gate(f_hz: float) -> float:
    # Closed lower branch at both break frequencies.
    if f_hz <= 28.4:
        return 8.1
    if f_hz <= 191.6:
        return 22.3 - 9.77 * math.log10(f_hz)
    return 0.0


def randi_psd(vessel: VesselRecord, f_hz: float) -> float:
    """Source spectral density level, dB re 1 uPa^2/Hz at 1 m."""
    if vessel.sog_kn <= 0.0:
        raise DomainError(f"mmsi {vessel.mmsi}: speed must be positive for RANDI")
    if vessel.length_m is None:
        raise MissingAttributeError(f"mmsi {vessel.mmsi}: RANDI requires length")
    if f_hz <= 0.0 or not math.isfinite(f_hz):
        raise DomainError(f"frequency must be positive, got {f_hz!r}")
    length = vessel.length_m
    return (
        reference_spectrum(f_hz)
        + 60.0 * math.log10(vessel.sog_kn / 12.0)
        + 20.0 * math.log10(length / 91.4)
        + _frequency_gate(f_hz) * length ** 1.15 / 995.0
        + 3.0
    )
