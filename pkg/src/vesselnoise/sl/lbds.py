"""LBDS regression source level, directly in one-third-octave bands.

A single polynomial in log-frequency, length, beam, draft, and log-speed;
the value at a band's center frequency is already the band level (dB re
1 uPa^2 at 1 m), so no quadrature is applied. Covers cargo, tanker, and
passenger classes.
"""

from __future__ import annotations

import math

from ..bands import FrequencyBand, snap_to_standard_center
from ..errors import DomainError, MissingAttributeError
from ..records import VesselRecord

__all__ = ["lbds_band"]

_LOG_F_CENTER = 2.70016
_BEAM_CENTER = 26.8854
_LOG_V_CENTER = 1.12024


def lbds_band(vessel: VesselRecord, band: FrequencyBand) -> float:
    """One-third-octave band source level, dB re 1 uPa^2 at 1 m."""
    for attr, label in (
        (vessel.length_m, "length"),
        (vessel.beam_m, "beam"),
        (vessel.draft_m, "draft"),
    ):
        if attr is None:
            raise MissingAttributeError(f"mmsi {vessel.mmsi}: LBDS requires {label}")
    if vessel.sog_kn <= 0.0:
        raise DomainError(f"mmsi {vessel.mmsi}: speed must be positive for LBDS")
    # The regression is defined only at standard band centers.
    f = snap_to_standard_center(band.center_hz)
    log_f = math.log10(f)
    log_v = math.log10(vessel.sog_kn)
    beam = vessel.beam_m
    return (
        285.40
        + 0.0496 * f
        - 4.8e-7 * (f - 2108.26) ** 2
        - 69.33 * log_f
        - 49.29 * (log_f - _LOG_F_CENTER) ** 2
        - 58.50 * (log_f - _LOG_F_CENTER) ** 3
        - 41.54 * (log_f - _LOG_F_CENTER) ** 4
        - 7.62 * (log_f - _LOG_F_CENTER) ** 5
        + 13.47 * math.log10(vessel.length_m)
        - 0.55 * beam
        + 0.0008 * (beam - _BEAM_CENTER) ** 3
        + 0.706 * vessel.draft_m
        + 20.164 * log_v
        - 505.1 * (log_v - _LOG_V_CENTER) ** 3
        + 2891.9 * (log_v - _LOG_V_CENTER) ** 5
    )
