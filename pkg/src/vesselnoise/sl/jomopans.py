"""JOMOPANS-ECHO parametric source spectrum.

Spectral density level at 1 m:

    SL(f) = L_S0(f, v/V_c) + 60 log10(v/V_c) + 20 log10(l/91.4)

where the class-specific reference speed V_c replaces RANDI's fixed 12 kn and
the baseline peaks near f1 = 480 * v/V_c Hz. Bulk, container, vehicle-carrier
and tanker classes (8-11) switch to a low-frequency hump formulation below
100 Hz. Thirteen vessel classes; the vehicle-carrier class is reachable only
through an explicit per-record class override since no AIS type maps to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import DomainError, MissingAttributeError
from ..records import VesselRecord

__all__ = ["JeClass", "JE_CLASSES", "je_class_for", "je_psd"]


@dataclass(frozen=True)
class JeClass:
    """One JOMOPANS-ECHO vessel class with its shape constants."""

    class_id: int
    name: str
    reference_speed_kn: float

    @property
    def d(self) -> float:
        # Peak-shape constant: 4 for cruise ships, 3 otherwise.
        return 4.0 if self.class_id == 6 else 3.0

    @property
    def d_lf(self) -> float | None:
        # Low-frequency shape constant, classes 8-11 only.
        if self.class_id in (8, 9):
            return 0.8
        if self.class_id in (10, 11):
            return 1.0
        return None

    @property
    def has_low_frequency_branch(self) -> bool:
        return self.class_id in (8, 9, 10, 11)


JE_CLASSES: dict[int, JeClass] = {
    c.class_id: c
    for c in (
        JeClass(1, "fishing", 6.4),
        JeClass(2, "tug", 3.7),
        JeClass(3, "naval", 11.1),
        JeClass(4, "recreational", 10.6),
        JeClass(5, "government/research", 8.0),
        JeClass(6, "cruise", 17.1),
        JeClass(7, "passenger", 9.7),
        JeClass(8, "bulk carrier", 13.9),
        JeClass(9, "container", 18.0),
        JeClass(10, "vehicle carrier", 15.8),
        JeClass(11, "tanker", 12.4),
        JeClass(12, "other", 7.4),
        JeClass(13, "dredger", 9.5),
    )
}


def je_class_for(vessel: VesselRecord) -> JeClass | None:
    """Map AIS type (plus length/speed splits) to a JOMOPANS-ECHO class.

    Honors an explicit per-record class override. Returns None when the AIS
    type has no class assignment.
    """
    if vessel.je_class is not None:
        if vessel.je_class not in JE_CLASSES:
            raise DomainError(f"unknown JE class override {vessel.je_class}")
        return JE_CLASSES[vessel.je_class]
    t = vessel.ais_type
    if t == 30:
        return JE_CLASSES[1]
    if t in (31, 32, 52):
        return JE_CLASSES[2]
    if t == 35:
        return JE_CLASSES[3]
    if t in (36, 37):
        return JE_CLASSES[4]
    if t in (51, 53, 55):
        return JE_CLASSES[5]
    if 60 <= t <= 69:
        length = vessel.length_m
        if length is not None and length > 100.0:
            return JE_CLASSES[6]
        return JE_CLASSES[7]
    if t in (71, 72, 73, 74):
        return JE_CLASSES[9]
    if t in (70, 75, 76, 77, 78, 79):
        # Cargo splits on speed: fast cargo behaves like container traffic.
        if vessel.sog_kn > 16.0:
            return JE_CLASSES[9]
        return JE_CLASSES[8]
    if 80 <= t <= 89:
        return JE_CLASSES[11]
    if t == 33:
        return JE_CLASSES[13]
    return None


def reference_spectrum(f_hz: float, speed_ratio: float, je_class: JeClass) -> float:
    """Class baseline L_S0 at speed ratio v/V_c, dB re 1 uPa^2/Hz at 1 m."""
    if je_class.has_low_frequency_branch and f_hz < 100.0:
        f1 = 600.0 * speed_ratio
        d_lf = je_class.d_lf
        assert d_lf is not None
        return (
            208.0
            - 40.0 * math.log10(f1)
            + 10.0 * math.log10(f_hz)
            - 10.0 * math.log10((1.0 - (f_hz / f1) ** 2) ** 2 + d_lf ** 2)
        )
    f1 = 480.0 * speed_ratio
    return (
        191.0
        - 20.0 * math.log10(f1)
        - 10.0 * math.log10((1.0 - f_hz / f1) ** 2 + je_class.d ** 2)
    )


def je_psd(vessel: VesselRecord, f_hz: float) -> float:
    """Source spectral density level, dB re 1 uPa^2/Hz at 1 m."""
    je_class = je_class_for(vessel)
    if je_class is None:
        raise DomainError(f"mmsi {vessel.mmsi}: no JE class for AIS type {vessel.ais_type}")
    if vessel.sog_kn <= 0.0:
        raise DomainError(f"mmsi {vessel.mmsi}: speed must be positive for JE")
    if vessel.length_m is None:
        raise MissingAttributeError(f"mmsi {vessel.mmsi}: JE requires length")
    if f_hz <= 0.0 or not math.isfinite(f_hz):
        raise DomainError(f"frequency must be positive, got {f_hz!r}")
    ratio = vessel.sog_kn / je_class.reference_speed_kn
    return (
        reference_spectrum(f_hz, ratio, je_class)
        + 60.0 * math.log10(ratio)
        + 20.0 * math.log10(vessel.length_m / 91.4)
    )
