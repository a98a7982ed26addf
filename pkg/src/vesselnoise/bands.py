"""One-third-octave band arithmetic for underwater noise indicators.

Provides:

* the nominal one-third-octave center frequency series and band edges at
  center * 2**(+-1/6),
* five-point Boole quadrature of spectral densities over a band,
* conversion between band mean-square pressure and band level,
* the broadband indicator band set: every one-third-octave band lying fully
  inside 20-2000 Hz (19 bands, centers 25 to 1600 Hz),
* the ``SourceSpectrum`` container used by the source level models, either a
  spectral density callable or a table of band levels at standard centers.

Levels are dB re 1 uPa^2 (band) or dB re 1 uPa^2/Hz (density); pressures are
mean-square in uPa^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping

from .errors import DomainError, IncompleteSpectrumError

__all__ = [
    "FrequencyBand",
    "IndicatorBand",
    "SourceSpectrum",
    "band_edges",
    "standard_centers",
    "snap_to_standard_center",
    "boole",
    "integrate_band",
    "band_level",
    "band_pressure",
    "tob_band_level",
    "broadband_bands",
    "broadband_level",
]

# Nominal base-2 preferred center frequencies, one decade.
_DECADE_CENTERS = (1.0, 1.25, 1.6, 2.0, 2.5, 3.15, 4.0, 5.0, 6.3, 8.0)

_EDGE_RATIO = 2.0 ** (1.0 / 6.0)

# Broadband indicator limits: bands must lie fully inside this range.
BROADBAND_LOW_HZ = 20.0
BROADBAND_HIGH_HZ = 2000.0


@dataclass(frozen=True)
class FrequencyBand:
    """One one-third-octave band: nominal center and exact edges."""

    center_hz: float
    lower_hz: float
    upper_hz: float

    @property
    def width_hz(self) -> float:
        return self.upper_hz - self.lower_hz

    def __contains__(self, f_hz: float) -> bool:
        return self.lower_hz <= f_hz <= self.upper_hz


def band_edges(center_hz: float) -> FrequencyBand:
    """Band around a center frequency, edges at center * 2**(+-1/6)."""
    if not (isinstance(center_hz, (int, float)) and math.isfinite(center_hz)):
        raise DomainError(f"band center must be finite, got {center_hz!r}")
    if center_hz <= 0.0:
        raise DomainError(f"band center must be positive, got {center_hz}")
    return FrequencyBand(
        center_hz=float(center_hz),
        lower_hz=center_hz / _EDGE_RATIO,
        upper_hz=center_hz * _EDGE_RATIO,
    )


def standard_centers(fmin_hz: float = 10.0, fmax_hz: float = 20000.0) -> tuple[float, ...]:
    """Nominal one-third-octave centers with fmin <= center <= fmax."""
    if fmin_hz <= 0.0 or fmax_hz < fmin_hz:
        raise DomainError("need 0 < fmin <= fmax")
    out: list[float] = []
    scale = 0.001
    while scale <= fmax_hz:
        for m in _DECADE_CENTERS:
            c = m * scale
            if fmin_hz <= c <= fmax_hz:
                out.append(c)
        scale *= 10.0
    return tuple(out)


def snap_to_standard_center(f_hz: float, rel_tol: float = 0.01) -> float:
    """Nearest nominal center within rel_tol, else DomainError."""
    if f_hz <= 0.0 or not math.isfinite(f_hz):
        raise DomainError(f"frequency must be positive and finite, got {f_hz!r}")
    candidates = standard_centers(f_hz / 2.0, f_hz * 2.0)
    if candidates:
        best = min(candidates, key=lambda c: abs(c - f_hz))
        if abs(best - f_hz) <= rel_tol * best:
            return best
    raise DomainError(f"{f_hz} Hz is not a standard one-third-octave center")


def boole(fn: Callable[[float], float], lower: float, upper: float) -> float:
    """Five-point Boole's rule on [lower, upper]; exact for quartics."""
    h = (upper - lower) / 4.0
    return (upper - lower) / 90.0 * (
        7.0 * fn(lower)
        + 32.0 * fn(lower + h)
        + 12.0 * fn(lower + 2.0 * h)
        + 32.0 * fn(lower + 3.0 * h)
        + 7.0 * fn(upper)
    )


def integrate_band(psd_db: Callable[[float], float], band: FrequencyBand) -> float:
    """Band mean-square pressure (uPa^2) from a dB spectral density."""
    return boole(lambda f: 10.0 ** (psd_db(f) / 10.0), band.lower_hz, band.upper_hz)


def band_level(pressure_upa2: float) -> float:
    """Band level in dB re 1 uPa^2 from band mean-square pressure."""
    if not (pressure_upa2 > 0.0 and math.isfinite(pressure_upa2)):
        raise DomainError(f"band pressure must be positive, got {pressure_upa2!r}")
    return 10.0 * math.log10(pressure_upa2)


def band_pressure(level_db: float) -> float:
    """Inverse of band_level."""
    return 10.0 ** (level_db / 10.0)


class IndicatorBand(Enum):
    """The three reported indicator bands."""

    TOB_63 = "63"
    TOB_125 = "125"
    BROADBAND = "broadband"

    @property
    def column_suffix(self) -> str:
        return {"63": "63", "125": "125", "broadband": "bb"}[self.value]

    @property
    def absorption_frequency_hz(self) -> float:
        """Representative frequency for volume absorption along a path.

        One-third-octave bands use their center; the broadband indicator
        uses the geometric mean of its 20-2000 Hz limits.
        """
        if self is IndicatorBand.BROADBAND:
            return math.sqrt(BROADBAND_LOW_HZ * BROADBAND_HIGH_HZ)
        return float(self.value)

    @classmethod
    def parse(cls, text: str) -> "IndicatorBand":
        key = str(text).strip().lower()
        aliases = {
            "63": cls.TOB_63,
            "125": cls.TOB_125,
            "broadband": cls.BROADBAND,
            "bb": cls.BROADBAND,
            "20-2000": cls.BROADBAND,
        }
        if key not in aliases:
            raise DomainError(f"unknown indicator band {text!r}")
        return aliases[key]


def broadband_bands() -> tuple[FrequencyBand, ...]:
    """All one-third-octave bands lying fully inside 20-2000 Hz."""
    bands = []
    for c in standard_centers(BROADBAND_LOW_HZ / 2.0, BROADBAND_HIGH_HZ):
        band = band_edges(c)
        if band.lower_hz >= BROADBAND_LOW_HZ and band.upper_hz <= BROADBAND_HIGH_HZ:
            bands.append(band)
    return tuple(bands)


@dataclass(frozen=True)
class SourceSpectrum:
    """A source spectrum, either a density callable or band levels.

    ``kind`` is "psd" (dB re 1 uPa^2/Hz as a function of Hz) or
    "third_octave" (dB re 1 uPa^2 keyed by nominal band center).
    """

    kind: str
    psd: Callable[[float], float] | None = None
    levels: Mapping[float, float] | None = None

    @classmethod
    def from_psd(cls, psd: Callable[[float], float]) -> "SourceSpectrum":
        return cls(kind="psd", psd=psd)

    @classmethod
    def from_band_levels(cls, levels: Mapping[float, float]) -> "SourceSpectrum":
        snapped = {snap_to_standard_center(f): db for f, db in levels.items()}
        if len(snapped) != len(levels):
            raise DomainError("duplicate band centers after snapping")
        return cls(kind="third_octave", levels=snapped)


def tob_band_level(spectrum: SourceSpectrum, band: FrequencyBand) -> float:
    """Level of one one-third-octave band from a spectrum."""
    if spectrum.kind == "psd":
        assert spectrum.psd is not None
        return band_level(integrate_band(spectrum.psd, band))
    assert spectrum.levels is not None
    if band.center_hz not in spectrum.levels:
        raise IncompleteSpectrumError(
            f"spectrum has no {band.center_hz} Hz band")
    return spectrum.levels[band.center_hz]


def broadband_level(spectrum: SourceSpectrum) -> float:
    """Broadband 20-2000 Hz level: energy sum over the 19 indicator bands."""
    total = 0.0
    for band in broadband_bands():
        total += band_pressure(tob_band_level(spectrum, band))
    return band_level(total)
