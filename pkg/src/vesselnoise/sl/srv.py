"""Small-recreational-vessel regression source spectrum.

Per-frequency linear regression in log length and log speed:

    SL_q(f) = b0_q(f) + bL_q(f) log10(L) + bV_q(f) log10(V)

for classes q in {sail, yacht} (AIS 36 and 37). Raw coefficients come from a
CSV with schema ``class,freq_hz,beta0,betaL,betaV`` and are smoothed on the
log2-frequency axis with a Gaussian kernel normalised over the sample grid;
the kernel width gives a one-third-octave full width at half maximum.
Between grid points coefficients interpolate linearly in log2 frequency and
clamp at the grid edges.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import ConfigError, DomainError, MissingAttributeError, SchemaError
from ..records import VesselRecord

__all__ = [
    "SMOOTHING_SIGMA",
    "SrvCoefficients",
    "gaussian_smooth",
    "load_coefficients",
    "default_coefficients",
    "srv_class_for",
    "srv_psd",
]

# FWHM = 2*sqrt(2 ln 2)*sigma = 1/3 octave on the log2 axis.
SMOOTHING_SIGMA = (1.0 / 3.0) / (2.0 * math.sqrt(2.0 * math.log(2.0)))


def gaussian_smooth(freqs_hz: np.ndarray, values: np.ndarray,
                    sigma: float = SMOOTHING_SIGMA) -> np.ndarray:
    """Kernel-smoothed values on the log2-frequency grid itself."""
    x = np.log2(freqs_hz)
    weights = np.exp(-((x[:, None] - x[None, :]) ** 2) / (2.0 * sigma ** 2))
    return (weights @ values) / weights.sum(axis=1)


@dataclass(frozen=True)
class SrvCoefficients:
    """Smoothed coefficient tables for one vessel class."""

    class_name: str
    freqs_hz: np.ndarray
    beta0: np.ndarray
    beta_l: np.ndarray
    beta_v: np.ndarray

    def interpolate(self, f_hz: float) -> tuple[float, float, float]:
        x = math.log2(f_hz)
        grid = np.log2(self.freqs_hz)
        return (
            float(np.interp(x, grid, self.beta0)),
            float(np.interp(x, grid, self.beta_l)),
            float(np.interp(x, grid, self.beta_v)),
        )


def load_coefficients(path: Path | str,
                      sigma: float = SMOOTHING_SIGMA) -> dict[str, SrvCoefficients]:
    """Parse and smooth a coefficient CSV; returns class -> coefficients."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read SRV coefficients {path}: {exc}") from exc
    reader = csv.DictReader(
        line for line in text.splitlines() if line.strip() and not line.startswith("#"))
    expected = {"class", "freq_hz", "beta0", "betaL", "betaV"}
    if reader.fieldnames is None or set(reader.fieldnames) != expected:
        raise SchemaError(
            f"SRV coefficient file needs columns {sorted(expected)}, "
            f"got {reader.fieldnames}")
    rows: dict[str, list[tuple[float, float, float, float]]] = {}
    for lineno, row in enumerate(reader, start=2):
        try:
            rows.setdefault(row["class"].strip(), []).append((
                float(row["freq_hz"]),
                float(row["beta0"]),
                float(row["betaL"]),
                float(row["betaV"]),
            ))
        except ValueError as exc:
            raise SchemaError(f"SRV coefficients line {lineno}: {exc}") from exc
    out: dict[str, SrvCoefficients] = {}
    for name, samples in rows.items():
        samples.sort(key=lambda r: r[0])
        freqs = np.array([s[0] for s in samples])
        if len(freqs) < 2 or np.any(np.diff(freqs) <= 0.0):
            raise SchemaError(
                f"SRV class {name}: frequency grid must be strictly increasing "
                f"with >= 2 samples")
        out[name] = SrvCoefficients(
            class_name=name,
            freqs_hz=freqs,
            beta0=gaussian_smooth(freqs, np.array([s[1] for s in samples]), sigma),
            beta_l=gaussian_smooth(freqs, np.array([s[2] for s in samples]), sigma),
            beta_v=gaussian_smooth(freqs, np.array([s[3] for s in samples]), sigma),
        )
    return out


@lru_cache(maxsize=1)
def default_coefficients() -> dict[str, SrvCoefficients]:
    """Coefficients from the packaged file."""
    ref = resources.files("vesselnoise") / "data" / "srv_coefficients.csv"
    with resources.as_file(ref) as path:
        return load_coefficients(path)


def srv_class_for(vessel: VesselRecord) -> str | None:
    if vessel.ais_type == 36:
        return "sail"
    if vessel.ais_type == 37:
        return "yacht"
    return None


def srv_psd(vessel: VesselRecord, f_hz: float,
            coefficients: dict[str, SrvCoefficients] | None = None) -> float:
    """Source spectral density level, dB re 1 uPa^2/Hz at 1 m."""
    name = srv_class_for(vessel)
    if name is None:
        raise DomainError(
            f"mmsi {vessel.mmsi}: SRV covers AIS 36/37 only, got {vessel.ais_type}")
    table = coefficients if coefficients is not None else default_coefficients()
    if name not in table:
        raise ConfigError(f"SRV coefficient file lacks class {name!r}")
    if vessel.length_m is None:
        raise MissingAttributeError(f"mmsi {vessel.mmsi}: SRV requires length")
    if vessel.sog_kn <= 0.0:
        raise DomainError(f"mmsi {vessel.mmsi}: speed must be positive for SRV")
    if f_hz <= 0.0 or not math.isfinite(f_hz):
        raise DomainError(f"frequency must be positive, got {f_hz!r}")
    beta0, beta_l, beta_v = table[name].interpolate(f_hz)
    return (
        beta0
        + beta_l * math.log10(vessel.length_m)
        + beta_v * math.log10(vessel.sog_kn)
    )
