"""Source level model registry, vessel-class gating, and the Combined model.

Five parametric models estimate per-vessel source levels from AIS attributes;
which models apply to which AIS type groups is fixed by the coverage table
(cargo, tanker, passenger for RANDI and LBDS; plus fishing for JE; all six
groups for AQUO; pleasure and sailing only for SRV). The Combined model is
the energetic mean over whichever of the five support the vessel.

``source_band_level`` is the single entry point the mapping pipeline uses:
model levels integrated to the 63 Hz / 125 Hz one-third-octave or 20-2000 Hz
broadband indicator bands, or the ``UNSUPPORTED`` sentinel.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

from ..bands import (
    IndicatorBand,
    SourceSpectrum,
    band_edges,
    band_level,
    band_pressure,
    broadband_bands,
    broadband_level,
    integrate_band,
    tob_band_level,
)
from ..errors import DomainError
from ..records import VesselCategory, VesselRecord
from .aquo import AquoClassParams, AquoRegistry, aquo_class_for, aquo_psd
from .jomopans import JE_CLASSES, JeClass, je_class_for, je_psd
from .lbds import lbds_band
from .randi import randi_psd
from .srv import SrvCoefficients, srv_class_for, srv_psd

__all__ = [
    "SlModelId",
    "UNSUPPORTED",
    "ModelData",
    "MODEL_COVERAGE",
    "classify",
    "model_spectrum",
    "source_band_level",
    "indicator_levels",
    "energetic_mean",
    "JE_CLASSES",
    "JeClass",
    "AquoClassParams",
    "AquoRegistry",
    "SrvCoefficients",
]

logger = logging.getLogger(__name__)


class SlModelId(Enum):
    RANDI = "RANDI"
    JE = "JE"
    LBDS = "LBDS"
    AQUO = "AQUO"
    SRV = "SRV"
    COMBINED = "COMBINED"

    @classmethod
    def parse(cls, text: str) -> "SlModelId":
        key = str(text).strip().upper()
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown SL model {text!r}") from None


class _Unsupported:
    """Singleton marker: the model has no class for this vessel."""

    _instance: "_Unsupported | None" = None

    def __new__(cls) -> "_Unsupported":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNSUPPORTED"


UNSUPPORTED = _Unsupported()

# Vessel-type coverage table; COMBINED delegates to the supporting subset.
MODEL_COVERAGE: dict[SlModelId, frozenset[VesselCategory]] = {
    SlModelId.RANDI: frozenset({
        VesselCategory.CARGO, VesselCategory.TANKER, VesselCategory.PASSENGER}),
    SlModelId.JE: frozenset({
        VesselCategory.CARGO, VesselCategory.TANKER, VesselCategory.PASSENGER,
        VesselCategory.FISHING}),
    SlModelId.LBDS: frozenset({
        VesselCategory.CARGO, VesselCategory.TANKER, VesselCategory.PASSENGER}),
    SlModelId.AQUO: frozenset({
        VesselCategory.CARGO, VesselCategory.TANKER, VesselCategory.PASSENGER,
        VesselCategory.FISHING, VesselCategory.PLEASURE, VesselCategory.SAILING}),
    SlModelId.SRV: frozenset({
        VesselCategory.PLEASURE, VesselCategory.SAILING}),
}

_SINGLE_MODELS = (SlModelId.RANDI, SlModelId.JE, SlModelId.LBDS,
                  SlModelId.AQUO, SlModelId.SRV)


@dataclass(frozen=True)
class ModelData:
    """Loaded coefficient tables; None fields fall back to packaged data."""

    aquo: AquoRegistry | None = None
    srv: dict[str, SrvCoefficients] | None = None


_DEFAULT_DATA = ModelData()


def classify(vessel: VesselRecord, model: SlModelId,
             data: ModelData = _DEFAULT_DATA):
    """Model-specific class for the vessel, or UNSUPPORTED.

    An explicit JE class override on the record makes JE applicable
    regardless of AIS type (the only route to the vehicle-carrier class).
    """
    if model is SlModelId.COMBINED:
        supported = tuple(
            m for m in _SINGLE_MODELS
            if classify(vessel, m, data) is not UNSUPPORTED)
        return supported if supported else UNSUPPORTED
    if model is SlModelId.JE and vessel.je_class is not None:
        return je_class_for(vessel)
    if vessel.category not in MODEL_COVERAGE[model]:
        return UNSUPPORTED
    if model in (SlModelId.RANDI, SlModelId.LBDS):
        return vessel.category
    if model is SlModelId.JE:
        cls = je_class_for(vessel)
        return cls if cls is not None else UNSUPPORTED
    if model is SlModelId.AQUO:
        cls = aquo_class_for(vessel, data.aquo)
        return cls if cls is not None else UNSUPPORTED
    cls = srv_class_for(vessel)
    return cls if cls is not None else UNSUPPORTED


def model_spectrum(vessel: VesselRecord, model: SlModelId,
                   data: ModelData = _DEFAULT_DATA) -> SourceSpectrum:
    """Spectrum for one supporting model (PSD kind except LBDS)."""
    if model is SlModelId.RANDI:
        return SourceSpectrum.from_psd(lambda f: randi_psd(vessel, f))
    if model is SlModelId.JE:
        return SourceSpectrum.from_psd(lambda f: je_psd(vessel, f))
    if model is SlModelId.AQUO:
        return SourceSpectrum.from_psd(lambda f: aquo_psd(vessel, f, data.aquo))
    if model is SlModelId.SRV:
        return SourceSpectrum.from_psd(lambda f: srv_psd(vessel, f, data.srv))
    if model is SlModelId.LBDS:
        levels = {
            band.center_hz: lbds_band(vessel, band)
            for band in (band_edges(63.0), band_edges(125.0), *broadband_bands())
        }
        return SourceSpectrum.from_band_levels(levels)
    raise DomainError(f"{model} has no single-model spectrum")


def _indicator_level(spectrum: SourceSpectrum, band: IndicatorBand) -> float:
    if band is IndicatorBand.BROADBAND:
        return broadband_level(spectrum)
    return tob_band_level(spectrum, band_edges(float(band.value)))


def energetic_mean(levels_db) -> float:
    levels = list(levels_db)
    if not levels:
        raise DomainError("energetic mean of an empty set")
    return 10.0 * math.log10(
        sum(10.0 ** (level / 10.0) for level in levels) / len(levels))


def source_band_level(vessel: VesselRecord, model: SlModelId,
                      band: IndicatorBand, data: ModelData = _DEFAULT_DATA):
    """Indicator-band source level in dB re 1 uPa^2 at 1 m, or UNSUPPORTED.

    COMBINED is the energetic mean over the supporting models; a model that
    raises a domain error for this particular vessel is excluded from the
    mean (and logged), shrinking the averaging set.
    """
    if model is SlModelId.COMBINED:
        supported = classify(vessel, SlModelId.COMBINED, data)
        if supported is UNSUPPORTED:
            return UNSUPPORTED
        levels = []
        for m in supported:
            try:
                level = source_band_level(vessel, m, band, data)
            except DomainError as exc:
                logger.warning("mmsi %s: %s excluded from Combined: %s",
                               vessel.mmsi, m.value, exc)
                continue
            if level is not UNSUPPORTED:
                levels.append(level)
        if not levels:
            return UNSUPPORTED
        return energetic_mean(levels)
    if classify(vessel, model, data) is UNSUPPORTED:
        return UNSUPPORTED
    return _indicator_level(model_spectrum(vessel, model, data), band)


def indicator_levels(vessel: VesselRecord, model: SlModelId,
                     data: ModelData = _DEFAULT_DATA) -> dict:
    """All three indicator-band levels for one model."""
    return {band: source_band_level(vessel, model, band, data)
            for band in IndicatorBand}
