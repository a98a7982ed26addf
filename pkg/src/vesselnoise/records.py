"""Vessel records: the one decoded AIS state shared by every pipeline stage.

A record is produced by the feed decoder, the CSV importer, or the store, and
consumed unchanged by the source level models, the exposure pipeline, and the
service. Dimensions may be absent; ``with_default_dimensions`` fills them from
a class-median table and flags the record as estimated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum

from .errors import SchemaError

__all__ = [
    "VesselRecord",
    "VesselCategory",
    "category_of_ais_type",
    "DimensionDefaults",
    "DEFAULT_DIMENSIONS",
    "with_default_dimensions",
    "is_radiating",
    "parse_timestamp",
    "format_timestamp",
]

# Vessels slower than this radiate negligibly and are excluded from grids.
MIN_RADIATING_SPEED_KN = 0.5


class VesselCategory(Enum):
    """AIS type groupings used for model coverage and reporting."""

    CARGO = "cargo"
    TANKER = "tanker"
    PASSENGER = "passenger"
    FISHING = "fishing"
    PLEASURE = "pleasure"
    SAILING = "sailing"
    OTHER = "other"


def category_of_ais_type(ais_type: int | None) -> VesselCategory:
    if ais_type is None:
        return VesselCategory.OTHER
    if 70 <= ais_type <= 79:
        return VesselCategory.CARGO
    if 80 <= ais_type <= 89:
        return VesselCategory.TANKER
    if 60 <= ais_type <= 69:
        return VesselCategory.PASSENGER
    if ais_type == 30:
        return VesselCategory.FISHING
    if ais_type == 37:
        return VesselCategory.PLEASURE
    if ais_type == 36:
        return VesselCategory.SAILING
    return VesselCategory.OTHER


@dataclass(frozen=True)
class VesselRecord:
    """One decoded AIS state."""

    mmsi: int
    timestamp: datetime
    lat: float
    lon: float
    sog_kn: float
    ais_type: int
    cog_deg: float | None = None
    length_m: float | None = None
    beam_m: float | None = None
    draft_m: float | None = None
    nav_status: int | None = None
    name: str | None = None
    # Explicit JOMOPANS-ECHO class override (CSV input only); the only way
    # to reach classes unreachable from the AIS type, e.g. vehicle carriers.
    je_class: int | None = None
    estimated_dims: bool = False

    @property
    def category(self) -> VesselCategory:
        return category_of_ais_type(self.ais_type)

    def __post_init__(self) -> None:
        if not (-90.0 <= self.lat <= 90.0 and -180.0 <= self.lon <= 180.0):
            raise SchemaError(
                f"mmsi {self.mmsi}: position ({self.lat}, {self.lon}) out of range")
        if self.sog_kn < 0.0 or not math.isfinite(self.sog_kn):
            raise SchemaError(f"mmsi {self.mmsi}: bad speed {self.sog_kn}")
        if not 0 <= self.ais_type <= 99:
            raise SchemaError(f"mmsi {self.mmsi}: AIS type {self.ais_type} out of range")
        for field in ("length_m", "beam_m", "draft_m"):
            v = getattr(self, field)
            if v is not None and not (v > 0.0 and math.isfinite(v)):
                raise SchemaError(f"mmsi {self.mmsi}: {field}={v} must be positive")
        if self.timestamp.tzinfo is None:
            raise SchemaError(f"mmsi {self.mmsi}: timestamp must be timezone-aware")


@dataclass(frozen=True)
class DimensionDefaults:
    """Class-median principal dimensions used when AIS static data is absent."""

    length_m: float
    beam_m: float
    draft_m: float


DEFAULT_DIMENSIONS: dict[VesselCategory, DimensionDefaults] = {
    VesselCategory.CARGO: DimensionDefaults(160.0, 25.0, 9.0),
    VesselCategory.TANKER: DimensionDefaults(180.0, 30.0, 11.0),
    VesselCategory.PASSENGER: DimensionDefaults(120.0, 20.0, 6.0),
    VesselCategory.FISHING: DimensionDefaults(25.0, 7.0, 3.0),
    VesselCategory.PLEASURE: DimensionDefaults(15.0, 4.5, 2.0),
    VesselCategory.SAILING: DimensionDefaults(12.0, 4.0, 2.0),
    VesselCategory.OTHER: DimensionDefaults(50.0, 10.0, 4.0),
}


def with_default_dimensions(
    record: VesselRecord,
    defaults: dict[VesselCategory, DimensionDefaults] | None = None,
) -> VesselRecord:
    """Fill missing dimensions from class medians, flagging the record."""
    table = defaults if defaults is not None else DEFAULT_DIMENSIONS
    d = table[record.category]
    updates: dict[str, object] = {}
    if record.length_m is None:
        updates["length_m"] = d.length_m
    if record.beam_m is None:
        updates["beam_m"] = d.beam_m
    if record.draft_m is None:
        updates["draft_m"] = d.draft_m
    if not updates:
        return record
    updates["estimated_dims"] = True
    return replace(record, **updates)


def is_radiating(record: VesselRecord) -> bool:
    """Vessels below 0.5 kn are treated as non-radiating."""
    return record.sog_kn >= MIN_RADIATING_SPEED_KN


def parse_timestamp(text: str) -> datetime:
    """Strict ISO-8601 UTC timestamp parser ('Z' or explicit offset)."""
    raw = text.strip()
    if not raw:
        raise SchemaError("empty timestamp")
    candidate = raw[:-1] + "+00:00" if raw.endswith("Z") else raw
    try:
        ts = datetime.fromisoformat(candidate)
    except ValueError as exc:
        raise SchemaError(f"timestamp {text!r} is not ISO-8601") from exc
    if ts.tzinfo is None:
        raise SchemaError(f"timestamp {text!r} lacks a UTC offset")
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    """Canonical ISO-8601 UTC rendering with 'Z' suffix, second resolution."""
    ts = ts.astimezone(timezone.utc)
    if ts.microsecond:
        return ts.strftime("%Y-%m-%dT%H:%M:%S.%f").rstrip("0") + "Z"
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")
