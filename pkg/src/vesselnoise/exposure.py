"""Cumulative sound exposure from AIS tracks.

Consecutive AIS reports become time-weighted track segments; each segment
radiates its band source level for its duration and the received energy is
integrated per grid cell:

    E_tot(x) = sum_s 10^(L_R,s(x) / 10) * dt_s      [uPa^2 s]
    SEL(x)   = 10 log10(E_tot(x))                    re 1 uPa^2 s

Segments are processed in fixed-size batches whose partial grids are reduced
in batch order, so results are bitwise identical for any worker count.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime

import numpy as np

from .bands import IndicatorBand
from .environment import EnvironmentField
from .errors import DomainError, EmptyRegionError, OutOfDomainError
from .geo import MpaPolygon, polygon_distance_m
from .propagation import (GridSpec, RayFanConfig, footprint_energy,
                          source_depth, source_footprint)
from .records import VesselRecord, is_radiating, with_default_dimensions
from .sl import UNSUPPORTED, ModelData, SlModelId, indicator_levels

logger = logging.getLogger(__name__)

__all__ = [
    "TrackSegment",
    "ExposureWindow",
    "SelDiagnostics",
    "segmentize",
    "segments_in_window",
    "sel_grids",
    "apply_speed_cap",
    "region_energetic_mean",
    "validate_against_measurement",
    "DEFAULT_GAP_THRESHOLD_S",
    "DEFAULT_CAP_BUFFER_KM",
]

DEFAULT_GAP_THRESHOLD_S = 1800.0
DEFAULT_CAP_BUFFER_KM = 20.0

# Segments per reduction batch. Fixed: the batch boundaries define the
# floating-point summation order, so changing this changes output bits.
BATCH_SIZE = 8


@dataclass(frozen=True)
class TrackSegment:
    """One inter-report track piece radiating for its whole duration.

    The vessel snapshot sits at the segment midpoint with the two reports'
    speeds averaged; band source levels are derived from it on demand.
    """

    mmsi: int
    lat: float
    lon: float
    duration_s: float
    vessel: VesselRecord

    def __post_init__(self) -> None:
        if not (self.duration_s > 0.0):
            raise DomainError("track segment duration must be positive")

    @property
    def timestamp(self) -> datetime:
        return self.vessel.timestamp


def segmentize(reports: list[VesselRecord],
               gap_threshold_s: float = DEFAULT_GAP_THRESHOLD_S,
               ) -> list[TrackSegment]:
    """Pair consecutive per-vessel reports into track segments.

    Reports are grouped by MMSI and ordered by time; duplicates of one
    (mmsi, timestamp) are dropped with a log line. Pairs further apart than
    the gap threshold yield no segment — the vessel left coverage and
    interpolating across the hole would fabricate exposure.
    """
    ordered = sorted(reports, key=lambda r: (r.mmsi, r.timestamp))
    segments: list[TrackSegment] = []
    dropped = 0
    prev: VesselRecord | None = None
    for rec in ordered:
        if prev is not None and rec.mmsi == prev.mmsi:
            gap = (rec.timestamp - prev.timestamp).total_seconds()
            if gap == 0.0:
                dropped += 1
                continue
            if gap <= gap_threshold_s:
                mid_time = prev.timestamp + (rec.timestamp - prev.timestamp) / 2
                snapshot = replace(
                    prev,
                    timestamp=mid_time,
                    lat=(prev.lat + rec.lat) / 2.0,
                    lon=(prev.lon + rec.lon) / 2.0,
                    sog_kn=(prev.sog_kn + rec.sog_kn) / 2.0,
                )
                segments.append(TrackSegment(
                    mmsi=rec.mmsi,
                    lat=snapshot.lat,
                    lon=snapshot.lon,
                    duration_s=gap,
                    vessel=snapshot,
                ))
        prev = rec
    if dropped:
        logger.warning("segmentize dropped %d duplicate report(s)", dropped)
    return segments


def segments_in_window(segments: list[TrackSegment], start: datetime,
                       end: datetime) -> list[TrackSegment]:
    """Segments whose midpoint time falls in [start, end).

    Midpoint assignment puts every segment in exactly one window of any
    partition, which is what makes windowed SELs sum to the total.
    """
    return [s for s in segments if start <= s.timestamp < end]


@dataclass
class SelDiagnostics:
    """Per-run accounting of segments that contributed or were skipped."""

    total: int = 0
    used: int = 0
    not_radiating: int = 0
    unsupported: int = 0
    no_water: int = 0
    sl_errors: int = 0

    def merge(self, other: "SelDiagnostics") -> None:
        self.total += other.total
        self.used += other.used
        self.not_radiating += other.not_radiating
        self.unsupported += other.unsupported
        self.no_water += other.no_water
        self.sl_errors += other.sl_errors


@dataclass
class ExposureWindow:
    """Cumulative exposure over one time window on one grid."""

    start: datetime
    end: datetime
    spec: GridSpec
    energy: dict[IndicatorBand, np.ndarray] = field(default_factory=dict)
    diagnostics: SelDiagnostics = field(default_factory=SelDiagnostics)

    def __post_init__(self) -> None:
        if not (self.end > self.start):
            raise DomainError("exposure window must end after it starts")

    def sel_db(self, band: IndicatorBand) -> np.ndarray:
        """Per-cell SEL in dB; cells that received nothing are NaN."""
        e = self.energy[band]
        with np.errstate(divide="ignore"):
            return np.where(e > 0.0, 10.0 * np.log10(np.maximum(e, 1e-300)),
                            np.nan)


def _segment_band_levels(vessel: VesselRecord, model: SlModelId,
                         bands: tuple[IndicatorBand, ...], data: ModelData,
                         cache: dict) -> dict | None:
    """Band SLs for a segment's snapshot, memoized by the radiating state."""
    key = (vessel.mmsi, vessel.sog_kn, vessel.length_m,
           vessel.draft_m, vessel.je_class, model)
    if key in cache:
        return cache[key]
    levels = indicator_levels(vessel, model, data)
    out: dict | None = {}
    for band in bands:
        value = levels[band]
        if value is UNSUPPORTED:
            out = None
            break
        out[band] = value
    cache[key] = out
    return out


def _batch_energy(batch: list[TrackSegment], env: EnvironmentField,
                  cfg: RayFanConfig, spec: GridSpec, model: SlModelId,
                  bands: tuple[IndicatorBand, ...], data: ModelData,
                  sl_cache: dict) -> tuple[dict, SelDiagnostics]:
    partial = {band: np.zeros(spec.n_rows * spec.n_cols) for band in bands}
    diag = SelDiagnostics(total=len(batch))
    for seg in batch:
        # Class-median dimensions fill any gaps, as on the live map path.
        vessel = with_default_dimensions(seg.vessel)
        if not is_radiating(vessel):
            diag.not_radiating += 1
            continue
        try:
            sls = _segment_band_levels(vessel, model, bands, data, sl_cache)
        except DomainError:
            diag.sl_errors += 1
            continue
        if sls is None:
            diag.unsupported += 1
            continue
        water = env.bathymetry.sample_many(np.array([seg.lat]),
                                           np.array([seg.lon]))[0]
        if math.isnan(water):
            diag.no_water += 1
            continue
        depth = source_depth(vessel.draft_m, float(water), cfg)
        fp = source_footprint(seg.lat, seg.lon, depth, env, cfg, spec)
        for band in bands:
            footprint_energy(fp, sls[band], band, cfg, partial[band],
                             scale=seg.duration_s)
        diag.used += 1
    return partial, diag


def sel_grids(segments: list[TrackSegment], env: EnvironmentField,
              cfg: RayFanConfig, spec: GridSpec, start: datetime,
              end: datetime, model: SlModelId = SlModelId.COMBINED,
              data: ModelData | None = None,
              bands: tuple[IndicatorBand, ...] = tuple(IndicatorBand),
              workers: int = 1,
              progress: Callable[[float], None] | None = None,
              ) -> ExposureWindow:
    """Accumulate SEL energy grids for every indicator band.

    Segments are taken as given (window them first with segments_in_window).
    The footprint of each segment is computed once and reused across bands.
    Worker count never changes the result: partial grids are produced per
    fixed-size batch and summed in batch order. ``progress`` is called with
    the completed fraction after each batch is folded in, so it fires in
    deterministic order too.
    """
    if data is None:
        data = ModelData()
    window = ExposureWindow(start=start, end=end, spec=spec)
    window.energy = {band: np.zeros((spec.n_rows, spec.n_cols))
                     for band in bands}
    batches = [segments[i:i + BATCH_SIZE]
               for i in range(0, len(segments), BATCH_SIZE)]
    sl_cache: dict = {}

    def run(batch: list[TrackSegment]) -> tuple[dict, SelDiagnostics]:
        return _batch_energy(batch, env, cfg, spec, model, bands, data,
                             sl_cache)

    if workers <= 1 or len(batches) <= 1:
        results = map(run, batches)
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        results = pool.map(run, batches)
    try:
        for i, (partial, diag) in enumerate(results):
            for band in bands:
                window.energy[band] += partial[band].reshape(
                    spec.n_rows, spec.n_cols)
            window.diagnostics.merge(diag)
            if progress is not None:
                progress((i + 1) / len(batches))
    finally:
        if workers > 1 and len(batches) > 1:
            pool.shutdown()
    return window


def apply_speed_cap(segments: list[TrackSegment], cap_kn: float,
                    zone: MpaPolygon,
                    buffer_km: float = DEFAULT_CAP_BUFFER_KM,
                    ) -> list[TrackSegment]:
    """Cap segment speeds inside a zone plus a surrounding buffer.

    Segments whose representative position lies within buffer_km of the
    zone polygon get speed min(speed, cap); everything else is untouched.
    Durations never change; source levels follow the new speeds when the
    capped segments are next evaluated.
    """
    if not (cap_kn > 0.0):
        raise DomainError("speed cap must be positive")
    if not (buffer_km >= 0.0):
        raise DomainError("cap buffer must be non-negative")
    out = []
    limit_m = buffer_km * 1000.0
    for seg in segments:
        if (seg.vessel.sog_kn > cap_kn
                and polygon_distance_m(seg.lat, seg.lon, zone.polygon) <= limit_m):
            capped = replace(seg.vessel, sog_kn=cap_kn)
            out.append(replace(seg, vessel=capped))
        else:
            out.append(seg)
    return out


def region_energetic_mean(sel_db: np.ndarray, spec: GridSpec,
                          poly: MpaPolygon) -> float:
    """Energetic mean of SEL over the cells whose centers lie in the polygon.

    Absent cells (NaN: nothing ever reached them) count as zero energy, so
    a silent corner of the region pulls the mean down rather than vanishing
    from it. All-absent regions return NaN.
    """
    lat_c = spec.lat_centers
    lon_c = spec.lon_centers
    min_lat, min_lon, max_lat, max_lon = poly.polygon.bbox
    rows = np.nonzero((lat_c >= min_lat) & (lat_c <= max_lat))[0]
    cols = np.nonzero((lon_c >= min_lon) & (lon_c <= max_lon))[0]
    values = []
    for i in rows:
        for j in cols:
            if poly.polygon.contains(lat_c[i], lon_c[j]):
                values.append(sel_db[i, j])
    if not values:
        raise EmptyRegionError(
            f"no grid cell centers inside polygon {poly.name!r}")
    arr = np.array(values)
    power = np.where(np.isnan(arr), 0.0, 10.0 ** (arr / 10.0))
    mean = power.mean()
    if mean <= 0.0:
        return float("nan")
    return float(10.0 * math.log10(mean))


def validate_against_measurement(window: ExposureWindow, lat: float,
                                 lon: float,
                                 measured_db: dict[IndicatorBand, float],
                                 ) -> dict[IndicatorBand, float]:
    """Modeled SEL at the nearest grid cell minus the measured SEL, per band."""
    spec = window.spec
    if not (spec.lat_min <= lat <= spec.lat_max
            and spec.lon_min <= lon <= spec.lon_max):
        raise OutOfDomainError(
            f"measurement point ({lat}, {lon}) outside the grid extent")
    i = int(np.argmin(np.abs(spec.lat_centers - lat)))
    j = int(np.argmin(np.abs(spec.lon_centers - lon)))
    out = {}
    for band, measured in measured_db.items():
        modeled = window.sel_db(band)[i, j]
        out[band] = float(modeled - measured)
    return out
