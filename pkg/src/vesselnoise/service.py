"""HTTP service: live noise maps, vessel detail, history replay, SEL jobs.

The app factory wires every collaborator (environment, regions, cache,
store, feed fetch, clock) so tests can inject fakes; production wiring
comes straight from the YAML config. Handlers parse their own query
strings because the error contract is specific: unknown band or model is
a 400, an extent outside the configured regions or a date without stored
reports is a 404, a tier limit violation is a 403 naming the limit, and
re-posting an exposure job identical to one still running is a 409
carrying the existing job id.

Responses are deterministic for a fixed store and cache state: vessel
lists are MMSI-ordered, grids come from the shared mapping and exposure
pipelines, and CSV bodies go through the one canonical writer.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .ais import AisHubClient, Poller, SqliteStore, VesselCache, status_filter
from .bands import IndicatorBand
from .config import AppConfig, TierLimits
from .environment import EnvironmentField
from .errors import ConfigError, DomainError, EmptyRegionError, SchemaError
from .exposure import (
    ExposureWindow,
    apply_speed_cap,
    region_energetic_mean,
    segmentize,
    segments_in_window,
    sel_grids,
)
from .geo import (
    METERS_PER_DEGREE_LAT,
    MpaPolygon,
    RegionDefinition,
    polygon_from_geojson,
    polygon_to_geojson,
)
from .gridio import BAND_ORDER, grid_csv, grid_payload
from .mapping import VesselLevels, compute_levels, spl_map
from .propagation import GridSpec
from .records import VesselRecord, format_timestamp, is_radiating, parse_timestamp
from .sl import ModelData, SlModelId

__all__ = ["create_app", "Extent", "SelJob"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Extent:
    """A lat/lon query rectangle."""

    min_lat: float
    min_lon: float
    max_lat: float
    max_lon: float

    @property
    def area_deg2(self) -> float:
        return (self.max_lat - self.min_lat) * (self.max_lon - self.min_lon)

    def overlaps(self, bbox: tuple[float, float, float, float]) -> bool:
        b_min_lat, b_min_lon, b_max_lat, b_max_lon = bbox
        return (self.min_lat <= b_max_lat and self.max_lat >= b_min_lat
                and self.min_lon <= b_max_lon and self.max_lon >= b_min_lon)

    def contains(self, lat: float, lon: float) -> bool:
        return (self.min_lat <= lat <= self.max_lat
                and self.min_lon <= lon <= self.max_lon)

    def spec(self, cell_deg: float) -> GridSpec:
        return GridSpec(lat_min=self.min_lat, lon_min=self.min_lon,
                        lat_max=self.max_lat, lon_max=self.max_lon,
                        cell_deg=cell_deg)

    def as_dict(self) -> dict:
        return {"min_lat": self.min_lat, "min_lon": self.min_lon,
                "max_lat": self.max_lat, "max_lon": self.max_lon}


# ---------------------------------------------------------------------------
# Exposure jobs

@dataclass
class SelResult:
    spec: GridSpec
    baseline: ExposureWindow
    scenario: ExposureWindow | None
    mpa_means: list[dict]


@dataclass
class SelJob:
    job_id: str
    key: str
    params: dict
    status: str = "queued"      # queued | running | done | error
    progress: float = 0.0
    submitted_at: str = ""
    error: str | None = None
    result: SelResult | None = None


class JobRegistry:
    """Exposure jobs keyed by a content digest for idempotent submission."""

    def __init__(self) -> None:
        self._jobs: dict[str, SelJob] = {}
        self._by_key: dict[str, SelJob] = {}
        self._lock = threading.Lock()

    def get(self, job_id: str) -> SelJob | None:
        with self._lock:
            return self._jobs.get(job_id)

    def lookup_or_create(self, key: str, params: dict,
                         submitted_at: str) -> tuple[SelJob, bool]:
        """Return (job, created). An existing job for the key is reused
        whatever its state; completed results are served from memory."""
        with self._lock:
            existing = self._by_key.get(key)
            if existing is not None:
                return existing, False
            job = SelJob(job_id=uuid.uuid4().hex[:12], key=key, params=params,
                         submitted_at=submitted_at)
            self._jobs[job.job_id] = job
            self._by_key[key] = job
            return job, True


def _job_key(extent: Extent, start: datetime, end: datetime,
             scenario: dict | None, config_hash: str) -> str:
    payload = {
        "extent": [extent.min_lat, extent.min_lon, extent.max_lat,
                   extent.max_lon],
        "start": format_timestamp(start),
        "end": format_timestamp(end),
        "scenario": scenario,
        "config": config_hash,
    }
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


# ---------------------------------------------------------------------------
# Parsing helpers; every bad input becomes a JSON error with a precise code

def _fail(status_code: int, detail: str) -> "ApiError":
    return ApiError(status_code, detail)


class ApiError(Exception):
    def __init__(self, status_code: int, detail: str) -> None:
        super().__init__(detail)
        self.status_code = status_code
        self.detail = detail


def _parse_float(raw: str | None, name: str) -> float:
    if raw is None:
        raise _fail(400, f"missing required parameter {name!r}")
    try:
        value = float(raw)
    except ValueError:
        raise _fail(400, f"parameter {name!r} must be a number, got {raw!r}")
    if not math.isfinite(value):
        raise _fail(400, f"parameter {name!r} must be finite")
    return value


def _parse_extent(min_lat, min_lon, max_lat, max_lon) -> Extent:
    extent = Extent(
        min_lat=_parse_float(min_lat, "min_lat"),
        min_lon=_parse_float(min_lon, "min_lon"),
        max_lat=_parse_float(max_lat, "max_lat"),
        max_lon=_parse_float(max_lon, "max_lon"),
    )
    if not (extent.min_lat < extent.max_lat
            and extent.min_lon < extent.max_lon):
        raise _fail(400, "extent must satisfy min_lat < max_lat and "
                         "min_lon < max_lon")
    return extent


def _parse_band(raw: str | None) -> IndicatorBand:
    if raw is None:
        return IndicatorBand.BROADBAND
    try:
        return IndicatorBand.parse(raw)
    except DomainError:
        raise _fail(400, f"unknown band {raw!r}; expected 63, 125 or broadband")


def _parse_model(raw: str | None, default: SlModelId) -> SlModelId:
    if raw is None:
        return default
    try:
        return SlModelId.parse(raw)
    except DomainError as exc:
        raise _fail(400, str(exc))


def _parse_statuses(raw: str | None) -> frozenset[int]:
    if raw is None:
        return frozenset({0, 1})
    try:
        values = frozenset(int(part) for part in raw.split(",") if part.strip())
    except ValueError:
        raise _fail(400, f"statuses must be a comma-separated list of "
                         f"integers, got {raw!r}")
    if not values:
        raise _fail(400, "statuses must name at least one status")
    return values


def _parse_when(date: str | None, t: str | None) -> datetime:
    if date is None:
        raise _fail(400, "missing required parameter 'date'")
    if t is None:
        raise _fail(400, "missing required parameter 't'")
    try:
        day = datetime.strptime(date, "%Y-%m-%d")
    except ValueError:
        day = None
    # strptime tolerates unpadded fields; the store keys are canonical
    if day is None or day.strftime("%Y-%m-%d") != date:
        raise _fail(400, f"date must be YYYY-MM-DD, got {date!r}")
    for fmt in ("%H:%M:%S", "%H:%M"):
        try:
            clock = datetime.strptime(t, fmt)
            break
        except ValueError:
            continue
    else:
        raise _fail(400, f"t must be HH:MM or HH:MM:SS, got {t!r}")
    return day.replace(hour=clock.hour, minute=clock.minute,
                       second=clock.second, tzinfo=timezone.utc)


def _json_level(value: float | None) -> float | None:
    if value is None or not math.isfinite(value):
        return None
    return value


def _vessel_json(v: VesselLevels) -> dict:
    rec, orig = v.record, v.original
    return {
        "mmsi": rec.mmsi,
        "name": rec.name,
        "timestamp": format_timestamp(rec.timestamp),
        "lat": rec.lat,
        "lon": rec.lon,
        "sog_kn": rec.sog_kn,
        "cog_deg": rec.cog_deg,
        "ais_type": rec.ais_type,
        "category": rec.category.value,
        "nav_status": rec.nav_status,
        "length_m": rec.length_m,
        "beam_m": rec.beam_m,
        "draft_m": rec.draft_m,
        "estimated": {
            "length_m": orig.length_m is None,
            "beam_m": orig.beam_m is None,
            "draft_m": orig.draft_m is None,
        },
        "radiating": is_radiating(rec),
        "supported": v.supported,
        "sl_db": {band.value: _json_level(v.levels.get(band))
                  for band in BAND_ORDER},
    }


def _expand_bbox(extent: Extent, margin_m: float,
                 ) -> tuple[float, float, float, float]:
    """Extent grown by a propagation margin so off-grid vessels whose
    sound reaches the grid still enter the computation."""
    dlat = margin_m / METERS_PER_DEGREE_LAT
    widest = max(abs(extent.min_lat), abs(extent.max_lat))
    cos_lat = max(math.cos(math.radians(widest)), 0.01)
    dlon = margin_m / (METERS_PER_DEGREE_LAT * cos_lat)
    return (max(extent.min_lat - dlat, -90.0),
            max(extent.min_lon - dlon, -180.0),
            min(extent.max_lat + dlat, 90.0),
            min(extent.max_lon + dlon, 180.0))


# ---------------------------------------------------------------------------
# App factory

def create_app(config: AppConfig, *,
               env: EnvironmentField | None = None,
               regions: dict[str, RegionDefinition] | None = None,
               data: ModelData | None = None,
               cache: VesselCache | None = None,
               store: SqliteStore | None = None,
               fetch=None,
               start_poller: bool = False) -> FastAPI:
    """Build the service with explicit collaborators.

    Everything not passed in is loaded per the config. `fetch` is the feed
    callable (bbox -> payload); when None and polling is requested the
    AISHub client is built from the configured environment variables.
    """
    env = env if env is not None else config.load_environment()
    regions = regions if regions is not None else config.load_regions()
    data = data if data is not None else config.model_data()
    cache = cache if cache is not None else VesselCache(
        ttl_s=config.feed.cache_ttl_s)
    store = store if store is not None else SqliteStore(config.store_path)

    if fetch is None and start_poller:
        endpoint = os.environ.get(config.feed.endpoint_env)
        api_key = os.environ.get(config.feed.api_key_env)
        if not endpoint or not api_key:
            raise ConfigError(
                f"feed polling needs {config.feed.endpoint_env} and "
                f"{config.feed.api_key_env} set")
        fetch = AisHubClient(endpoint, api_key)
    poller = None
    if fetch is not None:
        poller = Poller(fetch, list(regions.values()), cache, store,
                        interval_s=config.feed.poll_interval_s)

    jobs = JobRegistry()
    executor = ThreadPoolExecutor(
        max_workers=max(1, config.service.sel_workers),
        thread_name_prefix="sel-job")

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if start_poller and poller is not None:
            poller.start()
        yield
        if poller is not None:
            poller.stop()
        executor.shutdown(wait=False, cancel_futures=True)

    app = FastAPI(title="vesselnoise", lifespan=lifespan)
    app.state.config = config
    app.state.env = env
    app.state.regions = regions
    app.state.cache = cache
    app.state.store = store
    app.state.poller = poller
    app.state.jobs = jobs

    @app.exception_handler(ApiError)
    async def api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status_code,
                            content={"detail": exc.detail})

    @app.exception_handler(SchemaError)
    async def schema_error(request: Request, exc: SchemaError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(DomainError)
    async def domain_error(request: Request, exc: DomainError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    # -- live ---------------------------------------------------------------

    def _scene_payload(vessels: list[VesselLevels], spec: GridSpec,
                       band: IndicatorBand, model: SlModelId,
                       total: int) -> dict:
        grids, diag = spl_map(vessels, env, config.ray, spec, bands=(band,))
        return {
            "band": band.value,
            "model": model.value,
            "vessel_count": total,
            "truncated": total > len(vessels),
            "vessels": [_vessel_json(v) for v in vessels],
            "diagnostics": {
                "gridded": diag.gridded,
                "not_radiating": diag.not_radiating,
                "unsupported": diag.unsupported,
                "no_water": diag.no_water,
            },
            "grid": grid_payload(spec, grids[band]),
        }

    @app.get("/api/live")
    def live(min_lat: str | None = None, min_lon: str | None = None,
             max_lat: str | None = None, max_lon: str | None = None,
             band: str | None = None, model: str | None = None,
             statuses: str | None = None, format: str = "json"):
        extent = _parse_extent(min_lat, min_lon, max_lat, max_lon)
        band_e = _parse_band(band)
        model_e = _parse_model(model, config.exposure.model)
        if format not in ("json", "csv"):
            raise _fail(400, f"unknown format {format!r}; expected json or csv")
        if not any(extent.overlaps(r.bbox) for r in regions.values()):
            raise _fail(404, "requested extent is outside the configured "
                             "regions")
        records = status_filter(cache.snapshot(), _parse_statuses(statuses))
        records = [r for r in records if extent.contains(r.lat, r.lon)]
        total = len(records)
        records = records[:config.service.max_vessels]
        vessels = [compute_levels(r, model_e, data) for r in records]
        spec = extent.spec(config.cell_deg)
        if format == "csv":
            grids, _ = spl_map(vessels, env, config.ray, spec)
            return PlainTextResponse(grid_csv(spec, grids, "spl"),
                                     media_type="text/csv")
        payload = _scene_payload(vessels, spec, band_e, model_e, total)
        payload["last_poll"] = (format_timestamp(cache.last_poll_utc)
                                if cache.last_poll_utc else None)
        return payload

    # -- vessel detail ------------------------------------------------------

    @app.get("/api/vessel/{mmsi}")
    def vessel_detail(mmsi: str, model: str | None = None):
        try:
            mmsi_n = int(mmsi)
        except ValueError:
            raise _fail(400, f"mmsi must be an integer, got {mmsi!r}")
        model_e = _parse_model(model, config.exposure.model)
        record = cache.get(mmsi_n)
        source = "live"
        if record is None:
            record = store.latest(mmsi_n)
            source = "stored"
        # A vessel that is not underway is absent from every view, so a
        # direct lookup must not resurface it either.
        if record is None or not status_filter([record]):
            raise _fail(404, f"no reports for mmsi {mmsi}")
        body = _vessel_json(compute_levels(record, model_e, data))
        body["model"] = model_e.value
        body["source"] = source
        return body

    # -- history ------------------------------------------------------------

    @app.get("/api/history")
    def history(region: str | None = None, date: str | None = None,
                t: str | None = None, band: str | None = None,
                model: str | None = None, statuses: str | None = None):
        if region is None:
            raise _fail(400, "missing required parameter 'region'")
        region_def = regions.get(region)
        if region_def is None:
            raise _fail(404, f"unknown region {region!r}")
        band_e = _parse_band(band)
        model_e = _parse_model(model, config.exposure.model)
        when = _parse_when(date, t)
        if date not in store.stored_dates():
            raise _fail(404, f"no stored reports for {date}")
        validity = timedelta(seconds=config.service.history_validity_s)
        reports = store.query(when - validity, when + timedelta(seconds=1),
                              bbox=region_def.bbox)
        # Latest report per vessel, valid at t: newer than t-validity, not
        # after t. The query is time-ordered so the last write wins.
        latest: dict[int, VesselRecord] = {}
        for rec in reports:
            if when - validity < rec.timestamp <= when:
                latest[rec.mmsi] = rec
        records = status_filter(
            (latest[m] for m in sorted(latest)), _parse_statuses(statuses))
        records = [r for r in records
                   if region_def.contains(r.lat, r.lon)]
        total = len(records)
        records = records[:config.service.max_vessels]
        vessels = [compute_levels(r, model_e, data) for r in records]
        min_lat, min_lon, max_lat, max_lon = region_def.bbox
        spec = GridSpec(lat_min=min_lat, lon_min=min_lon, lat_max=max_lat,
                        lon_max=max_lon, cell_deg=config.cell_deg)
        payload = _scene_payload(vessels, spec, band_e, model_e, total)
        payload["region"] = region
        payload["t"] = format_timestamp(when)
        return payload

    # -- exposure jobs ------------------------------------------------------

    def _tier_for(api_key: str | None) -> tuple[str, TierLimits]:
        name = config.service.api_keys.get(api_key, "guest") if api_key \
            else "guest"
        return name, config.service.tiers[name]

    def _parse_zone(zone) -> MpaPolygon:
        if isinstance(zone, dict) and "mpa_id" in zone:
            wanted = str(zone["mpa_id"])
            for mpa in env.mpas:
                if mpa.mpa_id == wanted:
                    return mpa
            raise _fail(400, f"unknown mpa_id {wanted!r}")
        if isinstance(zone, dict):
            try:
                poly = polygon_from_geojson(zone)
            except (SchemaError, DomainError) as exc:
                raise _fail(400, f"bad scenario zone: {exc}")
            return MpaPolygon(mpa_id="zone", name="scenario zone",
                              designation="", polygon=poly)
        raise _fail(400, "scenario zone must be a GeoJSON Polygon or "
                         "an {'mpa_id': ...} reference")

    def _run_sel_job(job: SelJob, extent: Extent, start: datetime,
                     end: datetime, scenario: dict | None) -> None:
        job.status = "running"
        try:
            spec = extent.spec(config.cell_deg)
            gap = config.exposure.gap_threshold_s
            pad = timedelta(seconds=gap)
            reports = store.query(start - pad, end + pad,
                                  bbox=_expand_bbox(extent,
                                                    config.ray.max_range_m))
            reports = status_filter(reports)
            segments = segments_in_window(
                segmentize(reports, gap_threshold_s=gap), start, end)
            phases = 2 if scenario else 1

            def track(done: float, phase: int) -> None:
                job.progress = (phase + done) / phases

            baseline = sel_grids(
                segments, env, config.ray, spec, start, end,
                model=config.exposure.model, data=data,
                workers=config.service.sel_workers,
                progress=lambda f: track(f, 0))
            scenario_window = None
            if scenario:
                zone = _parse_zone(scenario["zone"])
                capped = apply_speed_cap(
                    segments, float(scenario["cap_kn"]), zone,
                    buffer_km=float(scenario.get(
                        "buffer_km", config.exposure.cap_buffer_km)))
                scenario_window = sel_grids(
                    capped, env, config.ray, spec, start, end,
                    model=config.exposure.model, data=data,
                    workers=config.service.sel_workers,
                    progress=lambda f: track(f, 1))
            job.result = SelResult(
                spec=spec, baseline=baseline, scenario=scenario_window,
                mpa_means=_mpa_means(spec, extent, baseline, scenario_window))
            job.progress = 1.0
            job.status = "done"
        except Exception as exc:
            logger.exception("exposure job %s failed", job.job_id)
            job.error = str(exc)
            job.status = "error"

    def _mpa_means(spec: GridSpec, extent: Extent, baseline: ExposureWindow,
                   scenario: ExposureWindow | None) -> list[dict]:
        def means(window: ExposureWindow, mpa: MpaPolygon) -> dict | None:
            out = {}
            for band in BAND_ORDER:
                try:
                    value = region_energetic_mean(window.sel_db(band), spec,
                                                  mpa)
                except EmptyRegionError:
                    return None
                out[band.value] = _json_level(value)
            return out

        rows = []
        for mpa in env.mpas:
            if not extent.overlaps(mpa.polygon.bbox):
                continue
            base = means(baseline, mpa)
            if base is None:
                continue
            row = {"mpa_id": mpa.mpa_id, "name": mpa.name, "baseline": base}
            if scenario is not None:
                row["scenario"] = means(scenario, mpa)
            rows.append(row)
        return rows

    @app.post("/api/sel")
    async def submit_sel(request: Request):
        try:
            payload = await request.json()
        except Exception:
            raise _fail(400, "request body must be JSON")
        if not isinstance(payload, dict):
            raise _fail(400, "request body must be a JSON object")
        if "extent" in payload:
            ext = payload["extent"]
            if not isinstance(ext, dict):
                raise _fail(400, "extent must be an object with min_lat, "
                                 "min_lon, max_lat, max_lon")
            extent = _parse_extent(*(
                None if ext.get(k) is None else str(ext.get(k))
                for k in ("min_lat", "min_lon", "max_lat", "max_lon")))
        elif "region" in payload:
            region_def = regions.get(str(payload["region"]))
            if region_def is None:
                raise _fail(404, f"unknown region {payload['region']!r}")
            extent = Extent(*region_def.bbox)
        else:
            raise _fail(400, "request needs an 'extent' or a 'region'")
        try:
            start = parse_timestamp(str(payload.get("start", "")))
            end = parse_timestamp(str(payload.get("end", "")))
        except SchemaError as exc:
            raise _fail(400, f"bad window: {exc}")
        if not end > start:
            raise _fail(400, "window must satisfy start < end")

        scenario = payload.get("scenario")
        if scenario is not None:
            if not isinstance(scenario, dict) or "cap_kn" not in scenario \
                    or "zone" not in scenario:
                raise _fail(400, "scenario needs cap_kn and zone")
            try:
                cap = float(scenario["cap_kn"])
            except (TypeError, ValueError):
                raise _fail(400, "scenario cap_kn must be a number")
            if not cap > 0.0:
                raise _fail(400, "scenario cap_kn must be positive")
            _parse_zone(scenario["zone"])   # validate before queueing

        tier_name, tier = _tier_for(request.headers.get("x-api-key"))
        days = (end - start).total_seconds() / 86400.0
        if days > tier.max_sel_days:
            raise _fail(403, f"window of {days:g} days exceeds the "
                             f"{tier_name} tier limit of "
                             f"{tier.max_sel_days} day(s)")
        if extent.area_deg2 > tier.max_sel_area_deg2:
            raise _fail(403, f"extent of {extent.area_deg2:g} square degrees "
                             f"exceeds the {tier_name} tier limit of "
                             f"{tier.max_sel_area_deg2:g}")

        key = _job_key(extent, start, end, scenario, config.result_hash())
        params = {
            "extent": extent.as_dict(),
            "start": format_timestamp(start),
            "end": format_timestamp(end),
            "scenario": scenario,
        }
        job, created = jobs.lookup_or_create(
            key, params, format_timestamp(datetime.now(timezone.utc)))
        if created:
            executor.submit(_run_sel_job, job, extent, start, end, scenario)
            return JSONResponse(status_code=202, content={
                "job_id": job.job_id, "status": job.status})
        if job.status in ("queued", "running"):
            return JSONResponse(status_code=409, content={
                "job_id": job.job_id, "status": job.status,
                "detail": "an identical job is already in progress"})
        return {"job_id": job.job_id, "status": job.status}

    def _window_payload(spec: GridSpec, window: ExposureWindow) -> dict:
        return {band.value: grid_payload(spec, window.sel_db(band))
                for band in BAND_ORDER}

    @app.get("/api/sel/{job_id}")
    def sel_status(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise _fail(404, f"unknown job {job_id!r}")
        body = {
            "job_id": job.job_id,
            "status": job.status,
            "progress": round(job.progress, 4),
            "submitted_at": job.submitted_at,
            "params": job.params,
        }
        if job.error is not None:
            body["error"] = job.error
        if job.result is not None:
            diag = job.result.baseline.diagnostics
            body["result"] = {
                "baseline": _window_payload(job.result.spec,
                                            job.result.baseline),
                "scenario": (_window_payload(job.result.spec,
                                             job.result.scenario)
                             if job.result.scenario is not None else None),
                "mpa_means": job.result.mpa_means,
                "diagnostics": {
                    "segments": diag.total,
                    "used": diag.used,
                    "not_radiating": diag.not_radiating,
                    "unsupported": diag.unsupported,
                    "no_water": diag.no_water,
                    "sl_errors": diag.sl_errors,
                },
            }
        return body

    @app.get("/api/sel/{job_id}/export")
    def sel_export(job_id: str, variant: str = "baseline"):
        job = jobs.get(job_id)
        if job is None:
            raise _fail(404, f"unknown job {job_id!r}")
        if variant not in ("baseline", "scenario"):
            raise _fail(400, f"unknown variant {variant!r}; expected "
                             "baseline or scenario")
        if job.status != "done" or job.result is None:
            raise _fail(409, f"job {job_id} is not finished "
                             f"(status {job.status})")
        window = (job.result.baseline if variant == "baseline"
                  else job.result.scenario)
        if window is None:
            raise _fail(404, f"job {job_id} has no scenario variant")
        grids = {band: window.sel_db(band) for band in BAND_ORDER}
        text = grid_csv(job.result.spec, grids, "sel")
        return PlainTextResponse(text, media_type="text/csv", headers={
            "Content-Disposition":
                f'attachment; filename="sel_{job_id}_{variant}.csv"'})

    # -- static geography ---------------------------------------------------

    @app.get("/api/mpa")
    def mpa_features(min_lat: str | None = None, min_lon: str | None = None,
                     max_lat: str | None = None, max_lon: str | None = None):
        extent = None
        if any(v is not None for v in (min_lat, min_lon, max_lat, max_lon)):
            extent = _parse_extent(min_lat, min_lon, max_lat, max_lon)
        features = []
        for mpa in env.mpas:
            if extent is not None and not extent.overlaps(mpa.polygon.bbox):
                continue
            features.append({
                "type": "Feature",
                "properties": {"id": mpa.mpa_id, "name": mpa.name,
                               "designation": mpa.designation},
                "geometry": polygon_to_geojson(mpa.polygon),
            })
        return {"type": "FeatureCollection", "features": features}

    @app.get("/api/regions")
    def region_features():
        features = []
        for name in sorted(regions):
            region_def = regions[name]
            features.append({
                "type": "Feature",
                "properties": {"name": name},
                "geometry": polygon_to_geojson(region_def.polygon),
            })
        return {"type": "FeatureCollection", "features": features}

    return app
