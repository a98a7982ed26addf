"""Batch front door: offline maps, exposure runs, validation, model tables.

Every command is deterministic for fixed inputs and writes complete files
only: output text is built in memory and moved into place atomically, so a
failing run never leaves a truncated CSV behind. Exit codes separate the
failure classes: 2 for schema problems, 3 for domain problems, 4 for
configuration problems.
"""

from __future__ import annotations

import contextlib
import functools
import json
import math
import os
import tempfile
from datetime import datetime
from pathlib import Path

import click
import numpy as np

from .ais import import_csv, status_filter
from .bands import IndicatorBand
from .config import AppConfig
from .errors import (
    ConfigError,
    OutOfDomainError,
    SchemaError,
    VesselNoiseError,
)
from .exposure import (
    apply_speed_cap,
    region_energetic_mean,
    segmentize,
    segments_in_window,
    sel_grids,
)
from .geo import MpaPolygon, polygon_from_geojson
from .gridio import BAND_ORDER, grid_csv, parse_grid_csv
from .mapping import compute_levels, spl_map
from .propagation import GridSpec
from .records import VesselCategory, VesselRecord, parse_timestamp
from .sl import SlModelId

_MODEL_ROWS = (SlModelId.RANDI, SlModelId.JE, SlModelId.LBDS, SlModelId.AQUO,
               SlModelId.SRV, SlModelId.COMBINED)

# Representative AIS type per category name accepted by `sl --type`.
_CATEGORY_TYPES = {
    "cargo": 70, "tanker": 80, "passenger": 60,
    "fishing": 30, "pleasure": 37, "sailing": 36, "other": 90,
}


def _exit_code(exc: VesselNoiseError) -> int:
    if isinstance(exc, ConfigError):
        return 4
    if isinstance(exc, SchemaError):
        return 2
    return 3


def guarded(fn):
    """Translate package errors into the documented exit codes."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except VesselNoiseError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(_exit_code(exc))
    return wrapper


def _atomic_write(path: str, text: str) -> None:
    """Write the whole file or nothing: temp file plus rename."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=str(target.parent or Path(".")),
                               prefix=target.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _parse_extent_opt(_ctx, _param, value) -> tuple[float, float, float, float]:
    try:
        parts = [float(p) for p in value.split(",")]
    except ValueError:
        raise click.BadParameter("expected min_lat,min_lon,max_lat,max_lon")
    if len(parts) != 4:
        raise click.BadParameter("expected four comma-separated numbers")
    min_lat, min_lon, max_lat, max_lon = parts
    if not (min_lat < max_lat and min_lon < max_lon):
        raise click.BadParameter("extent must satisfy min < max on both axes")
    return min_lat, min_lon, max_lat, max_lon


def _parse_statuses_opt(_ctx, _param, value) -> frozenset[int]:
    try:
        return frozenset(int(p) for p in value.split(",") if p.strip())
    except ValueError:
        raise click.BadParameter("expected comma-separated integers")


def _model_opt(_ctx, _param, value):
    if value is None:
        return None
    try:
        return SlModelId.parse(value)
    except VesselNoiseError as exc:
        raise click.BadParameter(str(exc))


def _band_opt(_ctx, _param, value) -> IndicatorBand:
    try:
        return IndicatorBand.parse(value)
    except VesselNoiseError as exc:
        raise click.BadParameter(str(exc))


def _timestamp_opt(_ctx, _param, value) -> datetime:
    try:
        return parse_timestamp(value)
    except VesselNoiseError as exc:
        raise click.BadParameter(str(exc))


def _load_config(config_path: str | None) -> AppConfig:
    if config_path is None:
        raise ConfigError("this command needs --config")
    return AppConfig.from_yaml(config_path)


def _read_records(ais_path: str) -> list[VesselRecord]:
    with open(ais_path, newline="") as fh:
        result = import_csv(fh)
    for line_no, reason in result.skipped:
        click.echo(f"skipped line {line_no}: {reason}", err=True)
    return result.records


def _load_zone(path: str) -> MpaPolygon:
    """A cap/means zone from a GeoJSON file: geometry, Feature, or the
    first feature of a FeatureCollection."""
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot parse zone file {path}: {exc}")
    if payload.get("type") == "FeatureCollection":
        features = payload.get("features") or []
        if not features:
            raise SchemaError(f"{path}: FeatureCollection has no features")
        payload = features[0]
    if payload.get("type") == "Feature":
        name = (payload.get("properties") or {}).get("name", Path(path).stem)
        geometry = payload.get("geometry") or {}
    else:
        name = Path(path).stem
        geometry = payload
    return MpaPolygon(mpa_id="zone", name=str(name), designation="",
                      polygon=polygon_from_geojson(geometry))


def _category_counts(records: list[VesselRecord]) -> str:
    counts = {cat: 0 for cat in VesselCategory}
    for rec in records:
        counts[rec.category] += 1
    parts = [f"{cat.value} {n}" for cat, n in counts.items() if n]
    return ", ".join(parts) if parts else "none"


def _fmt(value: float | None) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.2f}"


@click.group()
@click.option("--config", "config_path", default=None,
              type=click.Path(dir_okay=False),
              help="YAML configuration file; required by map, sel and serve.")
@click.pass_context
def main(ctx, config_path):
    """Vessel underwater-radiated-noise maps from AIS data."""
    ctx.obj = config_path


# ---------------------------------------------------------------------------
# map

@main.command("map")
@click.option("--ais", "ais_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="AIS report CSV.")
@click.option("--extent", required=True, callback=_parse_extent_opt,
              help="Grid extent as min_lat,min_lon,max_lat,max_lon.")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Output SPL grid CSV.")
@click.option("--band", default="broadband", callback=_band_opt,
              show_default=True, help="Band highlighted in the summary.")
@click.option("--model", default=None, callback=_model_opt,
              help="SL model (default from config).")
@click.option("--statuses", default="0,1", callback=_parse_statuses_opt,
              show_default=True, help="Navigational statuses to keep.")
@click.pass_obj
@guarded
def cmd_map(config_path, ais_path, extent, out_path, band, model, statuses):
    """Instantaneous SPL map from the latest report per vessel."""
    config = _load_config(config_path)
    env = config.load_environment()
    data = config.model_data()
    model = model or config.exposure.model

    records = status_filter(_read_records(ais_path), statuses)
    min_lat, min_lon, max_lat, max_lon = extent
    records = [r for r in records
               if min_lat <= r.lat <= max_lat and min_lon <= r.lon <= max_lon]
    latest: dict[int, VesselRecord] = {}
    for rec in sorted(records, key=lambda r: (r.timestamp, r.mmsi)):
        latest[rec.mmsi] = rec
    snapshot = [latest[m] for m in sorted(latest)]

    vessels = [compute_levels(r, model, data) for r in snapshot]
    spec = GridSpec(lat_min=min_lat, lon_min=min_lon, lat_max=max_lat,
                    lon_max=max_lon, cell_deg=config.cell_deg)
    grids, diag = spl_map(vessels, env, config.ray, spec)
    _atomic_write(out_path, grid_csv(spec, grids, "spl"))

    for v in vessels:
        if not v.supported:
            click.echo(f"skipped mmsi {v.record.mmsi}: not supported by "
                       f"{model.value}")
    click.echo(f"vessels: {len(snapshot)} ({_category_counts(snapshot)})")
    click.echo(f"gridded: {diag.gridded}, not radiating: "
               f"{diag.not_radiating}, unsupported: {diag.unsupported}, "
               f"no water: {diag.no_water}")
    cells = int(np.count_nonzero(~np.isnan(grids[band])))
    peak = float(np.nanmax(grids[band])) if cells else float("nan")
    click.echo(f"cells with signal: {cells} of {spec.n_rows * spec.n_cols}; "
               f"peak spl_{band.column_suffix} "
               + (f"{peak:.2f} dB" if cells else "n/a"))
    click.echo(f"wrote {out_path}")


# ---------------------------------------------------------------------------
# sel

@main.command("sel")
@click.option("--ais", "ais_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="AIS report CSV covering the window.")
@click.option("--extent", required=True, callback=_parse_extent_opt,
              help="Grid extent as min_lat,min_lon,max_lat,max_lon.")
@click.option("--start", required=True, callback=_timestamp_opt,
              help="Window start (ISO-8601, UTC).")
@click.option("--end", required=True, callback=_timestamp_opt,
              help="Window end (ISO-8601, UTC).")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Baseline SEL grid CSV.")
@click.option("--cap", "cap_kn", type=float, default=None,
              help="Scenario speed cap in knots (needs --zone).")
@click.option("--zone", "zone_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="GeoJSON polygon: cap zone and energetic-mean region.")
@click.option("--buffer", "buffer_km", type=float, default=None,
              help="Cap buffer distance around the zone in km "
                   "(default from config).")
@click.option("--scenario-out", "scenario_path", type=click.Path(),
              default=None, help="Scenario SEL grid CSV (needs --cap).")
@click.option("--model", default=None, callback=_model_opt,
              help="SL model (default from config).")
@click.option("--statuses", default="0,1", callback=_parse_statuses_opt,
              show_default=True, help="Navigational statuses to keep.")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Worker threads; the result does not depend on this.")
@click.pass_obj
@guarded
def cmd_sel(config_path, ais_path, extent, start, end, out_path, cap_kn,
            zone_path, buffer_km, scenario_path, model, statuses, workers):
    """Cumulative SEL over a time window, optionally with a speed-cap
    scenario and per-band energetic means over a zone."""
    config = _load_config(config_path)
    env = config.load_environment()
    data = config.model_data()
    model = model or config.exposure.model
    if not end > start:
        raise SchemaError("window must satisfy start < end")
    if cap_kn is not None and zone_path is None:
        raise SchemaError("--cap needs --zone")
    if scenario_path is not None and cap_kn is None:
        raise SchemaError("--scenario-out needs --cap")

    zone = _load_zone(zone_path) if zone_path else None
    records = status_filter(_read_records(ais_path), statuses)
    segments = segments_in_window(
        segmentize(records, gap_threshold_s=config.exposure.gap_threshold_s),
        start, end)
    min_lat, min_lon, max_lat, max_lon = extent
    spec = GridSpec(lat_min=min_lat, lon_min=min_lon, lat_max=max_lat,
                    lon_max=max_lon, cell_deg=config.cell_deg)

    baseline = sel_grids(segments, env, config.ray, spec, start, end,
                         model=model, data=data, workers=workers)
    scenario = None
    if cap_kn is not None:
        buffer = buffer_km if buffer_km is not None \
            else config.exposure.cap_buffer_km
        capped = apply_speed_cap(segments, cap_kn, zone, buffer_km=buffer)
        scenario = sel_grids(capped, env, config.ray, spec, start, end,
                             model=model, data=data, workers=workers)

    _atomic_write(out_path,
                  grid_csv(spec, {b: baseline.sel_db(b) for b in BAND_ORDER},
                           "sel"))
    if scenario is not None and scenario_path is not None:
        _atomic_write(scenario_path,
                      grid_csv(spec,
                               {b: scenario.sel_db(b) for b in BAND_ORDER},
                               "sel"))

    diag = baseline.diagnostics
    click.echo(f"segments: {diag.total}, used: {diag.used}, not radiating: "
               f"{diag.not_radiating}, unsupported: {diag.unsupported}, "
               f"no water: {diag.no_water}, sl errors: {diag.sl_errors}")
    if zone is not None:
        click.echo(f"energetic mean SEL over {zone.name} "
                   "[dB re 1 uPa^2 s]:")
        header = "band        baseline"
        if scenario is not None:
            header += "    scenario       delta"
        click.echo(header)
        for band in BAND_ORDER:
            base = region_energetic_mean(baseline.sel_db(band), spec, zone)
            line = f"{band.value:<12}{_fmt(base):>8}"
            if scenario is not None:
                scen = region_energetic_mean(scenario.sel_db(band), spec,
                                             zone)
                delta = (scen - base
                         if not (math.isnan(scen) or math.isnan(base))
                         else float("nan"))
                line += f"{_fmt(scen):>12}{_fmt(delta):>12}"
            click.echo(line)
    click.echo(f"wrote {out_path}")
    if scenario is not None and scenario_path is not None:
        click.echo(f"wrote {scenario_path}")


# ---------------------------------------------------------------------------
# validate

_MEASUREMENT_COLUMNS = ("date", "lat", "lon", "sel_63_db", "sel_125_db",
                        "sel_bb_db")


def _read_measurements(path: str) -> dict[str, dict]:
    import csv as csv_mod
    with open(path, newline="") as fh:
        reader = csv_mod.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: no header row")
        for col in _MEASUREMENT_COLUMNS:
            if col not in reader.fieldnames:
                raise SchemaError(f"{path}: missing column {col!r}")
        out = {}
        for row in reader:
            out[row["date"]] = {
                "lat": float(row["lat"]),
                "lon": float(row["lon"]),
                IndicatorBand.TOB_63: float(row["sel_63_db"]),
                IndicatorBand.TOB_125: float(row["sel_125_db"]),
                IndicatorBand.BROADBAND: float(row["sel_bb_db"]),
            }
    return out


def _cell_estimate(rows, lat: float, lon: float) -> dict:
    """The SEL row whose cell contains the point; grid CSVs only carry
    cells that received energy, so the nearest row must still be within
    a cell of the point."""
    lats = sorted({r[0] for r in rows})
    lons = sorted({r[1] for r in rows})

    def step(values) -> float:
        diffs = [b - a for a, b in zip(values, values[1:]) if b - a > 1e-12]
        return min(diffs) if diffs else math.inf

    best = min(rows, key=lambda r: (r[0] - lat) ** 2 + (r[1] - lon) ** 2)
    tol_lat = 0.75 * step(lats)
    tol_lon = 0.75 * step(lons)
    if abs(best[0] - lat) > tol_lat or abs(best[1] - lon) > tol_lon:
        raise OutOfDomainError(
            f"measurement point ({lat}, {lon}) is not covered by the grid")
    return best[2]


@main.command("validate")
@click.option("--sel", "sel_specs", multiple=True, required=True,
              metavar="DATE=PATH",
              help="Modeled SEL grid CSV for one date; repeatable.")
@click.option("--measurements", "measurements_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Measured SEL per date and recorder position.")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Write the difference table here instead of stdout.")
@guarded
def cmd_validate(sel_specs, measurements_path, out_path):
    """Modeled-minus-measured SEL differences at the recorder position."""
    measurements = _read_measurements(measurements_path)
    lines = ["date,quantity,sel_63_db,sel_125_db,sel_bb_db"]
    for spec_arg in sel_specs:
        date, sep, path = spec_arg.partition("=")
        if not sep or not date or not path:
            raise SchemaError(f"--sel expects DATE=PATH, got {spec_arg!r}")
        if date not in measurements:
            raise SchemaError(f"no measurement row for date {date}")
        meas = measurements[date]
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise SchemaError(f"cannot read SEL grid {path}: {exc}")
        rows = parse_grid_csv(text, "sel")
        if not rows:
            raise OutOfDomainError(f"{path}: grid has no cells with energy")
        modeled = _cell_estimate(rows, meas["lat"], meas["lon"])
        measured = {b: meas[b] for b in BAND_ORDER}
        lines.append(f"{date},measured,"
                     + ",".join(_fmt(measured[b]) for b in BAND_ORDER))
        lines.append(f"{date},modeled,"
                     + ",".join(_fmt(modeled[b]) for b in BAND_ORDER))
        diffs = []
        for b in BAND_ORDER:
            value = modeled[b] - measured[b]
            diffs.append(_fmt(value if not math.isnan(modeled[b]) else None))
        lines.append(f"{date},difference," + ",".join(diffs))
    table = "\n".join(lines) + "\n"
    if out_path is not None:
        _atomic_write(out_path, table)
        click.echo(f"wrote {out_path}")
    else:
        click.echo(table, nl=False)


# ---------------------------------------------------------------------------
# sl

@main.command("sl")
@click.option("--type", "ais_type", required=True,
              help="AIS type code or category name (cargo, tanker, ...).")
@click.option("--speed", "sog_kn", type=float, required=True,
              help="Speed over ground in knots.")
@click.option("--length", "length_m", type=float, default=None)
@click.option("--beam", "beam_m", type=float, default=None)
@click.option("--draft", "draft_m", type=float, default=None)
@click.option("--je-class", "je_class", type=int, default=None,
              help="Explicit JOMOPANS-ECHO class index.")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Write the table here instead of stdout.")
@guarded
def cmd_sl(ais_type, sog_kn, length_m, beam_m, draft_m, je_class, out_path):
    """Per-model indicator-band source levels for one vessel."""
    try:
        type_code = int(ais_type)
    except ValueError:
        key = ais_type.strip().lower()
        if key not in _CATEGORY_TYPES:
            raise SchemaError(f"unknown vessel type {ais_type!r}")
        type_code = _CATEGORY_TYPES[key]
    record = VesselRecord(
        mmsi=0, timestamp=parse_timestamp("2000-01-01T00:00:00Z"),
        lat=0.0, lon=0.0, sog_kn=sog_kn, ais_type=type_code,
        length_m=length_m, beam_m=beam_m, draft_m=draft_m, je_class=je_class)

    lines = ["model,sl_63_db,sl_125_db,sl_bb_db"]
    for model in _MODEL_ROWS:
        v = compute_levels(record, model)
        cells = [("Unsupported" if v.levels[b] is None else _fmt(v.levels[b]))
                 for b in BAND_ORDER]
        lines.append(",".join([model.value] + cells))
    table = "\n".join(lines) + "\n"
    if out_path is not None:
        _atomic_write(out_path, table)
        click.echo(f"wrote {out_path}")
    else:
        click.echo(table, nl=False)


# ---------------------------------------------------------------------------
# serve

@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--poll/--no-poll", default=True, show_default=True,
              help="Poll the configured AIS feed while serving.")
@click.pass_obj
@guarded
def serve(config_path, host, port, poll):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    config = _load_config(config_path)
    app = create_app(config, start_poller=poll)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
