"""Track segmentation, SEL accumulation, speed caps, region statistics."""

import logging
import math
from datetime import timedelta

import numpy as np
import pytest

from conftest import ZONE_GEOJSON, utc
from vesselnoise.bands import IndicatorBand
from vesselnoise.errors import (DomainError, EmptyRegionError,
                                OutOfDomainError)
from vesselnoise.exposure import (BATCH_SIZE, ExposureWindow, TrackSegment,
                                  apply_speed_cap, region_energetic_mean,
                                  segmentize, segments_in_window, sel_grids,
                                  validate_against_measurement)
from vesselnoise.geo import MpaPolygon, polygon_from_geojson
from vesselnoise.propagation import (GridSpec, RayFanConfig, footprint_energy,
                                     source_depth, source_footprint)
from vesselnoise.sl import SlModelId, indicator_levels

ZONE = MpaPolygon(mpa_id="z", name="quietzone", designation="",
                  polygon=polygon_from_geojson(ZONE_GEOJSON["geometry"]))

SPEC = GridSpec(lat_min=50.40, lon_min=4.40, lat_max=50.50, lon_max=4.50,
                cell_deg=0.02)
CFG = RayFanConfig(max_range_m=15_000.0)
BANDS = tuple(IndicatorBand)


def segment_at(record_factory, lat=50.45, lon=4.45, sog_kn=14.0,
               duration_s=900.0, **overrides):
    rec = record_factory(lat=lat, lon=lon, sog_kn=sog_kn, **overrides)
    return TrackSegment(mmsi=rec.mmsi, lat=lat, lon=lon,
                        duration_s=duration_s, vessel=rec)


# --- segmentation ------------------------------------------------------------

def test_segmentize_pairs_reports_at_midpoint(record_factory):
    a = record_factory(timestamp=utc(2025, 8, 6, 12, 0, 0), lat=50.40,
                       lon=4.40, sog_kn=12.0)
    b = record_factory(timestamp=utc(2025, 8, 6, 12, 10, 0), lat=50.44,
                       lon=4.48, sog_kn=16.0)
    seg, = segmentize([b, a])          # order must not matter
    assert seg.duration_s == 600.0
    assert seg.lat == pytest.approx(50.42)
    assert seg.lon == pytest.approx(4.44)
    assert seg.vessel.sog_kn == pytest.approx(14.0)
    assert seg.timestamp == utc(2025, 8, 6, 12, 5, 0)
    assert seg.mmsi == a.mmsi


def test_segmentize_respects_gap_threshold(record_factory):
    t0 = utc(2025, 8, 6, 12, 0, 0)
    a = record_factory(timestamp=t0)
    at_limit = record_factory(timestamp=t0 + timedelta(seconds=1800))
    beyond = record_factory(timestamp=t0 + timedelta(seconds=1800 + 1801))
    segs = segmentize([a, at_limit, beyond])
    assert len(segs) == 1
    assert segs[0].duration_s == 1800.0


def test_segmentize_groups_by_vessel(record_factory):
    t0 = utc(2025, 8, 6, 12, 0, 0)
    reports = []
    for mmsi in (211000001, 211000002):
        for k in range(3):
            reports.append(record_factory(
                mmsi=mmsi, timestamp=t0 + timedelta(minutes=10 * k)))
    segs = segmentize(reports)
    assert len(segs) == 4
    assert sorted(s.mmsi for s in segs) == [211000001, 211000001,
                                            211000002, 211000002]
    # No cross-vessel segment: last report of one, first of the next.
    assert all(s.duration_s == 600.0 for s in segs)


def test_segmentize_drops_duplicate_reports(record_factory, caplog):
    t0 = utc(2025, 8, 6, 12, 0, 0)
    a = record_factory(timestamp=t0, sog_kn=10.0)
    dup = record_factory(timestamp=t0, sog_kn=99.0 / 7.0)
    b = record_factory(timestamp=t0 + timedelta(minutes=5))
    with caplog.at_level(logging.WARNING, logger="vesselnoise.exposure"):
        segs = segmentize([a, dup, b])
    assert len(segs) == 1
    assert segs[0].duration_s == 300.0
    assert any("duplicate" in r.message for r in caplog.records)


def test_segment_requires_positive_duration(record_factory):
    rec = record_factory()
    with pytest.raises(DomainError):
        TrackSegment(mmsi=rec.mmsi, lat=50.0, lon=4.0, duration_s=0.0,
                     vessel=rec)


def test_windowing_partitions_segments(record_factory):
    t0 = utc(2025, 8, 6, 0, 0, 0)
    reports = [record_factory(timestamp=t0 + timedelta(hours=6 * k))
               for k in range(9)]      # spans into the third day
    segs = segmentize(reports, gap_threshold_s=6 * 3600.0)
    assert len(segs) == 8
    days = [segments_in_window(segs, t0 + timedelta(days=d),
                               t0 + timedelta(days=d + 1)) for d in range(3)]
    assert sum(len(d) for d in days) == len(segs)
    assert [len(d) for d in days] == [4, 4, 0]
    # Midpoint exactly on a boundary belongs to the later window only.
    edge = segmentize([record_factory(timestamp=t0 - timedelta(minutes=5)),
                       record_factory(timestamp=t0 + timedelta(minutes=5))])
    assert segments_in_window(edge, t0, t0 + timedelta(days=1)) == edge
    assert segments_in_window(edge, t0 - timedelta(days=1), t0) == []


# --- SEL accumulation --------------------------------------------------------

def test_sel_single_segment_is_scaled_footprint(env_flat60, record_factory):
    seg = segment_at(record_factory, duration_s=600.0)
    window = sel_grids([seg], env_flat60, CFG, SPEC,
                       utc(2025, 8, 6), utc(2025, 8, 7),
                       model=SlModelId.RANDI)
    levels = indicator_levels(seg.vessel, SlModelId.RANDI)
    water = 60.0
    depth = source_depth(seg.vessel.draft_m, water, CFG)
    fp = source_footprint(seg.lat, seg.lon, depth, env_flat60, CFG, SPEC)
    for band in BANDS:
        want = np.zeros(SPEC.n_rows * SPEC.n_cols)
        footprint_energy(fp, levels[band], band, CFG, want, scale=600.0)
        np.testing.assert_array_equal(
            window.energy[band].ravel(), want)
    assert window.diagnostics.used == 1
    # SEL is the dB form of the accumulated energy, NaN where nothing landed.
    sel = window.sel_db(IndicatorBand.TOB_63)
    e = window.energy[IndicatorBand.TOB_63]
    assert np.isnan(sel[e == 0.0]).all()
    filled = e > 0.0
    np.testing.assert_allclose(sel[filled], 10.0 * np.log10(e[filled]))


def test_sel_energy_scales_with_duration(env_flat60, record_factory):
    short = segment_at(record_factory, duration_s=450.0)
    long = segment_at(record_factory, duration_s=900.0)
    args = (env_flat60, CFG, SPEC, utc(2025, 8, 6), utc(2025, 8, 7))
    w_short = sel_grids([short], *args, model=SlModelId.RANDI)
    w_long = sel_grids([long], *args, model=SlModelId.RANDI)
    for band in BANDS:
        np.testing.assert_allclose(w_long.energy[band],
                                   2.0 * w_short.energy[band], rtol=1e-12)


def test_sel_worker_count_never_changes_bits(env_flat60, record_factory):
    t0 = utc(2025, 8, 6, 8, 0, 0)
    rng = np.random.default_rng(7)
    segments = []
    for k in range(2 * BATCH_SIZE + 3):
        segments.append(segment_at(
            record_factory,
            mmsi=211000001 + k % 5,
            lat=50.42 + 0.06 * float(rng.random()),
            lon=4.42 + 0.06 * float(rng.random()),
            sog_kn=10.0 + 8.0 * float(rng.random()),
            timestamp=t0 + timedelta(minutes=k),
            duration_s=600.0 + 60.0 * k,
        ))
    args = (env_flat60, CFG, SPEC, utc(2025, 8, 6), utc(2025, 8, 7))
    baseline = sel_grids(segments, *args, model=SlModelId.RANDI, workers=1)
    for workers in (2, 3):
        again = sel_grids(segments, *args, model=SlModelId.RANDI,
                          workers=workers)
        for band in BANDS:
            assert np.array_equal(baseline.energy[band], again.energy[band])
    assert baseline.diagnostics.used == len(segments)


def test_sel_progress_reports_batch_fractions(env_flat60, record_factory):
    segments = [segment_at(record_factory, duration_s=600.0)
                for _ in range(BATCH_SIZE + 1)]
    seen: list[float] = []
    sel_grids(segments, env_flat60, CFG, SPEC, utc(2025, 8, 6),
              utc(2025, 8, 7), model=SlModelId.RANDI, workers=2,
              progress=seen.append)
    assert seen == [0.5, 1.0]


def test_sel_diagnostics_account_for_every_segment(env_flat60,
                                                   record_factory):
    good = segment_at(record_factory, mmsi=211000001)
    drifting = segment_at(record_factory, mmsi=211000002, sog_kn=0.3)
    unsupported = segment_at(record_factory, mmsi=211000003, ais_type=90)
    ashore = segment_at(record_factory, mmsi=211000004,    # off the raster
                        lat=49.0, lon=3.0)
    bad_class = segment_at(record_factory, mmsi=211000005, je_class=99)
    window = sel_grids([good, drifting, unsupported, ashore, bad_class],
                       env_flat60, CFG, SPEC, utc(2025, 8, 6),
                       utc(2025, 8, 7), model=SlModelId.JE)
    d = window.diagnostics
    assert (d.total, d.used) == (5, 1)
    assert d.not_radiating == 1
    assert d.unsupported == 1
    assert d.no_water == 1
    assert d.sl_errors == 1


def test_sel_fills_missing_dimensions_per_segment(env_flat60,
                                                  record_factory):
    bare = segment_at(record_factory, length_m=None, beam_m=None,
                      draft_m=None)
    window = sel_grids([bare], env_flat60, CFG, SPEC, utc(2025, 8, 6),
                       utc(2025, 8, 7), model=SlModelId.LBDS)
    assert window.diagnostics.used == 1
    assert window.diagnostics.sl_errors == 0
    assert window.energy[IndicatorBand.TOB_125].any()


def test_weekly_equals_energetic_sum_of_dailies(env_flat60, record_factory):
    t0 = utc(2025, 8, 6, 0, 0, 0)
    reports = []
    for mmsi in (211000001, 211000002):
        for k in range(5):
            reports.append(record_factory(
                mmsi=mmsi,
                timestamp=t0 + timedelta(hours=11 + 13 * k),
                lat=50.42 + 0.01 * k, lon=4.41 + 0.015 * k,
                sog_kn=11.0 + mmsi % 7 + k))
    segs = segmentize(reports, gap_threshold_s=14 * 3600.0)
    assert len(segs) == 8
    total = sel_grids(segs, env_flat60, CFG, SPEC, t0,
                      t0 + timedelta(days=3), model=SlModelId.RANDI)
    summed = {band: np.zeros((SPEC.n_rows, SPEC.n_cols)) for band in BANDS}
    n_segments = 0
    for day in range(3):
        start = t0 + timedelta(days=day)
        daily = segments_in_window(segs, start, start + timedelta(days=1))
        n_segments += len(daily)
        w = sel_grids(daily, env_flat60, CFG, SPEC, start,
                      start + timedelta(days=1), model=SlModelId.RANDI)
        for band in BANDS:
            summed[band] += w.energy[band]
    assert n_segments == len(segs)
    for band in BANDS:
        np.testing.assert_allclose(summed[band], total.energy[band],
                                   rtol=1e-12)


# --- speed caps --------------------------------------------------------------

def test_speed_cap_applies_inside_zone_and_buffer(record_factory):
    inside = segment_at(record_factory, lat=50.50, lon=4.50, sog_kn=14.0)
    nearby = segment_at(record_factory, lat=50.60, lon=4.50, sog_kn=14.0)
    far = segment_at(record_factory, lat=50.90, lon=4.95, sog_kn=14.0)
    slow = segment_at(record_factory, lat=50.50, lon=4.50, sog_kn=9.0)
    capped = apply_speed_cap([inside, nearby, far, slow], 11.0, ZONE,
                             buffer_km=10.0)
    assert [s.vessel.sog_kn for s in capped] == [11.0, 11.0, 14.0, 9.0]
    assert [s.duration_s for s in capped] == [900.0] * 4
    # Inputs are untouched; capped segments are fresh objects.
    assert inside.vessel.sog_kn == 14.0
    assert capped[2] is far


def test_speed_cap_zero_buffer_is_polygon_only(record_factory):
    inside = segment_at(record_factory, lat=50.50, lon=4.50, sog_kn=14.0)
    outside = segment_at(record_factory, lat=50.58, lon=4.50, sog_kn=14.0)
    capped = apply_speed_cap([inside, outside], 11.0, ZONE, buffer_km=0.0)
    assert capped[0].vessel.sog_kn == 11.0
    assert capped[1].vessel.sog_kn == 14.0


def test_speed_cap_validation(record_factory):
    seg = segment_at(record_factory)
    with pytest.raises(DomainError):
        apply_speed_cap([seg], 0.0, ZONE)
    with pytest.raises(DomainError):
        apply_speed_cap([seg], 11.0, ZONE, buffer_km=-1.0)


def test_speed_cap_lowers_sel_by_the_speed_term(env_flat60, record_factory):
    seg = segment_at(record_factory, lat=50.49, lon=4.49, sog_kn=14.0)
    capped = apply_speed_cap([seg], 11.0, ZONE)
    args = (env_flat60, CFG, SPEC, utc(2025, 8, 6), utc(2025, 8, 7))
    base = sel_grids([seg], *args, model=SlModelId.RANDI)
    quiet = sel_grids(capped, *args, model=SlModelId.RANDI)
    drop = base.sel_db(IndicatorBand.TOB_63) - quiet.sel_db(
        IndicatorBand.TOB_63)
    finite = np.isfinite(drop)
    assert finite.any()
    np.testing.assert_allclose(drop[finite],
                               60.0 * math.log10(14.0 / 11.0), atol=1e-9)


# --- region statistics and validation ----------------------------------------

def region_square(min_lat, min_lon, max_lat, max_lon):
    ring = [[min_lon, min_lat], [max_lon, min_lat], [max_lon, max_lat],
            [min_lon, max_lat], [min_lon, min_lat]]
    return MpaPolygon(mpa_id="r", name="r", designation="",
                      polygon=polygon_from_geojson(
                          {"type": "Polygon", "coordinates": [ring]}))


def test_region_energetic_mean_counts_silent_cells_as_zero():
    spec = GridSpec(lat_min=0.0, lon_min=0.0, lat_max=0.04, lon_max=0.02,
                    cell_deg=0.02)
    sel = np.full((2, 1), np.nan)
    sel[0, 0] = 100.0
    sel[1, 0] = 100.0 + 10.0 * math.log10(2.0)
    both = region_square(0.0, 0.0, 0.04, 0.02)
    got = region_energetic_mean(sel, spec, both)
    assert got == pytest.approx(10.0 * math.log10(1.5e10), abs=1e-9)

    sel[1, 0] = np.nan
    diluted = region_energetic_mean(sel, spec, both)
    assert diluted == pytest.approx(100.0 - 10.0 * math.log10(2.0), abs=1e-9)

    sel[0, 0] = np.nan
    assert math.isnan(region_energetic_mean(sel, spec, both))

    with pytest.raises(EmptyRegionError):
        region_energetic_mean(sel, spec, region_square(5.0, 5.0, 6.0, 6.0))


def test_validate_against_measurement_uses_nearest_cell():
    spec = GridSpec(lat_min=50.0, lon_min=4.0, lat_max=50.1, lon_max=4.1,
                    cell_deg=0.02)
    window = ExposureWindow(start=utc(2025, 8, 6), end=utc(2025, 8, 7),
                            spec=spec)
    window.energy = {band: np.zeros((spec.n_rows, spec.n_cols))
                     for band in BANDS}
    window.energy[IndicatorBand.TOB_63][2, 3] = 10.0 ** (152.68 / 10.0)
    window.energy[IndicatorBand.TOB_125][2, 3] = 10.0 ** (144.83 / 10.0)
    # (50.048, 4.071) is nearest to cell center (50.05, 4.07).
    diff = validate_against_measurement(
        window, 50.048, 4.071,
        {IndicatorBand.TOB_63: 152.62, IndicatorBand.TOB_125: 153.09})
    assert diff[IndicatorBand.TOB_63] == pytest.approx(0.06, abs=1e-9)
    assert diff[IndicatorBand.TOB_125] == pytest.approx(-8.26, abs=1e-9)
    with pytest.raises(OutOfDomainError):
        validate_against_measurement(window, 52.0, 4.05, {})


def test_exposure_window_rejects_empty_interval():
    spec = GridSpec(lat_min=0.0, lon_min=0.0, lat_max=0.02, lon_max=0.02)
    with pytest.raises(DomainError):
        ExposureWindow(start=utc(2025, 8, 7), end=utc(2025, 8, 7), spec=spec)
