"""Canonical grid CSV and JSON payload serialization."""

import math

import numpy as np
import pytest

from vesselnoise.bands import IndicatorBand
from vesselnoise.errors import SchemaError
from vesselnoise.gridio import (BAND_ORDER, grid_csv, grid_payload,
                                parse_grid_csv)
from vesselnoise.propagation import GridSpec

SPEC = GridSpec(lat_min=50.0, lon_min=4.0, lat_max=50.04, lon_max=4.04,
                cell_deg=0.02)


def grids(fill=np.nan):
    return {band: np.full((SPEC.n_rows, SPEC.n_cols), fill)
            for band in BAND_ORDER}


def test_grid_csv_layout_and_formatting():
    g = grids()
    g[IndicatorBand.TOB_63][0, 1] = 101.2345678
    g[IndicatorBand.TOB_125][0, 1] = 99.0
    g[IndicatorBand.BROADBAND][0, 1] = 110.5
    g[IndicatorBand.BROADBAND][1, 0] = 120.0
    text = grid_csv(SPEC, g, "spl")
    lines = text.splitlines()
    assert lines[0] == "spl_lat,lon,spl_63_db,spl_125_db,spl_bb_db".replace(
        "spl_lat", "lat")
    # South-to-north rows, west-to-east columns; all-absent cells skipped.
    assert lines[1] == "50.010000,4.030000,101.234568,99.000000,110.500000"
    assert lines[2] == "50.030000,4.010000,,,120.000000"
    assert len(lines) == 3
    assert text.endswith("\n") and "\r" not in text


def test_grid_csv_round_trip_and_reexport_bytes():
    g = grids()
    rng = np.random.default_rng(3)
    for band in BAND_ORDER:
        mask = rng.random((SPEC.n_rows, SPEC.n_cols)) < 0.7
        g[band][mask] = np.round(100.0 + 30.0 * rng.random(mask.sum()), 6)
    text = grid_csv(SPEC, g, "sel")
    rows = parse_grid_csv(text, "sel")
    rebuilt = grids()
    lat_c, lon_c = SPEC.lat_centers, SPEC.lon_centers
    for lat, lon, levels in rows:
        i = int(np.argmin(np.abs(lat_c - lat)))
        j = int(np.argmin(np.abs(lon_c - lon)))
        for band, value in levels.items():
            rebuilt[band][i, j] = value
    assert grid_csv(SPEC, rebuilt, "sel") == text


def test_grid_csv_omits_fully_empty_grid():
    text = grid_csv(SPEC, grids(), "spl")
    assert text == "lat,lon,spl_63_db,spl_125_db,spl_bb_db\n"


def test_parse_grid_csv_validates_header():
    with pytest.raises(SchemaError, match="spl_63_db"):
        parse_grid_csv("lat,lon\n", "spl")
    with pytest.raises(SchemaError):
        parse_grid_csv("", "spl")
    # A prefix mismatch is a missing column, not silent zero rows.
    ok = grid_csv(SPEC, grids(130.0), "sel")
    with pytest.raises(SchemaError):
        parse_grid_csv(ok, "spl")


def test_grid_payload_shape_and_nulls():
    values = np.full((SPEC.n_rows, SPEC.n_cols), np.nan)
    values[1, 1] = 103.25
    payload = grid_payload(SPEC, values)
    assert payload["extent"] == {"min_lat": 50.0, "min_lon": 4.0,
                                 "max_lat": 50.04, "max_lon": 4.04}
    assert payload["resolution_deg"] == 0.02
    assert (payload["n_rows"], payload["n_cols"]) == (2, 2)
    assert payload["values"][0] == [None, None]
    assert payload["values"][1] == [None, 103.25]
    assert all(v is None or isinstance(v, float)
               for row in payload["values"] for v in row)
    assert not any(math.isinf(v) for row in payload["values"]
                   for v in row if v is not None)
