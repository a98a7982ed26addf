"""Shared fixtures: flat-sea environments, geometry files, record factory."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pytest

from vesselnoise.environment import BathymetryGrid, EnvironmentField
from vesselnoise.records import VesselRecord


def utc(*args) -> datetime:
    return datetime(*args, tzinfo=timezone.utc)


def make_record(**overrides) -> VesselRecord:
    base = dict(
        mmsi=211000001,
        timestamp=utc(2025, 8, 6, 12, 0, 0),
        lat=50.5,
        lon=4.5,
        sog_kn=14.0,
        ais_type=70,
        length_m=160.0,
        beam_m=25.0,
        draft_m=9.0,
    )
    base.update(overrides)
    return VesselRecord(**base)


def flat_environment(depth_m: float = 60.0, lat0: float = 49.9,
                     lon0: float = 3.9, n: int = 120,
                     cell: float = 0.01) -> EnvironmentField:
    """Uniform-depth sea over an n x n raster starting at (lat0, lon0)."""
    lat_c = lat0 + cell * (np.arange(n) + 0.5)
    lon_c = lon0 + cell * (np.arange(n) + 0.5)
    grid = BathymetryGrid.from_arrays(lat_c, lon_c, np.full((n, n), depth_m))
    return EnvironmentField(bathymetry=grid)


@pytest.fixture
def record_factory():
    return make_record


@pytest.fixture(scope="session")
def env_flat60() -> EnvironmentField:
    return flat_environment()


REGION_GEOJSON = {
    "type": "FeatureCollection",
    "features": [{
        "type": "Feature",
        "properties": {"name": "testsea"},
        "geometry": {
            "type": "Polygon",
            "coordinates": [[[4.0, 50.0], [5.0, 50.0], [5.0, 51.0],
                             [4.0, 51.0], [4.0, 50.0]]],
        },
    }],
}

MPA_GEOJSON = {
    "type": "FeatureCollection",
    "features": [{
        "type": "Feature",
        "properties": {"id": "m1", "name": "Reef", "designation": "SAC"},
        "geometry": {
            "type": "Polygon",
            "coordinates": [[[4.28, 50.43], [4.40, 50.43], [4.40, 50.55],
                             [4.28, 50.55], [4.28, 50.43]]],
        },
    }],
}

ZONE_GEOJSON = {
    "type": "Feature",
    "properties": {"name": "quietzone"},
    "geometry": {
        "type": "Polygon",
        "coordinates": [[[4.43, 50.455], [4.57, 50.455], [4.57, 50.545],
                         [4.43, 50.545], [4.43, 50.455]]],
    },
}


def write_flat_asc(path: Path, depth_m: float = 60.0, n: int = 120,
                   ll_lon: float = 3.9, ll_lat: float = 49.9,
                   cell: float = 0.01) -> Path:
    row = " ".join([f"{depth_m:g}"] * n)
    text = (f"ncols {n}\nnrows {n}\nxllcorner {ll_lon}\nyllcorner {ll_lat}\n"
            f"cellsize {cell}\nnodata_value -9999\n"
            + "\n".join([row] * n) + "\n")
    path.write_text(text)
    return path


CONFIG_TEMPLATE = """\
files:
  bathymetry: {bathy}
  regions: {regions}
  mpas: {mpas}
  store: {store}
grid:
  cell_deg: 0.02
exposure:
  model: randi
service:
  sel_workers: 2
  api_keys:
    k-reg: registered
"""


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory) -> Path:
    """Session fixture tree: bathymetry, regions, MPAs, zone, config."""
    root = tmp_path_factory.mktemp("data")
    write_flat_asc(root / "bathy.asc")
    (root / "regions.geojson").write_text(json.dumps(REGION_GEOJSON))
    (root / "mpa.geojson").write_text(json.dumps(MPA_GEOJSON))
    (root / "zone.geojson").write_text(json.dumps(ZONE_GEOJSON))
    (root / "config.yaml").write_text(CONFIG_TEMPLATE.format(
        bathy=root / "bathy.asc", regions=root / "regions.geojson",
        mpas=root / "mpa.geojson", store=root / "reports.sqlite"))
    return root
