"""Bathymetry rasters, sound speed profiles, seasons, absorption."""

import math

import numpy as np
import pytest

from conftest import utc, write_flat_asc
from oracles import formulas
from vesselnoise.environment import (
    LAND,
    BathymetryGrid,
    EnvironmentField,
    Land,
    load_bathymetry,
    load_ssp,
    mackenzie_speed,
    season_for,
    thorp_alpha,
)
from vesselnoise.errors import ConfigError, OutOfDomainError, SchemaError


def test_mackenzie_speed_spot_value():
    assert mackenzie_speed(10.0, 35.0, 100.0) == pytest.approx(
        formulas.mackenzie_sound_speed(10.0, 35.0, 100.0), abs=1e-9)
    # Warmer water is faster at moderate temperatures.
    assert mackenzie_speed(15.0, 35.0, 0.0) > mackenzie_speed(5.0, 35.0, 0.0)


def test_thorp_alpha_spot_values():
    for f_khz in (0.02, 0.063, 0.125, 0.2, 1.0, 10.0):
        assert thorp_alpha(f_khz) == pytest.approx(
            formulas.thorp_absorption(f_khz), abs=1e-12)


def test_season_for():
    assert season_for(utc(2025, 1, 15)) == "winter"
    assert season_for(utc(2025, 12, 1)) == "winter"
    assert season_for(utc(2025, 4, 1)) == "spring"
    assert season_for(utc(2025, 8, 6)) == "summer"
    assert season_for(utc(2025, 10, 20)) == "autumn"


def test_load_ssp(tmp_path):
    path = tmp_path / "ssp.csv"
    path.write_text(
        "# seasonal profiles\n"
        "season,depth_m,temp_c,sal_ppt\n"
        "summer,0,18.0,34.5\n"
        "summer,50,12.0,35.0\n"
        "winter,0,8.0,35.0\n"
        "winter,50,8.5,35.0\n")
    profiles = load_ssp(path)
    assert set(profiles) == {"summer", "winter"}
    summer = profiles["summer"]
    assert summer.speed_ms[0] == pytest.approx(
        formulas.mackenzie_sound_speed(18.0, 34.5, 0.0), abs=1e-9)
    # Interpolation between samples, clamped at the ends.
    mid = summer.speed_at(25.0)
    assert min(summer.speed_ms) <= mid <= max(summer.speed_ms)
    assert summer.speed_at(500.0) == summer.speed_ms[-1]


def test_load_ssp_rejects_wrong_header(tmp_path):
    path = tmp_path / "ssp.csv"
    path.write_text("season,depth,temp,salt\nsummer,0,18,34\n")
    with pytest.raises(SchemaError):
        load_ssp(path)


def test_load_ssp_missing_file():
    with pytest.raises(ConfigError):
        load_ssp("/nonexistent/ssp.csv")


def test_from_arrays_depth_convention_masks_land():
    grid = BathymetryGrid.from_arrays(
        [50.0, 50.1], [4.0, 4.1], [[30.0, -5.0], [0.0, 12.0]])
    assert grid.depths[0, 0] == 30.0
    assert math.isnan(grid.depths[0, 1])    # negative depth = land
    assert math.isnan(grid.depths[1, 0])    # zero depth = land
    assert grid.depths[1, 1] == 12.0


def test_from_arrays_elevation_convention():
    grid = BathymetryGrid.from_arrays(
        [50.0, 50.1], [4.0, 4.1], [[-30.0, 5.0], [-12.0, -8.0]],
        convention="elevation")
    assert grid.depths[0, 0] == 30.0
    assert math.isnan(grid.depths[0, 1])    # above sea level
    with pytest.raises(ConfigError):
        BathymetryGrid.from_arrays([50.0, 50.1], [4.0, 4.1],
                                   [[1.0, 1.0], [1.0, 1.0]],
                                   convention="altitude")


def test_bathymetry_shape_validation():
    with pytest.raises(SchemaError):
        BathymetryGrid.from_arrays([50.0, 50.1], [4.0, 4.1], [[1.0, 2.0]])
    with pytest.raises(SchemaError):
        BathymetryGrid.from_arrays([50.1, 50.0], [4.0, 4.1],
                                   [[1.0, 2.0], [3.0, 4.0]])


def test_asc_round_trip(tmp_path):
    path = write_flat_asc(tmp_path / "flat.asc", depth_m=60.0, n=5,
                          ll_lon=4.0, ll_lat=50.0, cell=0.1)
    grid = BathymetryGrid.from_asc(path)
    assert grid.depths.shape == (5, 5)
    assert np.all(grid.depths == 60.0)
    assert grid.lat_centers[0] == pytest.approx(50.05)
    assert grid.lon_centers[-1] == pytest.approx(4.45)
    assert grid.extent == pytest.approx((50.0, 4.0, 50.5, 4.5))


def test_asc_rows_run_north_to_south(tmp_path):
    path = tmp_path / "slope.asc"
    path.write_text(
        "ncols 2\nnrows 2\nxllcorner 4.0\nyllcorner 50.0\ncellsize 1.0\n"
        "nodata_value -9999\n"
        "10 20\n"        # northern row in the file
        "30 -9999\n")    # southern row
    grid = BathymetryGrid.from_asc(path)
    assert grid.depths[1, 0] == 10.0     # north ends up at the higher index
    assert grid.depths[0, 0] == 30.0
    assert math.isnan(grid.depths[0, 1])  # nodata


def test_asc_header_validation(tmp_path):
    path = tmp_path / "broken.asc"
    path.write_text("ncols 2\nnrows 2\n1 2\n3 4\n")
    with pytest.raises(SchemaError):
        BathymetryGrid.from_asc(path)


def test_sample_bilinear_and_land():
    grid = BathymetryGrid.from_arrays(
        [50.0, 50.1], [4.0, 4.1],
        [[10.0, 20.0], [30.0, 40.0]])
    # Dead center of the four cells: plain average.
    mid = grid.sample_many(np.array([50.05]), np.array([4.05]))[0]
    assert mid == pytest.approx(25.0)
    # On a center: exact value.
    assert grid.sample_many(np.array([50.0]), np.array([4.0]))[0] == 10.0
    # Outside the extent: NaN.
    assert math.isnan(grid.sample_many(np.array([55.0]), np.array([4.0]))[0])


def test_sample_nearest_valid_fallback():
    grid = BathymetryGrid.from_arrays(
        [50.0, 50.1], [4.0, 4.1],
        [[10.0, -1.0], [30.0, 40.0]])     # one land corner
    # Query close to the land corner still reads as land via nearest cell.
    near_land = grid.depth_at_detail(50.01, 4.09)
    assert near_land.depth is LAND
    # Query nearer a water corner interpolates using valid neighbors only.
    sample = grid.depth_at_detail(50.04, 4.04)
    assert isinstance(sample.depth, float)
    assert sample.fallback
    assert math.isfinite(sample.depth)


def test_depth_at_land_singleton_and_domain():
    grid = BathymetryGrid.from_arrays(
        [50.0, 50.1], [4.0, 4.1], [[-1.0, 10.0], [10.0, 10.0]])
    assert grid.depth_at(50.0, 4.0) is LAND
    assert isinstance(grid.depth_at(50.0, 4.0), Land)
    with pytest.raises(OutOfDomainError):
        grid.depth_at_detail(10.0, 10.0)


def test_geotiff_loader(tmp_path):
    from PIL import Image, TiffImagePlugin

    values = np.array([[-50.0, -60.0, 5.0],
                       [-70.0, -80.0, -90.0]], dtype=np.float32)
    info = TiffImagePlugin.ImageFileDirectory_v2()
    info.tagtype[33550] = 12    # ModelPixelScale, DOUBLE
    info.tagtype[33922] = 12    # ModelTiepoint, DOUBLE
    info[33550] = (0.1, 0.1, 0.0)
    info[33922] = (0.0, 0.0, 0.0, 4.0, 51.0, 0.0)
    path = tmp_path / "bathy.tif"
    Image.fromarray(values).save(path, tiffinfo=info)

    grid = load_bathymetry(path)                 # elevation by default
    assert grid.depths.shape == (2, 3)
    # File row 0 is the northern edge; ascending latitude flips it up.
    assert grid.depths[1, 0] == 50.0
    assert grid.depths[0, 0] == 70.0
    assert math.isnan(grid.depths[1, 2])          # +5 m is dry land
    assert grid.lat_centers[1] == pytest.approx(50.95)
    assert grid.lon_centers[0] == pytest.approx(4.05)


def test_load_bathymetry_dispatch(tmp_path):
    with pytest.raises(ConfigError):
        load_bathymetry(tmp_path / "grid.xyz")


def test_environment_field_load(tmp_path):
    bathy = write_flat_asc(tmp_path / "b.asc", n=4)
    ssp = tmp_path / "ssp.csv"
    ssp.write_text("season,depth_m,temp_c,sal_ppt\nsummer,0,18,34.5\n"
                   "summer,40,11,35\n")
    env = EnvironmentField.load(bathy, ssp_path=ssp)
    assert env.profile_for(utc(2025, 8, 6)) is not None
    assert env.profile_for(utc(2025, 1, 6)) is None
    assert env.mpas == ()
