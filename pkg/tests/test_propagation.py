"""Ray fan geometry, tracing against analytic paths, footprint energies.

The footprint check rebuilds the whole chain independently: analytic
flat-bottom polylines per ray, 3D nearest approach per cell with the same
first-wins minimum rule, beam taper, and spreading/absorption/bounce loss,
then compares accumulated cell energies at tight relative tolerance.
"""

import math

import numpy as np
import pytest

from conftest import flat_environment
from oracles import formulas
from oracles.geometry import flat_bottom_vertices, sloped_bottom_bounce_ranges
from vesselnoise.bands import IndicatorBand
from vesselnoise.environment import BathymetryGrid, EnvironmentField
from vesselnoise.errors import DomainError
from vesselnoise.geo import METERS_PER_DEGREE_LAT, LocalProjection
from vesselnoise.propagation import (
    GridSpec,
    NoiseGrid,
    RayFanConfig,
    Source,
    accumulate,
    beam_weight,
    footprint_energy,
    grid_to_spl,
    source_depth,
    source_footprint,
    trace_fan,
    transmission_loss,
)

CFG = RayFanConfig()


def single_ray_cfg(elevation_deg: float, **overrides) -> RayFanConfig:
    return RayFanConfig(azimuth_step_deg=360.0,
                        elevation_min_deg=elevation_deg,
                        elevation_max_deg=elevation_deg, **overrides)


# --- fan shape ---------------------------------------------------------------

def test_fan_has_468_rays():
    assert len(CFG.azimuths_deg) == 36
    assert len(CFG.elevations_deg) == 13
    assert CFG.n_rays == 468
    assert CFG.elevations_deg[0] == -30.0
    assert CFG.elevations_deg[-1] == 30.0


def test_gaussian_taper_constants():
    dtheta = math.radians(5.0)
    assert CFG.gauss_a == pytest.approx(-math.log(0.1) / dtheta ** 2)
    assert CFG.amplitude_norm == pytest.approx(1.0 / math.sqrt(4.0 * math.pi))


def test_beam_weight_drops_to_beta_at_one_step():
    w0 = beam_weight(0.0, 0.0, CFG)
    w1 = beam_weight(math.radians(5.0), 0.0, CFG)
    assert w0 == pytest.approx(CFG.amplitude_norm)
    assert w1 == pytest.approx(CFG.amplitude_norm * CFG.beam_shape_beta,
                               rel=1e-12)
    # Launch elevation tilts the whole taper by cos(theta).
    w_tilted = beam_weight(0.0, math.radians(30.0), CFG)
    assert w_tilted == pytest.approx(CFG.amplitude_norm
                                     * math.cos(math.radians(30.0)))


def test_transmission_loss_terms():
    tl = transmission_loss(np.array([1000.0]), 125.0,
                           np.array([2]), np.array([1]), CFG)[0]
    want = (20.0 * math.log10(1000.0)
            + formulas.thorp_absorption(0.125) * 1.0
            + 2.0 * CFG.surface_loss_db + 1.0 * CFG.bottom_loss_db)
    assert tl == pytest.approx(want, abs=1e-9)
    # Path lengths under a meter clamp to the 1 m reference everywhere.
    assert transmission_loss(np.array([0.01]), 63.0, np.array([0]),
                             np.array([0]), CFG)[0] == pytest.approx(
        formulas.thorp_absorption(0.063) * 1.0 / 1000.0, abs=1e-12)


# --- grid spec ---------------------------------------------------------------

def test_grid_spec_layout():
    spec = GridSpec(lat_min=50.0, lon_min=4.0, lat_max=51.0, lon_max=4.5,
                    cell_deg=0.01)
    assert spec.n_rows == 100
    assert spec.n_cols == 50
    assert spec.lat_centers[0] == pytest.approx(50.005)
    assert spec.lat_centers[-1] == pytest.approx(50.995)
    assert spec.lon_centers[0] == pytest.approx(4.005)
    with pytest.raises(DomainError):
        GridSpec(lat_min=51.0, lon_min=4.0, lat_max=50.0, lon_max=4.5)
    with pytest.raises(DomainError):
        GridSpec(lat_min=50.0, lon_min=4.0, lat_max=51.0, lon_max=4.5,
                 cell_deg=0.0)


def test_source_depth_rules():
    assert source_depth(9.0, 60.0, CFG) == 9.0
    assert source_depth(None, 60.0, CFG) == CFG.source_depth_min_m
    assert source_depth(1.0, 60.0, CFG) == CFG.source_depth_min_m
    # Keel deeper than the water column: pinned below the surface but in water.
    assert source_depth(12.0, 10.0, CFG) == 9.0
    assert source_depth(12.0, 3.0, CFG) == 2.0
    assert source_depth(12.0, 2.0, CFG) == 1.0


# --- tracing against analytic paths -----------------------------------------

def path_ranges_depths(path, sx, sy):
    v = path.vertices
    r = np.hypot(v[:, 0] - sx, v[:, 1] - sy)
    return r, v[:, 2]


def test_trace_level_ray_runs_to_max_range():
    env = flat_environment()
    proj = LocalProjection(anchor_lat=50.5, anchor_lon=4.5)
    cfg = single_ray_cfg(0.0, max_range_m=5000.0)
    path, = trace_fan(50.5, 4.5, 9.0, env, cfg, proj)
    r, z = path_ranges_depths(path, *proj.to_xy(50.5, 4.5))
    assert len(path.vertices) == 2
    assert r[-1] == pytest.approx(5000.0, abs=1e-6)
    assert z[0] == z[-1] == 9.0
    assert path.cum_len[-1] == pytest.approx(5000.0, abs=1e-9)
    assert path.n_surf[-1] == 0 and path.n_bot[-1] == 0


def test_trace_45_degree_ray_hits_bottom_at_expected_range():
    env = flat_environment(depth_m=100.0)
    proj = LocalProjection(anchor_lat=50.5, anchor_lon=4.5)
    cfg = single_ray_cfg(-45.0, max_range_m=2000.0, max_bounces=4)
    path, = trace_fan(50.5, 4.5, 50.0, env, cfg, proj)
    r, z = path_ranges_depths(path, *proj.to_xy(50.5, 4.5))
    assert r[1] == pytest.approx(50.0, abs=1e-6)
    assert z[1] == pytest.approx(100.0, abs=1e-6)
    assert path.cum_len[1] == pytest.approx(50.0 * math.sqrt(2.0), abs=1e-6)
    assert path.n_bot[1] == 1 and path.n_surf[1] == 0
    # Second bounce at the surface, a full 100 m of depth later.
    assert r[2] == pytest.approx(150.0, abs=1e-6)
    assert z[2] == pytest.approx(0.0, abs=1e-9)
    assert path.n_surf[2] == 1


def test_trace_full_fan_matches_flat_bottom_analytics():
    env = flat_environment()
    proj = LocalProjection(anchor_lat=50.5, anchor_lon=4.5)
    cfg = RayFanConfig(max_range_m=5000.0)
    sx, sy = proj.to_xy(50.5, 4.5)
    paths = trace_fan(50.5, 4.5, 9.0, env, cfg, proj)
    assert len(paths) == 468
    elevations = cfg.elevations_deg
    for r_idx, path in enumerate(paths):
        theta = elevations[r_idx % len(elevations)]
        assert path.theta_rad == pytest.approx(math.radians(theta))
        want = flat_bottom_vertices(9.0, 60.0, theta, cfg.max_range_m,
                                    cfg.max_bounces)
        r, z = path_ranges_depths(path, float(sx), float(sy))
        assert len(r) == len(want), (r_idx, theta)
        for k, (wr, wz, wc) in enumerate(want):
            assert r[k] == pytest.approx(wr, abs=1e-5), (r_idx, k)
            assert z[k] == pytest.approx(wz, abs=1e-5), (r_idx, k)
            assert path.cum_len[k] == pytest.approx(wc, abs=1e-5), (r_idx, k)


def test_trace_counts_bounces_and_kills_at_limit():
    env = flat_environment()
    proj = LocalProjection(anchor_lat=50.5, anchor_lon=4.5)
    cfg = single_ray_cfg(-30.0, max_range_m=50_000.0, max_bounces=3)
    path, = trace_fan(50.5, 4.5, 9.0, env, cfg, proj)
    # Launch vertex plus exactly three bounce vertices, no endpoint beyond.
    assert len(path.vertices) == 4
    assert path.n_surf[-1] + path.n_bot[-1] == 3
    assert path.n_bot[1] == 1          # downward launch hits bottom first
    assert path.n_surf[2] == 1
    assert path.cum_len[-1] < cfg.max_range_m


def test_trace_stops_at_bathymetry_edge():
    env = flat_environment(n=20)     # 0.2 degree pocket of water
    proj = LocalProjection(anchor_lat=50.0, anchor_lon=4.0)
    cfg = single_ray_cfg(0.0, max_range_m=100_000.0)
    path, = trace_fan(50.0, 4.0, 9.0, env, cfg, proj)   # heading north
    # Dies at the northern extent edge, far short of max range; the beach
    # vertex sits at most one march step past the last wet sample.
    assert path.cum_len[-1] < 15_000.0
    _, _, max_lat, _ = env.bathymetry.extent
    lat_end = float(path.vertices[-1, 1]) / METERS_PER_DEGREE_LAT + 50.0
    assert lat_end <= max_lat + cfg.march_step_m / METERS_PER_DEGREE_LAT


def test_trace_rejects_land_source():
    env = flat_environment(n=20)
    proj = LocalProjection(anchor_lat=50.0, anchor_lon=4.0)
    with pytest.raises(DomainError):
        trace_fan(70.0, 4.0, 9.0, env, RayFanConfig(), proj)


def test_trace_sloped_bottom_bounce_ranges():
    # Depth shrinks northward: 100 m at the source, -5 m per km of y.
    slope = -0.005
    n, cell = 240, 0.005
    lat0, lon0 = 50.0, 4.0
    lat_c = lat0 + cell * (np.arange(n) + 0.5)
    lon_c = lon0 + cell * (np.arange(n) + 0.5)
    src_lat, src_lon = 50.3, 4.6
    y_m = (lat_c - src_lat) * METERS_PER_DEGREE_LAT
    depths = np.repeat((100.0 + slope * y_m)[:, None], n, axis=1)
    env = EnvironmentField(
        bathymetry=BathymetryGrid.from_arrays(lat_c, lon_c, depths))
    proj = LocalProjection(anchor_lat=src_lat, anchor_lon=src_lon)

    cfg = single_ray_cfg(-10.0, max_range_m=10_000.0, max_bounces=6)
    path, = trace_fan(src_lat, src_lon, 20.0, env, cfg, proj)   # north, down
    hit_ranges = [float(path.vertices[k, 1])
                  for k in range(1, len(path.vertices))
                  if path.n_bot[k] > path.n_bot[k - 1]]

    want = sloped_bottom_bounce_ranges(20.0, 100.0, slope, -10.0,
                                       cfg.max_range_m, cfg.max_bounces,
                                       step=0.02)
    assert len(hit_ranges) == len(want) >= 3
    for got, expect in zip(hit_ranges, want):
        assert got == pytest.approx(expect, abs=0.1)
    # Upslope geometry: successive bottom hits crowd together.
    spacing = np.diff(hit_ranges)
    assert np.all(np.diff(spacing) < 0.0)


# --- footprint energy against the independent rebuild ------------------------

def brute_force_energy(lat, lon, depth_m, bottom_m, cfg, spec, sl_db, band):
    """Reference cell energies: analytic rays, per-(ray, cell) min-rho."""
    proj = spec.projection
    sxa, sya = proj.to_xy(lat, lon)
    sx, sy = float(sxa), float(sya)
    cell_x = (spec.lon_centers - proj.anchor_lon) * proj.meters_per_degree_lon
    cell_y = (spec.lat_centers - proj.anchor_lat) * METERS_PER_DEGREE_LAT
    cx = np.tile(cell_x, spec.n_rows)
    cy = np.repeat(cell_y, spec.n_cols)
    cz = np.full(cx.shape, cfg.receiver_depth_m)
    n_cells = len(cx)
    energy = np.zeros(n_cells)
    f_khz = band.absorption_frequency_hz / 1000.0
    alpha = formulas.thorp_absorption(f_khz)

    for phi_deg in cfg.azimuths_deg:
        phi = math.radians(phi_deg)
        dirx, diry = math.sin(phi), math.cos(phi)
        for theta_deg in cfg.elevations_deg:
            verts = flat_bottom_vertices(depth_m, bottom_m, theta_deg,
                                         cfg.max_range_m, cfg.max_bounces)
            ns, nb = [0], [0]
            for _, z, _ in verts[1:]:
                s, b = ns[-1], nb[-1]
                if z == 0.0:
                    s += 1
                elif z == bottom_m:
                    b += 1
                ns.append(s)
                nb.append(b)

            best_rho = np.full(n_cells, np.inf)
            best_rp = np.zeros(n_cells)
            best_ns = np.zeros(n_cells)
            best_nb = np.zeros(n_cells)
            for k in range(len(verts) - 1):
                r0, z0, c0 = verts[k]
                r1, z1, c1 = verts[k + 1]
                a = np.array([sx + r0 * dirx, sy + r0 * diry, z0])
                b = np.array([sx + r1 * dirx, sy + r1 * diry, z1])
                ab = b - a
                l2 = float(ab @ ab)
                wx, wy, wz = cx - a[0], cy - a[1], cz - a[2]
                if l2 > 0.0:
                    t = np.clip((wx * ab[0] + wy * ab[1] + wz * ab[2]) / l2,
                                0.0, 1.0)
                else:
                    t = np.zeros(n_cells)
                ex = wx - t * ab[0]
                ey = wy - t * ab[1]
                ez = wz - t * ab[2]
                rho = np.sqrt(ex * ex + ey * ey + ez * ez)
                closer = rho < best_rho
                best_rp = np.where(closer, c0 + t * math.sqrt(l2), best_rp)
                best_ns = np.where(closer, ns[k], best_ns)
                best_nb = np.where(closer, nb[k], best_nb)
                best_rho = np.where(closer, rho, best_rho)

            hit = best_rho <= cfg.neighborhood_m
            if not hit.any():
                continue
            psi = np.arctan2(best_rho[hit], best_rp[hit])
            w = (cfg.amplitude_norm * math.cos(math.radians(theta_deg))
                 * np.exp(-cfg.gauss_a * psi * psi))
            rp = np.maximum(best_rp[hit], 1.0)
            tl = (20.0 * np.log10(rp) + alpha * rp / 1000.0
                  + best_ns[hit] * cfg.surface_loss_db
                  + best_nb[hit] * cfg.bottom_loss_db)
            energy[np.nonzero(hit)[0]] += w * w * 10.0 ** ((sl_db - tl) / 10.0)
    return energy


@pytest.mark.parametrize("band", [IndicatorBand.TOB_63,
                                  IndicatorBand.BROADBAND])
def test_footprint_energy_matches_brute_force(env_flat60, band):
    spec = GridSpec(lat_min=50.45, lon_min=4.45, lat_max=50.50, lon_max=4.50,
                    cell_deg=0.01)
    cfg = RayFanConfig(max_range_m=20_000.0)
    lat, lon, depth = 50.473, 4.468, 7.3
    sl_db = 170.0

    fp = source_footprint(lat, lon, depth, env_flat60, cfg, spec)
    got = np.zeros(spec.n_rows * spec.n_cols)
    footprint_energy(fp, sl_db, band, cfg, got)

    want = brute_force_energy(lat, lon, depth, 60.0, cfg, spec, sl_db, band)
    assert got.shape == want.shape
    np.testing.assert_allclose(got, want, rtol=1e-9)
    assert np.count_nonzero(got) == spec.n_rows * spec.n_cols


def test_footprint_is_one_entry_per_ray_cell(env_flat60):
    spec = GridSpec(lat_min=50.48, lon_min=4.48, lat_max=50.50, lon_max=4.50,
                    cell_deg=0.01)
    cfg = single_ray_cfg(-30.0, max_range_m=10_000.0)
    fp = source_footprint(50.49, 4.49, 7.3, env_flat60, cfg, spec)
    # One ray: any repeated cell index would be a duplicated contribution.
    assert len(np.unique(fp.cell_idx)) == len(fp.cell_idx)


def test_identical_sources_add_3dB(env_flat60):
    spec = GridSpec(lat_min=50.45, lon_min=4.45, lat_max=50.50, lon_max=4.50,
                    cell_deg=0.01)
    cfg = RayFanConfig(max_range_m=20_000.0)
    src = Source(lat=50.473, lon=4.468, sl_db=170.0, draft_m=9.0)
    grid = NoiseGrid(spec=spec, band=IndicatorBand.TOB_63)
    one, skipped = accumulate([src], env_flat60, cfg, grid)
    two, _ = accumulate([src, src], env_flat60, cfg, grid)
    assert skipped == 0
    spl_one = grid_to_spl(one)
    spl_two = grid_to_spl(two)
    delta = spl_two - spl_one
    assert np.all(np.isfinite(delta))
    np.testing.assert_allclose(delta, 10.0 * math.log10(2.0), atol=1e-9)
    # The input grid is never mutated.
    assert not grid.energy.any()


def test_accumulate_skips_dry_sources(env_flat60):
    spec = GridSpec(lat_min=50.45, lon_min=4.45, lat_max=50.50, lon_max=4.50,
                    cell_deg=0.01)
    src_dry = Source(lat=10.0, lon=4.0, sl_db=170.0)      # off the raster
    src_wet = Source(lat=50.47, lon=4.47, sl_db=170.0)
    grid = NoiseGrid(spec=spec, band=IndicatorBand.TOB_63)
    out, skipped = accumulate([src_dry, src_wet], env_flat60,
                              RayFanConfig(), grid)
    assert skipped == 1
    assert out.energy.any()


def test_grid_to_spl_nan_for_silent_cells():
    spec = GridSpec(lat_min=0.0, lon_min=0.0, lat_max=0.02, lon_max=0.02,
                    cell_deg=0.01)
    grid = NoiseGrid(spec=spec, band=IndicatorBand.TOB_63)
    grid.energy[0, 0] = 100.0
    spl = grid_to_spl(grid)
    assert spl[0, 0] == pytest.approx(20.0)
    assert np.isnan(spl[1, 1])
