"""Gaussian ray-fan transmission loss and incoherent grid accumulation.

Each source launches a fixed fan of rays (36 azimuths x 13 elevations = 468).
Rays advance as straight segments, reflecting specularly at the surface and
at the locally horizontal seabed, and terminate at a bounce or range limit,
on leaving the bathymetry extent, or on beaching. Every grid cell within a
fixed neighborhood of a ray receives energy through a Gaussian lateral taper
about the ray centerline:

    w(psi) = C cos(theta) exp(-a psi^2),  a = -ln(beta)/dtheta^2,  C = 1/sqrt(4 pi)

with psi = arctan(rho / r_p) built from the minimum cross-ray distance rho
over the whole path and the path length r_p at that nearest approach.
Received energy per cell is w^2 * 10^((SL - TL)/10) with

    TL = 20 log10(r_p) + alpha(f) r_p / 1000 + n_surf P_surf + n_bot P_bot

summed incoherently over rays and sources. The 20-2000 Hz broadband indicator
uses its geometric-mean frequency (200 Hz) for absorption.

Cells, sources, and rays live in one equirectangular projection anchored at
the grid center, so results are reproducible regardless of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bands import IndicatorBand
from .environment import EnvironmentField, thorp_alpha
from .errors import DomainError
from .geo import METERS_PER_DEGREE_LAT, LocalProjection

__all__ = [
    "RayFanConfig",
    "GridSpec",
    "NoiseGrid",
    "beam_weight",
    "transmission_loss",
    "trace_fan",
    "Footprint",
    "source_footprint",
    "Source",
    "accumulate",
    "grid_to_spl",
]


@dataclass(frozen=True)
class RayFanConfig:
    """Ray fan geometry, beam shape, boundary penalties, and limits."""

    azimuth_step_deg: float = 10.0
    elevation_step_deg: float = 5.0
    elevation_min_deg: float = -30.0
    elevation_max_deg: float = 30.0
    beam_shape_beta: float = 0.1
    neighborhood_m: float = 500.0
    surface_loss_db: float = 1.0
    bottom_loss_db: float = 3.0
    max_bounces: int = 10
    max_range_m: float = 100_000.0
    march_step_m: float = 100.0
    receiver_depth_m: float = 10.0
    source_depth_min_m: float = 2.0

    @property
    def azimuths_deg(self) -> np.ndarray:
        return np.arange(0.0, 360.0, self.azimuth_step_deg)

    @property
    def elevations_deg(self) -> np.ndarray:
        n = int(round((self.elevation_max_deg - self.elevation_min_deg)
                      / self.elevation_step_deg)) + 1
        return self.elevation_min_deg + self.elevation_step_deg * np.arange(n)

    @property
    def n_rays(self) -> int:
        return len(self.azimuths_deg) * len(self.elevations_deg)

    @property
    def gauss_a(self) -> float:
        dtheta = math.radians(self.elevation_step_deg)
        return -math.log(self.beam_shape_beta) / dtheta ** 2

    @property
    def amplitude_norm(self) -> float:
        return 1.0 / math.sqrt(4.0 * math.pi)


def beam_weight(psi_rad, theta_rad, cfg: RayFanConfig):
    """Amplitude taper w(psi) = C cos(theta) exp(-a psi^2)."""
    return (cfg.amplitude_norm * np.cos(theta_rad)
            * np.exp(-cfg.gauss_a * np.square(psi_rad)))


def transmission_loss(r_p, f_hz: float, n_surf, n_bot, cfg: RayFanConfig):
    """TL in dB at path length r_p (m); r_p below 1 m clamps to 1 m."""
    r = np.maximum(np.asarray(r_p, dtype=float), 1.0)
    return (20.0 * np.log10(r)
            + thorp_alpha(f_hz / 1000.0) * r / 1000.0
            + np.asarray(n_surf) * cfg.surface_loss_db
            + np.asarray(n_bot) * cfg.bottom_loss_db)


@dataclass(frozen=True)
class GridSpec:
    """Regular lat/lon analysis grid; cells are indexed by their centers."""

    lat_min: float
    lon_min: float
    lat_max: float
    lon_max: float
    cell_deg: float = 0.01

    def __post_init__(self) -> None:
        if not (self.lat_max > self.lat_min and self.lon_max > self.lon_min):
            raise DomainError("grid extent must have positive span")
        if not (self.cell_deg > 0.0):
            raise DomainError("cell size must be positive")

    @property
    def n_rows(self) -> int:
        return max(1, int(round((self.lat_max - self.lat_min) / self.cell_deg)))

    @property
    def n_cols(self) -> int:
        return max(1, int(round((self.lon_max - self.lon_min) / self.cell_deg)))

    @property
    def lat_centers(self) -> np.ndarray:
        return self.lat_min + self.cell_deg * (np.arange(self.n_rows) + 0.5)

    @property
    def lon_centers(self) -> np.ndarray:
        return self.lon_min + self.cell_deg * (np.arange(self.n_cols) + 0.5)

    @property
    def projection(self) -> LocalProjection:
        return LocalProjection(
            anchor_lat=(self.lat_min + self.lat_max) / 2.0,
            anchor_lon=(self.lon_min + self.lon_max) / 2.0,
        )


@dataclass
class NoiseGrid:
    """Accumulated mean-square pressure (uPa^2) per cell for one band."""

    spec: GridSpec
    band: IndicatorBand
    energy: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.energy is None:
            self.energy = np.zeros((self.spec.n_rows, self.spec.n_cols))
        if self.energy.shape != (self.spec.n_rows, self.spec.n_cols):
            raise DomainError("noise grid array shape does not match spec")

    def copy(self) -> "NoiseGrid":
        return NoiseGrid(spec=self.spec, band=self.band, energy=self.energy.copy())


@dataclass(frozen=True)
class _RayPolyline:
    """Trace output for one ray: vertices and bounce counts before each."""

    theta_rad: float
    vertices: np.ndarray      # (k, 3) x/y/z local meters
    cum_len: np.ndarray       # (k,) path length at each vertex
    n_surf: np.ndarray        # (k,) surface bounces before the vertex
    n_bot: np.ndarray         # (k,) bottom bounces before the vertex


def _corridor_exit(sx: float, sy: float, kx: np.ndarray, ky: np.ndarray,
                   clip_xy: tuple[float, float, float, float]) -> np.ndarray:
    """Horizontal distance at which each ray line leaves an axis box.

    Because azimuth never changes, a ray outside the box and past this
    distance can never re-enter it; 0 means the line misses it entirely.
    """
    x0, x1, y0, y1 = clip_xy
    with np.errstate(divide="ignore", invalid="ignore"):
        tx1 = (x0 - sx) / kx
        tx2 = (x1 - sx) / kx
        ty1 = (y0 - sy) / ky
        ty2 = (y1 - sy) / ky
    lo_x = np.nan_to_num(np.minimum(tx1, tx2), nan=-np.inf)
    hi_x = np.nan_to_num(np.maximum(tx1, tx2), nan=np.inf)
    lo_y = np.nan_to_num(np.minimum(ty1, ty2), nan=-np.inf)
    hi_y = np.nan_to_num(np.maximum(ty1, ty2), nan=np.inf)
    entry = np.maximum(lo_x, lo_y)
    leave = np.minimum(hi_x, hi_y)
    return np.where(leave > np.maximum(entry, 0.0), np.maximum(leave, 0.0), 0.0)


def trace_fan(lat: float, lon: float, source_depth_m: float,
              env: EnvironmentField, cfg: RayFanConfig,
              projection: LocalProjection,
              clip_xy: tuple[float, float, float, float] | None = None,
              ) -> list[_RayPolyline]:
    """March the whole ray fan in lockstep over the bathymetry.

    Returns one polyline per ray (azimuth-major order). The caller must have
    verified the source is on a water cell. `clip_xy` optionally bounds the
    useful area (x_min, x_max, y_min, y_max in local meters): rays are cut
    where their horizontal line has left it for good, which cannot change
    any receiver within the box.
    """
    az = np.radians(cfg.azimuths_deg)
    el = np.radians(cfg.elevations_deg)
    n_az, n_el = len(az), len(el)
    n = n_az * n_el
    # Azimuth-major: ray index r = i_az * n_el + i_el.
    kx = np.repeat(np.sin(az), n_el)
    ky = np.repeat(np.cos(az), n_el)
    theta0 = np.tile(el, n_az)
    cos_t = np.cos(np.abs(theta0))
    sin_t = np.sin(theta0).copy()   # sign flips on reflection

    start_depth = env.bathymetry.sample_many(np.array([lat]), np.array([lon]))[0]
    if np.isnan(start_depth):
        raise DomainError(
            f"ray source ({lat}, {lon}) is on land or outside the bathymetry")

    sx, sy = projection.to_xy(lat, lon)
    x = np.full(n, float(sx))
    y = np.full(n, float(sy))
    z = np.full(n, source_depth_m)
    cum = np.zeros(n)
    cum_cap = np.full(n, cfg.max_range_m)
    if clip_xy is not None:
        exit_h = _corridor_exit(float(sx), float(sy), kx, ky, clip_xy)
        cum_cap = np.minimum(cum_cap, exit_h / cos_t)
    n_surf = np.zeros(n, dtype=int)
    n_bot = np.zeros(n, dtype=int)
    alive = np.ones(n, dtype=bool)

    verts: list[list[tuple[float, float, float]]] = [[(x[r], y[r], z[r])] for r in range(n)]
    cums: list[list[float]] = [[0.0] for _ in range(n)]
    surfs: list[list[int]] = [[0] for _ in range(n)]
    bots: list[list[int]] = [[0] for _ in range(n)]

    def record(r: int) -> None:
        verts[r].append((float(x[r]), float(y[r]), float(z[r])))
        cums[r].append(float(cum[r]))
        surfs[r].append(int(n_surf[r]))
        bots[r].append(int(n_bot[r]))

    lat0, lon0 = projection.to_latlon(x, y)
    d_here = env.bathymetry.sample_many(lat0, lon0)
    step = cfg.march_step_m
    max_iter = int(math.ceil(cfg.max_range_m / step)) + 4 * cfg.max_bounces + 8

    for _ in range(max_iter):
        if not alive.any():
            break
        idx = np.nonzero(alive)[0]
        # Clip the final step to land exactly on the range limit.
        step_r = np.clip(cum_cap[idx] - cum[idx], 0.0, step)
        dxh = step_r * cos_t[idx]
        nx = x[idx] + dxh * kx[idx]
        ny = y[idx] + dxh * ky[idx]
        nz = z[idx] - step_r * sin_t[idx]
        nlat, nlon = projection.to_latlon(nx, ny)
        d_new = env.bathymetry.sample_many(nlat, nlon)

        # Unknown depth ahead (coast or extent edge): stop where the ray is.
        beached = np.isnan(d_new)

        # Candidate boundary crossings within this step.
        t_surf = np.full(len(idx), np.inf)
        going_up = (nz < 0.0) & ~beached
        t_surf[going_up] = z[idx][going_up] / (z[idx][going_up] - nz[going_up])

        f0 = d_here[idx] - z[idx]
        f1 = d_new - nz
        t_bot = np.full(len(idx), np.inf)
        crossed = (f1 < 0.0) & ~beached
        denom = f0 - f1
        with np.errstate(divide="ignore", invalid="ignore"):
            t_candidate = np.where(denom > 0.0, f0 / denom, 0.0)
        t_bot[crossed] = np.clip(t_candidate[crossed], 0.0, 1.0)

        t_event = np.minimum(t_surf, t_bot)
        has_event = t_event <= 1.0

        # Advance every ray to its event point or the full step.
        t_adv = np.where(has_event, t_event, 1.0)
        x[idx] = x[idx] + dxh * kx[idx] * t_adv
        y[idx] = y[idx] + dxh * ky[idx] * t_adv
        z[idx] = z[idx] - step_r * sin_t[idx] * t_adv
        cum[idx] = cum[idx] + step_r * t_adv

        surface_hit = has_event & (t_surf <= t_bot)
        bottom_hit = has_event & ~surface_hit
        # Pin the coordinate at the boundary against rounding drift.
        z[idx[surface_hit]] = 0.0

        for local_i in np.nonzero(has_event)[0]:
            r = int(idx[local_i])
            if surface_hit[local_i]:
                n_surf[r] += 1
            else:
                n_bot[r] += 1
            record(r)
            if n_surf[r] + n_bot[r] >= cfg.max_bounces:
                alive[r] = False
            else:
                sin_t[r] = -sin_t[r]

        done = ~has_event & (beached | (cum[idx] >= cum_cap[idx] - 1e-9))
        for local_i in np.nonzero(done)[0]:
            r = int(idx[local_i])
            record(r)
            alive[r] = False

        moved = ~has_event & ~done
        d_here[idx[moved]] = d_new[moved]
        changed = idx[has_event]
        if len(changed):
            clat, clon = projection.to_latlon(x[changed], y[changed])
            d_bounce = env.bathymetry.sample_many(clat, clon)
            d_here[changed] = d_bounce
            # A bounce point resolving to a land cell strands the ray there.
            alive[changed[np.isnan(d_bounce)]] = False

    for r in np.nonzero(alive)[0]:
        record(int(r))

    out = []
    for r in range(n):
        out.append(_RayPolyline(
            theta_rad=float(theta0[r]),
            vertices=np.array(verts[r]),
            cum_len=np.array(cums[r]),
            n_surf=np.array(surfs[r], dtype=int),
            n_bot=np.array(bots[r], dtype=int),
        ))
    return out


@dataclass(frozen=True)
class Footprint:
    """Per-(ray, cell) nearest-approach data for one source.

    Flat arrays aligned by entry: target cell index (row-major), squared
    beam weight, path length at nearest approach, bounce counts before it.
    """

    cell_idx: np.ndarray
    w2: np.ndarray
    r_p: np.ndarray
    n_surf: np.ndarray
    n_bot: np.ndarray


# Cap on bbox extent per distance query; long segments are chunked so the
# candidate window stays a thin corridor instead of a huge square.
_CHUNK_LEN_M = 4000.0


def source_footprint(lat: float, lon: float, source_depth_m: float,
                     env: EnvironmentField, cfg: RayFanConfig,
                     spec: GridSpec) -> Footprint:
    """Beam-weighted nearest-approach footprint of one source on the grid."""
    projection = spec.projection
    cell_x = (spec.lon_centers - projection.anchor_lon) * projection.meters_per_degree_lon
    cell_y = (spec.lat_centers - projection.anchor_lat) * METERS_PER_DEGREE_LAT
    n_cols = spec.n_cols
    z_r = cfg.receiver_depth_m
    rho_max = cfg.neighborhood_m

    clip = (cell_x[0] - rho_max, cell_x[-1] + rho_max,
            cell_y[0] - rho_max, cell_y[-1] + rho_max)
    paths = trace_fan(lat, lon, source_depth_m, env, cfg, projection, clip_xy=clip)

    # Stack every path segment of every ray into flat arrays.
    p0s, p1s, r0s, nss, nbs, rids = [], [], [], [], [], []
    for r, path in enumerate(paths):
        v = path.vertices
        if len(v) < 2:
            continue
        p0s.append(v[:-1])
        p1s.append(v[1:])
        r0s.append(path.cum_len[:-1])
        nss.append(path.n_surf[:-1])
        nbs.append(path.n_bot[:-1])
        rids.append(np.full(len(v) - 1, r, dtype=int))
    empty_i = np.array([], dtype=int)
    empty_f = np.array([])
    if not p0s:
        return Footprint(empty_i, empty_f, empty_f, empty_i.copy(), empty_i.copy())
    p0 = np.concatenate(p0s)
    seg_d = np.concatenate(p1s) - p0
    seg_r0 = np.concatenate(r0s)
    seg_ns = np.concatenate(nss)
    seg_nb = np.concatenate(nbs)
    seg_ray = np.concatenate(rids)
    seg_len = np.linalg.norm(seg_d, axis=1)

    # Split long segments so every distance query covers a thin corridor.
    n_chunks = np.maximum(1, np.ceil(seg_len / _CHUNK_LEN_M).astype(int))
    total = int(n_chunks.sum())
    sid = np.repeat(np.arange(len(seg_len)), n_chunks)
    starts = np.concatenate(([0], np.cumsum(n_chunks)[:-1]))
    within = np.arange(total) - np.repeat(starts, n_chunks)
    frac0 = within / n_chunks[sid]
    frac1 = (within + 1) / n_chunks[sid]
    a = p0[sid] + seg_d[sid] * frac0[:, None]
    b = p0[sid] + seg_d[sid] * frac1[:, None]
    chunk_r0 = seg_r0[sid] + seg_len[sid] * frac0

    # Fixed-size index window per chunk; duplicate hits from index clamping
    # collapse in the per-(ray, cell) dedupe below.
    d_cx = cell_x[1] - cell_x[0] if len(cell_x) > 1 else np.inf
    d_cy = cell_y[1] - cell_y[0] if len(cell_y) > 1 else np.inf
    w_x = min(len(cell_x), int(math.ceil((_CHUNK_LEN_M + 2 * rho_max) / d_cx)) + 2)
    w_y = min(len(cell_y), int(math.ceil((_CHUNK_LEN_M + 2 * rho_max) / d_cy)) + 2)
    j0 = np.searchsorted(cell_x, np.minimum(a[:, 0], b[:, 0]) - rho_max)
    i0 = np.searchsorted(cell_y, np.minimum(a[:, 1], b[:, 1]) - rho_max)
    j0 = np.minimum(j0, len(cell_x) - 1)
    i0 = np.minimum(i0, len(cell_y) - 1)

    cand = {"cell": [], "rho2": [], "rp": [], "ray": [], "ns": [], "nb": []}
    rho2_max = rho_max * rho_max
    for lo in range(0, total, 4096):
        hi = min(lo + 4096, total)
        sl = slice(lo, hi)
        jj = np.minimum(j0[sl, None] + np.arange(w_x)[None, :], len(cell_x) - 1)
        ii = np.minimum(i0[sl, None] + np.arange(w_y)[None, :], len(cell_y) - 1)
        xs = cell_x[jj][:, None, :]                  # (n, 1, w_x)
        ys = cell_y[ii][:, :, None]                  # (n, w_y, 1)
        ab = (b - a)[sl]
        wx = xs - a[sl, 0, None, None]
        wy = ys - a[sl, 1, None, None]
        wz = (z_r - a[sl, 2])[:, None, None]
        l2 = np.einsum("ij,ij->i", ab, ab)[:, None, None]
        dot = (wx * ab[:, 0, None, None] + wy * ab[:, 1, None, None]
               + wz * ab[:, 2, None, None])
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(l2 > 0.0, np.clip(dot / l2, 0.0, 1.0), 0.0)
        ex = wx - t * ab[:, 0, None, None]
        ey = wy - t * ab[:, 1, None, None]
        ez = wz - t * ab[:, 2, None, None]
        rho2 = ex * ex + ey * ey + ez * ez
        hit = rho2 <= rho2_max
        if not hit.any():
            continue
        nn, yy, xx = np.nonzero(hit)
        g = lo + nn
        cand["cell"].append(ii[nn, yy] * n_cols + jj[nn, xx])
        cand["rho2"].append(rho2[hit])
        cand["rp"].append(chunk_r0[g] + t[hit] * np.sqrt(l2[nn, 0, 0]))
        cand["ray"].append(seg_ray[sid[g]])
        cand["ns"].append(seg_ns[sid[g]])
        cand["nb"].append(seg_nb[sid[g]])

    if not cand["cell"]:
        return Footprint(empty_i, empty_f, empty_f, empty_i.copy(), empty_i.copy())
    cells = np.concatenate(cand["cell"])
    rho = np.sqrt(np.concatenate(cand["rho2"]))
    rp = np.concatenate(cand["rp"])
    rays = np.concatenate(cand["ray"])
    ns = np.concatenate(cand["ns"])
    nb = np.concatenate(cand["nb"])

    # One contribution per (ray, cell): keep the minimum-rho approach.
    order = np.lexsort((rho, cells, rays))
    cells, rho, rp, rays, ns, nb = (arr[order] for arr in
                                    (cells, rho, rp, rays, ns, nb))
    first = np.ones(len(cells), dtype=bool)
    first[1:] = (cells[1:] != cells[:-1]) | (rays[1:] != rays[:-1])
    cells, rho, rp, rays, ns, nb = (arr[first] for arr in
                                    (cells, rho, rp, rays, ns, nb))

    theta = np.array([p.theta_rad for p in paths])
    w = beam_weight(np.arctan2(rho, rp), theta[rays], cfg)
    return Footprint(cell_idx=cells, w2=w * w, r_p=rp, n_surf=ns, n_bot=nb)


def footprint_energy(fp: Footprint, sl_db: float, band: IndicatorBand,
                     cfg: RayFanConfig, flat_energy: np.ndarray,
                     scale: float = 1.0) -> None:
    """Add one source's received energy into a flattened grid array.

    `scale` multiplies the linear energy; exposure passes the segment
    duration here so cells collect uPa^2 s instead of uPa^2.
    """
    if len(fp.cell_idx) == 0:
        return
    tl = transmission_loss(fp.r_p, band.absorption_frequency_hz,
                           fp.n_surf, fp.n_bot, cfg)
    np.add.at(flat_energy, fp.cell_idx,
              scale * fp.w2 * 10.0 ** ((sl_db - tl) / 10.0))


@dataclass(frozen=True)
class Source:
    """One radiating source position with its band source level."""

    lat: float
    lon: float
    sl_db: float
    draft_m: float | None = None


def source_depth(draft_m: float | None, water_depth_m: float,
                 cfg: RayFanConfig) -> float:
    """Acoustic source depth: near the keel, kept inside the water column."""
    depth = max(draft_m or 0.0, cfg.source_depth_min_m)
    ceiling = max(water_depth_m - 1.0, 0.5 * water_depth_m)
    return min(depth, ceiling)


def accumulate(sources, env: EnvironmentField, cfg: RayFanConfig,
               grid: NoiseGrid) -> tuple[NoiseGrid, int]:
    """Add every source's footprint to a copy of the grid.

    Returns the new grid and the number of sources skipped for being on
    land or outside the bathymetry extent.
    """
    out = grid.copy()
    flat = out.energy.reshape(-1)
    skipped = 0
    for src in sources:
        water = env.bathymetry.sample_many(
            np.array([src.lat]), np.array([src.lon]))[0]
        if np.isnan(water):
            skipped += 1
            continue
        fp = source_footprint(src.lat, src.lon,
                              source_depth(src.draft_m, float(water), cfg),
                              env, cfg, grid.spec)
        footprint_energy(fp, src.sl_db, grid.band, cfg, flat)
    return out, skipped


def grid_to_spl(grid: NoiseGrid) -> np.ndarray:
    """Per-cell SPL in dB; zero-energy cells are NaN (absent)."""
    with np.errstate(divide="ignore"):
        return np.where(grid.energy > 0.0,
                        10.0 * np.log10(np.maximum(grid.energy, 1e-300)),
                        np.nan)
