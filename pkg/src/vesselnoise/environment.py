"""Environmental inputs: bathymetry, sound speed profiles, absorption, MPAs.

Bathymetry loads from single-band EPSG:4326 GeoTIFF or ESRI ASCII grid files
into an in-memory raster of water depth (m, positive down) with land/nodata
cells marked NaN. Queries interpolate bilinearly between cell centers; the
``convention`` argument selects whether file values are depth (positive down)
or elevation (GEBCO style, negative below sea level).

Sound speed uses Mackenzie's nine-term empirical equation over seasonal
temperature/salinity profiles; volume absorption uses Thorp's formula. The
profile is carried for configuration completeness: ray paths in this release
are straight segments and are not refracted by it.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, OutOfDomainError, SchemaError
from .geo import MpaPolygon, load_mpas

__all__ = [
    "mackenzie_speed",
    "thorp_alpha",
    "SoundSpeedProfile",
    "load_ssp",
    "season_for",
    "LAND",
    "Land",
    "DepthSample",
    "BathymetryGrid",
    "load_bathymetry",
    "EnvironmentField",
]


def mackenzie_speed(temp_c: float, sal_ppt: float, depth_m: float) -> float:
    """Sound speed in seawater (m/s), Mackenzie's nine-term equation.

    Valid for temperature -2 to 30 degC, salinity 25 to 40 ppt, depth 0 to
    8000 m; values outside a broad guard band warn but still evaluate.
    """
    for name, v in (("temperature", temp_c), ("salinity", sal_ppt), ("depth", depth_m)):
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite, got {v!r}")
    if not (-2.0 <= temp_c <= 40.0 and 0.0 <= sal_ppt <= 45.0 and 0.0 <= depth_m <= 12000.0):
        warnings.warn(
            f"sound speed inputs (T={temp_c}, S={sal_ppt}, D={depth_m}) outside "
            "validity guard; extrapolating",
            stacklevel=2)
    t = temp_c
    s = sal_ppt
    d = depth_m
    return (
        1448.96
        + 4.591 * t
        - 5.304e-2 * t ** 2
        + 2.374e-4 * t ** 3
        + 1.340 * (s - 35.0)
        + 1.630e-2 * d
        + 1.675e-7 * d ** 2
        - 1.025e-2 * t * (s - 35.0)
        - 7.139e-13 * t * d ** 3
    )


def thorp_alpha(f_khz: float) -> float:
    """Volume absorption coefficient (dB/km) after Thorp."""
    if not (f_khz > 0.0 and math.isfinite(f_khz)):
        raise DomainError(f"frequency must be positive, got {f_khz!r}")
    f2 = f_khz * f_khz
    return (
        0.11 * f2 / (1.0 + f2)
        + 44.0 * f2 / (4100.0 + f2)
        + 2.75e-4 * f2
        + 0.003
    )


@dataclass(frozen=True)
class SoundSpeedProfile:
    """Seasonal temperature/salinity samples with derived sound speed."""

    season: str
    depth_m: np.ndarray
    temp_c: np.ndarray
    sal_ppt: np.ndarray
    speed_ms: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if len(self.depth_m) == 0 or np.any(np.diff(self.depth_m) <= 0.0):
            raise SchemaError(
                f"SSP {self.season}: depths must be strictly increasing")
        speeds = np.array([
            mackenzie_speed(float(t), float(s), float(d))
            for t, s, d in zip(self.temp_c, self.sal_ppt, self.depth_m)
        ])
        object.__setattr__(self, "speed_ms", speeds)

    def speed_at(self, depth_m: float) -> float:
        return float(np.interp(depth_m, self.depth_m, self.speed_ms))


def season_for(when: datetime) -> str:
    """Meteorological season of a date (northern hemisphere)."""
    month = when.month
    if month in (12, 1, 2):
        return "winter"
    if month in (3, 4, 5):
        return "spring"
    if month in (6, 7, 8):
        return "summer"
    return "autumn"


def load_ssp(path: Path | str) -> dict[str, SoundSpeedProfile]:
    """Profiles from a CSV with columns season,depth_m,temp_c,sal_ppt."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read SSP file {path}: {exc}") from exc
    reader = csv.DictReader(
        line for line in text.splitlines() if line.strip() and not line.startswith("#"))
    expected = {"season", "depth_m", "temp_c", "sal_ppt"}
    if reader.fieldnames is None or set(reader.fieldnames) != expected:
        raise SchemaError(
            f"SSP file needs columns {sorted(expected)}, got {reader.fieldnames}")
    rows: dict[str, list[tuple[float, float, float]]] = {}
    for lineno, row in enumerate(reader, start=2):
        try:
            rows.setdefault(row["season"].strip().lower(), []).append((
                float(row["depth_m"]), float(row["temp_c"]), float(row["sal_ppt"])))
        except ValueError as exc:
            raise SchemaError(f"SSP line {lineno}: {exc}") from exc
    profiles = {}
    for season, samples in rows.items():
        samples.sort(key=lambda r: r[0])
        profiles[season] = SoundSpeedProfile(
            season=season,
            depth_m=np.array([s[0] for s in samples]),
            temp_c=np.array([s[1] for s in samples]),
            sal_ppt=np.array([s[2] for s in samples]),
        )
    return profiles


class Land:
    """Singleton marker for a query landing on a land cell."""

    _instance: "Land | None" = None

    def __new__(cls) -> "Land":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "LAND"


LAND = Land()


@dataclass(frozen=True)
class DepthSample:
    """A depth query result with its nodata-fallback flag."""

    depth: "float | Land"
    fallback: bool


@dataclass(frozen=True)
class BathymetryGrid:
    """Regular lat/lon raster of water depth; NaN cells are land/nodata.

    ``depths[i, j]`` sits at (lat_centers[i], lon_centers[j]); both center
    axes ascend. The covered extent reaches half a cell beyond the outermost
    centers; within the outer half-cell ring queries clamp to edge centers.
    """

    lat_centers: np.ndarray
    lon_centers: np.ndarray
    depths: np.ndarray

    def __post_init__(self) -> None:
        if self.depths.shape != (len(self.lat_centers), len(self.lon_centers)):
            raise SchemaError("bathymetry array shape does not match axes")
        if (len(self.lat_centers) < 2 or len(self.lon_centers) < 2
                or np.any(np.diff(self.lat_centers) <= 0.0)
                or np.any(np.diff(self.lon_centers) <= 0.0)):
            raise SchemaError("bathymetry axes must be ascending with >= 2 cells")

    @property
    def cell_deg(self) -> tuple[float, float]:
        return (
            float(self.lat_centers[1] - self.lat_centers[0]),
            float(self.lon_centers[1] - self.lon_centers[0]),
        )

    @property
    def extent(self) -> tuple[float, float, float, float]:
        dlat, dlon = self.cell_deg
        return (
            float(self.lat_centers[0]) - dlat / 2.0,
            float(self.lon_centers[0]) - dlon / 2.0,
            float(self.lat_centers[-1]) + dlat / 2.0,
            float(self.lon_centers[-1]) + dlon / 2.0,
        )

    def _sample(self, lats: np.ndarray, lons: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized bilinear depth with nearest-valid nodata fallback.

        Returns (depths, fallback flags); NaN depth means land or outside
        the extent.
        """
        dlat, dlon = self.cell_deg
        min_lat, min_lon, max_lat, max_lon = self.extent
        lats = np.asarray(lats, dtype=float)
        lons = np.asarray(lons, dtype=float)
        out = np.full(lats.shape, np.nan)
        fallback = np.zeros(lats.shape, dtype=bool)
        ok = ((lats >= min_lat) & (lats <= max_lat)
              & (lons >= min_lon) & (lons <= max_lon))
        if not np.any(ok):
            return out, fallback
        fi = np.clip((lats[ok] - self.lat_centers[0]) / dlat, 0.0,
                     len(self.lat_centers) - 1.0)
        fj = np.clip((lons[ok] - self.lon_centers[0]) / dlon, 0.0,
                     len(self.lon_centers) - 1.0)
        # Land test uses the nearest cell.
        near = self.depths[np.rint(fi).astype(int), np.rint(fj).astype(int)]
        i0 = np.minimum(fi.astype(int), len(self.lat_centers) - 2)
        j0 = np.minimum(fj.astype(int), len(self.lon_centers) - 2)
        t = fi - i0
        u = fj - j0
        corners = np.stack([
            self.depths[i0, j0], self.depths[i0, j0 + 1],
            self.depths[i0 + 1, j0], self.depths[i0 + 1, j0 + 1],
        ])
        dist2 = np.stack([
            t ** 2 + u ** 2, t ** 2 + (1 - u) ** 2,
            (1 - t) ** 2 + u ** 2, (1 - t) ** 2 + (1 - u) ** 2,
        ])
        invalid = np.isnan(corners)
        dist2 = np.where(invalid, np.inf, dist2)
        nearest_valid = np.take_along_axis(
            corners, np.argmin(dist2, axis=0)[None, :], axis=0)[0]
        filled = np.where(invalid, nearest_valid, corners)
        value = (
            filled[0] * (1 - t) * (1 - u)
            + filled[1] * (1 - t) * u
            + filled[2] * t * (1 - u)
            + filled[3] * t * u
        )
        used_fallback = invalid.any(axis=0) & ~np.isnan(near)
        value = np.where(np.isnan(near), np.nan, value)
        out[ok] = value
        fb = np.zeros(lats.shape, dtype=bool)
        fb[ok] = used_fallback
        return out, fb

    def depth_at_detail(self, lat: float, lon: float) -> DepthSample:
        min_lat, min_lon, max_lat, max_lon = self.extent
        if not (min_lat <= lat <= max_lat and min_lon <= lon <= max_lon):
            raise OutOfDomainError(
                f"({lat}, {lon}) outside bathymetry extent "
                f"[{min_lat}, {max_lat}] x [{min_lon}, {max_lon}]")
        depths, fallback = self._sample(np.array([lat]), np.array([lon]))
        if np.isnan(depths[0]):
            return DepthSample(depth=LAND, fallback=False)
        return DepthSample(depth=float(depths[0]), fallback=bool(fallback[0]))

    def depth_at(self, lat: float, lon: float) -> "float | Land":
        return self.depth_at_detail(lat, lon).depth

    def sample_many(self, lats: np.ndarray, lons: np.ndarray) -> np.ndarray:
        """Depths for arrays of positions; NaN for land or out-of-extent."""
        return self._sample(lats, lons)[0]

    @classmethod
    def from_arrays(cls, lat_centers, lon_centers, depths,
                    convention: str = "depth") -> "BathymetryGrid":
        values = np.asarray(depths, dtype=float)
        if convention == "elevation":
            values = -values
        elif convention != "depth":
            raise ConfigError(f"unknown bathymetry convention {convention!r}")
        values = np.where(values <= 0.0, np.nan, values)
        return cls(
            lat_centers=np.asarray(lat_centers, dtype=float),
            lon_centers=np.asarray(lon_centers, dtype=float),
            depths=values,
        )

    @classmethod
    def from_asc(cls, path: Path | str, convention: str = "depth") -> "BathymetryGrid":
        """ESRI ASCII grid; header keys ncols/nrows/xllcorner/yllcorner/cellsize."""
        try:
            lines = Path(path).read_text().split("\n")
        except OSError as exc:
            raise ConfigError(f"cannot read bathymetry {path}: {exc}") from exc
        header: dict[str, float] = {}
        idx = 0
        for idx, line in enumerate(lines):
            parts = line.split()
            if len(parts) == 2 and parts[0].lower() in (
                    "ncols", "nrows", "xllcorner", "yllcorner", "cellsize",
                    "nodata_value"):
                header[parts[0].lower()] = float(parts[1])
            else:
                break
        required = {"ncols", "nrows", "xllcorner", "yllcorner", "cellsize"}
        if not required <= set(header):
            raise SchemaError(
                f"{path}: ASCII grid header missing {sorted(required - set(header))}")
        ncols = int(header["ncols"])
        nrows = int(header["nrows"])
        cell = header["cellsize"]
        nodata = header.get("nodata_value")
        values = np.loadtxt([ln for ln in lines[idx:] if ln.strip()], dtype=float)
        values = np.atleast_2d(values)
        if values.shape != (nrows, ncols):
            raise SchemaError(
                f"{path}: expected {nrows}x{ncols} values, got {values.shape}")
        if nodata is not None:
            values = np.where(values == nodata, np.nan, values)
        # File rows run north to south; flip to ascending latitude.
        values = values[::-1]
        lat_centers = header["yllcorner"] + cell * (np.arange(nrows) + 0.5)
        lon_centers = header["xllcorner"] + cell * (np.arange(ncols) + 0.5)
        return cls.from_arrays(lat_centers, lon_centers, values, convention)

    @classmethod
    def from_geotiff(cls, path: Path | str,
                     convention: str = "elevation") -> "BathymetryGrid":
        """Single-band EPSG:4326 GeoTIFF (GDAL-style tags, pixel-is-area)."""
        from PIL import Image

        try:
            img = Image.open(path)
        except OSError as exc:
            raise ConfigError(f"cannot read bathymetry {path}: {exc}") from exc
        tags = img.tag_v2
        try:
            scale = tags[33550]      # ModelPixelScaleTag
            tiepoint = tags[33922]   # ModelTiepointTag
        except KeyError as exc:
            raise SchemaError(f"{path}: not a georeferenced GeoTIFF") from exc
        sx, sy = float(scale[0]), float(scale[1])
        lon0, lat0 = float(tiepoint[3]), float(tiepoint[4])
        values = np.asarray(img, dtype=float)
        if values.ndim != 2:
            raise SchemaError(f"{path}: expected a single-band raster")
        nodata_tag = tags.get(42113)  # GDAL_NODATA
        if nodata_tag is not None:
            values = np.where(values == float(str(nodata_tag)), np.nan, values)
        nrows, ncols = values.shape
        # Row 0 is the northern edge; flip to ascending latitude.
        values = values[::-1]
        lat_centers = lat0 - sy * (nrows - 0.5 - np.arange(nrows))
        lon_centers = lon0 + sx * (np.arange(ncols) + 0.5)
        return cls.from_arrays(lat_centers, lon_centers, values, convention)


def load_bathymetry(path: Path | str, convention: str | None = None) -> BathymetryGrid:
    """Dispatch on file suffix; GeoTIFF defaults to the elevation convention."""
    suffix = Path(path).suffix.lower()
    if suffix in (".tif", ".tiff"):
        return BathymetryGrid.from_geotiff(path, convention or "elevation")
    if suffix == ".asc":
        return BathymetryGrid.from_asc(path, convention or "depth")
    raise ConfigError(f"unsupported bathymetry format {suffix!r} for {path}")


@dataclass(frozen=True)
class EnvironmentField:
    """Bathymetry plus seasonal sound speed profiles and MPA polygons."""

    bathymetry: BathymetryGrid
    ssp: dict[str, SoundSpeedProfile] = field(default_factory=dict)
    mpas: tuple[MpaPolygon, ...] = ()

    def profile_for(self, when: datetime) -> SoundSpeedProfile | None:
        return self.ssp.get(season_for(when))

    @classmethod
    def load(cls, bathymetry_path: Path | str,
             convention: str | None = None,
             ssp_path: Path | str | None = None,
             mpa_path: Path | str | None = None) -> "EnvironmentField":
        return cls(
            bathymetry=load_bathymetry(bathymetry_path, convention),
            ssp=load_ssp(ssp_path) if ssp_path else {},
            mpas=tuple(load_mpas(mpa_path)) if mpa_path else (),
        )
