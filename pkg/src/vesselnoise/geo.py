"""Planar geography: local projection, polygon membership, regions, MPAs.

Coordinates are (lat, lon) degrees everywhere inside the package; GeoJSON's
(lon, lat) order is converted at the file boundary. Distances use a local
equirectangular projection anchored at a caller-chosen point, adequate for
the sub-degree extents this engine maps.

Polygon membership uses an even-odd crossing test with points on the
boundary counting as inside.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidGeometryError, SchemaError

__all__ = [
    "METERS_PER_DEGREE_LAT",
    "LocalProjection",
    "Ring",
    "point_in_polygon",
    "point_on_boundary",
    "Polygon",
    "RegionDefinition",
    "MpaPolygon",
    "polygon_from_geojson",
    "polygon_to_geojson",
    "load_regions",
    "load_mpas",
    "polygon_distance_m",
]

# Mean-earth meridian arc length per degree.
METERS_PER_DEGREE_LAT = math.pi / 180.0 * 6_371_000.0

Ring = tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class LocalProjection:
    """Equirectangular lat/lon <-> meters about an anchor point."""

    anchor_lat: float
    anchor_lon: float

    @property
    def meters_per_degree_lon(self) -> float:
        return METERS_PER_DEGREE_LAT * math.cos(math.radians(self.anchor_lat))

    def to_xy(self, lat, lon):
        """Degrees to local meters (x east, y north); accepts arrays."""
        x = (np.asarray(lon) - self.anchor_lon) * self.meters_per_degree_lon
        y = (np.asarray(lat) - self.anchor_lat) * METERS_PER_DEGREE_LAT
        return x, y

    def to_latlon(self, x, y):
        lat = np.asarray(y) / METERS_PER_DEGREE_LAT + self.anchor_lat
        lon = np.asarray(x) / self.meters_per_degree_lon + self.anchor_lon
        return lat, lon


def _normalize_ring(vertices) -> Ring:
    ring = [(float(lat), float(lon)) for lat, lon in vertices]
    if len(ring) >= 2 and ring[0] == ring[-1]:
        ring = ring[:-1]
    if len(set(ring)) < 3:
        raise InvalidGeometryError("polygon ring needs >= 3 distinct vertices")
    return tuple(ring)


def point_on_boundary(lat: float, lon: float, ring: Ring,
                      eps: float = 1e-12) -> bool:
    n = len(ring)
    for i in range(n):
        a_lat, a_lon = ring[i]
        b_lat, b_lon = ring[(i + 1) % n]
        cross = (b_lon - a_lon) * (lat - a_lat) - (lon - a_lon) * (b_lat - a_lat)
        if abs(cross) > eps:
            continue
        if (min(a_lat, b_lat) - eps <= lat <= max(a_lat, b_lat) + eps
                and min(a_lon, b_lon) - eps <= lon <= max(a_lon, b_lon) + eps):
            return True
    return False


def point_in_polygon(lat: float, lon: float, ring: Ring) -> bool:
    """Even-odd crossing test; boundary points count as inside."""
    if point_on_boundary(lat, lon, ring):
        return True
    inside = False
    n = len(ring)
    for i in range(n):
        a_lat, a_lon = ring[i]
        b_lat, b_lon = ring[(i + 1) % n]
        # Horizontal ray toward +lon; half-open vertex rule avoids double counts.
        if (a_lat > lat) != (b_lat > lat):
            lon_cross = a_lon + (lat - a_lat) / (b_lat - a_lat) * (b_lon - a_lon)
            if lon < lon_cross:
                inside = not inside
    return inside


@dataclass(frozen=True)
class Polygon:
    """Outer ring plus optional holes, with a derived bounding box."""

    outer: Ring
    holes: tuple[Ring, ...] = ()

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        lats = [p[0] for p in self.outer]
        lons = [p[1] for p in self.outer]
        return (min(lats), min(lons), max(lats), max(lons))

    def contains(self, lat: float, lon: float) -> bool:
        min_lat, min_lon, max_lat, max_lon = self.bbox
        if not (min_lat <= lat <= max_lat and min_lon <= lon <= max_lon):
            return False
        if not point_in_polygon(lat, lon, self.outer):
            return False
        # A point in a hole (boundary included) is outside the polygon.
        return not any(point_in_polygon(lat, lon, hole) for hole in self.holes)

    @property
    def centroid(self) -> tuple[float, float]:
        lats = [p[0] for p in self.outer]
        lons = [p[1] for p in self.outer]
        return (sum(lats) / len(lats), sum(lons) / len(lons))


@dataclass(frozen=True)
class RegionDefinition:
    """A configured maritime region: outer polygon minus inland exclusions."""

    name: str
    polygon: Polygon

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return self.polygon.bbox

    def contains(self, lat: float, lon: float) -> bool:
        return self.polygon.contains(lat, lon)


@dataclass(frozen=True)
class MpaPolygon:
    """One marine protected area feature."""

    mpa_id: str
    name: str
    designation: str
    polygon: Polygon

    def contains(self, lat: float, lon: float) -> bool:
        return self.polygon.contains(lat, lon)


def polygon_from_geojson(geometry: dict) -> Polygon:
    if geometry.get("type") != "Polygon":
        raise SchemaError(f"expected Polygon geometry, got {geometry.get('type')!r}")
    rings = geometry.get("coordinates") or []
    if not rings:
        raise SchemaError("Polygon geometry has no rings")
    # GeoJSON order is (lon, lat).
    outer = _normalize_ring((lat, lon) for lon, lat in rings[0])
    holes = tuple(_normalize_ring((lat, lon) for lon, lat in ring)
                  for ring in rings[1:])
    return Polygon(outer=outer, holes=holes)


def polygon_to_geojson(polygon: Polygon) -> dict:
    """Inverse of polygon_from_geojson: closed rings in (lon, lat) order."""
    def ring(r: Ring) -> list[list[float]]:
        pts = [[lon, lat] for lat, lon in r]
        pts.append(pts[0])
        return pts
    return {"type": "Polygon",
            "coordinates": [ring(polygon.outer)]
            + [ring(h) for h in polygon.holes]}


def _load_feature_collection(path: Path | str) -> list[dict]:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot parse GeoJSON {path}: {exc}") from exc
    if payload.get("type") != "FeatureCollection":
        raise SchemaError(f"{path}: expected a FeatureCollection")
    return payload.get("features") or []


def load_regions(path: Path | str) -> dict[str, RegionDefinition]:
    """Region definitions from a GeoJSON FeatureCollection.

    Each feature is a Polygon whose holes are the inland exclusions; the
    feature property ``name`` is the region key.
    """
    regions: dict[str, RegionDefinition] = {}
    for feature in _load_feature_collection(path):
        props = feature.get("properties") or {}
        name = props.get("name")
        if not name:
            raise SchemaError(f"{path}: region feature without a name property")
        regions[name] = RegionDefinition(
            name=name, polygon=polygon_from_geojson(feature.get("geometry") or {}))
    return regions


def load_mpas(path: Path | str) -> list[MpaPolygon]:
    """MPA features from a GeoJSON FeatureCollection."""
    mpas = []
    for i, feature in enumerate(_load_feature_collection(path)):
        props = feature.get("properties") or {}
        mpas.append(MpaPolygon(
            mpa_id=str(props.get("id", i)),
            name=str(props.get("name", f"mpa-{i}")),
            designation=str(props.get("designation", "")),
            polygon=polygon_from_geojson(feature.get("geometry") or {}),
        ))
    return mpas


def _segment_distance_m(px: float, py: float, ax: float, ay: float,
                        bx: float, by: float) -> float:
    dx = bx - ax
    dy = by - ay
    denom = dx * dx + dy * dy
    if denom == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / denom
    t = min(max(t, 0.0), 1.0)
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def polygon_distance_m(lat: float, lon: float, polygon: Polygon) -> float:
    """Distance from a point to the polygon in meters; 0 when inside.

    Holes are ignored here: the buffer semantics treat the outer boundary as
    the zone, so a point inside a hole is still at distance 0.
    """
    if point_in_polygon(lat, lon, polygon.outer):
        return 0.0
    proj = LocalProjection(*polygon.centroid)
    px, py = proj.to_xy(lat, lon)
    best = math.inf
    ring = polygon.outer
    n = len(ring)
    for i in range(n):
        ax, ay = proj.to_xy(*ring[i])
        bx, by = proj.to_xy(*ring[(i + 1) % n])
        best = min(best, _segment_distance_m(
            float(px), float(py), float(ax), float(ay), float(bx), float(by)))
    return best
