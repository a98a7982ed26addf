"""AIS acquisition: feed polling, decoding, filtering, cache, store, CSV.

One pipeline feeds everything downstream: records arrive either from the
polled exchange API or from uploaded CSV, are normalized into VesselRecord,
filtered to the configured maritime regions (bounding box first, polygon
with inland exclusions second), then land in an in-memory TTL cache (live
view) and an append-only SQLite store (history and SEL windows).
"""

from __future__ import annotations

import csv
import json
import logging
import sqlite3
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Sequence, TextIO

from .errors import SchemaError
from .geo import RegionDefinition
from .records import (VesselRecord, format_timestamp, parse_timestamp)

logger = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_CACHE_TTL_S",
    "DEFAULT_POLL_INTERVAL_S",
    "decode_feed_payload",
    "DecodeResult",
    "filter_to_regions",
    "status_filter",
    "VesselCache",
    "SqliteStore",
    "AisHubClient",
    "Poller",
    "import_csv",
    "export_csv",
    "ImportResult",
    "CSV_COLUMNS",
    "CSV_REQUIRED",
]

DEFAULT_CACHE_TTL_S = 180.0
DEFAULT_POLL_INTERVAL_S = 60.0

# Documented CSV schema; extras are round-tripped when present.
CSV_REQUIRED = ("mmsi", "timestamp", "lat", "lon", "sog_kn", "ais_type")
CSV_COLUMNS = ("mmsi", "timestamp", "lat", "lon", "sog_kn", "cog_deg",
               "ais_type", "length_m", "beam_m", "draft_m", "nav_status")
CSV_OPTIONAL_EXTRAS = ("name", "je_class")


# ---------------------------------------------------------------------------
# Feed decoding

@dataclass
class DecodeResult:
    records: list[VesselRecord] = field(default_factory=list)
    skipped: int = 0


def _feed_timestamp(value) -> datetime:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return datetime.fromtimestamp(float(value), tz=timezone.utc)
    text = str(value).strip()
    if text.isdigit():
        return datetime.fromtimestamp(float(text), tz=timezone.utc)
    return parse_timestamp(text)


def _optional_float(row: dict, key: str) -> float | None:
    value = row.get(key)
    if value is None or value == "":
        return None
    out = float(value)
    return out if out > 0.0 else None


def decode_feed_record(row: dict) -> VesselRecord:
    """One exchange-API record to the internal shape.

    Length and beam come from explicit fields when present, otherwise from
    the AIS antenna-offset dimensions (A+B along ship, C+D across).
    """
    a = _optional_float(row, "A")
    b = _optional_float(row, "B")
    c = _optional_float(row, "C")
    d = _optional_float(row, "D")
    length = _optional_float(row, "LENGTH")
    beam = _optional_float(row, "WIDTH")
    if length is None and a is not None and b is not None:
        length = a + b
    if beam is None and c is not None and d is not None:
        beam = c + d
    name = row.get("NAME")
    return VesselRecord(
        mmsi=int(row["MMSI"]),
        timestamp=_feed_timestamp(row["TIME"]),
        lat=float(row["LATITUDE"] if "LATITUDE" in row else row["LAT"]),
        lon=float(row["LONGITUDE"] if "LONGITUDE" in row else row["LON"]),
        sog_kn=float(row["SOG"]),
        cog_deg=float(row["COG"]) if row.get("COG") not in (None, "") else None,
        ais_type=int(row["TYPE"]),
        length_m=length,
        beam_m=beam,
        draft_m=_optional_float(row, "DRAUGHT"),
        nav_status=int(row["NAVSTAT"]) if row.get("NAVSTAT") not in (None, "") else None,
        name=str(name).strip() if name else None,
    )


def decode_feed_payload(payload) -> DecodeResult:
    """Decode a feed response body: a record list, possibly behind a
    [metadata, records] wrapper. Malformed records are counted and skipped.
    """
    if isinstance(payload, (str, bytes)):
        payload = json.loads(payload)
    rows = payload
    if (isinstance(payload, list) and len(payload) == 2
            and isinstance(payload[0], dict) and isinstance(payload[1], list)):
        if payload[0].get("ERROR"):
            raise SchemaError(
                f"feed error response: {payload[0].get('ERROR_MESSAGE', 'unknown')}")
        rows = payload[1]
    if not isinstance(rows, list):
        raise SchemaError("feed payload is not a record list")
    out = DecodeResult()
    for row in rows:
        try:
            out.records.append(decode_feed_record(row))
        except (KeyError, ValueError, TypeError, SchemaError) as exc:
            out.skipped += 1
            logger.debug("skipping malformed feed record: %s", exc)
    if out.skipped:
        logger.warning("feed decode skipped %d malformed record(s)", out.skipped)
    return out


# ---------------------------------------------------------------------------
# Filtering

def filter_to_regions(records: Iterable[VesselRecord],
                      regions: Sequence[RegionDefinition]) -> list[VesselRecord]:
    """Keep records inside any region: bounding box first, then the polygon
    with its inland exclusions."""
    out = []
    for rec in records:
        for region in regions:
            min_lat, min_lon, max_lat, max_lon = region.bbox
            if not (min_lat <= rec.lat <= max_lat
                    and min_lon <= rec.lon <= max_lon):
                continue
            if region.contains(rec.lat, rec.lon):
                out.append(rec)
                break
    return out


def status_filter(records: Iterable[VesselRecord],
                  statuses: frozenset[int] = frozenset({0, 1}),
                  ) -> list[VesselRecord]:
    """Keep records whose navigational status is in the requested subset
    of {0 underway-engine, 1 at-anchor}. Others are never shown. Records
    without a status (CSV without the column) count as underway (0).
    """
    allowed = statuses & {0, 1}
    return [r for r in records
            if (r.nav_status if r.nav_status is not None else 0) in allowed]


# ---------------------------------------------------------------------------
# Cache

@dataclass
class CacheEntry:
    record: VesselRecord
    received_at: float
    deadline: float


class VesselCache:
    """Latest state per vessel with a hard TTL.

    The clock is injected (seconds, monotonic-like) so expiry is testable.
    A snapshot never contains an entry at or past its deadline.
    """

    def __init__(self, ttl_s: float = DEFAULT_CACHE_TTL_S,
                 clock: Callable[[], float] = time.monotonic) -> None:
        self.ttl_s = ttl_s
        self._clock = clock
        self._entries: dict[int, CacheEntry] = {}
        self._lock = threading.Lock()
        self.last_poll_utc: datetime | None = None

    def update(self, records: Iterable[VesselRecord],
               poll_time_utc: datetime | None = None) -> None:
        now = self._clock()
        with self._lock:
            for rec in records:
                current = self._entries.get(rec.mmsi)
                # Two stations reporting the same vessel: latest received wins
                # on timestamp ties, newer timestamp wins otherwise.
                if current is not None and rec.timestamp < current.record.timestamp:
                    continue
                self._entries[rec.mmsi] = CacheEntry(
                    record=rec, received_at=now, deadline=now + self.ttl_s)
            if poll_time_utc is not None:
                self.last_poll_utc = poll_time_utc

    def snapshot(self) -> list[VesselRecord]:
        now = self._clock()
        with self._lock:
            live = {m: e for m, e in self._entries.items() if e.deadline > now}
            self._entries = live
            return [e.record for _, e in sorted(live.items())]

    def get(self, mmsi: int) -> VesselRecord | None:
        now = self._clock()
        with self._lock:
            entry = self._entries.get(mmsi)
            if entry is None or entry.deadline <= now:
                return None
            return entry.record


# ---------------------------------------------------------------------------
# Persistent store

_SCHEMA = """
CREATE TABLE IF NOT EXISTS vessel_reports (
    mmsi INTEGER NOT NULL,
    timestamp TEXT NOT NULL,
    lat REAL NOT NULL,
    lon REAL NOT NULL,
    sog_kn REAL NOT NULL,
    cog_deg REAL,
    ais_type INTEGER NOT NULL,
    length_m REAL,
    beam_m REAL,
    draft_m REAL,
    nav_status INTEGER,
    name TEXT,
    je_class INTEGER,
    PRIMARY KEY (mmsi, timestamp)
);
CREATE INDEX IF NOT EXISTS idx_reports_time ON vessel_reports (timestamp);
"""


class SqliteStore:
    """Append-only report store keyed (mmsi, timestamp).

    Any SQLite failure flips the store into degraded mode: ingest carries on
    cache-only and queries return empty rather than killing the pipeline.
    """

    def __init__(self, path: Path | str) -> None:
        self.path = str(path)
        self.degraded = False
        self._lock = threading.Lock()
        try:
            with self._connect() as conn:
                conn.executescript(_SCHEMA)
        except sqlite3.Error as exc:
            logger.error("vessel store unavailable (%s); running degraded", exc)
            self.degraded = True

    def _connect(self) -> sqlite3.Connection:
        return sqlite3.connect(self.path, timeout=10.0)

    def insert(self, records: Iterable[VesselRecord]) -> int:
        rows = [(r.mmsi, format_timestamp(r.timestamp), r.lat, r.lon, r.sog_kn,
                 r.cog_deg, r.ais_type, r.length_m, r.beam_m, r.draft_m,
                 r.nav_status, r.name, r.je_class) for r in records]
        if not rows:
            return 0
        try:
            with self._lock, self._connect() as conn:
                conn.executemany(
                    "INSERT OR REPLACE INTO vessel_reports VALUES "
                    "(?,?,?,?,?,?,?,?,?,?,?,?,?)", rows)
            self.degraded = False
            return len(rows)
        except sqlite3.Error as exc:
            if not self.degraded:
                logger.error("vessel store write failed (%s); degraded", exc)
            self.degraded = True
            return 0

    @staticmethod
    def _record(row: tuple) -> VesselRecord:
        return VesselRecord(
            mmsi=row[0], timestamp=parse_timestamp(row[1]), lat=row[2],
            lon=row[3], sog_kn=row[4], cog_deg=row[5], ais_type=row[6],
            length_m=row[7], beam_m=row[8], draft_m=row[9], nav_status=row[10],
            name=row[11], je_class=row[12])

    def query(self, start: datetime, end: datetime,
              bbox: tuple[float, float, float, float] | None = None,
              mmsi: int | None = None) -> list[VesselRecord]:
        """Deduplicated reports in [start, end), time-ordered."""
        sql = ("SELECT * FROM vessel_reports WHERE timestamp >= ? AND "
               "timestamp < ?")
        args: list = [format_timestamp(start), format_timestamp(end)]
        if bbox is not None:
            sql += " AND lat >= ? AND lat <= ? AND lon >= ? AND lon <= ?"
            args += [bbox[0], bbox[2], bbox[1], bbox[3]]
        if mmsi is not None:
            sql += " AND mmsi = ?"
            args.append(mmsi)
        sql += " ORDER BY timestamp, mmsi"
        try:
            with self._connect() as conn:
                rows = conn.execute(sql, args).fetchall()
        except sqlite3.Error as exc:
            logger.error("vessel store query failed: %s", exc)
            self.degraded = True
            return []
        return [self._record(r) for r in rows]

    def latest(self, mmsi: int) -> VesselRecord | None:
        try:
            with self._connect() as conn:
                row = conn.execute(
                    "SELECT * FROM vessel_reports WHERE mmsi = ? "
                    "ORDER BY timestamp DESC LIMIT 1", (mmsi,)).fetchone()
        except sqlite3.Error as exc:
            logger.error("vessel store query failed: %s", exc)
            self.degraded = True
            return None
        return self._record(row) if row else None

    def stored_dates(self) -> list[str]:
        """UTC dates (YYYY-MM-DD) having at least one report."""
        try:
            with self._connect() as conn:
                rows = conn.execute(
                    "SELECT DISTINCT substr(timestamp, 1, 10) "
                    "FROM vessel_reports ORDER BY 1").fetchall()
        except sqlite3.Error as exc:
            logger.error("vessel store query failed: %s", exc)
            self.degraded = True
            return []
        return [r[0] for r in rows]


# ---------------------------------------------------------------------------
# Polling

class AisHubClient:
    """Minimal exchange-API client: GET endpoint with bbox + key params."""

    def __init__(self, endpoint: str, api_key: str,
                 timeout_s: float = 20.0) -> None:
        if not endpoint:
            raise SchemaError("feed endpoint is not configured")
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout_s = timeout_s

    def __call__(self, bbox: tuple[float, float, float, float]):
        import requests

        min_lat, min_lon, max_lat, max_lon = bbox
        resp = requests.get(self.endpoint, params={
            "username": self.api_key,
            "format": "1",
            "output": "json",
            "compress": "0",
            "latmin": min_lat, "latmax": max_lat,
            "lonmin": min_lon, "lonmax": max_lon,
        }, timeout=self.timeout_s)
        resp.raise_for_status()
        return resp.json()


class Poller:
    """Periodic feed poll: fetch per region bbox, decode, filter, fan out.

    On fetch failure the cache simply ages (stale-but-served) and the next
    attempt backs off exponentially up to 10 minutes.
    """

    def __init__(self, fetch: Callable, regions: Sequence[RegionDefinition],
                 cache: VesselCache, store: SqliteStore | None = None,
                 interval_s: float = DEFAULT_POLL_INTERVAL_S,
                 now_utc: Callable[[], datetime] | None = None) -> None:
        self.fetch = fetch
        self.regions = list(regions)
        self.cache = cache
        self.store = store
        self.interval_s = interval_s
        self.now_utc = now_utc or (lambda: datetime.now(timezone.utc))
        self.failures = 0
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def poll_once(self) -> int:
        """One fetch-decode-filter-distribute round; returns accepted count."""
        accepted: dict[tuple[int, str], VesselRecord] = {}
        for region in self.regions:
            payload = self.fetch(region.bbox)
            decoded = decode_feed_payload(payload)
            for rec in filter_to_regions(decoded.records, [region]):
                accepted[(rec.mmsi, format_timestamp(rec.timestamp))] = rec
        records = list(accepted.values())
        self.cache.update(records, poll_time_utc=self.now_utc())
        if self.store is not None:
            self.store.insert(records)
        self.failures = 0
        return len(records)

    def _delay(self) -> float:
        if self.failures == 0:
            return self.interval_s
        return min(self.interval_s * 2.0 ** self.failures, 600.0)

    def run(self) -> None:
        while not self._stop.is_set():
            try:
                self.poll_once()
            except Exception as exc:
                self.failures += 1
                logger.warning("feed poll failed (%d in a row): %s",
                               self.failures, exc)
            if self._stop.wait(self._delay()):
                break

    def start(self) -> None:
        self._thread = threading.Thread(target=self.run, daemon=True,
                                        name="ais-poller")
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)


# ---------------------------------------------------------------------------
# CSV import/export

@dataclass
class ImportResult:
    records: list[VesselRecord] = field(default_factory=list)
    skipped: list[tuple[int, str]] = field(default_factory=list)


def _csv_float(value: str | None) -> float | None:
    if value is None or value.strip() == "":
        return None
    return float(value)


def _csv_int(value: str | None) -> int | None:
    if value is None or value.strip() == "":
        return None
    return int(value)


def import_csv(stream: TextIO) -> ImportResult:
    """Parse the documented CSV schema into vessel records.

    A missing required column is a schema error naming it; a bad row is
    skipped and reported with its 1-based line number.
    """
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        raise SchemaError("CSV input has no header row")
    fields = [f.strip() for f in reader.fieldnames]
    for col in CSV_REQUIRED:
        if col not in fields:
            raise SchemaError(f"CSV is missing required column {col!r}")
    out = ImportResult()
    for line_no, row in enumerate(reader, start=2):
        try:
            out.records.append(VesselRecord(
                mmsi=int(row["mmsi"]),
                timestamp=parse_timestamp(row["timestamp"]),
                lat=float(row["lat"]),
                lon=float(row["lon"]),
                sog_kn=float(row["sog_kn"]),
                cog_deg=_csv_float(row.get("cog_deg")),
                ais_type=int(row["ais_type"]),
                length_m=_csv_float(row.get("length_m")),
                beam_m=_csv_float(row.get("beam_m")),
                draft_m=_csv_float(row.get("draft_m")),
                nav_status=_csv_int(row.get("nav_status")),
                name=(row.get("name") or "").strip() or None,
                je_class=_csv_int(row.get("je_class")),
            ))
        except (KeyError, ValueError, TypeError, SchemaError) as exc:
            out.skipped.append((line_no, str(exc)))
    for line_no, reason in out.skipped:
        logger.warning("CSV line %d skipped: %s", line_no, reason)
    return out


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def export_csv(records: Sequence[VesselRecord], stream: TextIO) -> None:
    """Write records back out; import_csv(export_csv(x)) is lossless."""
    extras = [col for col in CSV_OPTIONAL_EXTRAS
              if any(getattr(r, col) is not None for r in records)]
    columns = list(CSV_COLUMNS) + extras
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for r in records:
        row = []
        for col in columns:
            value = getattr(r, col)
            if col == "timestamp":
                value = format_timestamp(value)
            row.append(_format_value(value))
        writer.writerow(row)
