"""Canonical grid serialization shared by the CLI and the service.

Byte-identical output across entry points is a contract: both paths funnel
through these writers, which fix column order, row order (south to north,
west to east), number formatting, and absent-cell handling. Cells where no
band received anything are omitted entirely; a band with no energy in an
otherwise present cell is an empty field, never -inf.
"""

from __future__ import annotations

import csv
import io
import math

import numpy as np

from .bands import IndicatorBand
from .errors import SchemaError
from .propagation import GridSpec

__all__ = ["BAND_ORDER", "grid_csv", "parse_grid_csv", "grid_payload"]

BAND_ORDER = (IndicatorBand.TOB_63, IndicatorBand.TOB_125,
              IndicatorBand.BROADBAND)


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def grid_csv(spec: GridSpec, grids: dict[IndicatorBand, np.ndarray],
             prefix: str) -> str:
    """Render per-band cell grids as `lat,lon,<prefix>_63_db,...` text."""
    header = ["lat", "lon"] + [f"{prefix}_{band.column_suffix}_db"
                               for band in BAND_ORDER]
    arrays = [np.asarray(grids[band]) for band in BAND_ORDER]
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    lat_c = spec.lat_centers
    lon_c = spec.lon_centers
    for i in range(spec.n_rows):
        for j in range(spec.n_cols):
            values = [a[i, j] for a in arrays]
            if all(math.isnan(v) for v in values):
                continue
            writer.writerow(
                [_fmt(lat_c[i]), _fmt(lon_c[j])]
                + ["" if math.isnan(v) else _fmt(v) for v in values])
    return out.getvalue()


def parse_grid_csv(text: str, prefix: str,
                   ) -> list[tuple[float, float, dict[IndicatorBand, float]]]:
    """Read a grid CSV back into (lat, lon, per-band level) rows."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise SchemaError("grid CSV has no header row")
    expected = [f"{prefix}_{band.column_suffix}_db" for band in BAND_ORDER]
    for col in ["lat", "lon"] + expected:
        if col not in reader.fieldnames:
            raise SchemaError(f"grid CSV is missing column {col!r}")
    rows = []
    for row in reader:
        levels = {}
        for band, col in zip(BAND_ORDER, expected):
            text_value = (row[col] or "").strip()
            levels[band] = float(text_value) if text_value else float("nan")
        rows.append((float(row["lat"]), float(row["lon"]), levels))
    return rows


def grid_payload(spec: GridSpec, values: np.ndarray) -> dict:
    """JSON-safe single-band grid: extent header + nested row-major values.

    Rows run south to north, columns west to east; absent cells are null.
    """
    safe = [[(float(v) if math.isfinite(v) else None) for v in row]
            for row in np.asarray(values)]
    return {
        "extent": {
            "min_lat": spec.lat_min,
            "min_lon": spec.lon_min,
            "max_lat": spec.lat_max,
            "max_lon": spec.lon_max,
        },
        "resolution_deg": spec.cell_deg,
        "n_rows": spec.n_rows,
        "n_cols": spec.n_cols,
        "values": safe,
    }
