"""Instantaneous noise map: latest vessel states onto SPL grids.

The CLI map command and the live service endpoints both run through this
module, so the same vessel set over the same extent produces bit-identical
grids no matter the entry point. Callers pass records sorted by MMSI; the
accumulation order is the list order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bands import IndicatorBand
from .environment import EnvironmentField
from .errors import DomainError
from .gridio import BAND_ORDER
from .propagation import (
    GridSpec,
    NoiseGrid,
    RayFanConfig,
    footprint_energy,
    grid_to_spl,
    source_depth,
    source_footprint,
)
from .records import VesselRecord, is_radiating, with_default_dimensions
from .sl import UNSUPPORTED, ModelData, SlModelId, classify, source_band_level

__all__ = ["VesselLevels", "MapDiagnostics", "compute_levels", "spl_map"]

_DEFAULT_DATA = ModelData()


@dataclass(frozen=True)
class VesselLevels:
    """One vessel's effective record and per-band source levels.

    ``record`` has class-median dimensions filled in where the report had
    none; ``original`` keeps the report as received so callers can tell
    which attributes were estimated. A band maps to None when the model
    does not support the vessel or errors out on its attributes.
    """

    original: VesselRecord
    record: VesselRecord
    supported: bool
    levels: dict[IndicatorBand, float | None]


@dataclass
class MapDiagnostics:
    """Accounting of which vessels made it onto the grid."""

    total: int = 0
    gridded: int = 0
    not_radiating: int = 0
    unsupported: int = 0
    no_water: int = 0


def compute_levels(record: VesselRecord, model: SlModelId,
                   data: ModelData = _DEFAULT_DATA,
                   bands: tuple[IndicatorBand, ...] = BAND_ORDER,
                   ) -> VesselLevels:
    """Source levels for one vessel under one model, defaults applied."""
    eff = with_default_dimensions(record)
    supported = classify(eff, model, data) is not UNSUPPORTED
    levels: dict[IndicatorBand, float | None] = {}
    for band in bands:
        if not supported:
            levels[band] = None
            continue
        try:
            value = source_band_level(eff, model, band, data)
        except DomainError:
            levels[band] = None
            continue
        levels[band] = None if value is UNSUPPORTED else float(value)
    return VesselLevels(original=record, record=eff, supported=supported,
                        levels=levels)


def spl_map(vessels: list[VesselLevels], env: EnvironmentField,
            cfg: RayFanConfig, spec: GridSpec,
            bands: tuple[IndicatorBand, ...] = BAND_ORDER,
            ) -> tuple[dict[IndicatorBand, np.ndarray], MapDiagnostics]:
    """SPL grids (dB, NaN where nothing arrived) for an instantaneous scene.

    One footprint per vessel, reused across bands; only the per-band
    absorption differs. Anchored or drifting vessels and vessels without a
    usable source level stay listed upstream but add nothing here.
    """
    flat = {band: np.zeros(spec.n_rows * spec.n_cols) for band in bands}
    diag = MapDiagnostics(total=len(vessels))
    for v in vessels:
        rec = v.record
        if not is_radiating(rec):
            diag.not_radiating += 1
            continue
        if all(v.levels.get(band) is None for band in bands):
            diag.unsupported += 1
            continue
        water = env.bathymetry.sample_many(
            np.array([rec.lat]), np.array([rec.lon]))[0]
        if np.isnan(water):
            diag.no_water += 1
            continue
        fp = source_footprint(
            rec.lat, rec.lon, source_depth(rec.draft_m, float(water), cfg),
            env, cfg, spec)
        for band in bands:
            level = v.levels.get(band)
            if level is not None:
                footprint_energy(fp, level, band, cfg, flat[band])
        diag.gridded += 1
    spl = {}
    for band in bands:
        grid = NoiseGrid(spec=spec, band=band,
                         energy=flat[band].reshape(spec.n_rows, spec.n_cols))
        spl[band] = grid_to_spl(grid)
    return spl, diag
