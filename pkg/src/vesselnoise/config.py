"""Application configuration: one YAML file drives CLI and service alike.

Every knob has a default; a minimal config only names the input files.
Unknown keys are rejected so typos fail loudly instead of silently running
with defaults.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import yaml

from .environment import EnvironmentField
from .errors import ConfigError, DomainError
from .exposure import DEFAULT_CAP_BUFFER_KM, DEFAULT_GAP_THRESHOLD_S
from .geo import RegionDefinition, load_regions
from .propagation import RayFanConfig
from .sl import ModelData, SlModelId
from .sl.aquo import load_registry
from .sl.srv import load_coefficients

__all__ = ["TierLimits", "FeedConfig", "ServiceConfig", "ExposureConfig",
           "AppConfig", "DEFAULT_TIERS"]


@dataclass(frozen=True)
class TierLimits:
    max_sel_days: int
    max_sel_area_deg2: float


DEFAULT_TIERS = {
    "guest": TierLimits(max_sel_days=1, max_sel_area_deg2=4.0),
    "registered": TierLimits(max_sel_days=30, max_sel_area_deg2=100.0),
}


@dataclass(frozen=True)
class FeedConfig:
    endpoint_env: str = "VESSELNOISE_FEED_URL"
    api_key_env: str = "VESSELNOISE_FEED_KEY"
    poll_interval_s: float = 60.0
    cache_ttl_s: float = 180.0


@dataclass(frozen=True)
class ServiceConfig:
    history_validity_s: float = 600.0
    max_vessels: int = 2000
    sel_workers: int = 2
    tiers: dict = field(default_factory=lambda: dict(DEFAULT_TIERS))
    api_keys: dict = field(default_factory=dict)   # key -> tier name


@dataclass(frozen=True)
class ExposureConfig:
    gap_threshold_s: float = DEFAULT_GAP_THRESHOLD_S
    cap_buffer_km: float = DEFAULT_CAP_BUFFER_KM
    # COMBINED per the method; pinnable to a single model in test configs.
    model: SlModelId = SlModelId.COMBINED


@dataclass(frozen=True)
class AppConfig:
    bathymetry_path: str | None = None
    bathymetry_convention: str | None = None
    ssp_path: str | None = None
    mpa_path: str | None = None
    regions_path: str | None = None
    store_path: str = "vessel_reports.sqlite"
    cell_deg: float = 0.01
    ray: RayFanConfig = field(default_factory=RayFanConfig)
    feed: FeedConfig = field(default_factory=FeedConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)
    exposure: ExposureConfig = field(default_factory=ExposureConfig)
    aquo_classes_path: str | None = None
    srv_coefficients_path: str | None = None

    @classmethod
    def from_yaml(cls, path: Path | str) -> "AppConfig":
        try:
            raw = yaml.safe_load(Path(path).read_text()) or {}
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except yaml.YAMLError as exc:
            raise ConfigError(f"config file is not valid YAML: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a mapping")
        base = Path(path).parent
        return cls.from_mapping(raw, base=base)

    @classmethod
    def from_mapping(cls, raw: dict, base: Path | None = None) -> "AppConfig":
        raw = dict(raw)
        files = _section(raw, "files")
        grid = _section(raw, "grid")
        propagation = _section(raw, "propagation")
        feed = _section(raw, "feed")
        service = _section(raw, "service")
        exposure = _section(raw, "exposure")
        sl_data = _section(raw, "sl")
        if raw:
            raise ConfigError(f"unknown config section(s): {sorted(raw)}")

        def resolve(value):
            if value is None or base is None:
                return value
            p = Path(value)
            return str(p if p.is_absolute() else base / p)

        tiers = dict(DEFAULT_TIERS)
        for name, limits in _pop(service, "tiers", {}).items():
            limits = dict(limits)
            tiers[name] = TierLimits(
                max_sel_days=int(_pop(limits, "max_sel_days")),
                max_sel_area_deg2=float(_pop(limits, "max_sel_area_deg2")),
            )
            if limits:
                raise ConfigError(
                    f"unknown tier option(s) for {name!r}: {sorted(limits)}")

        cfg = cls(
            bathymetry_path=resolve(_pop(files, "bathymetry", None)),
            bathymetry_convention=_pop(files, "bathymetry_convention", None),
            ssp_path=resolve(_pop(files, "sound_speed", None)),
            mpa_path=resolve(_pop(files, "mpas", None)),
            regions_path=resolve(_pop(files, "regions", None)),
            store_path=resolve(_pop(files, "store", "vessel_reports.sqlite")),
            cell_deg=float(_pop(grid, "cell_deg", 0.01)),
            ray=_ray_config(propagation),
            feed=FeedConfig(
                endpoint_env=str(_pop(feed, "endpoint_env",
                                      FeedConfig.endpoint_env)),
                api_key_env=str(_pop(feed, "api_key_env",
                                     FeedConfig.api_key_env)),
                poll_interval_s=float(_pop(feed, "poll_interval_s", 60.0)),
                cache_ttl_s=float(_pop(feed, "cache_ttl_s", 180.0)),
            ),
            service=ServiceConfig(
                history_validity_s=float(_pop(service, "history_validity_s",
                                              600.0)),
                max_vessels=int(_pop(service, "max_vessels", 2000)),
                sel_workers=int(_pop(service, "sel_workers", 2)),
                tiers=tiers,
                api_keys=dict(_pop(service, "api_keys", {})),
            ),
            exposure=ExposureConfig(
                gap_threshold_s=float(_pop(exposure, "gap_threshold_s",
                                           DEFAULT_GAP_THRESHOLD_S)),
                cap_buffer_km=float(_pop(exposure, "cap_buffer_km",
                                         DEFAULT_CAP_BUFFER_KM)),
                model=_parse_model(_pop(exposure, "model", "combined")),
            ),
            aquo_classes_path=resolve(_pop(sl_data, "aquo_classes", None)),
            srv_coefficients_path=resolve(_pop(sl_data, "srv_coefficients",
                                               None)),
        )
        for section, name in ((files, "files"), (grid, "grid"), (feed, "feed"),
                              (service, "service"), (exposure, "exposure"),
                              (sl_data, "sl")):
            if section:
                raise ConfigError(
                    f"unknown option(s) in {name!r}: {sorted(section)}")
        if not (cfg.cell_deg > 0.0):
            raise ConfigError("grid.cell_deg must be positive")
        if cfg.feed.cache_ttl_s <= 0 or cfg.feed.poll_interval_s <= 0:
            raise ConfigError("feed interval and TTL must be positive")
        for tier_name in cfg.service.api_keys.values():
            if tier_name not in cfg.service.tiers:
                raise ConfigError(f"api key maps to unknown tier {tier_name!r}")
        return cfg

    def load_environment(self) -> EnvironmentField:
        if self.bathymetry_path is None:
            raise ConfigError("files.bathymetry is required for this operation")
        return EnvironmentField.load(
            bathymetry_path=self.bathymetry_path,
            convention=self.bathymetry_convention,
            ssp_path=self.ssp_path,
            mpa_path=self.mpa_path,
        )

    def load_regions(self) -> dict[str, RegionDefinition]:
        if self.regions_path is None:
            raise ConfigError("files.regions is required for this operation")
        return load_regions(self.regions_path)

    def model_data(self) -> ModelData:
        aquo = (load_registry(self.aquo_classes_path)
                if self.aquo_classes_path else None)
        srv = (load_coefficients(self.srv_coefficients_path)
               if self.srv_coefficients_path else None)
        kwargs = {}
        if aquo is not None:
            kwargs["aquo"] = aquo
        if srv is not None:
            kwargs["srv"] = srv
        return ModelData(**kwargs)

    def result_hash(self) -> str:
        """Digest of every setting that shapes computed grids; job and cache
        keys include it so a config change never serves stale results."""
        ray = {f.name: getattr(self.ray, f.name)
               for f in dc_fields(RayFanConfig)}
        payload = {
            "bathymetry": self.bathymetry_path,
            "convention": self.bathymetry_convention,
            "ssp": self.ssp_path,
            "cell_deg": self.cell_deg,
            "ray": ray,
            "gap_threshold_s": self.exposure.gap_threshold_s,
            "cap_buffer_km": self.exposure.cap_buffer_km,
            "model": self.exposure.model.value,
            "aquo": self.aquo_classes_path,
            "srv": self.srv_coefficients_path,
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _section(raw: dict, name: str) -> dict:
    value = raw.pop(name, {}) or {}
    if not isinstance(value, dict):
        raise ConfigError(f"config section {name!r} must be a mapping")
    return dict(value)


_MISSING = object()


def _pop(section: dict, key: str, default=_MISSING):
    if key in section:
        return section.pop(key)
    if default is _MISSING:
        raise ConfigError(f"missing required config key {key!r}")
    return default


def _parse_model(text: str) -> SlModelId:
    try:
        return SlModelId.parse(text)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def _ray_config(section: dict) -> RayFanConfig:
    kwargs = {}
    valid = {f.name: f.type for f in dc_fields(RayFanConfig)}
    for key in list(section):
        if key not in valid:
            raise ConfigError(f"unknown propagation option {key!r}")
        value = section.pop(key)
        kwargs[key] = int(value) if key == "max_bounces" else float(value)
    return RayFanConfig(**kwargs)
