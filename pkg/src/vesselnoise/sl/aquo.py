"""AQUO component-based source spectrum.

The spectral density at 1 m is the power sum of machinery, non-cavitating
propeller, and cavitation components plus a size correction:

    SL_TOT(f) = 10 log10(10^(SL_mach/10) + 10^(SL_prop/10) + 10^(SL_cav/10))
                + 25 log10(L / L_ref)

Each component is piecewise in frequency with the form
const + c_f log10(f) + c_v log10(V); cavitation contributes only above the
class inception speed V_cav. The cargo class coefficients are built in and
also applied to tankers; further classes (ferries, cruise ships, fishing,
leisure, sailing) load from a coefficient CSV with schema
``class,freq_hz,term,value`` where term is one of
mach_const/mach_logf/mach_logv (likewise prop_*/cav_*) for the segment
starting at freq_hz, or the scalars l_ref/v_ref/v_cav/length_min/length_max/
speed_min/speed_max (freq_hz ignored). Speeds outside the class validity
domain are clamped with a warning; lengths outside it only warn.
"""

from __future__ import annotations

import csv
import math
import warnings
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..errors import ConfigError, DomainError, MissingAttributeError, SchemaError
from ..records import VesselCategory, VesselRecord

__all__ = [
    "AquoSegment",
    "AquoClassParams",
    "AquoRegistry",
    "CARGO_CLASS",
    "load_registry",
    "default_registry",
    "aquo_class_for",
    "aquo_psd",
]

_COMPONENTS = ("mach", "prop", "cav")


@dataclass(frozen=True)
class AquoSegment:
    """One frequency segment of one component: const + c_f log f + c_v log V."""

    start_hz: float
    const: float
    logf_coef: float
    logv_coef: float

    def level(self, f_hz: float, speed_kn: float) -> float:
        return (
            self.const
            + self.logf_coef * math.log10(f_hz)
            + self.logv_coef * math.log10(speed_kn)
        )


@dataclass(frozen=True)
class AquoClassParams:
    """Reference parameters, validity domains and component tables."""

    class_name: str
    l_ref_m: float
    v_ref_kn: float
    v_cav_kn: float
    length_domain_m: tuple[float, float]
    speed_domain_kn: tuple[float, float]
    components: dict[str, tuple[AquoSegment, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.v_cav_kn > self.v_ref_kn:
            raise ConfigError(
                f"AQUO class {self.class_name}: V_cav {self.v_cav_kn} exceeds "
                f"V_ref {self.v_ref_kn}")
        lo, hi = self.speed_domain_kn
        if not lo < hi:
            raise ConfigError(f"AQUO class {self.class_name}: empty speed domain")
        lo, hi = self.length_domain_m
        if not lo < hi:
            raise ConfigError(f"AQUO class {self.class_name}: empty length domain")

    def component_level(self, component: str, f_hz: float, speed_kn: float) -> float | None:
        segments = self.components.get(component)
        if not segments:
            return None
        starts = [s.start_hz for s in segments]
        idx = bisect_right(starts, f_hz) - 1
        if idx < 0:
            idx = 0
        return segments[idx].level(f_hz, speed_kn)


# Cargo coefficients; also applied to tankers (same 180 m / 14 kn references).
CARGO_CLASS = AquoClassParams(
    class_name="cargo",
    l_ref_m=180.0,
    v_ref_kn=14.0,
    v_cav_kn=10.0,
    length_domain_m=(100.0, 250.0),
    speed_domain_kn=(8.0, 20.0),
    components={
        "mach": (
            AquoSegment(0.0, 136.0, 0.0, 15.0),
            AquoSegment(200.0, 186.0, -22.0, 15.0),
        ),
        "prop": (
            AquoSegment(0.0, 109.0, -5.0, 50.0),
            AquoSegment(80.0, 156.0, -30.0, 50.0),
        ),
        "cav": (
            AquoSegment(0.0, 79.0, 10.0, 60.0),
            AquoSegment(50.0, 129.0, -20.0, 60.0),
        ),
    },
)

_TANKER_CLASS = AquoClassParams(
    class_name="tanker",
    l_ref_m=CARGO_CLASS.l_ref_m,
    v_ref_kn=CARGO_CLASS.v_ref_kn,
    v_cav_kn=CARGO_CLASS.v_cav_kn,
    length_domain_m=CARGO_CLASS.length_domain_m,
    speed_domain_kn=CARGO_CLASS.speed_domain_kn,
    components=CARGO_CLASS.components,
)

_SCALAR_TERMS = {
    "l_ref", "v_ref", "v_cav", "length_min", "length_max", "speed_min", "speed_max",
}


@dataclass(frozen=True)
class AquoRegistry:
    """Immutable class-name -> parameters lookup."""

    classes: dict[str, AquoClassParams]

    def get(self, name: str) -> AquoClassParams | None:
        return self.classes.get(name)


def _build_class(name: str, scalars: dict[str, float],
                 segments: dict[str, dict[float, dict[str, float]]]) -> AquoClassParams:
    missing = {"l_ref", "v_ref", "v_cav"} - set(scalars)
    if missing:
        raise SchemaError(f"AQUO class {name}: missing scalar terms {sorted(missing)}")
    components: dict[str, tuple[AquoSegment, ...]] = {}
    for comp, by_start in segments.items():
        rows = []
        for start in sorted(by_start):
            coefs = by_start[start]
            rows.append(AquoSegment(
                start_hz=start,
                const=coefs.get("const", 0.0),
                logf_coef=coefs.get("logf", 0.0),
                logv_coef=coefs.get("logv", 0.0),
            ))
        components[comp] = tuple(rows)
    return AquoClassParams(
        class_name=name,
        l_ref_m=scalars["l_ref"],
        v_ref_kn=scalars["v_ref"],
        v_cav_kn=scalars["v_cav"],
        length_domain_m=(scalars.get("length_min", 0.0),
                         scalars.get("length_max", math.inf)),
        speed_domain_kn=(scalars.get("speed_min", 0.0),
                         scalars.get("speed_max", math.inf)),
        components=components,
    )


def load_registry(path: Path | str) -> AquoRegistry:
    """Parse a coefficient CSV into a registry; built-ins stay available."""
    scalars: dict[str, dict[str, float]] = {}
    segments: dict[str, dict[str, dict[float, dict[str, float]]]] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read AQUO coefficients {path}: {exc}") from exc
    reader = csv.DictReader(
        line for line in text.splitlines() if line.strip() and not line.startswith("#"))
    expected = {"class", "freq_hz", "term", "value"}
    if reader.fieldnames is None or set(reader.fieldnames) != expected:
        raise SchemaError(
            f"AQUO coefficient file needs columns {sorted(expected)}, "
            f"got {reader.fieldnames}")
    for lineno, row in enumerate(reader, start=2):
        name = row["class"].strip()
        term = row["term"].strip()
        try:
            freq = float(row["freq_hz"])
            value = float(row["value"])
        except ValueError as exc:
            raise SchemaError(f"AQUO coefficients line {lineno}: {exc}") from exc
        if term in _SCALAR_TERMS:
            scalars.setdefault(name, {})[term] = value
        else:
            comp, _, kind = term.partition("_")
            if comp not in _COMPONENTS or kind not in ("const", "logf", "logv"):
                raise SchemaError(
                    f"AQUO coefficients line {lineno}: unknown term {term!r}")
            segments.setdefault(name, {}).setdefault(comp, {}).setdefault(
                freq, {})[kind] = value
    classes = {"cargo": CARGO_CLASS, "tanker": _TANKER_CLASS}
    for name in sorted(set(scalars) | set(segments)):
        classes[name] = _build_class(name, scalars.get(name, {}),
                                     segments.get(name, {}))
    return AquoRegistry(classes=classes)


@lru_cache(maxsize=1)
def default_registry() -> AquoRegistry:
    """Registry from the packaged coefficient file."""
    ref = resources.files("vesselnoise") / "data" / "aquo_classes.csv"
    with resources.as_file(ref) as path:
        return load_registry(path)


def aquo_class_for(vessel: VesselRecord,
                   registry: AquoRegistry | None = None) -> AquoClassParams | None:
    """Class lookup for a vessel; None when no table covers it."""
    reg = registry if registry is not None else default_registry()
    category = vessel.category
    if category is VesselCategory.CARGO:
        return reg.get("cargo")
    if category is VesselCategory.TANKER:
        return reg.get("tanker")
    if category is VesselCategory.PASSENGER:
        length = vessel.length_m
        if length is not None and length > 200.0:
            return reg.get("large_cruise") or reg.get("ferry")
        return reg.get("ferry")
    if category is VesselCategory.FISHING:
        return reg.get("fishing")
    if category is VesselCategory.PLEASURE:
        return reg.get("leisure")
    if category is VesselCategory.SAILING:
        return reg.get("sailing")
    return None


def aquo_psd(vessel: VesselRecord, f_hz: float,
             registry: AquoRegistry | None = None) -> float:
    """Source spectral density level, dB re 1 uPa^2/Hz at 1 m."""
    params = aquo_class_for(vessel, registry)
    if params is None:
        raise DomainError(
            f"mmsi {vessel.mmsi}: no AQUO class for AIS type {vessel.ais_type}")
    if vessel.length_m is None:
        raise MissingAttributeError(f"mmsi {vessel.mmsi}: AQUO requires length")
    if vessel.sog_kn <= 0.0:
        raise DomainError(f"mmsi {vessel.mmsi}: speed must be positive for AQUO")
    if f_hz <= 0.0 or not math.isfinite(f_hz):
        raise DomainError(f"frequency must be positive, got {f_hz!r}")

    speed = vessel.sog_kn
    lo, hi = params.speed_domain_kn
    if speed < lo or speed > hi:
        clamped = min(max(speed, lo), hi)
        warnings.warn(
            f"AQUO {params.class_name}: speed {speed} kn outside validity "
            f"domain [{lo}, {hi}], clamped to {clamped}",
            stacklevel=2)
        speed = clamped
    length = vessel.length_m
    llo, lhi = params.length_domain_m
    if length < llo or length > lhi:
        warnings.warn(
            f"AQUO {params.class_name}: length {length} m outside validity "
            f"domain [{llo}, {lhi}]",
            stacklevel=2)

    total = 0.0
    for component in _COMPONENTS:
        if component == "cav" and speed <= params.v_cav_kn:
            continue
        level = params.component_level(component, f_hz, speed)
        if level is not None:
            total += 10.0 ** (level / 10.0)
    if total <= 0.0:
        raise DomainError(
            f"AQUO {params.class_name}: no components defined at {f_hz} Hz")
    return 10.0 * math.log10(total) + 25.0 * math.log10(length / params.l_ref_m)
