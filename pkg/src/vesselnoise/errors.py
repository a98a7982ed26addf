"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: schema problems (malformed input files,
unknown columns, bad payload shapes) exit 2, domain problems (values outside
physical or geographic validity) exit 3, configuration problems exit 4.
"""

from __future__ import annotations

__all__ = [
    "VesselNoiseError",
    "SchemaError",
    "DomainError",
    "ConfigError",
    "MissingAttributeError",
    "OutOfDomainError",
    "IncompleteSpectrumError",
    "EmptyRegionError",
    "InvalidGeometryError",
]


class VesselNoiseError(Exception):
    """Base class for all package-specific errors."""


class SchemaError(VesselNoiseError):
    """Input does not match the documented schema (columns, types, shape)."""


class DomainError(VesselNoiseError):
    """Value is syntactically fine but outside the supported domain."""


class ConfigError(VesselNoiseError):
    """Configuration file or referenced resource is missing or invalid."""


class MissingAttributeError(DomainError):
    """A vessel attribute required by the selected model is absent."""


class OutOfDomainError(DomainError):
    """A coordinate or parameter falls outside the covered extent."""


class IncompleteSpectrumError(DomainError):
    """A band-level spectrum lacks bands required by the requested quantity."""


class EmptyRegionError(DomainError):
    """A region query selects no grid cells."""


class InvalidGeometryError(DomainError):
    """A polygon is degenerate or malformed."""
