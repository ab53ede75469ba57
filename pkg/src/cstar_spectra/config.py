"""
Configuration for cstar-spectra.

Lookup order (later layers win):
1. Built-in defaults
2. Environment variables (CSTAR_SPECTRA_EQ_TOL, CSTAR_SPECTRA_BOUNDARY_BAND,
   CSTAR_SPECTRA_ORACLE_SV_TOL, CSTAR_SPECTRA_TRUNCATION)
3. User config file (~/.config/cstar-spectra/config.json)
4. Explicit --config file
5. The "config" object of a query document
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .errors import ConfigError

APP_NAME = "cstar-spectra"

# Environment variable -> config key
ENV_VARS = {
    "CSTAR_SPECTRA_EQ_TOL": "eq_tol",
    "CSTAR_SPECTRA_BOUNDARY_BAND": "boundary_band",
    "CSTAR_SPECTRA_ORACLE_SV_TOL": "oracle_sv_tol",
    "CSTAR_SPECTRA_TRUNCATION": "truncation",
}

TOLERANCE_KEYS = ("eq_tol", "boundary_band", "oracle_sv_tol")

# Short names accepted inside query documents
KEY_ALIASES = {
    "N": "truncation",
    "ladder": "oracle_depths",
}


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds shared by every rule."""

    eq_tol: float = 1e-9
    boundary_band: float = 1e-6
    oracle_sv_tol: float = 1e-8

    def __post_init__(self):
        for name in TOLERANCE_KEYS:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not value > 0:
                raise ConfigError(f"{name} must be strictly positive, got {value!r}")
        if self.boundary_band <= self.eq_tol:
            raise ConfigError(
                f"boundary_band ({self.boundary_band}) must exceed eq_tol ({self.eq_tol})"
            )


@dataclass(frozen=True)
class SpectraConfig:
    """Tolerances plus truncation depths and ladders."""

    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    truncation: int = 48
    bilateral_radius: int = 24
    witness_depth: int = 64
    kernel_depth: int = 128
    diagnostic_depths: tuple[int, ...] = (16, 32, 64, 128)
    diagnostic_max_depth: int = 4096
    oracle_depths: tuple[int, ...] = (16, 32, 64, 128)
    screen_fibers: int = 8

    def __post_init__(self):
        for name in ("truncation", "bilateral_radius", "witness_depth", "kernel_depth"):
            if getattr(self, name) < 4:
                raise ConfigError(f"{name} must be at least 4")
        for name in ("diagnostic_depths", "oracle_depths"):
            ladder = getattr(self, name)
            if len(ladder) < 3 or any(b <= a for a, b in zip(ladder, ladder[1:])):
                raise ConfigError(f"{name} must be strictly increasing with at least 3 entries")
        if self.diagnostic_max_depth < self.diagnostic_depths[-1]:
            raise ConfigError("diagnostic_max_depth must be at least the last diagnostic depth")
        if self.screen_fibers < 1:
            raise ConfigError("screen_fibers must be positive")

    @property
    def eq_tol(self) -> float:
        return self.tolerances.eq_tol

    @property
    def boundary_band(self) -> float:
        return self.tolerances.boundary_band

    @property
    def oracle_sv_tol(self) -> float:
        return self.tolerances.oracle_sv_tol

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data.update(data.pop("tolerances"))
        return data


DEFAULT_CONFIG = SpectraConfig()


def get_config_dir() -> Path:
    """Get the config directory for this app."""
    if os.name == 'nt':  # Windows
        base = Path(os.environ.get('APPDATA', Path.home()))
    else:  # macOS, Linux
        base = Path(os.environ.get('XDG_CONFIG_HOME', Path.home() / '.config'))
    return base / APP_NAME


def get_config_file() -> Path:
    """Get the path to the user config file."""
    return get_config_dir() / 'config.json'


def _coerce(key: str, value: Any) -> Any:
    if key in TOLERANCE_KEYS:
        return float(value)
    if key in ("diagnostic_depths", "oracle_depths"):
        if isinstance(value, str):
            value = [v for v in value.replace(",", " ").split() if v]
        return tuple(int(v) for v in value)
    return int(value)


def _known_keys() -> set[str]:
    return {f.name for f in fields(SpectraConfig)} - {"tolerances"} | set(TOLERANCE_KEYS)


def _normalize(raw: dict[str, Any], origin: str) -> dict[str, Any]:
    """Flatten a {"tolerances": {...}} block, resolve aliases and coerce types."""
    flat = dict(raw)
    if isinstance(tolerances := flat.pop("tolerances", None), dict):
        flat.update(tolerances)

    known = _known_keys()
    values = {}
    for key, value in flat.items():
        key = KEY_ALIASES.get(key, key)
        if key not in known:
            raise ConfigError(f"unknown config key '{key}' in {origin}")
        try:
            values[key] = _coerce(key, value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid value for '{key}' in {origin}: {e}") from e
    return values


def _read_json_file(path: Path) -> dict[str, Any]:
    try:
        data = json.loads(path.read_text())
    except (json.JSONDecodeError, OSError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def _environment_layer() -> dict[str, Any]:
    raw = {key: value for var, key in ENV_VARS.items() if (value := os.environ.get(var))}
    return _normalize(raw, "environment")


def _user_file_layer() -> dict[str, Any]:
    config_file = get_config_file()
    if not config_file.exists():
        return {}
    return _normalize(_read_json_file(config_file), str(config_file))


def apply_overrides(base: SpectraConfig, values: dict[str, Any]) -> SpectraConfig:
    """Return a copy of ``base`` with flat config values applied."""
    values = _normalize(values, "overrides")
    tolerance_values = {k: values.pop(k) for k in TOLERANCE_KEYS if k in values}
    tolerances = replace(base.tolerances, **tolerance_values)
    return replace(base, tolerances=tolerances, **values)


def load_config(config_file: str | Path | None = None,
                overrides: dict[str, Any] | None = None) -> SpectraConfig:
    """Build the effective configuration from all layers."""
    config = apply_overrides(DEFAULT_CONFIG, _environment_layer())
    config = apply_overrides(config, _user_file_layer())
    if config_file is not None:
        path = Path(config_file)
        config = apply_overrides(config, _normalize(_read_json_file(path), str(path)))
    if overrides:
        config = apply_overrides(config, overrides)
    return config


def get_config_source() -> dict[str, str]:
    """Determine which layer supplies each setting (for display purposes)."""
    sources = {key: "default" for key in sorted(_known_keys())}
    for key in _environment_layer():
        sources[key] = "environment variable"
    try:
        for key in _user_file_layer():
            sources[key] = "config file"
    except ConfigError:
        pass
    return sources
