"""Flat ``section.key = value`` configuration files.

Numbers are SI by contract; no unit suffixes are parsed. ``#`` starts a
comment. Vectors are comma separated, lists of vectors semicolon separated::

    # water / air, SI units
    media.kappa_w = 2.07e9        # N m^-2
    cloud.volume_fraction = 0     # no-bubble control run
    receivers.positions = 0.02,0,0; -0.02,0,0
"""

from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Any, Callable

from .errors import BubbleFocusError, ConfigError
from .experiments import ExperimentConfig
from .physics import MediaParams


def _vector(text: str) -> tuple[float, ...]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected 3 comma-separated numbers, got {text!r}")
    return tuple(float(p) for p in parts)


def _vectors(text: str) -> tuple[tuple[float, ...], ...]:
    return tuple(_vector(chunk) for chunk in text.split(";") if chunk.strip())


def _optional_int(text: str):
    return None if text.strip().lower() in ("", "none", "auto") else int(text)


def _optional_float(text: str):
    return None if text.strip().lower() in ("", "none", "auto") else float(text)


# dotted key -> (target, field name, parser); target "media" fills MediaParams
KEYS: dict[str, tuple[str, str, Callable[[str], Any]]] = {
    "media.rho_w": ("media", "rho_w", float),
    "media.rho_b": ("media", "rho_b", float),
    "media.kappa_w": ("media", "kappa_w", float),
    "media.kappa_b": ("media", "kappa_b", float),
    "cloud.radius": ("cfg", "radius", float),
    "cloud.box_length": ("cfg", "box_length", float),
    "cloud.volume_fraction": ("cfg", "volume_fraction", float),
    "cloud.n_bubbles": ("cfg", "n_bubbles", _optional_int),
    "cloud.seed": ("cfg", "seed", int),
    "cloud.exclusion_factor": ("cfg", "exclusion_factor", float),
    "cloud.max_attempts": ("cfg", "max_attempts", int),
    "source.position": ("cfg", "source", _vector),
    "receivers.positions": ("cfg", "receivers", _vectors),
    "pulse.omega_r": ("cfg", "omega_r", float),
    "pulse.t0": ("cfg", "t0", float),
    "pulse.duration": ("cfg", "duration", float),
    "pulse.dt": ("cfg", "dt", float),
    "pulse.window": ("cfg", "window", float),
    "pulse.amplitude": ("cfg", "pulse_amplitude", float),
    "sweep.band_factor": ("cfg", "band_factor", float),
    "sweep.threads": ("cfg", "threads", int),
    "line.extent": ("cfg", "line_extent", _optional_float),
    "line.samples": ("cfg", "line_samples", int),
    "green.omega_min": ("cfg", "green_omega_min", float),
    "green.omega_max": ("cfg", "green_omega_max", float),
    "reverse.t_min": ("cfg", "reverse_t_min", float),
    "reverse.t_max": ("cfg", "reverse_t_max", float),
    "model.variant": ("cfg", "variant", str),
}


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    cfg_fields: dict[str, Any] = {}
    media_fields: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}", field=key, line=lineno)
        target, name, parse = KEYS[key]
        try:
            parsed = parse(value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}", field=key, line=lineno) from None
        (media_fields if target == "media" else cfg_fields)[name] = parsed
    try:
        return ExperimentConfig(media=MediaParams(**media_fields), **cfg_fields)
    except (BubbleFocusError, ValueError) as exc:
        raise ConfigError(f"{source}: invalid configuration: {exc}") from None


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Read a configuration file; missing keys take the water/air defaults."""
    if path is None:
        return ExperimentConfig()
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_config(text, str(p))


def dump_config(cfg: ExperimentConfig) -> str:
    """Inverse of :func:`parse_config` (round-trips through ``repr`` of floats)."""
    lines = []
    for key, (target, name, _) in KEYS.items():
        value = getattr(cfg.media if target == "media" else cfg, name)
        if name == "source":
            text = ",".join(repr(v) for v in value)
        elif name == "receivers":
            text = "; ".join(",".join(repr(v) for v in r) for r in value)
        elif value is None:
            text = "none"
        else:
            text = repr(value) if not isinstance(value, str) else value
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def with_overrides(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    changes = {k: v for k, v in changes.items() if v is not None}
    return dataclasses.replace(cfg, **changes) if changes else cfg
