"""Run configuration with validation and defaults.

Defaults: 320 slots per grid, 2-slot guard band, k=3 candidate routes,
rank budget 3 for the multi-hop engines, 32-slot transponders, 1e5 requests
with mean holding 600 s, all six modulation formats, bitrates 25..400 Gb/s
weighted 6:5:4:3:2:1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Mapping

from .modulation import resolve

DEFAULT_FORMATS = ("BPSK", "QPSK", "8QAM", "16QAM", "32QAM", "64QAM")
DEFAULT_BITRATES = (25.0, 50.0, 100.0, 200.0, 300.0, 400.0)
DEFAULT_WEIGHTS = (6, 5, 4, 3, 2, 1)


class ConfigError(ValueError):
    """Invalid run configuration; message lists every problem found."""


@dataclass(frozen=True)
class RunConfig:
    slots: int = 320
    guard_slots: int = 2
    rsa_k: int = 3
    max_rank: int = 3
    bvt_max_slots: int = 32
    formats: tuple[str, ...] = DEFAULT_FORMATS
    amms_static_mhc: int = 3
    warmup_requests: int = 0
    request_count: int = 100_000
    mean_holding_s: float = 600.0
    bitrates: tuple[float, ...] = DEFAULT_BITRATES
    weights: tuple[float, ...] = DEFAULT_WEIGHTS
    reps: int = 5
    seed: int = 1


_INT_FIELDS = {
    "slots": 8,
    "guard_slots": 0,
    "rsa_k": 1,
    "max_rank": 1,
    "bvt_max_slots": 1,
    "amms_static_mhc": 1,
    "warmup_requests": 0,
    "request_count": 1,
    "reps": 1,
}


def validate_config(overrides: Mapping | None = None) -> RunConfig:
    """Merge ``overrides`` over the defaults and validate; raises
    :class:`ConfigError` naming every offending key."""
    overrides = dict(overrides or {})
    known = {f.name for f in fields(RunConfig)}
    errors = []
    unknown = sorted(set(overrides) - known)
    if unknown:
        errors.append(f"unknown config keys: {', '.join(unknown)}")
        for key in unknown:
            overrides.pop(key)

    merged = {}
    for key, minimum in _INT_FIELDS.items():
        if key in overrides:
            try:
                value = int(overrides[key])
            except (TypeError, ValueError):
                errors.append(f"{key}: expected an integer, got {overrides[key]!r}")
                continue
            if value < minimum:
                errors.append(f"{key}: must be >= {minimum}, got {value}")
            else:
                merged[key] = value
    if "mean_holding_s" in overrides:
        try:
            value = float(overrides["mean_holding_s"])
        except (TypeError, ValueError):
            errors.append(f"mean_holding_s: expected a number, got {overrides['mean_holding_s']!r}")
        else:
            if value <= 0:
                errors.append(f"mean_holding_s: must be positive, got {value}")
            else:
                merged["mean_holding_s"] = value
    if "seed" in overrides:
        try:
            merged["seed"] = int(overrides["seed"])
        except (TypeError, ValueError):
            errors.append(f"seed: expected an integer, got {overrides['seed']!r}")
    if "formats" in overrides:
        raw = overrides["formats"]
        names = [s.strip() for s in raw.split(",")] if isinstance(raw, str) else list(raw)
        try:
            fmts = tuple(resolve(n).name for n in names)
            if len(set(fmts)) != len(fmts):
                raise ValueError("duplicate format")
            if not fmts:
                raise ValueError("empty format set")
            merged["formats"] = fmts
        except ValueError as exc:
            errors.append(f"formats: {exc}")
    if "bitrates" in overrides:
        try:
            rates = tuple(float(b) for b in overrides["bitrates"])
            if not rates or any(b <= 0 for b in rates):
                raise ValueError
            merged["bitrates"] = rates
        except (TypeError, ValueError):
            errors.append(f"bitrates: expected positive numbers, got {overrides['bitrates']!r}")
    if "weights" in overrides:
        try:
            weights = tuple(float(w) for w in overrides["weights"])
            if not weights or any(w <= 0 for w in weights):
                raise ValueError
            merged["weights"] = weights
        except (TypeError, ValueError):
            errors.append(f"weights: expected positive numbers, got {overrides['weights']!r}")

    candidate = dict(merged)
    bitrates = candidate.get("bitrates", DEFAULT_BITRATES)
    weights = candidate.get("weights", DEFAULT_WEIGHTS)
    if len(bitrates) != len(weights):
        errors.append(
            f"bitrates ({len(bitrates)}) and weights ({len(weights)}) must have matching lengths"
        )
    cfg = RunConfig(**merged) if not errors else None
    if cfg is not None and cfg.guard_slots + 1 > cfg.slots:
        errors.append("slots too small for one data slot plus the guard band")
    if errors:
        raise ConfigError("; ".join(errors))
    return cfg


def parse_config_file(path) -> dict:
    """Read ``key = value`` lines (# comments allowed) into a dict."""
    raw = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            key = key.strip()
            value = value.strip()
            if key in ("bitrates", "weights"):
                raw[key] = [v.strip() for v in value.split(",")]
            else:
                raw[key] = value
    return raw
