"""Bandwidth-variable transponder modulation formats.

Six formats from BPSK (1 bit/symbol) to 64QAM (6 bits/symbol). Capacity per
12.5 GHz subcarrier grows by 12.5 Gb/s per extra bit; transparent reach halves
with each extra bit (half-distance law).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Union

SLOT_WIDTH_GHZ = 12.5


@dataclass(frozen=True)
class ModulationFormat:
    """One row of the transponder capability table.

    ``power_w`` is the catalogue per-subcarrier figure, kept for reference
    only; energy accounting interpolates from the transmission rate instead
    (see :func:`eonsim.energy.pc_bvt`).
    """

    name: str
    bits_per_symbol: int
    subcarrier_gbps: float
    reach_km: float
    power_w: float


FORMATS: tuple[ModulationFormat, ...] = (
    ModulationFormat("BPSK", 1, 12.5, 8000.0, 112.374),
    ModulationFormat("QPSK", 2, 25.0, 4000.0, 133.416),
    ModulationFormat("8QAM", 3, 37.5, 2000.0, 154.457),
    ModulationFormat("16QAM", 4, 50.0, 1000.0, 175.498),
    ModulationFormat("32QAM", 5, 62.5, 500.0, 196.539),
    ModulationFormat("64QAM", 6, 75.0, 250.0, 217.581),
)

BY_NAME = {f.name: f for f in FORMATS}
BY_BITS = {f.bits_per_symbol: f for f in FORMATS}

FormatLike = Union[str, ModulationFormat]


def resolve(fmt: FormatLike) -> ModulationFormat:
    """Accept a format object or its name ("QPSK")."""
    if isinstance(fmt, ModulationFormat):
        return fmt
    try:
        return BY_NAME[str(fmt).upper()]
    except KeyError:
        raise ValueError(f"unknown modulation format {fmt!r}") from None


def slots_needed(bitrate_gbps: float, m: FormatLike) -> int:
    """Data slots (excluding guard band) to carry ``bitrate_gbps`` at format ``m``."""
    if bitrate_gbps <= 0:
        raise ValueError(f"bitrate must be positive, got {bitrate_gbps}")
    m = resolve(m)
    return max(1, math.ceil(bitrate_gbps / m.subcarrier_gbps))


def reach_ok(distance_km: float, m: FormatLike) -> bool:
    """True when a lightpath of ``distance_km`` preserves QoT at format ``m``."""
    return distance_km <= resolve(m).reach_km


def next_lower(m: FormatLike) -> Optional[ModulationFormat]:
    """The format one modulation level down, or None below BPSK."""
    return BY_BITS.get(resolve(m).bits_per_symbol - 1)


def formats_desc(names: Optional[Iterable[str]] = None) -> tuple[ModulationFormat, ...]:
    """Available formats ordered most spectrally efficient first."""
    if names is None:
        fmts = FORMATS
    else:
        fmts = tuple(resolve(n) for n in names)
        if len({f.name for f in fmts}) != len(fmts):
            raise ValueError("duplicate modulation format in available set")
        if not fmts:
            raise ValueError("available format set must not be empty")
    return tuple(sorted(fmts, key=lambda f: -f.bits_per_symbol))


def most_efficient(names: Optional[Iterable[str]] = None) -> ModulationFormat:
    """Most spectrally efficient format of the available set (maxM)."""
    return formats_desc(names)[0]
