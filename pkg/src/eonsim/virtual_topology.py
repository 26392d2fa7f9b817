"""Lightpath lifecycle and electrical traffic grooming.

A lightpath is a directed optical channel: a physical route, a spectrum
block, a modulation format and the flows currently multiplexed onto it.
Grooming follows the least-used-lightpath policy: among the active
lightpaths with the requested endpoints and enough residual capacity, pick
the one with the smallest utilisation ratio (ties broken by lower id).

Lightpaths exist only while they carry at least one flow: removing the last
flow tears the channel down, releasing its spectrum and closing its energy
accounting.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .energy import EnergyLedger
from .modulation import ModulationFormat
from .spectrum import SpectrumBlock, SpectrumState
from .topology import PhysicalPath

CAPACITY_EPS = 1e-9


class CapacityError(RuntimeError):
    """Channel capacity would be exceeded."""


@dataclass
class Flow:
    """One connection request; ``chain`` lists the lightpaths serving it,
    source to destination (its length is the virtual hop count)."""

    id: int
    source: int
    dest: int
    bitrate_gbps: float
    arrival_time: float = 0.0
    holding_s: float = 0.0
    chain: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.source == self.dest:
            raise ValueError("flow endpoints must differ")
        if self.bitrate_gbps <= 0:
            raise ValueError("flow bitrate must be positive")


@dataclass
class Lightpath:
    id: int
    route: PhysicalPath
    block: SpectrumBlock
    modulation: ModulationFormat
    capacity_gbps: float
    established_at: float
    used_gbps: float = 0.0
    flows: set[int] = field(default_factory=set)
    torn_down_at: Optional[float] = None

    @property
    def source(self) -> int:
        return self.route.source

    @property
    def dest(self) -> int:
        return self.route.dest

    @property
    def residual_gbps(self) -> float:
        return self.capacity_gbps - self.used_gbps


class VirtualTopology:
    """Active lightpaths of one run, indexed by endpoints for grooming."""

    def __init__(self, spectrum: SpectrumState, ledger: EnergyLedger, bvt_max_slots: int = 32):
        self._spectrum = spectrum
        self._ledger = ledger
        self.bvt_max_slots = bvt_max_slots
        self.active: dict[int, Lightpath] = {}
        self._by_pair: dict[tuple[int, int], list[int]] = {}
        self._next_id = 0
        self.established_by_format: Counter[str] = Counter()
        self.total_established = 0

    def establish(
        self,
        route: PhysicalPath,
        block: SpectrumBlock,
        modulation: ModulationFormat,
        now: float,
    ) -> Lightpath:
        """Register a lightpath whose spectrum has already been allocated."""
        if block.data_len > self.bvt_max_slots:
            raise CapacityError(
                f"{block.data_len} data slots exceed the {self.bvt_max_slots}-slot transponder limit"
            )
        if route.total_km > modulation.reach_km:
            raise ValueError(
                f"route of {route.total_km} km exceeds {modulation.name} reach {modulation.reach_km} km"
            )
        lp = Lightpath(
            id=self._next_id,
            route=route,
            block=block,
            modulation=modulation,
            capacity_gbps=block.data_len * modulation.subcarrier_gbps,
            established_at=now,
        )
        self._next_id += 1
        self.active[lp.id] = lp
        self._by_pair.setdefault((lp.source, lp.dest), []).append(lp.id)
        self.established_by_format[modulation.name] += 1
        self.total_established += 1
        self._ledger.on_establish(lp)
        return lp

    def groom(self, source: int, dest: int, bitrate_gbps: float) -> Optional[Lightpath]:
        """Least-used active lightpath source->dest that can absorb the flow."""
        ids = self._by_pair.get((source, dest))
        if not ids:
            return None
        best = None
        best_key = None
        for lp_id in ids:
            lp = self.active[lp_id]
            if lp.residual_gbps + CAPACITY_EPS < bitrate_gbps:
                continue
            key = (lp.used_gbps / lp.capacity_gbps, lp.id)
            if best_key is None or key < best_key:
                best, best_key = lp, key
        return best

    # -- capacity reservation (tentative, no flow membership) ---------------

    def reserve_capacity(self, lp: Lightpath, gbps: float) -> None:
        if lp.residual_gbps + CAPACITY_EPS < gbps:
            raise CapacityError(f"lightpath {lp.id} residual {lp.residual_gbps} < {gbps}")
        lp.used_gbps += gbps

    def unreserve_capacity(self, lp: Lightpath, gbps: float) -> None:
        lp.used_gbps -= gbps

    # -- flow membership -----------------------------------------------------

    def add_flow(self, lp: Lightpath, flow: Flow) -> None:
        """Groom a flow onto a lightpath, charging its bitrate."""
        self.reserve_capacity(lp, flow.bitrate_gbps)
        lp.flows.add(flow.id)
        flow.chain.append(lp.id)

    def attach_reserved(self, lp: Lightpath, flow: Flow) -> None:
        """Record membership for a flow whose bitrate is already reserved."""
        lp.flows.add(flow.id)
        flow.chain.append(lp.id)

    def remove_flow(self, lp: Lightpath, flow: Flow, now: float) -> None:
        """Drop a flow; tears the lightpath down when it empties."""
        if flow.id not in lp.flows:
            raise KeyError(f"flow {flow.id} not on lightpath {lp.id}")
        lp.flows.discard(flow.id)
        lp.used_gbps -= flow.bitrate_gbps
        if not lp.flows:
            self.teardown(lp, now)

    def teardown(self, lp: Lightpath, now: float) -> None:
        self._spectrum.release(lp.route.grids, lp.block)
        self._ledger.on_teardown(lp, now)
        lp.torn_down_at = now
        del self.active[lp.id]
        ids = self._by_pair[(lp.source, lp.dest)]
        ids.remove(lp.id)
        if not ids:
            del self._by_pair[(lp.source, lp.dest)]

    # -- inspection ----------------------------------------------------------

    def lightpaths_between(self, source: int, dest: int) -> list[Lightpath]:
        return [self.active[i] for i in self._by_pair.get((source, dest), ())]

    def total_used_gbps(self) -> float:
        return sum(lp.used_gbps for lp in self.active.values())
