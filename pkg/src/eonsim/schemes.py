"""Modulation-scheme engines.

Each engine turns a connection request (source, dest, bitrate) into one or
more RSA segment calls and either commits a full plan or leaves the network
untouched:

* ``madap``       single hop; tries modulations from most to least efficient
                  over the k shortest physical routes.
* ``eems``        like madap, then settles on the lowest modulation level
                  that needs the same number of slots on the chosen route.
* ``amms``        multi-hop with a static hop budget; every segment uses the
                  same modulation.
* ``dmmas``       multi-hop with a dynamic hop budget driven by the current
                  network entropy fragmentation, and per-segment modulation
                  upgrades.
* ``dmmaswomhc``  dmmas with the hop budget removed.

The multi-hop engines route over per-modulation reachability graphs: the
rank-k route between s and d in the graph of format M decomposes into
sub-paths, one per graph edge, whose interior endpoints are the articulation
(OEO regeneration) nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from . import rsa
from .modulation import ModulationFormat, slots_needed
from .topology import ModulationTopology, PhysicalPath, PhysicalTopology, build_modulation_topology
from .virtual_topology import Flow


@dataclass(frozen=True)
class SubPath:
    """One segment of a multi-hop plan: endpoints, the stored physical path
    between them, and the modulation the segment should use."""

    source: int
    dest: int
    path: PhysicalPath
    modulation: ModulationFormat


SubPathSet = tuple[SubPath, ...]


class PrecomputedRoutes:
    """Routing tables computed once per topology and shared by all runs.

    ``physical_paths(s, d)``   the k shortest physical routes (RSA candidates).
    ``virtual_route(m, s, d, rank)``  the rank-th best route through the
    reachability graph of format ``m``, decomposed into sub-paths; None when
    fewer than ``rank`` routes exist.
    """

    def __init__(
        self,
        topo: PhysicalTopology,
        formats: Sequence[ModulationFormat],
        rsa_k: int = 3,
        max_rank: int = 3,
    ):
        self.topo = topo
        self.rsa_k = rsa_k
        self.max_rank = max_rank
        self.mod_topologies: dict[str, ModulationTopology] = {
            m.name: build_modulation_topology(topo, m) for m in formats
        }
        self._physical: dict[tuple[int, int], tuple[PhysicalPath, ...]] = {}
        self._virtual: dict[tuple[str, int, int], tuple[SubPathSet, ...]] = {}
        pairs = [
            (s, d) for s in range(topo.n_nodes) for d in range(topo.n_nodes) if s != d
        ]
        for s, d in pairs:
            self._physical[(s, d)] = tuple(topo.k_shortest_paths(s, d, rsa_k))
        for m in formats:
            mt = self.mod_topologies[m.name]
            for s, d in pairs:
                seqs = mt.k_paths(s, d, max_rank)
                routes = tuple(
                    tuple(
                        SubPath(u, v, mt.edge_path(u, v), m)
                        for u, v in zip(seq, seq[1:])
                    )
                    for seq in seqs
                )
                if routes:
                    self._virtual[(m.name, s, d)] = routes

    def physical_paths(self, s: int, d: int) -> tuple[PhysicalPath, ...]:
        return self._physical[(s, d)]

    def virtual_route(self, m: ModulationFormat, s: int, d: int, rank: int) -> Optional[SubPathSet]:
        if not 1 <= rank <= self.max_rank:
            raise ValueError(f"rank must be in 1..{self.max_rank}, got {rank}")
        routes = self._virtual.get((m.name, s, d))
        if routes is None or len(routes) < rank:
            return None
        return routes[rank - 1]


def compute_mhc(dia_km: float, f_ent_norm: float, max_reach_km: float) -> int:
    """Hop budget: ceil(diameter * fragmentation / best reach), at least 1."""
    return max(1, math.ceil(dia_km * f_ent_norm / max_reach_km))


def spec_eff(subpaths: SubPathSet, floor: ModulationFormat, formats_desc: Sequence[ModulationFormat]) -> SubPathSet:
    """Upgrade each sub-path to the most efficient format whose reach covers
    it, never dropping below ``floor`` (the format the route was found in)."""
    upgraded = []
    for sp in subpaths:
        chosen = floor
        for m in formats_desc:
            if m.bits_per_symbol < floor.bits_per_symbol:
                break
            if sp.path.total_km <= m.reach_km:
                chosen = m
                break
        upgraded.append(SubPath(sp.source, sp.dest, sp.path, chosen))
    return tuple(upgraded)


class SchemeEngine:
    """Base: shared plumbing for attempting and committing sub-path sets.

    ``trace`` may be a list; when set, every served request appends a dict
    with the attempt sequence (modulation, rank, sub-path count, outcome)
    and the committed plan, for debugging and conformance checks.
    """

    name = "base"

    def __init__(self, state, trace: Optional[list] = None):
        self.state = state
        self.trace = trace

    def serve(self, flow: Flow, now: float) -> bool:
        raise NotImplementedError

    # -- helpers -------------------------------------------------------------

    def _attempt(self, subpaths: SubPathSet, flow: Flow, now: float) -> bool:
        """Reserve all segments or leave the state untouched."""
        txn = rsa.Transaction(self.state)
        for sp in subpaths:
            plan = rsa.serve_segment(
                self.state, txn, sp.source, sp.dest, flow.bitrate_gbps, sp.modulation
            )
            if plan is None:
                txn.rollback()
                return False
        txn.commit(flow, now)
        return True

    def _trace_new(self, flow: Flow, mhc: Optional[int]) -> Optional[dict]:
        if self.trace is None:
            return None
        rec = {
            "scheme": self.name,
            "flow": flow.id,
            "source": flow.source,
            "dest": flow.dest,
            "bitrate_gbps": flow.bitrate_gbps,
            "mhc": mhc,
            "attempts": [],
            "accepted": False,
            "plan": None,
        }
        self.trace.append(rec)
        return rec

    @staticmethod
    def _trace_attempt(rec: Optional[dict], m: ModulationFormat, rank: int, subpaths: Optional[SubPathSet], outcome: str) -> None:
        if rec is not None:
            rec["attempts"].append(
                {
                    "modulation": m.name,
                    "rank": rank,
                    "subpaths": None if subpaths is None else len(subpaths),
                    "outcome": outcome,
                }
            )

    @staticmethod
    def _trace_plan(rec: Optional[dict], flow: Flow, subpaths: SubPathSet) -> None:
        if rec is not None:
            rec["accepted"] = True
            rec["plan"] = [
                {
                    "source": sp.source,
                    "dest": sp.dest,
                    "km": sp.path.total_km,
                    "modulation": sp.modulation.name,
                }
                for sp in subpaths
            ]
            rec["chain"] = list(flow.chain)

    # -- multi-hop loop shared by dmmas / dmmaswomhc / amms -------------------

    def _multi_hop_serve(self, flow: Flow, now: float, mhc: Optional[int], upgrade: bool) -> bool:
        state = self.state
        rec = self._trace_new(flow, mhc)
        for m in state.formats_desc:
            for rank in range(1, state.config.max_rank + 1):
                subpaths = state.routes.virtual_route(m, flow.source, flow.dest, rank)
                if subpaths is None:
                    self._trace_attempt(rec, m, rank, None, "no-route")
                    continue
                if mhc is not None and len(subpaths) > mhc:
                    self._trace_attempt(rec, m, rank, subpaths, "over-hop-budget")
                    continue
                if upgrade:
                    subpaths = spec_eff(subpaths, m, state.formats_desc)
                if self._attempt(subpaths, flow, now):
                    self._trace_attempt(rec, m, rank, subpaths, "accepted")
                    self._trace_plan(rec, flow, subpaths)
                    return True
                self._trace_attempt(rec, m, rank, subpaths, "no-spectrum")
        return False


class DMMAS(SchemeEngine):
    """Dynamic hop budget from the entropy fragmentation index, plus
    per-segment modulation upgrades."""

    name = "dmmas"

    def serve(self, flow: Flow, now: float) -> bool:
        state = self.state
        mhc = compute_mhc(
            state.dia_km,
            state.spectrum.network_f_ent_normalized(),
            state.max_m.reach_km,
        )
        return self._multi_hop_serve(flow, now, mhc, upgrade=True)


class DMMASwoMHC(SchemeEngine):
    """DMMAS variant with no limit on virtual hops."""

    name = "dmmaswomhc"

    def serve(self, flow: Flow, now: float) -> bool:
        return self._multi_hop_serve(flow, now, None, upgrade=True)


class AMMS(SchemeEngine):
    """Static hop budget; one modulation level for all segments."""

    name = "amms"

    def serve(self, flow: Flow, now: float) -> bool:
        return self._multi_hop_serve(flow, now, self.state.config.amms_static_mhc, upgrade=False)


class MAdap(SchemeEngine):
    """Single-hop adaptive modulation: first feasible level, scanning from
    the most spectrally efficient downwards."""

    name = "madap"

    def serve(self, flow: Flow, now: float) -> bool:
        rec = self._trace_new(flow, None)
        for m in self.state.formats_desc:
            txn = rsa.Transaction(self.state)
            plan = rsa.serve_segment(self.state, txn, flow.source, flow.dest, flow.bitrate_gbps, m)
            if plan is None:
                self._trace_attempt(rec, m, 1, None, "no-spectrum")
                continue
            txn.commit(flow, now)
            self._trace_attempt(rec, m, 1, None, "accepted")
            sp = SubPath(
                flow.source,
                flow.dest,
                plan.route if plan.route is not None else plan.groomed.route,
                plan.modulation if plan.modulation is not None else plan.groomed.modulation,
            )
            self._trace_plan(rec, flow, (sp,))
            return True
        return False


class EEMS(SchemeEngine):
    """Single-hop, energy-minded: find the madap solution, then downgrade to
    the lowest modulation level that needs the same slot count on the same
    route (robust levels draw less transponder power per slot)."""

    name = "eems"

    def serve(self, flow: Flow, now: float) -> bool:
        rec = self._trace_new(flow, None)
        state = self.state
        for m in state.formats_desc:
            txn = rsa.Transaction(state)
            plan = rsa.serve_segment(state, txn, flow.source, flow.dest, flow.bitrate_gbps, m)
            if plan is None:
                self._trace_attempt(rec, m, 1, None, "no-spectrum")
                continue
            if not plan.is_groomed:
                plan.modulation = self._lowest_same_slots(
                    flow.bitrate_gbps, plan.block.data_len, plan.route.total_km, plan.modulation
                )
            txn.commit(flow, now)
            self._trace_attempt(rec, m, 1, None, "accepted")
            sp = SubPath(
                flow.source,
                flow.dest,
                plan.route if plan.route is not None else plan.groomed.route,
                plan.modulation if plan.modulation is not None else plan.groomed.modulation,
            )
            self._trace_plan(rec, flow, (sp,))
            return True
        return False

    def _lowest_same_slots(
        self, bitrate_gbps: float, data_len: int, route_km: float, found: ModulationFormat
    ) -> ModulationFormat:
        chosen = found
        for m in reversed(self.state.formats_desc):
            if m.bits_per_symbol >= chosen.bits_per_symbol:
                break
            if route_km <= m.reach_km and slots_needed(bitrate_gbps, m) == data_len:
                return m
        return chosen


ENGINES: dict[str, type[SchemeEngine]] = {
    cls.name: cls for cls in (MAdap, AMMS, EEMS, DMMAS, DMMASwoMHC)
}
