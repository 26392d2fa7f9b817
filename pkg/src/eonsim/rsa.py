"""Two-step KSP-FF routing and spectrum assignment for one segment.

Serving a segment (source, dest, bitrate, modulation) first tries to groom
the flow onto an existing lightpath with those endpoints; otherwise it scans
the k shortest physical routes in length order, skips any that violate the
modulation's reach or the transponder slot limit, and takes the first route
where a first-fit spectrum block exists.

Multi-segment requests must commit atomically, so segment plans are made
inside a :class:`Transaction`: new blocks are genuinely reserved on the
grids (later segments see them) and groomed capacity is charged immediately.
``rollback`` restores the exact prior state; ``commit`` turns reservations
into registered lightpaths and flow memberships.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .modulation import ModulationFormat, slots_needed
from .spectrum import SpectrumBlock
from .topology import PhysicalPath
from .virtual_topology import Flow, Lightpath


@dataclass
class SegmentPlan:
    """Outcome of serving one segment: either a groomed lightpath or a new
    (route, block, modulation) reservation."""

    source: int
    dest: int
    bitrate_gbps: float
    groomed: Optional[Lightpath] = None
    route: Optional[PhysicalPath] = None
    block: Optional[SpectrumBlock] = None
    modulation: Optional[ModulationFormat] = None

    @property
    def is_groomed(self) -> bool:
        return self.groomed is not None


class Transaction:
    """Tentative reservations for one connection request."""

    def __init__(self, state):
        self._state = state
        self.plans: list[SegmentPlan] = []

    def rollback(self) -> None:
        """Undo every reservation, in reverse order."""
        for plan in reversed(self.plans):
            if plan.is_groomed:
                self._state.vt.unreserve_capacity(plan.groomed, plan.bitrate_gbps)
            else:
                self._state.spectrum.release(plan.route.grids, plan.block)
        self.plans.clear()

    def commit(self, flow: Flow, now: float) -> list[Lightpath]:
        """Materialise the plans in segment order; fills ``flow.chain``."""
        chain = []
        for plan in self.plans:
            if plan.is_groomed:
                self._state.vt.attach_reserved(plan.groomed, flow)
                chain.append(plan.groomed)
            else:
                lp = self._state.vt.establish(plan.route, plan.block, plan.modulation, now)
                self._state.vt.reserve_capacity(lp, plan.bitrate_gbps)
                self._state.vt.attach_reserved(lp, flow)
                chain.append(lp)
        self.plans.clear()
        return chain


def serve_segment(
    state,
    txn: Transaction,
    source: int,
    dest: int,
    bitrate_gbps: float,
    m: ModulationFormat,
) -> Optional[SegmentPlan]:
    """Plan one segment at modulation ``m``; None when nothing fits.

    On success the plan is appended to ``txn`` with its resources reserved.
    """
    lp = state.vt.groom(source, dest, bitrate_gbps)
    if lp is not None:
        state.vt.reserve_capacity(lp, bitrate_gbps)
        plan = SegmentPlan(source, dest, bitrate_gbps, groomed=lp)
        txn.plans.append(plan)
        return plan

    data_len = slots_needed(bitrate_gbps, m)
    if data_len > state.config.bvt_max_slots:
        return None
    for route in state.routes.physical_paths(source, dest):
        if route.total_km > m.reach_km:
            continue
        block = state.spectrum.first_fit(route.grids, data_len, state.config.guard_slots)
        if block is None:
            continue
        state.spectrum.allocate(route.grids, block)
        plan = SegmentPlan(source, dest, bitrate_gbps, route=route, block=block, modulation=m)
        txn.plans.append(plan)
        return plan
    return None
