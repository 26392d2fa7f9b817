"""Energy model for lightpaths and network-level efficiency metrics.

A lightpath consumes:

* one-time OXC setup energy at every traversed node,
  ``degree * 85 J + add_drop * 100 J`` (add/drop degree 1 at the two
  endpoints, 0 at pass-through nodes);
* operating power for its whole holding time: the transponder draw
  ``1.683 * TR + 91.333`` W at the channel transmission rate TR, plus 150 W
  per traversed OXC and 100 W per inline amplifier (one amplifier per full
  80 km span of each link).

The transponder is charged at the full configured channel capacity, not the
momentary groomed load. The 1.683 slope already contains the 68.3 % overload
allowance on top of the nominal rate, so no further markup is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .topology import PhysicalPath, PhysicalTopology
    from .virtual_topology import Lightpath

BVT_W_PER_GBPS = 1.683
BVT_IDLE_W = 91.333
OXC_SETUP_PER_DEGREE_J = 85.0
OXC_SETUP_PER_ADD_DROP_J = 100.0
OXC_OPERATING_W = 150.0
OLA_W = 100.0
OLA_SPAN_KM = 80.0


def pc_bvt(tr_gbps: float) -> float:
    """Transponder power draw (W) at transmission rate ``tr_gbps``."""
    if tr_gbps < 0:
        raise ValueError("transmission rate must be >= 0")
    return BVT_W_PER_GBPS * tr_gbps + BVT_IDLE_W


def ec_oxc_setup(node_degree: int, add_drop_degree: int) -> float:
    """One-time cross-connect setup energy (J)."""
    return node_degree * OXC_SETUP_PER_DEGREE_J + add_drop_degree * OXC_SETUP_PER_ADD_DROP_J


def ola_count(route: "PhysicalPath", topo: "PhysicalTopology") -> int:
    """Inline amplifiers along a route: one per complete 80 km span per link."""
    return sum(int(topo.links[lid].length_km // OLA_SPAN_KM) for lid in route.links)


def setup_energy(route: "PhysicalPath", topo: "PhysicalTopology") -> float:
    """OXC setup energy summed over the traversed nodes (J)."""
    total = 0.0
    endpoints = (route.nodes[0], route.nodes[-1])
    for node in route.nodes:
        total += ec_oxc_setup(topo.degree(node), 1 if node in endpoints else 0)
    return total


def operating_power(capacity_gbps: float, route: "PhysicalPath", topo: "PhysicalTopology") -> float:
    """Steady-state power (W) of an established lightpath."""
    n_oxc = len(route.nodes)
    return pc_bvt(capacity_gbps) + n_oxc * OXC_OPERATING_W + ola_count(route, topo) * OLA_W


def ec_lightpath(lp: "Lightpath", holding_s: float, topo: "PhysicalTopology") -> float:
    """Total energy (J) of one lightpath held for ``holding_s`` seconds."""
    if holding_s < 0:
        raise ValueError("holding time must be >= 0")
    return setup_energy(lp.route, topo) + operating_power(lp.capacity_gbps, lp.route, topo) * holding_s


def dt_flow(tr_gbps: float, holding_s: float) -> float:
    """Data transmitted by a flow (bits)."""
    return tr_gbps * 1e9 * holding_s


def energy_efficiency(ledger: "EnergyLedger") -> float:
    """Bits per joule over a whole run; 0 for an empty run."""
    total = ledger.total_energy_j
    if total == 0.0:
        return 0.0
    return ledger.total_data_bits / total


def effective_energy_efficiency(en_eff: float, bbr: float) -> float:
    """Energy efficiency discounted by the accepted-bandwidth share."""
    if not 0.0 <= bbr <= 1.0:
        raise ValueError(f"bbr must be in [0, 1], got {bbr}")
    return en_eff * (1.0 - bbr)


@dataclass(frozen=True)
class LightpathEnergyRow:
    """Per-lightpath record; enough to recompute its energy independently."""

    lp_id: int
    modulation: str
    capacity_gbps: float
    n_oxc: int
    n_ola: int
    setup_j: float
    operating_w: float
    established_at: float
    torn_down_at: float

    @property
    def energy_j(self) -> float:
        return self.setup_j + self.operating_w * (self.torn_down_at - self.established_at)


class EnergyLedger:
    """Accumulates energy and transmitted data over one simulation run.

    Setup energy is charged when a lightpath is established, operating energy
    when it is torn down; both totals only ever grow. ``rows`` is the
    per-lightpath event log, ``data_log`` the per-accepted-flow record.
    """

    def __init__(self, topo: "PhysicalTopology"):
        self._topo = topo
        self.total_setup_j = 0.0
        self.total_operating_j = 0.0
        self.total_data_bits = 0.0
        self.rows: list[LightpathEnergyRow] = []
        self.data_log: list[tuple[float, float]] = []
        self._open: dict[int, tuple[float, float, float]] = {}

    @property
    def total_energy_j(self) -> float:
        return self.total_setup_j + self.total_operating_j

    def on_establish(self, lp: "Lightpath") -> None:
        setup = setup_energy(lp.route, self._topo)
        op_w = operating_power(lp.capacity_gbps, lp.route, self._topo)
        self.total_setup_j += setup
        self._open[lp.id] = (setup, op_w, lp.established_at)

    def on_teardown(self, lp: "Lightpath", now: float) -> None:
        setup, op_w, t0 = self._open.pop(lp.id)
        if now < t0:
            raise ValueError("teardown before establishment")
        self.total_operating_j += op_w * (now - t0)
        self.rows.append(
            LightpathEnergyRow(
                lp.id,
                lp.modulation.name,
                lp.capacity_gbps,
                len(lp.route.nodes),
                ola_count(lp.route, self._topo),
                setup,
                op_w,
                t0,
                now,
            )
        )

    def add_flow_data(self, bitrate_gbps: float, holding_s: float) -> None:
        self.total_data_bits += dt_flow(bitrate_gbps, holding_s)
        self.data_log.append((bitrate_gbps, holding_s))

    def energy_efficiency(self) -> float:
        return energy_efficiency(self)

    def export_text(self) -> str:
        """Tab-separated per-lightpath rows:
        lp_id, modulation, capacity_gbps, n_oxc, n_ola, setup_j, operating_w,
        established_at, torn_down_at, energy_j."""
        lines = ["lp_id\tmodulation\tcapacity_gbps\tn_oxc\tn_ola\tsetup_j\toperating_w\testablished_at\ttorn_down_at\tenergy_j"]
        for r in self.rows:
            lines.append(
                f"{r.lp_id}\t{r.modulation}\t{r.capacity_gbps:.6g}\t{r.n_oxc}\t{r.n_ola}"
                f"\t{r.setup_j:.10g}\t{r.operating_w:.10g}\t{r.established_at:.10g}"
                f"\t{r.torn_down_at:.10g}\t{r.energy_j:.10g}"
            )
        return "\n".join(lines)
