"""Per-link directed slot grids and spectrum bookkeeping.

Every bidirectional fiber link owns two independent grids of S boolean slots
(True = occupied). A lightpath reserves one contiguous footprint of
``data_len + guard_len`` slots, at identical indices on every grid of its
route; the guard band sits in the upper-adjacent slots so any two neighbours
are always separated by at least ``guard_len`` free-of-data slots.

Fragmentation metrics per grid:

* external fragmentation  ``1 - largest_free_block / total_free_slots``
  (0 when the grid is fully free or fully occupied);
* entropy fragmentation   ``-sum (D_i/S) ln(D_i/S)`` over free sub-blocks
  D_i, with S the grid size (0 when nothing is free).

The network-level entropy index divides each grid's entropy by ``ln(S/2)``
and averages, clamped into [1e-6, 1]. That normalisation is a modelling
choice (the raw per-link entropy sum is unbounded) and is exposed separately
as :meth:`SpectrumState.network_f_ent_raw` for diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

ENT_FLOOR = 1e-6


class SpectrumError(RuntimeError):
    """Slot-grid state violation; indicates a logic bug in the caller."""


@dataclass(frozen=True)
class SpectrumBlock:
    """A contiguous reservation: data slots plus upper guard band."""

    start: int
    data_len: int
    guard_len: int = 2

    def __post_init__(self):
        if self.start < 0:
            raise ValueError(f"block start must be >= 0, got {self.start}")
        if self.data_len < 1:
            raise ValueError(f"block needs >= 1 data slot, got {self.data_len}")
        if self.guard_len < 0:
            raise ValueError(f"guard length must be >= 0, got {self.guard_len}")

    @property
    def footprint(self) -> int:
        return self.data_len + self.guard_len

    @property
    def end(self) -> int:
        """First slot index past the footprint."""
        return self.start + self.footprint


def free_runs(occ: Sequence[bool]) -> list[int]:
    """Lengths of maximal free sub-blocks, left to right."""
    runs = []
    current = 0
    for slot in occ:
        if slot:
            if current:
                runs.append(current)
            current = 0
        else:
            current += 1
    if current:
        runs.append(current)
    return runs


def f_ext(occ: Sequence[bool]) -> float:
    """External fragmentation of one grid, in [0, 1]."""
    runs = free_runs(occ)
    total = sum(runs)
    if total == 0:
        return 0.0
    return 1.0 - max(runs) / total


def f_ent(occ: Sequence[bool]) -> float:
    """Entropy fragmentation of one grid (>= 0)."""
    size = len(occ)
    ent = 0.0
    for run in free_runs(occ):
        p = run / size
        ent -= p * math.log(p)
    return ent


class SpectrumState:
    """Occupancy of all directed grids of one simulation run.

    Mutations (allocate/release) bump ``version`` so derived metrics can be
    memoised; owned by a single run, single-threaded.
    """

    def __init__(self, n_grids: int, slots: int = 320):
        if n_grids < 1 or slots < 4:
            raise ValueError("need at least one grid and 4 slots")
        self.slots = slots
        self.occ = np.zeros((n_grids, slots), dtype=bool)
        self.version = 0
        self._frag_cache: Optional[tuple[int, np.ndarray, np.ndarray]] = None

    @property
    def n_grids(self) -> int:
        return self.occ.shape[0]

    # -- allocation --------------------------------------------------------

    def first_fit(self, grids: Sequence[int], data_len: int, guard_len: int) -> Optional[SpectrumBlock]:
        """Lowest start index whose footprint is free on every grid of the route."""
        if len(grids) == 0:
            raise ValueError("route must traverse at least one grid")
        if data_len < 1:
            raise ValueError("need at least one data slot")
        need = data_len + guard_len
        if need > self.slots:
            return None
        if len(grids) == 1:
            free = ~self.occ[grids[0]]
        else:
            free = ~self.occ[list(grids)].any(axis=0)
        window = np.cumsum(free)
        window[need:] -= window[:-need].copy()
        fits = window[need - 1:] == need
        idx = int(np.argmax(fits))
        if not fits[idx]:
            return None
        return SpectrumBlock(idx, data_len, guard_len)

    def allocate(self, grids: Sequence[int], block: SpectrumBlock) -> None:
        """Mark the footprint occupied on all route grids; all-or-nothing."""
        if block.end > self.slots:
            raise SpectrumError(f"block {block} exceeds grid size {self.slots}")
        rows = list(grids)
        span = self.occ[rows, block.start:block.end]
        if span.any():
            raise SpectrumError(f"collision allocating {block} on grids {rows}")
        self.occ[rows, block.start:block.end] = True
        self.version += 1

    def release(self, grids: Sequence[int], block: SpectrumBlock) -> None:
        """Free the footprint on all route grids."""
        rows = list(grids)
        span = self.occ[rows, block.start:block.end]
        if not span.all():
            raise SpectrumError(f"releasing non-occupied slots: {block} on grids {rows}")
        self.occ[rows, block.start:block.end] = False
        self.version += 1

    # -- fragmentation metrics ----------------------------------------------

    def _frag_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """(f_ext per grid, entropy per grid), memoised on ``version``."""
        if self._frag_cache is not None and self._frag_cache[0] == self.version:
            return self._frag_cache[1], self._frag_cache[2]
        n, s = self.occ.shape
        free = ~self.occ
        total = free.sum(axis=1)
        padded = np.zeros((n, s + 2), dtype=np.int8)
        padded[:, 1:-1] = free
        delta = np.diff(padded, axis=1)
        run_rows, start_cols = np.nonzero(delta == 1)
        _, end_cols = np.nonzero(delta == -1)
        lengths = end_cols - start_cols
        largest = np.zeros(n)
        entropy = np.zeros(n)
        if lengths.size:
            counts = np.bincount(run_rows, minlength=n)
            offsets = np.zeros(n, dtype=np.intp)
            np.cumsum(counts[:-1], out=offsets[1:])
            nonempty = counts > 0
            safe = np.minimum(offsets, lengths.size - 1)
            largest_all = np.maximum.reduceat(lengths, safe)
            p = lengths / s
            terms = -p * np.log(p)
            ent_all = np.add.reduceat(terms, safe)
            largest[nonempty] = largest_all[nonempty]
            entropy[nonempty] = ent_all[nonempty]
        with np.errstate(invalid="ignore", divide="ignore"):
            fext = np.where(total > 0, 1.0 - largest / np.maximum(total, 1), 0.0)
        self._frag_cache = (self.version, fext, entropy)
        return fext, entropy

    def f_ext(self, grid: int) -> float:
        return float(self._frag_rows()[0][grid])

    def f_ent(self, grid: int) -> float:
        return float(self._frag_rows()[1][grid])

    def network_f_ext(self) -> float:
        """Mean external fragmentation over all directed grids."""
        return float(self._frag_rows()[0].mean())

    def network_f_ent_raw(self) -> float:
        """Unnormalised entropy fragmentation summed over grids (diagnostic)."""
        return float(self._frag_rows()[1].sum())

    def network_f_ent_normalized(self) -> float:
        """Network entropy index in (0, 1]: per-grid entropy / ln(S/2), averaged,
        clamped to [1e-6, 1]."""
        denom = math.log(self.slots / 2)
        if denom <= 0:
            denom = 1.0
        value = float(self._frag_rows()[1].mean()) / denom
        return min(1.0, max(ENT_FLOOR, value))

    # -- inspection ----------------------------------------------------------

    def occupied_counts(self) -> np.ndarray:
        return self.occ.sum(axis=1)

    def total_occupied(self) -> int:
        return int(self.occ.sum())

    def copy_occupancy(self) -> np.ndarray:
        return self.occ.copy()

    def snapshot_text(self, names: Optional[Sequence[str]] = None) -> str:
        """Debug dump: one line per grid, ``grid <id> <name>: <pattern>`` with
        ``#`` for occupied slots and ``.`` for free ones."""
        lines = []
        for gid in range(self.n_grids):
            name = names[gid] if names else str(gid)
            pattern = "".join("#" if x else "." for x in self.occ[gid])
            lines.append(f"grid {gid} {name}: {pattern}")
        return "\n".join(lines)
