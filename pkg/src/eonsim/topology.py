"""Physical fiber plant and routing.

A topology is an undirected weighted graph of nodes and fiber links; every
link carries one independent slot grid per direction. Shortest paths and
loopless k-shortest paths use a deterministic total order on paths,
(total km, hop count, node sequence), so repeated runs produce identical
routing tables.

Topology file format (line oriented, ``#`` starts a comment)::

    node <id> [label]
    link <a> <b> <length_km>

Node ids must be the dense range 0..N-1. Links are bidirectional, must have
positive length, and may not repeat or form self-loops; the graph must be
connected.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Optional, Sequence

from .modulation import FormatLike, ModulationFormat, resolve


class TopologyError(ValueError):
    """Malformed or invalid topology description."""


class NoPathError(RuntimeError):
    """The queried node pair is disconnected in the queried graph."""


@dataclass(frozen=True)
class FiberLink:
    id: int
    a: int
    b: int
    length_km: float


@dataclass(frozen=True)
class PhysicalPath:
    """A simple directed walk over the physical graph.

    ``grids`` holds the directed slot-grid id of every traversed link, in
    order; grid ``2*link_id`` is the a->b direction and ``2*link_id + 1``
    the b->a direction.
    """

    nodes: tuple[int, ...]
    links: tuple[int, ...]
    grids: tuple[int, ...]
    total_km: float

    @property
    def source(self) -> int:
        return self.nodes[0]

    @property
    def dest(self) -> int:
        return self.nodes[-1]

    def __len__(self) -> int:
        return len(self.links)


# ---------------------------------------------------------------------------
# Generic deterministic Dijkstra / Yen over adjacency lists.
# ---------------------------------------------------------------------------

Adjacency = Sequence[Sequence[tuple[int, float]]]


def _shortest(
    adj,
    s: int,
    d: int,
    banned_nodes: frozenset = frozenset(),
    banned_edges: frozenset = frozenset(),
) -> Optional[tuple[float, tuple[int, ...]]]:
    """Dijkstra minimising (cost, hops, node sequence); None if unreachable.

    ``adj`` maps node -> iterable of (neighbour, weight). Banned nodes are
    never entered; banned edges never traversed.
    """
    heap = [(0.0, 0, (s,))]
    settled = set()
    while heap:
        cost, hops, seq = heapq.heappop(heap)
        u = seq[-1]
        if u in settled:
            continue
        settled.add(u)
        if u == d:
            return cost, seq
        for v, w in adj[u]:
            if v in settled or v in banned_nodes or (u, v) in banned_edges:
                continue
            if v in seq:
                continue
            heapq.heappush(heap, (cost + w, hops + 1, seq + (v,)))
    return None


def _shortest_from(adj, s: int) -> dict[int, tuple[float, tuple[int, ...]]]:
    """Single-source Dijkstra; returns node -> (cost, sequence) for every
    reachable node, under the same total order as :func:`_shortest`."""
    heap = [(0.0, 0, (s,))]
    best: dict[int, tuple[float, tuple[int, ...]]] = {}
    while heap:
        cost, hops, seq = heapq.heappop(heap)
        u = seq[-1]
        if u in best:
            continue
        best[u] = (cost, seq)
        for v, w in adj[u]:
            if v in best or v in seq:
                continue
            heapq.heappush(heap, (cost + w, hops + 1, seq + (v,)))
    return best


def _seq_cost(weights: dict, seq: Sequence[int]) -> float:
    total = 0.0
    for u, v in zip(seq, seq[1:]):
        total += weights[(u, v)]
    return total


def _k_shortest(adj, nodes: Iterable[int], s: int, d: int, k: int) -> list[tuple[int, ...]]:
    """Yen's loopless k-shortest paths under the (km, hops, sequence) order.

    Returns up to ``k`` node sequences, best first; fewer when fewer exist.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    first = _shortest(adj, s, d)
    if first is None:
        return []
    weights = {}
    for u in nodes:
        for v, w in adj[u]:
            weights[(u, v)] = w
    found = [first[1]]
    seen = {first[1]}
    candidates: list[tuple[float, int, tuple[int, ...]]] = []
    while len(found) < k:
        base = found[-1]
        for i in range(len(base) - 1):
            spur = base[i]
            root = base[: i + 1]
            banned_edges = frozenset(
                (p[i], p[i + 1]) for p in found if len(p) > i + 1 and p[: i + 1] == root
            )
            banned_nodes = frozenset(root[:-1])
            sp = _shortest(adj, spur, d, banned_nodes, banned_edges)
            if sp is None:
                continue
            seq = root[:-1] + sp[1]
            if seq in seen:
                continue
            seen.add(seq)
            heapq.heappush(candidates, (_seq_cost(weights, seq), len(seq) - 1, seq))
        if not candidates:
            break
        _, _, nxt = heapq.heappop(candidates)
        found.append(nxt)
    return found


# ---------------------------------------------------------------------------
# Physical topology
# ---------------------------------------------------------------------------


class PhysicalTopology:
    """Validated, immutable physical graph with routing helpers."""

    def __init__(
        self,
        n_nodes: int,
        links: Iterable[tuple[int, int, float]],
        labels: Optional[Sequence[str]] = None,
    ):
        if n_nodes < 2:
            raise TopologyError("topology needs at least 2 nodes")
        self.n_nodes = n_nodes
        self.labels = tuple(labels) if labels else tuple(str(i) for i in range(n_nodes))
        if len(self.labels) != n_nodes:
            raise TopologyError("label count does not match node count")

        built: list[FiberLink] = []
        index: dict[tuple[int, int], int] = {}
        for a, b, km in links:
            if not (0 <= a < n_nodes and 0 <= b < n_nodes):
                raise TopologyError(f"link {a}-{b}: endpoint outside node range 0..{n_nodes - 1}")
            if a == b:
                raise TopologyError(f"link {a}-{b}: self-loops not allowed")
            key = (min(a, b), max(a, b))
            if key in index:
                raise TopologyError(f"link {a}-{b}: duplicate of link {index[key]}")
            if not km > 0:
                raise TopologyError(f"link {a}-{b}: length must be positive, got {km}")
            index[key] = len(built)
            built.append(FiberLink(len(built), a, b, float(km)))
        self.links: tuple[FiberLink, ...] = tuple(built)
        self._link_index = index

        adj: list[list[tuple[int, float, int]]] = [[] for _ in range(n_nodes)]
        for lk in self.links:
            adj[lk.a].append((lk.b, lk.length_km, lk.id))
            adj[lk.b].append((lk.a, lk.length_km, lk.id))
        for row in adj:
            row.sort()
        self.adj: tuple[tuple[tuple[int, float, int], ...], ...] = tuple(
            tuple(row) for row in adj
        )
        self._wadj: tuple[tuple[tuple[int, float], ...], ...] = tuple(
            tuple((v, w) for v, w, _ in row) for row in adj
        )
        self._check_connected()
        self._spt_cache: dict[int, dict[int, tuple[float, tuple[int, ...]]]] = {}
        self._diameter: Optional[float] = None

    # -- validation --------------------------------------------------------

    def _check_connected(self) -> None:
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v, _, _ in self.adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if len(seen) != self.n_nodes:
            missing = sorted(set(range(self.n_nodes)) - seen)
            raise TopologyError(f"graph is disconnected; unreachable nodes {missing}")

    # -- basic queries -----------------------------------------------------

    @property
    def n_links(self) -> int:
        return len(self.links)

    @property
    def n_grids(self) -> int:
        """Directed slot grids: two per bidirectional link."""
        return 2 * len(self.links)

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    def link_between(self, u: int, v: int) -> FiberLink:
        try:
            return self.links[self._link_index[(min(u, v), max(u, v))]]
        except KeyError:
            raise NoPathError(f"no link between {u} and {v}") from None

    def grid_id(self, u: int, v: int) -> int:
        """Directed grid id for travelling the u->v link."""
        lk = self.link_between(u, v)
        return 2 * lk.id + (0 if u == lk.a else 1)

    def path_from_nodes(self, seq: Sequence[int]) -> PhysicalPath:
        """Build a validated PhysicalPath from a node sequence."""
        seq = tuple(seq)
        if len(seq) < 2:
            raise ValueError("path needs at least two nodes")
        if len(set(seq)) != len(seq):
            raise ValueError(f"path revisits a node: {seq}")
        links = []
        grids = []
        total = 0.0
        for u, v in zip(seq, seq[1:]):
            lk = self.link_between(u, v)
            links.append(lk.id)
            grids.append(2 * lk.id + (0 if u == lk.a else 1))
            total += lk.length_km
        return PhysicalPath(seq, tuple(links), tuple(grids), total)

    # -- routing -----------------------------------------------------------

    def _from_source(self, s: int) -> dict[int, tuple[float, tuple[int, ...]]]:
        if s not in self._spt_cache:
            self._spt_cache[s] = _shortest_from(self._wadj, s)
        return self._spt_cache[s]

    def shortest_path(self, s: int, d: int) -> PhysicalPath:
        if s == d:
            raise ValueError("source and destination must differ")
        hit = self._from_source(s).get(d)
        if hit is None:
            raise NoPathError(f"no path from {s} to {d}")
        return self.path_from_nodes(hit[1])

    def k_shortest_paths(self, s: int, d: int, k: int) -> list[PhysicalPath]:
        if s == d:
            raise ValueError("source and destination must differ")
        seqs = _k_shortest(self._wadj, range(self.n_nodes), s, d, k)
        if not seqs:
            raise NoPathError(f"no path from {s} to {d}")
        return [self.path_from_nodes(seq) for seq in seqs]

    def distance_km(self, s: int, d: int) -> float:
        if s == d:
            return 0.0
        hit = self._from_source(s).get(d)
        if hit is None:
            raise NoPathError(f"no path from {s} to {d}")
        return hit[0]

    def diameter_km(self) -> float:
        """Largest shortest-path distance over all node pairs."""
        if self._diameter is None:
            self._diameter = max(
                cost
                for s in range(self.n_nodes)
                for cost, _ in self._from_source(s).values()
            )
        return self._diameter


# Module-level aliases matching the operation-style API.


def shortest_path(topo: PhysicalTopology, s: int, d: int) -> PhysicalPath:
    return topo.shortest_path(s, d)


def k_shortest_paths(topo: PhysicalTopology, s: int, d: int, k: int) -> list[PhysicalPath]:
    return topo.k_shortest_paths(s, d, k)


def diameter_km(topo: PhysicalTopology) -> float:
    return topo.diameter_km()


# ---------------------------------------------------------------------------
# Modulation (reachability) topologies
# ---------------------------------------------------------------------------


class ModulationTopology:
    """Reachability graph of one modulation format.

    An edge (u, v) exists iff the physical shortest-path distance fits the
    format's transparent reach; the edge stores that shortest path and is
    weighted by its length.
    """

    def __init__(self, modulation: ModulationFormat, edges: dict[tuple[int, int], PhysicalPath]):
        self.modulation = modulation
        self.edges = edges
        adj: dict[int, list[tuple[int, float]]] = {}
        nodes = set()
        for (u, v), path in edges.items():
            adj.setdefault(u, []).append((v, path.total_km))
            nodes.add(u)
            nodes.add(v)
        for row in adj.values():
            row.sort()
        self._adj = {u: tuple(row) for u, row in adj.items()}
        self.nodes = frozenset(nodes)

    @property
    def n_edges(self) -> int:
        """Undirected edge count."""
        return len(self.edges) // 2

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.edges

    def edge_path(self, u: int, v: int) -> PhysicalPath:
        return self.edges[(u, v)]

    def neighbors(self, u: int) -> tuple[tuple[int, float], ...]:
        return self._adj.get(u, ())

    def k_paths(self, s: int, d: int, k: int) -> list[tuple[int, ...]]:
        """Up to k best node sequences through this reachability graph."""
        if s not in self._adj or d not in self.nodes:
            return []
        adj = _AdjView(self._adj)
        return _k_shortest(adj, list(self._adj), s, d, k)


class _AdjView:
    """Mapping-style adjacency with empty rows for unknown nodes."""

    def __init__(self, adj: dict):
        self._adj = adj

    def __getitem__(self, u: int):
        return self._adj.get(u, ())


def build_modulation_topology(topo: PhysicalTopology, m: FormatLike) -> ModulationTopology:
    """Connect every ordered node pair whose shortest path fits the reach of ``m``."""
    m = resolve(m)
    edges: dict[tuple[int, int], PhysicalPath] = {}
    for s in range(topo.n_nodes):
        for d, (cost, seq) in topo._from_source(s).items():
            if d == s or cost > m.reach_km:
                continue
            edges[(s, d)] = topo.path_from_nodes(seq)
    return ModulationTopology(m, edges)


# ---------------------------------------------------------------------------
# Topology file parsing
# ---------------------------------------------------------------------------


def parse_topology(text: str) -> PhysicalTopology:
    """Parse the node/link text format documented in the module docstring."""
    nodes: dict[int, str] = {}
    links: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind = tokens[0].lower()
        if kind == "node":
            if len(tokens) < 2:
                raise TopologyError(f"line {lineno}: node needs an id")
            try:
                nid = int(tokens[1])
            except ValueError:
                raise TopologyError(f"line {lineno}: node id {tokens[1]!r} is not an integer") from None
            if nid in nodes:
                raise TopologyError(f"line {lineno}: duplicate node id {nid}")
            nodes[nid] = tokens[2] if len(tokens) > 2 else str(nid)
        elif kind == "link":
            if len(tokens) != 4:
                raise TopologyError(f"line {lineno}: link needs '<a> <b> <length_km>'")
            try:
                a, b = int(tokens[1]), int(tokens[2])
            except ValueError:
                raise TopologyError(f"line {lineno}: link endpoints must be integers") from None
            try:
                km = float(tokens[3])
            except ValueError:
                raise TopologyError(f"line {lineno}: link length {tokens[3]!r} is not a number") from None
            links.append((a, b, km))
        else:
            raise TopologyError(f"line {lineno}: unknown directive {tokens[0]!r}")
    if not nodes:
        raise TopologyError("no nodes declared")
    ids = sorted(nodes)
    if ids != list(range(len(ids))):
        raise TopologyError(f"node ids must be dense 0..{len(ids) - 1}, got {ids}")
    labels = [nodes[i] for i in ids]
    return PhysicalTopology(len(ids), links, labels)


def load_topology(path) -> PhysicalTopology:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_topology(fh.read())


BUNDLED_TOPOLOGIES = ("usa", "german")


def bundled_topology(name: str) -> PhysicalTopology:
    """Load one of the topologies shipped with the package ('usa', 'german')."""
    key = name.lower()
    if key not in BUNDLED_TOPOLOGIES:
        raise ValueError(f"unknown bundled topology {name!r}; have {BUNDLED_TOPOLOGIES}")
    text = resources.files("eonsim").joinpath(f"data/{key}.topo").read_text(encoding="utf-8")
    return parse_topology(text)
