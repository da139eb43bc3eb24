"""Quality-guided matching as a min-cost max-flow problem.

The matcher builds a four-layer unit-capacity network: a source feeding every
prediction, one candidate edge per (prediction, target) pair, and every target
draining into a sink.  Candidate edges are first pruned by localization
quality, with a stricter bar for targets of previously known categories than
for newly introduced ones.  A successive-shortest-path solve then returns the
cheapest matching among those of maximum cardinality.

Unlike the classical assignment baseline, nothing forces a target to be
matched: a target whose every candidate edge was pruned simply stays
unmatched, which is the point of the construction.
"""

from __future__ import annotations

import heapq
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .cost import Origin, _as_origin
from .errors import (
    DimensionError,
    DomainError,
    GraphStructureError,
    MalformedInputError,
)
from .hungarian import Matching

__all__ = [
    "FlowEdge",
    "FlowGraph",
    "PruneThresholds",
    "build_flow_graph",
    "prune_edges",
    "mcmf_solve",
    "q_mcmf_match",
]


@dataclass(frozen=True)
class PruneThresholds:
    """Minimum quality an edge must reach, by the target's origin tag.

    ``alpha`` applies to targets of previously known categories, ``beta`` to
    newly introduced ones.  Both default to the values that worked best in a
    grid search over detection fine-tuning runs.
    """

    alpha: float = 0.7
    beta: float = 0.5

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            try:
                v = float(v)
            except (TypeError, ValueError):
                raise MalformedInputError(f"{name} must be a number, got {v!r}") from None
            if not math.isfinite(v) or not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")
            object.__setattr__(self, name, v)

    def for_origin(self, origin: Origin) -> float:
        return self.alpha if origin is Origin.OLD else self.beta


@dataclass(frozen=True)
class FlowEdge:
    """One candidate supervision edge between a prediction and a target."""

    pred_index: int
    target_index: int
    cost: float
    quality: float

    def __post_init__(self) -> None:
        for name in ("pred_index", "target_index"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise MalformedInputError(f"{name} must be an int, got {v!r}")
            if v < 0:
                raise GraphStructureError(f"{name} must be >= 0, got {v}")
            object.__setattr__(self, name, int(v))
        c = float(self.cost)
        if not math.isfinite(c):
            raise MalformedInputError(f"edge cost must be finite, got {c!r}")
        object.__setattr__(self, "cost", c)
        q = float(self.quality)
        if not math.isfinite(q) or not 0.0 <= q <= 1.0:
            raise DomainError(f"edge quality must lie in [0, 1], got {q!r}")
        object.__setattr__(self, "quality", q)


@dataclass(frozen=True)
class FlowGraph:
    """Unit-capacity bipartite flow network with implicit source and sink.

    Only the prediction-to-target edges are stored.  Source-to-prediction and
    target-to-sink edges always exist, carry cost 0, and have capacity 1 like
    everything else, so no vertex can participate in more than one pair.
    """

    n_preds: int
    n_targets: int
    edges: tuple[FlowEdge, ...]

    def __post_init__(self) -> None:
        for name in ("n_preds", "n_targets"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise MalformedInputError(f"{name} must be an int, got {v!r}")
            if v < 0:
                raise GraphStructureError(f"{name} must be >= 0, got {v}")
            object.__setattr__(self, name, int(v))
        object.__setattr__(self, "edges", tuple(self.edges))
        seen: set[tuple[int, int]] = set()
        for e in self.edges:
            if not isinstance(e, FlowEdge):
                raise GraphStructureError(f"edges must be FlowEdge instances, got {e!r}")
            if e.pred_index >= self.n_preds:
                raise GraphStructureError(
                    f"edge references prediction {e.pred_index} but only "
                    f"{self.n_preds} exist"
                )
            if e.target_index >= self.n_targets:
                raise GraphStructureError(
                    f"edge references target {e.target_index} but only "
                    f"{self.n_targets} exist"
                )
            key = (e.pred_index, e.target_index)
            if key in seen:
                raise GraphStructureError(f"duplicate edge for pair {key}")
            seen.add(key)

    @property
    def num_nodes(self) -> int:
        """Node count including the implicit source and sink."""
        return self.n_preds + self.n_targets + 2

    @property
    def num_edges(self) -> int:
        """Edge count including the implicit source and sink edges."""
        return self.n_preds + len(self.edges) + self.n_targets


def build_flow_graph(cost: np.ndarray, quality: np.ndarray) -> FlowGraph:
    """Dense graph with one candidate edge per (prediction, target) entry.

    ``cost`` and ``quality`` must share their (N_p, N_q) shape; qualities must
    lie in [0, 1].  Edges are created in row-major order.
    """
    c = np.asarray(cost, dtype=np.float64)
    q = np.asarray(quality, dtype=np.float64)
    if c.ndim != 2 or q.ndim != 2:
        raise DimensionError(
            f"cost and quality must be 2-D, got shapes {c.shape} and {q.shape}"
        )
    if c.shape != q.shape:
        raise DimensionError(f"cost shape {c.shape} != quality shape {q.shape}")
    if c.size and not np.isfinite(c).all():
        raise MalformedInputError("cost matrix contains non-finite entries")
    if q.size:
        if not np.isfinite(q).all():
            raise MalformedInputError("quality matrix contains non-finite entries")
        if (q < 0).any() or (q > 1).any():
            raise DomainError("quality entries must lie in [0, 1]")
    n_p, n_q = c.shape
    edges = tuple(
        FlowEdge(i, j, float(c[i, j]), float(q[i, j]))
        for i in range(n_p)
        for j in range(n_q)
    )
    return FlowGraph(n_preds=n_p, n_targets=n_q, edges=edges)


def prune_edges(
    graph: FlowGraph,
    origins: Sequence[Origin | str],
    thresholds: PruneThresholds | None = None,
) -> FlowGraph:
    """Drop candidate edges whose quality falls below the origin's threshold.

    An edge survives when its quality is >= alpha for targets tagged old and
    >= beta for targets tagged new (the comparison is inclusive).  Surviving
    edges keep their relative order.
    """
    if not isinstance(graph, FlowGraph):
        raise GraphStructureError(f"expected a FlowGraph, got {type(graph).__name__}")
    th = thresholds if thresholds is not None else PruneThresholds()
    tags = [_as_origin(o) for o in origins]
    if len(tags) != graph.n_targets:
        raise DimensionError(
            f"{len(tags)} origin tags for {graph.n_targets} targets"
        )
    kept = tuple(
        e for e in graph.edges if e.quality >= th.for_origin(tags[e.target_index])
    )
    return FlowGraph(n_preds=graph.n_preds, n_targets=graph.n_targets, edges=kept)


def mcmf_solve(graph: FlowGraph) -> Matching:
    """Cheapest matching among those of maximum cardinality.

    Successive shortest augmenting paths with node potentials: each round runs
    Dijkstra on reduced costs, augments one unit along the found path, and
    stops when the sink is unreachable.  With unit capacities every augmenting
    path adds exactly one (prediction, target) pair, so the number of rounds
    equals the final matching size.  Negative edge costs are allowed; a single
    relaxation pass initializes the potentials when any are present.

    Tie-breaking is fixed (ascending node index, edges in sorted pair order),
    so equal inputs produce identical matchings.
    """
    if not isinstance(graph, FlowGraph):
        raise GraphStructureError(f"expected a FlowGraph, got {type(graph).__name__}")
    if not graph.edges:
        return Matching()

    n_nodes = graph.num_nodes
    source = 0
    sink = n_nodes - 1

    # parallel edge arrays; reverse edge of e is e ^ 1
    to: list[int] = []
    cap: list[int] = []
    cost: list[float] = []
    adj: list[list[int]] = [[] for _ in range(n_nodes)]

    def add_edge(u: int, v: int, c: float) -> int:
        eid = len(to)
        to.append(v)
        cap.append(1)
        cost.append(c)
        adj[u].append(eid)
        to.append(u)
        cap.append(0)
        cost.append(-c)
        adj[v].append(eid + 1)
        return eid

    for i in range(graph.n_preds):
        add_edge(source, 1 + i, 0.0)
    middle: list[tuple[int, FlowEdge]] = []
    for e in sorted(graph.edges, key=lambda e: (e.pred_index, e.target_index)):
        eid = add_edge(1 + e.pred_index, 1 + graph.n_preds + e.target_index, e.cost)
        middle.append((eid, e))
    for j in range(graph.n_targets):
        add_edge(1 + graph.n_preds + j, sink, 0.0)

    potential = [0.0] * n_nodes
    if any(e.cost < 0.0 for e in graph.edges):
        # one Bellman-Ford style sweep; the network is layered so n-1 rounds
        # is far more than enough, but it terminates early anyway
        dist = [math.inf] * n_nodes
        dist[source] = 0.0
        for _ in range(n_nodes - 1):
            changed = False
            for u in range(n_nodes):
                if dist[u] == math.inf:
                    continue
                for eid in adj[u]:
                    if cap[eid] <= 0:
                        continue
                    v = to[eid]
                    nd = dist[u] + cost[eid]
                    if nd < dist[v]:
                        dist[v] = nd
                        changed = True
            if not changed:
                break
        potential = [d if d != math.inf else 0.0 for d in dist]

    while True:
        dist = [math.inf] * n_nodes
        dist[source] = 0.0
        parent_edge = [-1] * n_nodes
        heap: list[tuple[float, int]] = [(0.0, source)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for eid in adj[u]:
                if cap[eid] <= 0:
                    continue
                v = to[eid]
                nd = d + cost[eid] + potential[u] - potential[v]
                if nd < dist[v]:
                    dist[v] = nd
                    parent_edge[v] = eid
                    heapq.heappush(heap, (nd, v))
        if dist[sink] == math.inf:
            break
        for v in range(n_nodes):
            if dist[v] != math.inf:
                potential[v] += dist[v]
        v = sink
        while v != source:
            eid = parent_edge[v]
            cap[eid] -= 1
            cap[eid ^ 1] += 1
            v = to[eid ^ 1]

    return Matching.from_pairs(
        (e.pred_index, e.target_index, e.cost) for eid, e in middle if cap[eid] == 0
    )


def q_mcmf_match(
    cost: np.ndarray,
    quality: np.ndarray,
    origins: Sequence[Origin | str],
    thresholds: PruneThresholds | None = None,
) -> Matching:
    """Quality-pruned min-cost max-flow matching in one call.

    Builds the dense graph from ``cost`` and ``quality``, prunes edges against
    the per-origin thresholds, and solves.  With both thresholds at 0 nothing
    is pruned and the result coincides with the classical assignment baseline
    on total cost.
    """
    graph = build_flow_graph(cost, quality)
    pruned = prune_edges(graph, origins, thresholds)
    return mcmf_solve(pruned)
