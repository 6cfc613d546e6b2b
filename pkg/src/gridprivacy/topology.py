"""Weighted grid topology model and the graph analytics built on it.

The grid is an undirected weighted graph of edge/fog/cloud nodes. From it we
derive the adjacency and Laplacian matrices, four node-centrality metrics,
and least-cost distances (Dijkstra), which downstream modules use to rank
nodes and assign per-node privacy levels.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateNodeIdError,
    EigenvectorConvergenceError,
    NonPositiveWeightError,
    SelfLoopError,
    UnknownEndpointError,
    UnknownNodeError,
)


class Tier(str, Enum):
    """Aggregation tier of a node: data source, intermediate, or central."""

    EDGE = "edge"
    FOG = "fog"
    CLOUD = "cloud"

    @classmethod
    def parse(cls, text: str) -> "Tier":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise UnknownNodeError(
                f"unknown tier {text!r}; expected one of edge, fog, cloud"
            ) from None


@dataclass(frozen=True)
class NodeRecord:
    id: str
    tier: Tier
    label: str = ""


@dataclass(frozen=True)
class LinkRecord:
    src: str
    dst: str
    weight: float


@dataclass(frozen=True)
class GridTopology:
    """Validated undirected graph; links are deduplicated and canonicalized.

    Construct through :func:`build_topology`, which enforces the invariants
    (unique ids, known endpoints, positive weights, no self-loops, at most
    one link per unordered node pair).
    """

    nodes: tuple[NodeRecord, ...]
    links: tuple[LinkRecord, ...]

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(node.id for node in self.nodes)

    def index_of(self, node_id: str) -> int:
        for i, node in enumerate(self.nodes):
            if node.id == node_id:
                return i
        raise UnknownNodeError(f"node {node_id!r} is not part of the topology")

    def tier_of(self, node_id: str) -> Tier:
        return self.nodes[self.index_of(node_id)].tier

    def adjacency_lists(self) -> dict[str, list[tuple[str, float]]]:
        """Neighbor lists with weights, in canonical (sorted link) order."""
        adj: dict[str, list[tuple[str, float]]] = {node.id: [] for node in self.nodes}
        for link in self.links:
            adj[link.src].append((link.dst, link.weight))
            adj[link.dst].append((link.src, link.weight))
        return adj


def build_topology(
    nodes: Iterable[NodeRecord], links: Iterable[LinkRecord]
) -> GridTopology:
    """Validate raw node/link records and assemble a :class:`GridTopology`.

    Parallel links between the same unordered node pair collapse into one
    link keeping the minimum weight (the most conservative distance).
    """
    node_tuple = tuple(nodes)
    seen: set[str] = set()
    for node in node_tuple:
        if node.id in seen:
            raise DuplicateNodeIdError(f"duplicate node id {node.id!r}")
        seen.add(node.id)

    collapsed: dict[tuple[str, str], float] = {}
    for link in links:
        if link.src == link.dst:
            raise SelfLoopError(f"self-loop on node {link.src!r}")
        for endpoint in (link.src, link.dst):
            if endpoint not in seen:
                raise UnknownEndpointError(f"link endpoint {endpoint!r} is not a node")
        if not link.weight > 0:
            raise NonPositiveWeightError(
                f"link ({link.src!r}, {link.dst!r}) has non-positive weight {link.weight}"
            )
        key = (link.src, link.dst) if link.src <= link.dst else (link.dst, link.src)
        previous = collapsed.get(key)
        collapsed[key] = link.weight if previous is None else min(previous, link.weight)

    link_tuple = tuple(
        LinkRecord(src, dst, weight)
        for (src, dst), weight in sorted(collapsed.items())
    )
    return GridTopology(nodes=node_tuple, links=link_tuple)


def adjacency_matrix(topology: GridTopology) -> np.ndarray:
    """Symmetric 0/1 coupling matrix with a zero diagonal."""
    n = topology.n
    index = {node_id: i for i, node_id in enumerate(topology.node_ids)}
    matrix = np.zeros((n, n))
    for link in topology.links:
        i, k = index[link.src], index[link.dst]
        matrix[i, k] = 1.0
        matrix[k, i] = 1.0
    return matrix


def laplacian_matrix(topology: GridTopology) -> np.ndarray:
    """Degree matrix minus adjacency; rows sum to zero."""
    adjacency = adjacency_matrix(topology)
    return np.diag(adjacency.sum(axis=1)) - adjacency


@dataclass(frozen=True)
class CentralityScores:
    """Per-node degree, eigenvector, betweenness, and closeness scores."""

    degree: Mapping[str, float]
    eigenvector: Mapping[str, float]
    betweenness: Mapping[str, float]
    closeness: Mapping[str, float]

    METRICS = ("degree", "eigenvector", "betweenness", "closeness")

    def for_node(self, node_id: str) -> dict[str, float]:
        return {metric: getattr(self, metric)[node_id] for metric in self.METRICS}


def _eigenvector_centrality(
    adjacency: np.ndarray, max_iterations: int, tolerance: float
) -> np.ndarray:
    """Dominant eigenvector of the adjacency matrix by power iteration.

    Iterates on A + I rather than A: the shift leaves the eigenvectors
    untouched but makes the dominant eigenvalue strictly positive, so the
    iteration also converges on bipartite graphs (stars, paths), where plain
    A-iteration oscillates between two sign patterns forever.
    """
    n = adjacency.shape[0]
    shifted = adjacency + np.eye(n)
    vector = np.ones(n) / math.sqrt(n)
    for _ in range(max_iterations):
        nxt = shifted @ vector
        nxt = nxt / np.linalg.norm(nxt)
        if np.max(np.abs(nxt - vector)) < tolerance:
            return nxt
        vector = nxt
    raise EigenvectorConvergenceError(
        f"eigenvector centrality did not converge in {max_iterations} iterations"
    )


def _single_source_dijkstra(
    adj: Mapping[str, Sequence[tuple[str, float]]], source: str
) -> tuple[dict[str, float], dict[str, float], dict[str, list[str]], list[str]]:
    """Distances, shortest-path counts, and predecessors from one source.

    Returns (dist, sigma, predecessors, finish_order); sigma counts the
    number of distinct least-cost paths, which Brandes' accumulation needs.
    """
    dist = {v: math.inf for v in adj}
    sigma = {v: 0.0 for v in adj}
    preds: dict[str, list[str]] = {v: [] for v in adj}
    dist[source] = 0.0
    sigma[source] = 1.0
    finished: list[str] = []
    done: set[str] = set()
    heap: list[tuple[float, str]] = [(0.0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        finished.append(v)
        for w, weight in adj[v]:
            candidate = d + weight
            if candidate < dist[w]:
                dist[w] = candidate
                sigma[w] = sigma[v]
                preds[w] = [v]
                heapq.heappush(heap, (candidate, w))
            elif candidate == dist[w] and w not in done:
                sigma[w] += sigma[v]
                preds[w].append(v)
    return dist, sigma, preds, finished


def centrality_scores(
    topology: GridTopology,
    max_iterations: int = 1000,
    tolerance: float = 1e-9,
) -> CentralityScores:
    """Compute all four centrality metrics for every node.

    Degree and eigenvector centrality use the binary coupling matrix;
    betweenness (Brandes accumulation over Dijkstra trees, each unordered
    pair counted once) and closeness use the weighted distances. Closeness
    is (N-1)/sum-of-distances and drops to 0 for any node that cannot reach
    the whole graph.

    Raises:
        EigenvectorConvergenceError: power iteration hit the iteration cap.
    """
    ids = topology.node_ids
    n = topology.n
    adjacency = adjacency_matrix(topology)

    degree = {node_id: float(adjacency[i].sum()) for i, node_id in enumerate(ids)}

    eigen_vec = _eigenvector_centrality(adjacency, max_iterations, tolerance)
    eigenvector = {node_id: float(eigen_vec[i]) for i, node_id in enumerate(ids)}

    adj = topology.adjacency_lists()
    betweenness = {node_id: 0.0 for node_id in ids}
    closeness = {}
    for source in ids:
        dist, sigma, preds, finished = _single_source_dijkstra(adj, source)

        delta = {v: 0.0 for v in adj}
        for w in reversed(finished):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != source:
                betweenness[w] += delta[w]

        total = sum(dist.values())
        closeness[source] = (n - 1) / total if math.isfinite(total) and total > 0 else 0.0

    # Undirected accumulation visits each unordered pair from both ends.
    for node_id in ids:
        betweenness[node_id] /= 2.0

    return CentralityScores(
        degree=degree,
        eigenvector=eigenvector,
        betweenness=betweenness,
        closeness=closeness,
    )


def shortest_distances_from(topology: GridTopology, src: str) -> dict[str, float]:
    """Least-cost distance from ``src`` to every node (inf when unreachable)."""
    if src not in topology.node_ids:
        raise UnknownNodeError(f"node {src!r} is not part of the topology")
    dist, _, _, _ = _single_source_dijkstra(topology.adjacency_lists(), src)
    return dist


def shortest_distance(topology: GridTopology, src: str, dst: str) -> float:
    """Least total link-weight cost between two nodes; inf when unreachable."""
    if dst not in topology.node_ids:
        raise UnknownNodeError(f"node {dst!r} is not part of the topology")
    return shortest_distances_from(topology, src)[dst]


def diameter(topology: GridTopology) -> float:
    """Largest finite pairwise distance; 0.0 for a single node or no links."""
    best = 0.0
    for src in topology.node_ids:
        for value in shortest_distances_from(topology, src).values():
            if math.isfinite(value) and value > best:
                best = value
    return best
