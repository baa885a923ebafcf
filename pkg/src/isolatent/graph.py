"""Epsilon-neighborhood graphs, connectivity diagnostics, shortest paths.

The neighbor graph doubles as the censoring mask of the distance likelihood:
pairs below the threshold are matched, pairs at or above it are repelled.
The single-linkage merge sequence (0-dimensional persistence) shows how the
component count varies with the threshold and is the supported way to pick it.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass

import numpy as np

from isolatent.dissimilarity import DissimilarityMatrix
from isolatent.errors import ValidationError


@dataclass(frozen=True)
class NeighborGraph:
    """Undirected graph with an edge wherever the observed distance < eps."""

    n: int
    eps: float
    edges: tuple  # ((i, j, weight), ...) sorted, i < j, stored once per pair
    adjacency: np.ndarray  # boolean n x n mask

    def neighbor_lists(self):
        """Adjacency lists as (neighbor index array, weight array) per vertex."""
        nbrs = [[] for _ in range(self.n)]
        wts = [[] for _ in range(self.n)]
        for i, j, w in self.edges:
            nbrs[i].append(j)
            wts[i].append(w)
            nbrs[j].append(i)
            wts[j].append(w)
        return (
            [np.asarray(a, dtype=int) for a in nbrs],
            [np.asarray(a, dtype=float) for a in wts],
        )


@dataclass(frozen=True)
class PersistenceEvents:
    """Single-linkage merge sequence: (merge distance, component count after)."""

    events: tuple  # ((merge_eps, component_count_after), ...), eps nondecreasing
    n: int

    def component_count_at(self, eps: float) -> int:
        """Components of the eps-graph (strict threshold) at the given eps."""
        return self.n - sum(1 for merge_eps, _ in self.events if merge_eps < eps)


def build_eps_graph(d: DissimilarityMatrix, eps: float) -> NeighborGraph:
    """Edges are exactly the pairs with d_ij strictly below eps."""
    if not eps > 0:
        raise ValidationError("eps must be positive")
    v = d.values
    n = v.shape[0]
    mask = v < eps
    np.fill_diagonal(mask, False)
    ii, jj = np.nonzero(np.triu(mask, 1))
    edges = tuple((int(i), int(j), float(v[i, j])) for i, j in zip(ii, jj))
    return NeighborGraph(n=n, eps=float(eps), edges=edges, adjacency=mask)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:  # path compression
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int) -> bool:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        if self.size[ri] < self.size[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        self.size[ri] += self.size[rj]
        return True


def connected_components(g: NeighborGraph) -> np.ndarray:
    """Component labels in [0, C), numbered by first appearance."""
    uf = _UnionFind(g.n)
    for i, j, _ in g.edges:
        uf.union(i, j)
    labels = np.empty(g.n, dtype=int)
    seen: dict[int, int] = {}
    for v in range(g.n):
        root = uf.find(v)
        labels[v] = seen.setdefault(root, len(seen))
    return labels


def zero_dim_persistence(d: DissimilarityMatrix) -> PersistenceEvents:
    """Merge sequence of single-linkage clustering over increasing distance.

    Equivalently: the component count of build_eps_graph(d, eps) as a step
    function of eps (strict threshold, so a merge at distance t becomes
    effective for eps > t).
    """
    v = d.values
    n = v.shape[0]
    iu = np.triu_indices(n, 1)
    order = np.argsort(v[iu], kind="stable")
    uf = _UnionFind(n)
    events = []
    count = n
    for k in order:
        i, j = int(iu[0][k]), int(iu[1][k])
        if uf.union(i, j):
            count -= 1
            events.append((float(v[i, j]), count))
            if count == 1:
                break
    return PersistenceEvents(events=tuple(events), n=n)


def choose_eps(events: PersistenceEvents, n_components: int = 1, margin: float = 1.05) -> float:
    """Threshold at which the graph has the requested component count.

    Picks a value inside the eps-interval realizing that count: the geometric
    mean of the bracketing merge distances, or `margin` times the last merge
    when the interval is unbounded above.
    """
    if not 1 <= n_components <= events.n:
        raise ValidationError(f"n_components must be in [1, {events.n}]")
    merges = [e for e, _ in events.events]
    k = events.n - n_components  # merges that must be strictly below eps
    if k == 0:
        return float(merges[0] / 2.0) if merges else 1.0
    if k > len(merges):
        raise ValidationError(f"{n_components} components is never reached")
    lo = merges[k - 1]
    if k == len(merges):
        return float(lo * margin)
    hi = merges[k]
    if hi == lo:
        raise ValidationError(f"no threshold yields exactly {n_components} components")
    return float(np.sqrt(lo * hi))


def dijkstra_from(g: NeighborGraph, source: int, _lists=None) -> np.ndarray:
    """Shortest-path distances from one vertex; +inf across disconnections."""
    if not 0 <= source < g.n:
        raise ValidationError(f"source {source} out of range")
    nbrs, wts = _lists if _lists is not None else g.neighbor_lists()
    dist = np.full(g.n, np.inf)
    dist[source] = 0.0
    done = np.zeros(g.n, dtype=bool)
    heap = [(0.0, source)]
    while heap:
        d_u, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in zip(nbrs[u], wts[u]):
            nd = d_u + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, int(v)))
    return dist


def all_pairs_shortest(g: NeighborGraph) -> np.ndarray:
    """All-pairs shortest paths by running Dijkstra from every vertex."""
    lists = g.neighbor_lists()
    out = np.empty((g.n, g.n))
    for s in range(g.n):
        out[s] = dijkstra_from(g, s, _lists=lists)
    return out


# ---------------------------------------------------------------------------
# Exports.


def graph_to_json(g: NeighborGraph) -> str:
    return json.dumps(
        {"n": g.n, "eps": g.eps, "edges": [[i, j, w] for i, j, w in g.edges]}
    )


def save_graph_json(g: NeighborGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(graph_to_json(g))


def load_graph_json(path) -> NeighborGraph:
    with open(path, "r", encoding="utf-8") as fh:
        blob = json.load(fh)
    n, eps = int(blob["n"]), float(blob["eps"])
    edges = tuple((int(i), int(j), float(w)) for i, j, w in blob["edges"])
    adjacency = np.zeros((n, n), dtype=bool)
    for i, j, _ in edges:
        adjacency[i, j] = adjacency[j, i] = True
    return NeighborGraph(n=n, eps=eps, edges=edges, adjacency=adjacency)


def save_persistence_csv(events: PersistenceEvents, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("eps,components\n")
        for eps, count in events.events:
            fh.write(f"{eps:.17g},{count}\n")
