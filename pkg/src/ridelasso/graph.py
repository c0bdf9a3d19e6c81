"""Spatial similarity graph over trip pickups."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from . import kernels
from .trip_data import Table

EARTH_RADIUS_KM = 6371.0


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (-90.0 <= self.lat <= 90.0 and -180.0 <= self.lon <= 180.0):
            raise ValueError(f"invalid coordinates ({self.lat}, {self.lon})")


@dataclass
class TripGraph:
    """Simple undirected weighted graph; ``edges`` rows are ``(j, k)`` with ``j < k``."""

    node_count: int
    edges: np.ndarray
    distances: np.ndarray
    weights: np.ndarray
    node_ids: np.ndarray = None

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.distances = np.asarray(self.distances, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.node_ids is None:
            self.node_ids = np.arange(self.node_count)
        n_e = len(self.edges)
        if self.distances.shape != (n_e,) or self.weights.shape != (n_e,):
            raise ValueError("distances and weights must have one entry per edge")
        if n_e:
            j, k = self.edges[:, 0], self.edges[:, 1]
            if np.any(j >= k) or j.min() < 0 or k.max() >= self.node_count:
                raise ValueError("edges must satisfy 0 <= j < k < node_count")
            if len(np.unique(j * self.node_count + k)) != n_e:
                raise ValueError("duplicate edges")
            if not (np.all(np.isfinite(self.weights)) and np.all(self.weights > 0)):
                raise ValueError("edge weights must be finite and positive")

    @property
    def edge_count(self):
        return len(self.edges)

    def adjacency(self):
        """Sorted neighbor list for every node."""
        nbrs = [[] for _ in range(self.node_count)]
        for j, k in self.edges:
            nbrs[j].append(int(k))
            nbrs[k].append(int(j))
        return [sorted(n) for n in nbrs]

    def degrees(self):
        return np.bincount(self.edges.ravel(), minlength=self.node_count)

    def scaled(self, factor):
        return TripGraph(self.node_count, self.edges.copy(), self.distances.copy(),
                         self.weights * factor, self.node_ids.copy())

    def edge_table(self):
        rows = [[int(self.node_ids[j]), int(self.node_ids[k]), float(d), float(w)]
                for (j, k), d, w in zip(self.edges, self.distances, self.weights)]
        return Table(["j", "k", "distance_km", "weight"], rows)


def haversine_km(a, b):
    """Great-circle distance between two ``GeoPoint`` values in kilometres."""
    return float(pairwise_km([a.lat], [a.lon], [b.lat], [b.lon])[0, 0])


def _coords(nodes):
    lat = np.ascontiguousarray([n.pickup_lat for n in nodes], dtype=float)
    lon = np.ascontiguousarray([n.pickup_lon for n in nodes], dtype=float)
    return lat, lon


def pairwise_km(lat_a, lon_a, lat_b=None, lon_b=None):
    if lat_b is None:
        lat_b, lon_b = lat_a, lon_a
    return kernels.haversine_matrix(
        np.ascontiguousarray(lat_a, dtype=float), np.ascontiguousarray(lon_a, dtype=float),
        np.ascontiguousarray(lat_b, dtype=float), np.ascontiguousarray(lon_b, dtype=float),
        EARTH_RADIUS_KM,
    )


def nearest_neighbors(lat, lon, k, ids, block=1024):
    """The ``k`` nearest other nodes of every node, ties to the smaller id.

    Exact brute force, processed in row blocks to bound memory. Returns the
    neighbor index array and the matching distances, both ``(m, k)``.
    """
    m = len(lat)
    nn = np.empty((m, k), dtype=np.int64)
    nd = np.empty((m, k))
    for start in range(0, m, block):
        stop = min(start + block, m)
        D = pairwise_km(lat[start:stop], lon[start:stop], lat, lon)
        D[np.arange(stop - start), np.arange(start, stop)] = np.inf
        kth = np.partition(D, k - 1, axis=1)[:, k - 1]
        for r in range(stop - start):
            row = D[r]
            cand = np.flatnonzero(row <= kth[r])
            order = cand[np.lexsort((ids[cand], row[cand]))][:k]
            nn[start + r] = order
            nd[start + r] = row[order]
    return nn, nd


def build_knn_graph(nodes, k=5, weight_scale_km=2.0):
    """Connect every node to its ``k`` nearest pickups.

    Mutual selections collapse into one undirected edge, so every degree is
    at least ``k``. Edge weights are ``exp(-distance / weight_scale_km)``.
    """
    nodes = list(nodes)
    m = len(nodes)
    if k < 1 or k >= m:
        raise ValueError(f"k must satisfy 1 <= k < node count ({m}), got {k}")
    if not weight_scale_km > 0:
        raise ValueError("weight_scale_km must be positive")
    lat, lon = _coords(nodes)
    ids = np.array([n.node_id for n in nodes])
    nn, nd = nearest_neighbors(lat, lon, k, ids)
    rows = np.repeat(np.arange(m), k)
    cols = nn.ravel()
    lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
    keys, first = np.unique(lo * m + hi, return_index=True)
    d = nd.ravel()[first]
    edges = np.column_stack([keys // m, keys % m])
    return TripGraph(m, edges, d, np.exp(-d / weight_scale_km), ids)


def distance_matrix(nodes):
    """Labelled square table of pairwise pickup distances in km."""
    nodes = list(nodes)
    if not nodes:
        raise ValueError("distance_matrix needs at least one node")
    lat, lon = _coords(nodes)
    D = pairwise_km(lat, lon)
    D = np.minimum(D, D.T)
    np.fill_diagonal(D, 0.0)
    ids = [n.node_id for n in nodes]
    rows = [[ids[i]] + [float(v) for v in D[i]] for i in range(len(nodes))]
    return Table(["node_id"] + [str(i) for i in ids], rows)


def components(node_count, edges):
    """Component label per node, numbered in order of each component's smallest node."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    adj = sparse.coo_matrix(
        (np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(node_count, node_count)
    )
    _, labels = connected_components(adj, directed=False)
    return labels


def spatial_components(graph, nodes, cut_km):
    """Connected components after dropping edges longer than ``cut_km``."""
    if cut_km < 0:
        raise ValueError("cut_km must be non-negative")
    keep = graph.distances <= cut_km
    labels = components(graph.node_count, graph.edges[keep])
    ids = [n.node_id for n in nodes]
    return Table(["node_id", "component_id"], [[ids[i], int(c)] for i, c in enumerate(labels)])
