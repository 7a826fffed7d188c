"""Finite connected graphs: construction, validation, distances, geodesic sets."""
from __future__ import annotations

import threading
from collections import OrderedDict
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import _config, kernels
from .errors import (
    DisconnectedGraphError,
    DuplicateEdgeError,
    GraphError,
    InvalidVertexError,
    ResourceError,
    SelfLoopError,
)

_ROW_CACHE_SIZE = 256


class Graph:
    """Immutable finite connected simple graph on vertices ``0..n-1``.

    ``canonical_edges[i] = (u, v)`` with ``u < v`` fixes the reference
    orientation of edge ``i``; chains store one coefficient per row.
    Cayley balls additionally carry ``labels`` (reduced words) and ``group``.
    """

    def __init__(self, vertex_count, canonical_edges, labels=None, group=None,
                 dist_threshold=_config.DIST_TABLE_THRESHOLD):
        self.vertex_count = int(vertex_count)
        edges = np.asarray(canonical_edges, dtype=np.int64).reshape(-1, 2)
        self.canonical_edges = edges
        self.labels = tuple(labels) if labels is not None else None
        self.group = group
        self.dist_threshold = dist_threshold

        n = self.vertex_count
        nbrs = [[] for _ in range(n)]
        for u, v in edges:
            nbrs[u].append(int(v))
            nbrs[v].append(int(u))
        self.adjacency = tuple(tuple(sorted(a)) for a in nbrs)
        self.degree_bound = max((len(a) for a in self.adjacency), default=0)
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        self.indptr[1:] = np.cumsum([len(a) for a in self.adjacency])
        self.indices = np.fromiter((v for a in self.adjacency for v in a),
                                   dtype=np.int64, count=int(self.indptr[-1]))
        self.edge_index = {(int(u), int(v)): i for i, (u, v) in enumerate(edges)}
        self._label_index = ({w: i for i, w in enumerate(self.labels)}
                             if self.labels is not None else None)
        self._rows = OrderedDict()
        self._lock = threading.Lock()

    def __repr__(self):
        kind = f", group={self.group}" if self.group is not None else ""
        return f"Graph(n={self.vertex_count}, m={self.edge_count}{kind})"

    @property
    def edge_count(self):
        return int(self.canonical_edges.shape[0])

    @property
    def is_cayley(self):
        return self.labels is not None and self.group is not None

    @property
    def cycle_rank(self):
        return self.edge_count - self.vertex_count + 1

    def is_tree(self):
        return self.cycle_rank == 0

    def check_vertex(self, v):
        if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, np.integer)) \
                or not 0 <= v < self.vertex_count:
            raise InvalidVertexError(v, self.vertex_count)
        return int(v)

    def vertex_of(self, word):
        """Vertex carrying the reduced form of ``word`` (Cayley balls only)."""
        from .groups import locate

        if self._label_index is None:
            raise GraphError("graph has no word labels")
        v = locate(self, word)
        if v is None:
            raise GraphError(f"word {word!r} lies outside the ball")
        return v

    @cached_property
    def has_table(self):
        return self.vertex_count <= self.dist_threshold

    @cached_property
    def _table(self):
        return kernels.all_pairs(self.indptr, self.indices)

    def distance_table(self):
        """All-pairs BFS distances, memoized; refused above the threshold."""
        if not self.has_table:
            raise ResourceError(
                f"{self.vertex_count} vertices exceeds the distance-table threshold "
                f"{self.dist_threshold}")
        return self._table

    def distances_from(self, x):
        x = self.check_vertex(x)
        if self.has_table:
            return self._table[x]
        with self._lock:
            row = self._rows.get(x)
            if row is not None:
                self._rows.move_to_end(x)
                return row
        row = kernels.bfs_row(self.indptr, self.indices, x)
        row.setflags(write=False)
        with self._lock:
            self._rows[x] = row
            while len(self._rows) > _ROW_CACHE_SIZE:
                self._rows.popitem(last=False)
        return row

    @cached_property
    def incident(self):
        """Per vertex: tuple of (edge index, other end, +1 if vertex is the canonical tail)."""
        inc = [[] for _ in range(self.vertex_count)]
        for i, (u, v) in enumerate(self.canonical_edges):
            inc[u].append((i, int(v), 1))
            inc[v].append((i, int(u), -1))
        return tuple(tuple(sorted(a)) for a in inc)

    @cached_property
    def incidence(self):
        """Sparse boundary matrix: column ``i`` is ``delta_v - delta_u`` for edge (u, v)."""
        m = self.edge_count
        u, v = self.canonical_edges[:, 0], self.canonical_edges[:, 1]
        rows = np.concatenate([v, u])
        cols = np.concatenate([np.arange(m), np.arange(m)])
        data = np.concatenate([np.ones(m), -np.ones(m)])
        return sp.csr_matrix((data, (rows, cols)), shape=(self.vertex_count, m))


def build_from_edges(edge_list, vertex_count=None):
    """Validate an edge list and return a :class:`Graph`.

    Self-loops, duplicates (in either orientation) and disconnected input are
    rejected with distinct error types naming the offending element.
    """
    edges = [(int(u), int(v)) for u, v in edge_list]
    if not edges:
        raise GraphError("edge list is empty")
    n = max(max(e) for e in edges) + 1 if vertex_count is None else int(vertex_count)
    seen = set()
    canon = []
    for u, v in edges:
        if u < 0 or v < 0 or u >= n or v >= n:
            raise InvalidVertexError(max(u, v) if max(u, v) >= n else min(u, v), n)
        if u == v:
            raise SelfLoopError(u)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdgeError((u, v))
        seen.add(key)
        canon.append(key)
    canon.sort()
    g = Graph(n, canon)
    reach = kernels.bfs_row(g.indptr, g.indices, 0)
    missing = np.flatnonzero(reach < 0)
    if missing.size:
        raise DisconnectedGraphError(int(missing[0]))
    return g


def distance(g, x, y):
    y = g.check_vertex(y)
    return int(g.distances_from(x)[y])


def eta_geodesic_set(g, x, y, eta=0.0):
    """Sorted vertices ``z`` with ``d(x,z) + d(z,y) <= d(x,y) + eta``."""
    dx = g.distances_from(x)
    dy = g.distances_from(y)
    slack = dx.astype(np.int64) + dy - dx[g.check_vertex(y)]
    return np.flatnonzero(slack <= eta + 1e-12)


def midpoint(g, x, y):
    """Smallest-index z in geod(x, y) with ``|d(x,z) - d(y,z)| <= 1``."""
    dx = g.distances_from(x).astype(np.int64)
    dy = g.distances_from(y).astype(np.int64)
    d = dx[g.check_vertex(y)]
    ok = (dx + dy == d) & (np.abs(dx - dy) <= 1)
    return int(np.flatnonzero(ok)[0])


def geodesic_path(g, x, y):
    """A shortest vertex path from x to y, taking the smallest-index step each time."""
    x = g.check_vertex(x)
    y = g.check_vertex(y)
    dy = g.distances_from(y)
    path = [x]
    cur = x
    while cur != y:
        target = dy[cur] - 1
        cur = next(v for v in g.adjacency[cur] if dy[v] == target)
        path.append(cur)
    return path


def set_distance(g, members):
    """``d(z, S)`` for every vertex z, with S given as an index array."""
    members = np.asarray(members, dtype=np.int64)
    if g.has_table:
        return kernels.set_distance(g.distance_table(), members)
    out = None
    for s in members:
        row = g.distances_from(int(s))
        out = row.copy() if out is None else np.minimum(out, row)
    return out


def read_graph(path):
    """Read the ``n m`` / ``u v`` text format."""
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines or len(lines[0]) != 2:
        raise GraphError(f"{path}: header must be 'n m'")
    n, m = map(int, lines[0])
    body = lines[1:]
    if len(body) != m:
        raise GraphError(f"{path}: header announces {m} edges, found {len(body)}")
    return build_from_edges([(int(u), int(v)) for u, v in body], vertex_count=n)


def write_graph(g, path):
    with open(path, "w") as fh:
        fh.write(f"{g.vertex_count} {g.edge_count}\n")
        for u, v in g.canonical_edges:
            fh.write(f"{u} {v}\n")
