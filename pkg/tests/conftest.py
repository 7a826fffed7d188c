import functools

import networkx as nx
import numpy as np
import pytest

from hypquot.graph import build_from_edges
from hypquot.groups import GroupSpec, cayley_ball

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@functools.lru_cache(maxsize=None)
def ball(spec, radius):
    return cayley_ball(GroupSpec.parse(spec, radius))


def path_graph(n):
    return build_from_edges([(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return build_from_edges([(i, (i + 1) % n) for i in range(n)])


def random_connected(n, extra, rng):
    """Random spanning tree plus ``extra`` random chords."""
    edges = set()
    order = rng.permutation(n)
    for k in range(1, n):
        u, v = int(order[k]), int(order[rng.integers(k)])
        edges.add((min(u, v), max(u, v)))
    tries = 0
    while len(edges) < n - 1 + extra and tries < 20 * (extra + 1):
        tries += 1
        u, v = (int(a) for a in rng.integers(n, size=2))
        if u != v:
            edges.add((min(u, v), max(u, v)))
    return build_from_edges(sorted(edges), vertex_count=n)


def to_nx(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.vertex_count))
    G.add_edges_from(map(tuple, g.canonical_edges.tolist()))
    return G


def bfs_oracle(g):
    return dict(nx.all_pairs_shortest_path_length(to_nx(g)))


SMALL_GRAPHS = {
    "path5": lambda: path_graph(5),
    "path10": lambda: path_graph(10),
    "cycle4": lambda: cycle_graph(4),
    "cycle5": lambda: cycle_graph(5),
    "cycle8": lambda: cycle_graph(8),
    "petersen": lambda: build_from_edges(list(nx.petersen_graph().edges())),
    "k4": lambda: build_from_edges([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
    "free2_r2": lambda: ball("free:2", 2),
    "grid_r2": lambda: ball("grid2d", 2),
    "grid_r3": lambda: ball("grid2d", 3),
    "z2z3_r4": lambda: ball("z2z3", 4),
    "random30": lambda: random_connected(30, 12, np.random.default_rng(7)),
    "random40": lambda: random_connected(40, 25, np.random.default_rng(11)),
}


@pytest.fixture(params=sorted(SMALL_GRAPHS))
def small_graph(request):
    return SMALL_GRAPHS[request.param]()
