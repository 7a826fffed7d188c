import itertools
from collections import Counter

import numpy as np
import pytest

from hypquot.errors import DomainError, GraphError, ResourceError, UnsupportedOperationError
from hypquot.graph import distance
from hypquot.groups import GroupSpec, cayley_ball, free_reduce, invert, locate, translate

from conftest import ball, path_graph


def _free_sphere_counts(radius):
    words = {""}
    for n in range(1, radius + 1):
        for w in itertools.product("aAbB", repeat=n):
            words.add(free_reduce("".join(w)))
    return Counter(len(w) for w in words)


def _psl2z_sphere_counts(radius):
    # Z/2 * Z/3 is PSL(2, Z): a -> S, b -> ST, faithful up to sign
    S = np.array([[0, -1], [1, 0]])
    ST = np.array([[0, -1], [1, 1]])
    gens = [S, ST, ST @ ST]

    def key(M):
        M = M if (M[0, 0], M[0, 1]) >= (0, 0) and (M[0, 0] > 0 or M[0, 1] > 0) else -M
        return tuple(M.ravel())

    seen = {key(np.eye(2, dtype=int)): 0}
    frontier = [np.eye(2, dtype=int)]
    for r in range(1, radius + 1):
        nxt = []
        for M in frontier:
            for G in gens:
                k = key(M @ G)
                if k not in seen:
                    seen[k] = r
                    nxt.append(M @ G)
        frontier = nxt
    return Counter(seen.values())


@pytest.mark.parametrize("radius,n", [(0, 1), (1, 5), (2, 17), (3, 53), (4, 161)])
def test_free2_ball_sizes(radius, n):
    g = cayley_ball(GroupSpec.parse("free:2", radius))
    assert g.vertex_count == n
    assert g.edge_count == n - 1 and g.is_tree()
    assert Counter(g.word_length) == _free_sphere_counts(radius)


def test_free2_radius1_is_star():
    g = ball("free:2", 1)
    assert g.vertex_count == 5 and g.edge_count == 4
    assert g.adjacency[0] == (1, 2, 3, 4)


@pytest.mark.parametrize("rank,radius", [(1, 4), (3, 3)])
def test_free_rank_sizes(rank, radius):
    g = cayley_ball(GroupSpec("free", radius, rank))
    expected = 1 + sum(2 * rank * (2 * rank - 1) ** (k - 1) for k in range(1, radius + 1))
    assert g.vertex_count == expected and g.is_tree()


@pytest.mark.parametrize("radius", [0, 1, 2, 3, 5])
def test_grid_ball_is_l1_ball(radius):
    g = cayley_ball(GroupSpec.parse("grid2d", radius))
    count = sum(1 for i in range(-radius, radius + 1) for j in range(-radius, radius + 1)
                if abs(i) + abs(j) <= radius)
    assert g.vertex_count == count
    if radius == 2:
        assert count == 13


@pytest.mark.parametrize("radius", [1, 2, 4, 6])
def test_z2z3_matches_psl2z(radius):
    g = ball("z2z3", radius)
    assert Counter(g.word_length) == _psl2z_sphere_counts(radius)


def test_z2z3_r6_shape():
    g = ball("z2z3", 6)
    assert (g.vertex_count, g.edge_count) == (50, 63)


def test_surface_small_balls_are_free():
    # relator length 8: no two reduced words of length <= 3 coincide
    g = ball("surface2", 3)
    assert Counter(g.word_length) == Counter({0: 1, 1: 8, 2: 56, 3: 392})
    assert g.is_tree()


def test_surface_radius4_sphere():
    # 8 half-relator identifications among the 8·7³ reduced words of length 4
    g = cayley_ball(GroupSpec.parse("surface2", 4))
    assert Counter(g.word_length)[4] == 8 * 7 ** 3 - 8
    assert not g.is_tree()


def test_surface_dehn_reduction():
    grp = GroupSpec.parse("surface2").group()
    r = "abABcdCD"
    assert grp.reduce(r) == ""
    for i in range(8):
        assert grp.reduce(r[i:] + r[:i]) == ""
        assert grp.reduce(invert(r[i:] + r[:i])) == ""
    assert grp.equal("abAB", "dcDC")
    assert not grp.equal("ab", "ba")
    assert grp.reduce("aA") == ""


def test_surface_labels_reduce_consistently():
    g = ball("surface2", 3)
    grp = g.group
    for v in range(0, g.vertex_count, 17):
        assert grp.equal(g.labels[v], grp.reduce(g.labels[v]))
        assert locate(g, g.labels[v]) == v


def test_word_length_is_bfs_level():
    for spec, r in [("free:2", 4), ("z2z3", 6), ("grid2d", 4), ("surface2", 3)]:
        g = ball(spec, r)
        d = g.distances_from(0)
        assert d.tolist() == list(g.word_length)
        if spec != "surface2":
            assert all(len(g.group.reduce(w)) == len(w) for w in g.labels)


def test_free_distance_a_ainv():
    g = ball("free:2", 2)
    assert distance(g, g.vertex_of("a"), g.vertex_of("A")) == 2


def test_translate_examples():
    g = ball("free:2", 2)
    b = g.vertex_of("b")
    assert translate(g, "a", b) == g.vertex_of("ab")
    assert translate(g, "", b) == b
    assert translate(g, "e", 7) == 7
    assert translate(g, "aa", g.vertex_of("ab")) is None


def test_translate_unsupported_on_plain_graph():
    with pytest.raises(UnsupportedOperationError):
        translate(path_graph(3), "a", 0)


@pytest.mark.parametrize("spec,radius,word", [("free:2", 5, "ab"), ("z2z3", 6, "ab"),
                                               ("grid2d", 5, "aB"), ("surface2", 3, "c")])
def test_translate_partial_isometry(spec, radius, word):
    g = ball(spec, radius)
    inner = [v for v in range(g.vertex_count) if g.word_length[v] <= radius - len(word)]
    rng = np.random.default_rng(0)
    for _ in range(200):
        u, v = (int(inner[i]) for i in rng.integers(len(inner), size=2))
        tu, tv = translate(g, word, u), translate(g, word, v)
        assert tu is not None and tv is not None
        assert distance(g, tu, tv) == distance(g, u, v)


def test_vertex_cap():
    with pytest.raises(ResourceError):
        cayley_ball(GroupSpec.parse("free:2", 10), vertex_cap=1000)


def test_spec_validation():
    with pytest.raises(DomainError):
        GroupSpec("free", 2, 0)
    with pytest.raises(DomainError):
        GroupSpec("free", -1)
    with pytest.raises(DomainError):
        GroupSpec.parse("heisenberg", 2)
    assert GroupSpec.parse("z2z3", 3) == GroupSpec("free_product_Z2_Z3", 3)
    assert GroupSpec.parse("free:3", 1).rank == 3


def test_vertex_of_outside_ball():
    g = ball("free:2", 2)
    with pytest.raises(GraphError):
        g.vertex_of("aaa")
    with pytest.raises(DomainError):
        g.vertex_of("z")
