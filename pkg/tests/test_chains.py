from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypquot.chains import (
    Chain,
    boundary,
    chain_from_path,
    decompose,
    dirac_difference,
    lp_norm,
)
from hypquot.errors import BoundaryError, DomainError, PathError
from hypquot.graph import geodesic_path

from conftest import ball, cycle_graph, path_graph, random_connected


def _walk_to(g, x, y, rng, steps):
    path, u = [x], x
    for _ in range(steps):
        u = int(rng.choice(g.adjacency[u]))
        path.append(u)
    return path + geodesic_path(g, u, y)[1:]


def _random_flow(rng, n=20, extra=15, k_max=4):
    """Signed combination of random x→y walks with weights summing to 1."""
    g = random_connected(n, extra, rng)
    x, y = 0, int(rng.integers(1, n))
    k = int(rng.integers(1, k_max + 1))
    w = rng.normal(size=k)
    w = w / w.sum() if abs(w.sum()) > 0.2 else np.full(k, 1.0 / k)
    c = Chain(g)
    for wi in w:
        c = c + chain_from_path(g, _walk_to(g, x, y, rng, int(rng.integers(0, 6)))) * wi
    return g, c, x, y


def test_orientation_antisymmetry():
    g = cycle_graph(4)
    c = Chain.from_triples(g, [(0, 1, 2.5), (3, 2, 1.0)])
    assert c.value(0, 1) == 2.5 and c.value(1, 0) == -2.5
    assert c.value(2, 3) == -1.0 and c[(3, 2)] == 1.0


def test_boundary_single_edge():
    g = path_graph(3)
    c = Chain.from_triples(g, [(1, 2, 1.0)])
    assert boundary(c).tolist() == dirac_difference(g, 1, 2).tolist()
    c = Chain.from_triples(g, [(2, 1, 1.0)])
    assert boundary(c).tolist() == dirac_difference(g, 2, 1).tolist()


def test_boundary_of_loop_is_zero():
    g = cycle_graph(5)
    c = chain_from_path(g, [0, 1, 2, 3, 4, 0])
    assert not boundary(c).any()


def test_chain_from_path_examples():
    g = path_graph(3)
    assert chain_from_path(g, [0, 1, 2]).coeffs.tolist() == [1.0, 1.0]
    assert not chain_from_path(g, [0, 1, 0]).coeffs.any()
    assert not chain_from_path(g, []).coeffs.any()
    assert not chain_from_path(g, [2]).coeffs.any()
    with pytest.raises(PathError):
        chain_from_path(g, [0, 2])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 12))
def test_boundary_of_random_path_telescopes(seed, steps):
    rng = np.random.default_rng(seed)
    g = random_connected(25, 10, rng)
    x, y = (int(v) for v in rng.integers(25, size=2))
    path = _walk_to(g, x, y, rng, steps)
    q = boundary(chain_from_path(g, path))
    assert q.sum() == 0
    assert q.tolist() == dirac_difference(g, x, y).tolist()


def test_lp_norm_examples():
    g = path_graph(6)
    geo = chain_from_path(g, list(range(6)))
    for p in (1, 1.5, 2, 3, np.inf):
        assert lp_norm(geo, p) == pytest.approx(5 ** (1 / p), rel=1e-15)
    h = cycle_graph(4)
    half = Chain(h, np.full(4, 0.5))
    assert lp_norm(half, 2) == pytest.approx(1.0, rel=1e-15)
    assert lp_norm(Chain(h), 2) == 0
    with pytest.raises(DomainError):
        lp_norm(half, 0.5)


def test_lp_norm_tiny_coefficients_do_not_underflow():
    c = Chain(path_graph(3), np.array([1e-200, 1e-200]))
    assert lp_norm(c, 2) == pytest.approx(np.sqrt(2) * 1e-200, rel=1e-14)


def test_lp_norm_exact_p1():
    g = path_graph(3)
    c = Chain.from_triples(g, [(0, 1, Fraction(1, 3)), (1, 2, Fraction(-2, 3))], exact=True)
    assert lp_norm(c, 1) == Fraction(1)


def test_chain_arithmetic_is_pure():
    g = path_graph(3)
    a = chain_from_path(g, [0, 1, 2])
    b = a * 2 - a / 2
    assert a.coeffs.tolist() == [1.0, 1.0] and b.coeffs.tolist() == [1.5, 1.5]
    assert (-a + a).support().size == 0


def test_serialization_roundtrip():
    g = ball("z2z3", 3)
    rng = np.random.default_rng(2)
    c = Chain(g, np.where(rng.random(g.edge_count) < 0.4, rng.normal(size=g.edge_count), 0))
    back = Chain.from_json(g, c.to_json())
    assert np.array_equal(back.coeffs, c.coeffs)
    assert all(u < v for u, v, _ in c.to_triples())
    e = Chain.from_triples(g, [(0, 1, Fraction(2, 7))], exact=True)
    assert Chain.from_json(g, e.to_json(), exact=True).coeffs[0] == Fraction(2, 7)


def test_triples_reject_non_edge():
    with pytest.raises(PathError):
        Chain.from_triples(path_graph(3), [(0, 2, 1.0)])


def test_decompose_single_path():
    g = path_graph(5)
    d = decompose(chain_from_path(g, [0, 1, 2, 3, 4]))
    assert [t.weight for t in d.path_terms] == [1.0] and not d.cycle_terms
    assert d.path_terms[0].vertices == [0, 1, 2, 3, 4]


def test_decompose_cycle4_two_halves():
    g = cycle_graph(4)
    c = chain_from_path(g, [0, 1, 2]) * 0.5 + chain_from_path(g, [0, 3, 2]) * 0.5
    d = decompose(c)
    assert [t.weight for t in d.path_terms] == [0.5, 0.5] and not d.cycle_terms
    assert sorted(t.vertices for t in d.path_terms) == [[0, 1, 2], [0, 3, 2]]
    assert d.reconstruct(g).allclose(c, 0)
    assert d.l1_sides(g)[0] == lp_norm(c, 1) == 2.0


def test_decompose_pure_loop():
    g = cycle_graph(5)
    d = decompose(chain_from_path(g, [0, 1, 2, 3, 4, 0]))
    assert not d.path_terms and [t.weight for t in d.cycle_terms] == [1.0]
    assert d.alpha_sum == 0


def test_decompose_negative_weight_recorded():
    # 2·[0,1,2] − [0,2]: the first path overshoots, the second comes back with α = −1
    g = cycle_graph(3)
    c = chain_from_path(g, [0, 1, 2]) * 2 - chain_from_path(g, [0, 2])
    for chain in (c, Chain(g, np.array([Fraction(int(v)) for v in c.coeffs], dtype=object))):
        d = decompose(chain)
        ws = sorted(t.weight for t in d.path_terms)
        assert ws == [-1, 2] and d.alpha_sum == 1
        assert d.l1_sides(g)[0] == lp_norm(chain, 1) == 5


def test_decompose_rejects_bad_boundary():
    g = path_graph(4)
    with pytest.raises(BoundaryError):
        decompose(Chain.from_triples(g, [(0, 1, 2.0)]))
    with pytest.raises(BoundaryError):
        decompose(Chain.from_triples(g, [(0, 1, 1.0), (2, 3, 1.0)]))


def test_decompose_exact_mode_is_exact():
    g = ball("grid2d", 2)
    rng = np.random.default_rng(9)
    o, tgt = g.vertex_of(""), g.vertex_of("ab")
    c = Chain(g, exact=True)
    weights = [Fraction(1, 3), Fraction(1, 2), Fraction(1, 6)]
    for w in weights:
        c = c + chain_from_path(g, _walk_to(g, o, tgt, rng, 3), exact=True) * w
    d = decompose(c)
    assert d.alpha_sum == 1
    assert np.array_equal(d.reconstruct(g).coeffs, c.coeffs)
    assert all(isinstance(t.weight, Fraction) for t in d.path_terms + d.cycle_terms)
    assert all(t.weight > 0 for t in d.cycle_terms)


def _kirchhoff(c, x, y):
    g = c.graph
    for z in range(g.vertex_count):
        if z in (x, y):
            continue
        inflow = outflow = 0.0
        for i, v, s in g.incident[z]:
            w = c.coeffs[i] * s
            if w > 0:
                outflow += w
            else:
                inflow -= w
        assert inflow == pytest.approx(outflow, abs=1e-9)


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_decompose_random_flows(seed):
    g, c, x, y = _random_flow(np.random.default_rng(seed))
    _kirchhoff(c, x, y)
    d = decompose(c)
    assert (d.source, d.sink) == (x, y)
    assert d.iterations <= c.support().size
    assert abs(d.alpha_sum - 1) <= 1e-12
    assert d.reconstruct(g).allclose(c, 1e-9)
    assert np.allclose(boundary(d.reconstruct(g)), boundary(c), atol=1e-9)
    assert d.l1_sides(g)[0] == pytest.approx(lp_norm(c, 1), abs=1e-9)
    for t in d.path_terms:
        assert t.weight != 0
        assert t.vertices[0] == x and t.vertices[-1] == y
        assert len(set(t.vertices)) == len(t.vertices)
        assert np.array_equal(boundary(t.chain), dirac_difference(g, x, y))
    for t in d.cycle_terms:
        assert t.weight > 0 and not boundary(t.chain).any()
        assert t.vertices[0] == t.vertices[-1]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_decompose_random_cycles(seed):
    rng = np.random.default_rng(seed)
    g = random_connected(15, 12, rng)
    c = Chain(g)
    for _ in range(int(rng.integers(1, 4))):
        u = int(rng.integers(15))
        c = c + chain_from_path(g, _walk_to(g, u, u, rng, 5)) * float(rng.uniform(0.1, 2))
    d = decompose(c)
    assert not d.path_terms and d.alpha_sum == 0
    assert d.reconstruct(g).allclose(c, 1e-9)


def test_decompose_leaves_input_untouched():
    g = cycle_graph(4)
    c = chain_from_path(g, [0, 1, 2]) * 0.25 + chain_from_path(g, [0, 3, 2]) * 0.75
    before = c.coeffs.copy()
    decompose(c)
    assert np.array_equal(c.coeffs, before)
