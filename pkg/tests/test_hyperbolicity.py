import itertools
import math

import numpy as np
import pytest

from hypquot.errors import DomainError, EpsilonSearchError, ResourceError
from hypquot.graph import eta_geodesic_set
from hypquot.hyperbolicity import (
    Verdict,
    build_visual_metric,
    four_point_delta,
    gromov_product,
    gromov_table,
    growth_fit,
    neighborhood_counts,
    nesting_check,
    nesting_scan,
    suggest_epsilon,
)

from conftest import SMALL_GRAPHS, ball, cycle_graph, path_graph


def test_gromov_examples():
    g = path_graph(4)
    assert gromov_product(g, 0, 2, 3) == 2
    assert gromov_product(g, 3, 1, 1) == 2
    assert gromov_product(g, 1, 0, 3) == 0  # t on a geodesic from x to y


def test_gromov_properties(small_graph):
    D = small_graph.distance_table().astype(int)
    n = len(D)
    for t in range(0, n, max(1, n // 5)):
        G = gromov_table(small_graph, t)
        assert np.array_equal(G, G.T)
        assert ((2 * G) == np.round(2 * G)).all()
        assert (G >= 0).all()
        assert (G <= np.minimum(D[t][:, None], D[t][None, :])).all()
        assert np.array_equal(np.diag(G), D[t].astype(float))
        for x, y in [(0, n - 1), (n // 2, 1)]:
            assert G[x, y] == gromov_product(small_graph, t, x, y)


def test_delta_trees_are_zero():
    for g in (path_graph(7), ball("free:2", 4), ball("surface2", 3)):
        est = four_point_delta(g)
        assert est.delta == 0 and est.exact


def test_delta_cycle4_is_two():
    est = four_point_delta(cycle_graph(4))
    assert est.delta == 2 and est.exact and not est.is_lower_bound


def test_delta_attained_by_witness(small_graph):
    est = four_point_delta(small_graph)
    D = small_graph.distance_table()
    a, b, c, d = est.witness
    sums = [D[a, b] + D[c, d], D[a, c] + D[b, d], D[a, d] + D[b, c]]
    assert D[a, c] + D[b, d] - max(D[a, d] + D[b, c], D[a, b] + D[c, d]) == est.delta
    assert sums[1] == max(sums)


def test_delta_cap_and_sampled():
    g = ball("grid2d", 3)
    with pytest.raises(ResourceError, match="sampled"):
        four_point_delta(g, cap=10)
    est = four_point_delta(g, "sampled", samples=3000, seed=1)
    assert est.is_lower_bound and est.delta <= four_point_delta(g).delta
    with pytest.raises(DomainError):
        four_point_delta(g, "fast")


def _brute_delta(D):
    best = 0
    for q in itertools.combinations(range(len(D)), 4):
        a, b, c, d = q
        s = sorted([D[a, b] + D[c, d], D[a, c] + D[b, d], D[a, d] + D[b, c]])
        best = max(best, s[2] - s[1])
    return best


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_grid_delta_matches_brute(r):
    g = ball("grid2d", r)
    assert four_point_delta(g).delta == _brute_delta(g.distance_table().astype(int))


def test_grid_delta_frozen():
    # brute-force values: the L1 ball saturates once both axes fit a square
    assert [four_point_delta(ball("grid2d", r)).delta for r in (1, 2, 5)] == [0, 4, 8]


def test_visual_metric_tree_is_rho():
    for g in (ball("free:2", 3), path_graph(6)):
        for t in (0, g.vertex_count - 1):
            vm = build_visual_metric(g, t, 0.7)
            off = ~np.eye(g.vertex_count, dtype=bool)
            assert np.allclose(vm.values[off], vm.rho[off], rtol=1e-14, atol=0)
            assert vm.sandwich_C == 1.0


def _check_visual(vm, G, eps):
    V = vm.values
    n = len(V)
    assert np.array_equal(V, V.T)
    assert (np.diag(V) > 0).all()
    assert np.allclose(np.diag(V), np.exp(-eps * np.diag(G)))
    # triangle inequality over all triples
    assert (V[:, :, None] <= V[:, None, :] + V[None, :, :].transpose(0, 2, 1) + 1e-12).all()
    rho = np.exp(-eps * G)
    C = vm.sandwich_C
    assert (rho / C <= V * (1 + 1e-12)).all() and (V <= C * rho * (1 + 1e-12)).all()
    assert C >= 1


def test_visual_metric_cycle4():
    g = cycle_graph(4)
    vm = build_visual_metric(g, 0, 1.0)
    _check_visual(vm, gromov_table(g, 0), 1.0)
    assert math.isfinite(vm.sandwich_C)


@pytest.mark.parametrize("name", ["petersen", "grid_r3", "z2z3_r4", "random30"])
def test_visual_metric_invariants(name):
    g = SMALL_GRAPHS[name]()
    for t in (0, g.vertex_count // 2):
        for eps in (0.1, 0.5):
            _check_visual(build_visual_metric(g, t, eps), gromov_table(g, t), eps)


def test_visual_metric_is_chain_infimum():
    # brute force over all chains of up to 4 hops on a small graph
    g = cycle_graph(5)
    eps = 0.9
    vm = build_visual_metric(g, 0, eps)
    rho = vm.rho
    n = g.vertex_count
    for x, y in itertools.permutations(range(n), 2):
        best = rho[x, y]
        for k in range(1, 4):
            for mids in itertools.product(range(n), repeat=k):
                seq = (x, *mids, y)
                best = min(best, sum(rho[a, b] for a, b in zip(seq, seq[1:]) if a != b))
        assert vm.values[x, y] == pytest.approx(best, rel=1e-13)


def test_visual_metric_rejects_bad_epsilon():
    with pytest.raises(DomainError):
        build_visual_metric(path_graph(3), 0, 0.0)


def test_suggest_epsilon_tree():
    eps, C = suggest_epsilon(ball("free:2", 3), 0.0, 2.0)
    assert eps == math.log(2) and C == 1.0


def test_suggest_epsilon_cycle():
    eps, C = suggest_epsilon(cycle_graph(4), 2.0, 10.0)
    assert eps > 0 and C <= 10


def test_suggest_epsilon_grid_search_order():
    g = ball("grid2d", 3)
    eps, C = suggest_epsilon(g, four_point_delta(g).delta, 1.5)
    grid = [math.log(2) / 4 * 2.0 ** -j for j in range(13)]
    assert eps in grid and C <= 1.5
    k = grid.index(eps)
    if k:
        centers = sorted(set(np.linspace(0, g.vertex_count - 1, 10).round().astype(int)))
        assert max(build_visual_metric(g, t, grid[k - 1]).sandwich_C for t in centers) > 1.5


def test_suggest_epsilon_cap_one_fails():
    with pytest.raises(EpsilonSearchError) as exc:
        suggest_epsilon(cycle_graph(4), 2.0, 1.0)
    assert "1.0" in str(exc.value)


def test_suggest_epsilon_small_product_gives_metric_rho():
    # once ϵ·δ <= ln2 the kernel ρ already satisfies the triangle inequality
    for name in ("grid_r3", "cycle8", "random40"):
        g = SMALL_GRAPHS[name]()
        delta = four_point_delta(g).delta
        eps, C = suggest_epsilon(g, delta, 1 + 1e-9)
        assert eps == math.log(2) / max(delta, 1) and C == 1.0


def test_suggest_epsilon_exhausted_reports_best(monkeypatch):
    import hypquot.hyperbolicity as hyp

    class Fake:
        def __init__(self, eps):
            self.sandwich_C = 1.5 + eps

    monkeypatch.setattr(hyp, "build_visual_metric", lambda g, t, eps: Fake(eps))
    with pytest.raises(EpsilonSearchError) as exc:
        hyp.suggest_epsilon(cycle_graph(4), 2.0, 1.2)
    eps, C = exc.value.best
    assert eps == math.log(2) / 2 * 2.0 ** -12 and C == pytest.approx(1.5 + eps)


def test_growth_free_group():
    g = ball("free:2", 9)
    inner = [v for v in range(g.vertex_count) if g.word_length[v] <= 3]
    rng = np.random.default_rng(0)
    pairs = [tuple(int(v) for v in rng.choice(inner, 2, replace=False)) for _ in range(30)]
    fit = growth_fit(g, pairs, 5)
    assert fit.beta_prime == pytest.approx(math.log(3), abs=0.1)


def test_growth_path_graph():
    g = path_graph(60)
    pairs = [(10, 40), (5, 30), (20, 45)]
    for x, y in pairs:
        assert (neighborhood_counts(g, x, y, 3) / abs(x - y) <= 2).all()
    assert growth_fit(g, pairs, 3).beta_prime < 0.1


def test_growth_grid_slope_decreases():
    slopes = []
    for R, k in [(6, 2), (12, 4), (24, 8)]:
        g = ball("grid2d", R)
        o = g.vertex_of("")
        pairs = [(g.vertex_of("A"), g.vertex_of("a")), (g.vertex_of("b"), g.vertex_of("B")),
                 (o, g.vertex_of("ab"))]
        slopes.append(growth_fit(g, pairs, k).beta_prime)
    assert slopes[0] > slopes[1] > slopes[2] > 0


@pytest.mark.parametrize("name", ["petersen", "grid_r3", "z2z3_r4", "random40"])
def test_growth_bound_holds_and_is_tight(name):
    g = SMALL_GRAPHS[name]()
    D = g.distance_table()
    rng = np.random.default_rng(4)
    pairs = [tuple(int(v) for v in rng.choice(g.vertex_count, 2, replace=False))
             for _ in range(15)]
    fit = growth_fit(g, pairs, 3)
    ratios = []
    for x, y in pairs:
        # independent count straight from the distance table
        dgeo = D[eta_geodesic_set(g, x, y, 0)].min(axis=0)
        for k in range(4):
            N = int((dgeo <= k).sum())
            bound = fit.growth_prefactor * math.exp(fit.beta_prime * k) * D[x, y]
            assert N <= bound * (1 + 1e-12)
            ratios.append(N / bound)
    assert max(ratios) == pytest.approx(1.0, rel=1e-12)


def test_growth_rejects_bad_pairs():
    with pytest.raises(DomainError):
        growth_fit(path_graph(3), [], 2)
    with pytest.raises(DomainError):
        growth_fit(path_graph(3), [(1, 1)], 2)


def test_nesting_examples():
    g = path_graph(10)
    assert nesting_check(g, 0, 3, 6, 9, 0, 0, 0) is Verdict.HOLDS
    assert nesting_check(g, 0, 3, 3, 9, 0, 0, 1.0) is Verdict.VACUOUS


def test_nesting_trees_never_violated():
    for g in (ball("free:2", 3), ball("free:2", 4), path_graph(12)):
        if g.vertex_count > 80:
            continue
        for e1, e2 in [(0, 0), (1, 0), (0.5, 2), (2, 2)]:
            assert nesting_scan(g, 0.0, e1, e2).violated == 0
        assert nesting_scan(g, 0.0, tight=True).violated == 0


def test_nesting_scan_matches_pointwise():
    g = cycle_graph(6)
    delta = four_point_delta(g).delta
    counts = {"holds": 0, "vacuous": 0, "violated": 0}
    for q in itertools.product(range(6), repeat=4):
        counts[nesting_check(g, *q, 1.0, 0.5, delta).value] += 1
    s = nesting_scan(g, delta, 1.0, 0.5)
    assert (s.holds, s.vacuous, s.violated) == (counts["holds"], counts["vacuous"],
                                                counts["violated"])


def test_nesting_detects_violation_with_too_small_delta():
    g = cycle_graph(8)
    s = nesting_scan(g, 0.0, tight=True)
    assert s.violated > 0
    a, b, c, d = s.witness
    da = g.distances_from(a)
    db = g.distances_from(b)
    eta1 = float(da[b] + db[c] - da[c])
    eta2 = float(db[c] + g.distances_from(c)[d] - db[d])
    assert nesting_check(g, a, b, c, d, eta1, eta2, 0.0) is Verdict.VIOLATED


def test_nesting_zero_violations_with_computed_delta(small_graph):
    delta = four_point_delta(small_graph).delta
    assert nesting_scan(small_graph, delta, tight=True).violated == 0
    for e1, e2 in [(0, 0), (1, 1), (0.5, 2)]:
        assert nesting_scan(small_graph, delta, e1, e2).violated == 0
