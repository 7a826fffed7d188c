"""Four-point δ, Gromov products, visual metrics, neighborhood growth, nesting."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _config, kernels
from .errors import DomainError, EpsilonSearchError, ResourceError
from .graph import eta_geodesic_set, set_distance


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    VACUOUS = "vacuous"
    VIOLATED = "violated"


def gromov_product(g, t, x, y):
    """(x, y)_t = ½(d(x,t) + d(y,t) - d(x,y)); exact half-integer as float."""
    dt = g.distances_from(t)
    x, y = g.check_vertex(x), g.check_vertex(y)
    return 0.5 * (int(dt[x]) + int(dt[y]) - int(g.distances_from(x)[y]))


def gromov_table(g, t):
    """Matrix of (x, y)_t over all vertex pairs."""
    D = g.distance_table().astype(np.float64)
    dt = D[t]
    return 0.5 * (dt[:, None] + dt[None, :] - D)


@dataclass(frozen=True)
class DeltaEstimate:
    delta: float
    exact: bool
    witness: tuple
    samples: int = 0

    @property
    def is_lower_bound(self):
        return not self.exact


def four_point_delta(g, mode="exact", samples=20000, seed=0, cap=_config.DELTA_EXACT_CAP):
    """Least δ with d(a,c)+d(b,d) <= max(d(a,d)+d(b,c), d(a,b)+d(c,d)) + δ.

    ``mode="exact"`` scans every quadruple and is refused above ``cap``
    vertices; ``mode="sampled"`` returns a flagged lower bound.
    """
    n = g.vertex_count
    if mode == "exact":
        if g.is_tree():
            # four-point identity is exact on trees; any quadruple attains 0
            return DeltaEstimate(0.0, True, (0, 0, 0, 0))
        if n > cap:
            raise ResourceError(
                f"exact four-point scan needs n <= {cap} (got {n}); use mode='sampled'")
        if n < 4:
            best, w = kernels.numpy_impl.four_point(g.distance_table())
        else:
            best, w = kernels.four_point(g.distance_table())
        return DeltaEstimate(float(best), True, tuple(int(v) for v in w))
    if mode != "sampled":
        raise DomainError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    quads = rng.integers(0, n, size=(samples, 4))
    best, wit = -1, ()
    for a, b, c, d in quads:
        da = g.distances_from(int(a)).astype(np.int64)
        db = g.distances_from(int(b)).astype(np.int64)
        dc = g.distances_from(int(c)).astype(np.int64)
        lhs = da[c] + db[d]
        gap = lhs - max(da[d] + db[c], da[b] + dc[d])
        if gap > best:
            best, wit = int(gap), (int(a), int(b), int(c), int(d))
    return DeltaEstimate(float(max(best, 0)), False, wit, samples)


def nesting_check(g, a, b, c, d, eta1, eta2, delta):
    """Replay the geodesic nesting lemma on one quadruple."""
    D = lambda u, v: int(g.distances_from(u)[g.check_vertex(v)])  # noqa: E731
    tol = 1e-9
    hyp = (D(a, b) + D(b, c) <= D(a, c) + eta1 + tol
           and D(b, c) + D(c, d) <= D(b, d) + eta2 + tol
           and D(b, c) > (eta1 + eta2 + delta) / 2)
    if not hyp:
        return Verdict.VACUOUS
    ok = (D(a, b) + D(b, d) <= D(a, d) + eta1 + delta + tol
          and D(a, c) + D(c, d) <= D(a, d) + eta2 + delta + tol)
    return Verdict.HOLDS if ok else Verdict.VIOLATED


@dataclass(frozen=True)
class NestingScan:
    holds: int
    vacuous: int
    violated: int
    witness: tuple


def nesting_scan(g, delta, eta1=0.0, eta2=0.0, tight=False):
    """Exhaustive nesting check over all ordered quadruples.

    With ``tight=True`` each quadruple uses the least slacks η₁, η₂ that make
    the membership hypotheses hold.
    """
    h, v, x, w = kernels.nesting_scan(g.distance_table(), float(delta), float(eta1),
                                      float(eta2), bool(tight))
    return NestingScan(int(h), int(v), int(x), tuple(int(i) for i in w) if x else ())


@dataclass
class VisualMetric:
    center: int
    epsilon: float
    values: np.ndarray
    sandwich_C: float
    rho: np.ndarray = field(repr=False)

    def __call__(self, x, y):
        return float(self.values[x, y])


def build_visual_metric(g, t, epsilon):
    """Chain-infimum visual metric centred at ``t``.

    ``d_t(x, y)`` is the cheapest chain x = z₀, …, z_m = y under the weights
    ρ(u, v) = exp(-ϵ (u,v)_t); the diagonal keeps ρ(x, x) > 0.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    t = g.check_vertex(t)
    rho = np.exp(-epsilon * gromov_table(g, t))
    W = rho.copy()
    np.fill_diagonal(W, 0.0)
    vals = kernels.minplus_closure(W)
    np.fill_diagonal(vals, np.diag(rho))
    C = max(1.0, float(np.max(rho / vals)))
    return VisualMetric(t, float(epsilon), vals, C, rho)


def _centers(n, count):
    return sorted(set(np.linspace(0, n - 1, min(count, n)).round().astype(int).tolist()))


def suggest_epsilon(g, delta, C_cap, centers=10):
    """Largest ϵ on the grid ln2/max(δ,1)·2^-j, j = 0..12, with worst C <= C_cap.

    Returns ``(epsilon, worst_C)``.
    """
    if delta < 0:
        raise DomainError("delta must be >= 0")
    if not C_cap > 1:
        raise EpsilonSearchError(f"C_cap must exceed 1, got {C_cap}", best=None)
    base = math.log(2) / max(delta, 1.0)
    cs = _centers(g.vertex_count, centers)
    best = None
    for j in range(13):
        eps = base * 2.0 ** -j
        worst = max(build_visual_metric(g, t, eps).sandwich_C for t in cs)
        if best is None or worst < best[1]:
            best = (eps, worst)
        if worst <= C_cap:
            return eps, worst
    raise EpsilonSearchError(
        f"no grid epsilon reaches C <= {C_cap}; best (epsilon, C) = {best}", best=best)


@dataclass(frozen=True)
class GrowthFit:
    beta_prime: float
    growth_prefactor: float
    fit_prefactor: float
    residual_rms: float
    points: tuple = field(repr=False)


def neighborhood_counts(g, x, y, k_max):
    """N(k) = #{z : d(z, geod(x, y)) <= k} for k = 0..k_max."""
    dist = set_distance(g, eta_geodesic_set(g, x, y, 0))
    hist = np.bincount(dist, minlength=k_max + 1)[: k_max + 1]
    return np.cumsum(hist)


def growth_fit(g, pair_samples, k_max, floor=1e-6):
    """Fit N(k) <= D·exp(β′k)·d(x,y) over the sampled pairs.

    Least squares on ln(N(k)/d) gives the slope β′ (floored at ``floor``);
    the prefactor is then raised to the smallest value making every sampled
    bound hold.
    """
    pairs = [(int(x), int(y)) for x, y in pair_samples]
    if not pairs:
        raise DomainError("growth_fit needs at least one pair")
    ks, ys, pts = [], [], []
    for x, y in pairs:
        if x == y:
            raise DomainError(f"pair ({x}, {y}) has x == y")
        d = int(g.distances_from(x)[y])
        counts = neighborhood_counts(g, x, y, k_max)
        for k, N in enumerate(counts):
            ks.append(k)
            ys.append(math.log(N / d))
            pts.append((k, int(N), d))
    ks, ys = np.asarray(ks, float), np.asarray(ys, float)
    if np.ptp(ks) > 0:
        slope, intercept = np.polyfit(ks, ys, 1)
    else:
        slope, intercept = 0.0, float(ys.mean())
    beta_prime = max(float(slope), floor)
    fit_D = math.exp(intercept)
    ratios = np.array([N / (math.exp(beta_prime * k) * d) for k, N, d in pts])
    D = max(fit_D, float(ratios.max()))
    resid = ys - (slope * ks + intercept)
    return GrowthFit(beta_prime, D, fit_D, float(np.sqrt(np.mean(resid ** 2))), tuple(pts))
