"""Constants ledger and falsification harness for the ℓ^p lower-bound argument.

Every closed-form constant is a pure function here.  The ``verify_*``
functions replay the inequalities on finite samples and never raise on a
failed inequality: violations are counted and come back with witnesses.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _config
from .chains import boundary, decompose, dirac_difference
from .errors import BoundaryError, DomainError, PathError, UnsupportedOperationError
from .graph import eta_geodesic_set, geodesic_path, set_distance
from .groups import GroupSpec, cayley_ball
from .hyperbolicity import (
    Verdict,
    build_visual_metric,
    four_point_delta,
    gromov_table,
    growth_fit,
    nesting_check,
    nesting_scan,
    suggest_epsilon,
)
from .lp_flow import min_norm_flow

MAX_WITNESSES = 20
TOL = 1e-9


# closed forms -------------------------------------------------------------------------

def alpha_eta(epsilon, C, eta):
    """exp(-ϵ(η/2 + 1)) / C²."""
    if not epsilon > 0 or not C >= 1 or not eta >= 0:
        raise DomainError(f"need epsilon > 0, C >= 1, eta >= 0 (got {epsilon}, {C}, {eta})")
    return math.exp(-epsilon * (eta / 2 + 1)) / C ** 2


def nesting_slacks(segment_gap, delta):
    """(Δ, Δ′, Δ″) for consecutive projections at distance ``segment_gap``."""
    D = segment_gap
    big = (D + 1) / 2 + delta
    return big, big + delta, 3 * (D + 1) / 2 + 2 * delta


def default_gaps(delta):
    """δ₁ = ⌈3δ + 2⌉, δ₂ = 2δ₁ (so δ₂ >= δ₁ > 3δ + 1)."""
    d1 = int(math.ceil(3 * delta + 2))
    return d1, 2 * d1


def beta_formula(epsilon, C, delta, delta1=None, delta2=None):
    """β = α/δ₂ with α = α_η at the worst slack η = Δ″(δ₂)."""
    if delta1 is None or delta2 is None:
        delta1, delta2 = default_gaps(delta)
    return alpha_eta(epsilon, C, nesting_slacks(delta2, delta)[2]) / delta2


def p_zero(beta_prime, epsilon):
    """β′/(β′ − ϵ) when ϵ < β′, else +inf."""
    if not beta_prime > 0 or not epsilon > 0:
        raise DomainError("beta_prime and epsilon must be positive")
    if epsilon >= beta_prime:
        return math.inf
    return beta_prime / (beta_prime - epsilon)


def conjugate(p):
    if not p > 1:
        raise DomainError(f"conjugate exponent needs p > 1, got {p}")
    return p / (p - 1)


def series_sum(beta_prime, epsilon, q):
    """D′ = Σ_{k>=0} exp((β′ − ϵq)k), finite only when ϵq > β′."""
    r = beta_prime - epsilon * q
    if r >= 0:
        raise DomainError(f"series diverges: beta' - epsilon*q = {r} >= 0")
    return 1.0 / (1.0 - math.exp(r))


def alpha_prime(beta, growth_prefactor, beta_prime, epsilon, q):
    """β / (D·D′)^{1/q}."""
    return beta / (growth_prefactor * series_sum(beta_prime, epsilon, q)) ** (1.0 / q)


@dataclass
class ProofConstants:
    delta: float
    epsilon: float
    C: float
    delta1: int
    delta2: int
    beta_formula: float
    beta_prime: float
    growth_prefactor: float
    p: float = None
    q: float = None
    beta_emp: float = None
    beta: float = None
    series_sum: float = None
    alpha_prime: float = None
    p_zero: float = None

    def alpha_eta(self, eta):
        return alpha_eta(self.epsilon, self.C, eta)

    def slacks(self, segment_gap):
        return nesting_slacks(segment_gap, self.delta)

    def with_p(self, p, beta_emp=None):
        """Fill in q, β, D′, α′ for exponent ``p`` (refused unless 1 < p < p₀)."""
        out = ProofConstants(**{k: getattr(self, k) for k in (
            "delta", "epsilon", "C", "delta1", "delta2", "beta_formula", "beta_prime",
            "growth_prefactor")})
        out.p_zero = p_zero(self.beta_prime, self.epsilon)
        out.p = float(p)
        if not 1 < p < out.p_zero:
            raise DomainError(f"p = {p} outside the certified range (1, {out.p_zero})")
        out.q = conjugate(p)
        out.beta_emp = beta_emp
        out.beta = self.beta_formula if beta_emp is None else min(self.beta_formula, beta_emp)
        out.series_sum = series_sum(self.beta_prime, self.epsilon, out.q)
        out.alpha_prime = alpha_prime(out.beta, self.growth_prefactor, self.beta_prime,
                                      self.epsilon, out.q)
        return out

    def to_dict(self):
        d = asdict(self)
        return {k: (None if v is None else ("inf" if v == math.inf else v)) for k, v in d.items()}


def _growth_pairs(g, count, rng):
    n = g.vertex_count
    if g.is_cayley:
        radius = max(g.word_length)
        pool = [v for v in range(n) if g.word_length[v] <= max(1, radius // 2)]
    else:
        pool = list(range(n))
    pairs = set()
    tries = 0
    while len(pairs) < count and tries < 50 * count:
        tries += 1
        x, y = (int(v) for v in rng.choice(pool, 2))
        if x != y:
            pairs.add((min(x, y), max(x, y)))
    return sorted(pairs)


def measure_constants(g, *, C_cap=2.0, growth_samples=30, k_max=None, seed=0,
                      delta_cap=_config.DELTA_EXACT_CAP):
    """δ, (ϵ, C), δ₁, δ₂, β, and the fitted (β′, D) for one graph."""
    est = four_point_delta(g, "exact" if g.vertex_count <= delta_cap or g.is_tree()
                           else "sampled", seed=seed)
    delta = est.delta
    eps, C = suggest_epsilon(g, delta, C_cap)
    d1, d2 = default_gaps(delta)
    rng = np.random.default_rng(seed)
    if k_max is None:
        k_max = max(1, min(3, (max(g.word_length) // 2) if g.is_cayley else 3))
    fit = growth_fit(g, _growth_pairs(g, growth_samples, rng), k_max)
    return ProofConstants(delta, eps, C, d1, d2, beta_formula(eps, C, delta, d1, d2),
                          fit.beta_prime, fit.growth_prefactor)


# reports ------------------------------------------------------------------------------

@dataclass
class CertReport:
    statement: str
    counts: Counter = field(default_factory=Counter)
    witnesses: list = field(default_factory=list)
    measured: dict = field(default_factory=dict)
    inventory: dict = field(default_factory=dict)

    def record(self, verdict, witness=None):
        verdict = Verdict(verdict)
        self.counts[verdict.value] += 1
        if verdict is Verdict.VIOLATED and witness is not None:
            self.witnesses.append(witness)

    @property
    def violations(self):
        return self.counts.get("violated", 0)

    def merge(self, other):
        out = CertReport(self.statement, self.counts + other.counts,
                         self.witnesses + other.witnesses,
                         {**self.measured, **other.measured},
                         {**self.inventory, **other.inventory})
        return out

    def to_dict(self):
        wit = sorted(self.witnesses, key=lambda w: repr(sorted(w.items())))[:MAX_WITNESSES]
        return {
            "statement": self.statement,
            "holds": self.counts.get("holds", 0),
            "vacuous": self.counts.get("vacuous", 0),
            "violated": self.counts.get("violated", 0),
            "witnesses": wit,
            "measured": self.measured,
            "inventory": self.inventory,
        }


def _ok(flag):
    return Verdict.HOLDS if flag else Verdict.VIOLATED


def _pmap(fn, items, workers):
    if workers is None:
        workers = _config.default_workers()
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# weighted sums ------------------------------------------------------------------------

def _geod_distance(g, x, y):
    return set_distance(g, eta_geodesic_set(g, x, y, 0))


def path_weight_sum(g, path, x, y, epsilon):
    """Σ_{i<n} exp(-ϵ d(x_i, geod(x, y))) along a vertex path from x to y."""
    path = [int(v) for v in path]
    if not path or path[0] != x or path[-1] != y:
        raise PathError(f"path must run from {x} to {y}")
    for u, v in zip(path, path[1:]):
        if v not in g.adjacency[u]:
            raise PathError(f"consecutive vertices {u}, {v} are not adjacent")
    dG = _geod_distance(g, x, y)
    return float(np.sum(np.exp(-epsilon * dG[path[:-1]])))


def chain_weight_sum(g, c, x, y, epsilon):
    """Σ_e |c(e)| exp(-ϵ d(e, geod(x, y))), edge distance = nearer endpoint."""
    if np.abs(boundary(c).astype(float) - dirac_difference(g, x, y)).max() > TOL:
        raise BoundaryError(f"chain boundary is not δ_{y} − δ_{x}")
    dG = _geod_distance(g, x, y)
    E = g.canonical_edges
    de = np.minimum(dG[E[:, 0]], dG[E[:, 1]])
    return float(np.sum(np.abs(c.coeffs.astype(float)) * np.exp(-epsilon * de)))


def measure_beta(g, epsilon, family):
    """inf over the family of weighted sum / d(x, y), with the minimising witness.

    Members are vertex paths (lists) or ``(chain, x, y)`` triples.
    """
    best, witness = math.inf, None
    for k, member in enumerate(family):
        if isinstance(member, tuple) and len(member) == 3 and not isinstance(member[0], int):
            c, x, y = member
            s = chain_weight_sum(g, c, x, y, epsilon)
        else:
            x, y = int(member[0]), int(member[-1])
            s = path_weight_sum(g, member, x, y, epsilon)
        d = int(g.distances_from(x)[y])
        if d == 0:
            continue
        if s / d < best:
            best, witness = s / d, {"index": k, "x": x, "y": y, "sum": s, "d": d}
    return best, witness


# Euclidean control --------------------------------------------------------------------

def euclid_formula(m, d_len, epsilon):
    """Σ_{k<m} e^{-ϵk} + d·e^{-ϵm} + Σ_{1<=k<=m} e^{-ϵk}."""
    return (sum(math.exp(-epsilon * k) for k in range(m)) + d_len * math.exp(-epsilon * m)
            + sum(math.exp(-epsilon * k) for k in range(1, m + 1)))


def euclid_bound(m, d_len, epsilon):
    return 2 / (1 - math.exp(-epsilon)) + d_len * math.exp(-epsilon * m)


def _grid_word(i, j):
    return ("a" * i if i >= 0 else "A" * -i) + ("b" * j if j >= 0 else "B" * -j)


def rectangle_path(g, m, d_len):
    """Up m, across d_len, down m in a grid2d ball centred at the origin."""
    x0 = -(d_len // 2)
    pts = [(x0, k) for k in range(m)] + [(x0 + i, m) for i in range(d_len)] \
        + [(x0 + d_len, m - k) for k in range(m + 1)]
    out = []
    for i, j in pts:
        if abs(i) + abs(j) > max(g.word_length):
            raise DomainError(f"grid radius {max(g.word_length)} too small for m={m}, d={d_len}")
        out.append(g.vertex_of(_grid_word(i, j)))
    return out


def euclid_counterexample(m, d_len, epsilon, g=None):
    """(displayed closed form, path_weight_sum of the built rectangle)."""
    if m < 1 or d_len < 1 or not epsilon > 0:
        raise DomainError("need m >= 1, d_len >= 1, epsilon > 0")
    if g is None:
        g = cayley_ball(GroupSpec("grid2d", (d_len + 1) // 2 + m))
    elif repr(g.group) != "grid2d":
        raise UnsupportedOperationError("euclid_counterexample needs a grid2d ball")
    path = rectangle_path(g, m, d_len)
    return euclid_formula(m, d_len, epsilon), path_weight_sum(g, path, path[0], path[-1], epsilon)


# sampling -----------------------------------------------------------------------------

def random_walk(g, rng, length, start=None):
    v = int(rng.integers(g.vertex_count)) if start is None else int(start)
    path = [v]
    for _ in range(length):
        nb = g.adjacency[v]
        v = int(nb[rng.integers(len(nb))])
        path.append(v)
    return path


def detour_path(g, rng, x=None, y=None, stops=2):
    """Concatenated geodesics x → w₁ → … → y through random waypoints."""
    n = g.vertex_count
    pts = [int(rng.integers(n)) if x is None else int(x)]
    pts += [int(rng.integers(n)) for _ in range(stops)]
    pts.append(int(rng.integers(n)) if y is None else int(y))
    path = [pts[0]]
    for a, b in zip(pts, pts[1:]):
        path += geodesic_path(g, a, b)[1:]
    return path


# nesting of η-geodesic sets ---------------------------------------------------------

NESTING_EXHAUSTIVE_CAP = 80


def _tight_nesting(g, a, b, c, d, delta):
    da, db = g.distances_from(a), g.distances_from(b)
    eta1 = float(da[b] + db[c] - da[c])
    eta2 = float(db[c] + g.distances_from(c)[d] - db[d])
    return nesting_check(g, a, b, c, d, eta1, eta2, delta)


def verify_lemma_2_4(g, delta=None, etas=(0.0, 0.5, 1.0, 2.0), samples=20000, seed=0,
                     exhaustive_cap=NESTING_EXHAUSTIVE_CAP):
    """Nesting check with tight slacks and a grid of fixed slacks.

    Exhaustive over all ordered quadruples up to ``exhaustive_cap`` vertices,
    otherwise over ``samples`` random quadruples.
    """
    if delta is None:
        delta = four_point_delta(g).delta
    n = g.vertex_count
    exhaustive = n <= exhaustive_cap
    rep = CertReport("2.4", inventory={"vertices": n, "delta": delta,
                                       "mode": "exhaustive" if exhaustive else "sampled"})
    if exhaustive:
        scans = [("tight", nesting_scan(g, delta, tight=True))]
        scans += [((e1, e2), nesting_scan(g, delta, e1, e2)) for e1 in etas for e2 in etas]
        for label, s in scans:
            rep.counts["holds"] += s.holds
            rep.counts["vacuous"] += s.vacuous
            rep.counts["violated"] += s.violated
            if s.violated:
                rep.witnesses.append({"slacks": str(label), "quadruple": list(s.witness)})
        return rep
    rng = np.random.default_rng(seed)
    rep.inventory["samples"] = samples
    for q in rng.integers(n, size=(samples, 4)):
        a, b, c, d = (int(v) for v in q)
        rep.record(_tight_nesting(g, a, b, c, d, delta),
                   {"slacks": "tight", "quadruple": [a, b, c, d]})
        for e1 in etas:
            for e2 in etas:
                rep.record(nesting_check(g, a, b, c, d, e1, e2, delta),
                           {"slacks": str((e1, e2)), "quadruple": [a, b, c, d]})
    return rep


# exponential sums along paths ---------------------------------------------------------

def verify_gromov_neighbor_bounds(g):
    """d(x,t) − 1 <= (x, x′)_t <= d(x,t) for every edge (both orientations) and every t."""
    D = g.distance_table().astype(np.int64)
    E = g.canonical_edges
    rep = CertReport("2.5-neighbors")
    for u, v in ((E[:, 0], E[:, 1]), (E[:, 1], E[:, 0])):
        gp = 0.5 * (D[u] + D[v] - 1)          # rows: edges, cols: t
        du = D[u]
        bad = (gp < du - 1) | (gp > du)
        rep.counts["holds"] += int(bad.size - bad.sum())
        rep.counts["violated"] += int(bad.sum())
        for e, t in zip(*np.nonzero(bad)):
            rep.witnesses.append({"edge": [int(u[e]), int(v[e])], "t": int(t)})
    return rep


def lemma_2_5_sum(g, path, t, epsilon):
    dt = g.distances_from(t)
    return float(np.sum(np.exp(-epsilon * dt[np.asarray(path[:-1])])))


def verify_lemma_2_5(g, epsilon, C, samples=500, eta_max=None, delta=0.0, seed=0,
                     max_len=None, replay_visual=None):
    """Sampled (path, t, η) instances: Σ e^{-ϵ d(x_i,t)} >= α_η.

    The neighbour bounds on Gromov products are replayed term by term on every
    sample; the visual-metric chain is replayed when the graph is small enough
    to tabulate d_t.
    """
    rng = np.random.default_rng(seed)
    if eta_max is None:
        eta_max = nesting_slacks(default_gaps(delta)[1], delta)[2]
    if max_len is None:
        max_len = max(2, 2 * (max(g.word_length) if g.is_cayley else 6))
    if replay_visual is None:
        replay_visual = g.vertex_count <= 600
    rep = CertReport("2.5", inventory={"samples": samples, "eta_max": eta_max})
    vms = {}
    worst = math.inf
    for s in range(samples):
        path = random_walk(g, rng, int(rng.integers(1, max_len + 1)))
        x0, xn = path[0], path[-1]
        eta = float(rng.uniform(0, eta_max))
        cand = eta_geodesic_set(g, x0, xn, eta)
        t = int(cand[rng.integers(len(cand))])
        lhs = lemma_2_5_sum(g, path, t, epsilon)
        bound = alpha_eta(epsilon, C, eta)
        worst = min(worst, lhs / bound)
        wit = {"sample": s, "path": path, "t": t, "eta": eta, "sum": lhs, "bound": bound}
        rep.record(_ok(lhs >= bound * (1 - 1e-12)), wit)
        dt = g.distances_from(t).astype(np.int64)
        ok2 = True
        for a, b in zip(path, path[1:]):
            gp = 0.5 * (dt[a] + dt[b] - int(g.distances_from(a)[b]))
            ok2 &= dt[a] - 1 <= gp <= dt[a]
        rep.record(_ok(ok2), {**wit, "check": "neighbor-bounds"})
        if replay_visual:
            vm = vms.get(t)
            if vm is None:
                vm = vms[t] = build_visual_metric(g, t, epsilon)
            hops = [(a, b) for a, b in zip(path, path[1:])]
            s_rho = sum(vm.rho[a, b] for a, b in hops)
            s_vis = sum(vm.values[a, b] for a, b in hops)
            chain1 = (C * s_rho >= s_vis - TOL and s_vis >= vm.values[x0, xn] - TOL
                      and vm.values[x0, xn] >= math.exp(-epsilon * eta / 2) / C - TOL)
            rep.record(_ok(chain1), {**wit, "check": "visual-chain", "center_C": vm.sandwich_C})
    rep.measured["min_sum_over_bound"] = worst
    return rep


# projection replay along paths --------------------------------------------------------

def _projections(g, path, geod):
    D = np.stack([g.distances_from(int(v)) for v in geod])  # |geod| x n
    return [int(geod[int(np.argmin(D[:, v]))]) for v in path]


def _midpoint_on(g, a, b, geod_xy):
    da = g.distances_from(a).astype(np.int64)
    db = g.distances_from(b).astype(np.int64)
    ok = (da + db == da[b]) & (np.abs(da - db) <= 1)
    on = ok.copy()
    on[:] = False
    on[geod_xy] = ok[geod_xy]
    pick = np.flatnonzero(on)
    return int(pick[0]) if pick.size else int(np.flatnonzero(ok)[0])


def replay_prop_2_6(g, path, epsilon, C, delta, delta1=None, delta2=None):
    """Constructive replay of the path-weight lower bound on one path.

    Returns (verdicts, info) where verdicts is a list of (check, Verdict, detail).
    """
    if delta1 is None or delta2 is None:
        delta1, delta2 = default_gaps(delta)
    path = [int(v) for v in path]
    x, y = path[0], path[-1]
    dist = lambda u, v: int(g.distances_from(u)[v])  # noqa: E731
    d = dist(x, y)
    geod = eta_geodesic_set(g, x, y, 0)
    dG = set_distance(g, geod)
    total = float(np.sum(np.exp(-epsilon * dG[path[:-1]])))
    alpha = alpha_eta(epsilon, C, nesting_slacks(delta2, delta)[2])
    beta = alpha / delta2
    out = []
    info = {"x": x, "y": y, "d": d, "sum": total, "beta": beta}
    if d == 0:
        out.append(("final", Verdict.VACUOUS, {}))
        return out, info
    if d < delta1:
        t = int(geod[0])
        s = float(np.sum(np.exp(-epsilon * g.distances_from(t)[path[:-1]])))
        out.append(("short:exp-sum", _ok(s >= alpha_eta(epsilon, C, 0) * (1 - 1e-12)),
                    {"t": t, "sum": s}))
        out.append(("final", _ok(total >= beta * d * (1 - 1e-12)), {"sum": total}))
        info["branch"] = "short"
        return out, info
    proj = _projections(g, path, geod)
    info["kappa_jump"] = max((dist(a, b) for a, b in zip(proj, proj[1:])), default=0)
    marks = [(0, x)]
    n = len(path) - 1
    while True:
        i, t = marks[-1]
        rest = dist(t, y)
        if delta1 <= rest <= delta2:
            marks.append((n, y))
            break
        nxt = None
        if rest > delta2:
            for j in range(i + 1, n + 1):
                gap = dist(t, proj[j])
                if delta1 <= gap <= delta2 and dist(proj[j], y) >= delta1:
                    nxt = (j, proj[j])
                    break
        if nxt is None:
            out.append(("extraction", Verdict.VIOLATED,
                        {"path": path, "marks": [list(m) for m in marks]}))
            info["branch"] = "extraction-failed"
            return out, info
        marks.append(nxt)
    info["segments"] = len(marks) - 1
    info["branch"] = "long"
    for (ik, tk), (ik1, tk1) in zip(marks, marks[1:]):
        a, b = path[ik], path[ik1]
        D = dist(tk, tk1)
        big, big1, big2 = nesting_slacks(D, delta)
        mk = _midpoint_on(g, tk, tk1, geod)
        seg = {"i": [ik, ik1], "t": [tk, tk1], "m": mk, "segment_gap": D}
        v1 = nesting_check(g, a, tk, mk, tk1, dist(tk, mk), 0, delta)
        out.append(("nest1", v1, seg))
        out.append(("nest1:slack", _ok(dist(a, tk) + dist(tk, tk1) <= dist(a, tk1) + big), seg))
        v2 = nesting_check(g, tk, mk, tk1, b, 0, dist(mk, tk1), delta)
        out.append(("nest2", v2, seg))
        out.append(("nest2:slack", _ok(dist(tk, tk1) + dist(tk1, b) <= dist(tk, b) + big), seg))
        v3 = nesting_check(g, a, tk, tk1, b, big, big, delta)
        out.append(("nest3", v3, seg))
        out.append(("nest3:slack", _ok(
            dist(a, tk) + dist(tk, b) <= dist(a, b) + big1
            and dist(a, tk1) + dist(tk1, b) <= dist(a, b) + big1), seg))
        out.append(("midpoint", _ok(dist(a, mk) + dist(mk, b) <= dist(a, b) + big2), seg))
        dm = g.distances_from(mk)
        s = float(np.sum(np.exp(-epsilon * dm[path[ik:ik1]])))
        out.append(("segment", _ok(s >= alpha_eta(epsilon, C, big2) * (1 - 1e-12)),
                    {**seg, "sum": s}))
    out.append(("final", _ok(total >= alpha * d / delta2 * (1 - 1e-12)), {"sum": total}))
    return out, info


def verify_prop_2_6_pipeline(g, epsilon, C, delta, paths, delta1=None, delta2=None, workers=None):
    rep = CertReport("2.6", inventory={"paths": len(paths)})
    results = _pmap(lambda p: replay_prop_2_6(g, p, epsilon, C, delta, delta1, delta2),
                    paths, workers)
    kappa = 0
    branches = Counter()
    per_check = {}
    for k, (verdicts, info) in enumerate(results):
        kappa = max(kappa, info.get("kappa_jump", 0))
        branches[info.get("branch", "trivial")] += 1
        for name, v, detail in verdicts:
            rep.record(v, {"path_index": k, "check": name, **detail})
            per_check.setdefault(name, Counter())[v.value] += 1
    rep.measured.update({
        "kappa_jump_max": kappa,
        "branches": dict(sorted(branches.items())),
        "per_check": {k: dict(sorted(v.items())) for k, v in sorted(per_check.items())},
    })
    return rep


# weighted sums of chains --------------------------------------------------------------

def verify_cor_2_7(g, epsilon, chains, beta):
    """chain_weight_sum(c) >= Σ|α_k|·path sum(c_k) >= β·d on each (chain, x, y)."""
    rep = CertReport("2.7", inventory={"chains": len(chains)})
    dG_cache = {}
    ratio = math.inf
    for k, (c, x, y) in enumerate(chains):
        d = int(g.distances_from(x)[y])
        lhs = chain_weight_sum(g, c, x, y, epsilon)
        dec = decompose(c)
        if (x, y) not in dG_cache:
            dG_cache[(x, y)] = _geod_distance(g, x, y)
        dG = dG_cache[(x, y)]
        red = sum(abs(t.weight) * float(np.sum(np.exp(-epsilon * dG[t.vertices[:-1]])))
                  for t in dec.path_terms)
        wit = {"index": k, "x": x, "y": y, "chain_sum": lhs, "reduction": red}
        rep.record(_ok(lhs >= red - TOL), {**wit, "check": "reduction"})
        rep.record(_ok(lhs >= beta * d * (1 - 1e-12)), {**wit, "check": "lower-bound"})
        if d:
            ratio = min(ratio, lhs / d)
    rep.measured["beta_emp"] = ratio
    return rep


# lower bound for optimal chains -------------------------------------------------------

def _solve_pair(g, x, y, p, tol):
    return min_norm_flow(g, x, y, p, tol=tol)


def verify_prop_2_9(g, p, constants, pairs, workers=None, tol=1e-8):
    """Solve each pair and check α′·d^{1/p} <= ‖c*‖_p <= d^{1/p} plus the Hölder chain.

    ``constants`` needs δ, ϵ, C, β_formula, β′ and the growth prefactor; p must
    lie strictly below p₀ or the call is refused.
    """
    pz = p_zero(constants.beta_prime, constants.epsilon)
    if not 1 < p < pz:
        raise DomainError(f"p = {p} outside the certified range (1, {pz})")
    pairs = [(int(x), int(y)) for x, y in pairs]
    live = [(x, y) for x, y in pairs if x != y]
    sols = _pmap(lambda xy: _solve_pair(g, xy[0], xy[1], p, tol), live, workers)
    sums = [chain_weight_sum(g, s.chain, s.source, s.sink, constants.epsilon) for s in sols]
    dists = [int(g.distances_from(x)[y]) for x, y in live]
    beta_emp = min((s / d for s, d in zip(sums, dists)), default=math.inf)
    pc = constants.with_p(p, beta_emp if math.isfinite(beta_emp) else None)
    rep = CertReport("2.9", inventory={"pairs": len(pairs), "p": p},
                     measured={"constants": pc.to_dict()})
    rep.counts["vacuous"] += len(pairs) - len(live)
    q = pc.q
    worst_ratio = math.inf
    max_res = 0.0
    unconverged = 0
    E = g.canonical_edges
    for s, cw, d in zip(sols, sums, dists):
        lower = pc.alpha_prime * d ** (1 / p)
        upper = d ** (1 / p)
        wit = {"x": s.source, "y": s.sink, "d": d, "value": s.value, "lower": lower,
               "upper": upper, "kkt_residual": s.kkt_residual}
        if not s.converged:
            unconverged += 1
            rep.record(Verdict.VIOLATED, {**wit, "check": "solver-converged"})
        rep.record(_ok(s.value >= lower), {**wit, "check": "lower"})
        rep.record(_ok(s.value <= upper * (1 + 1e-12)), {**wit, "check": "upper"})
        dG = _geod_distance(g, s.source, s.sink)
        de = np.minimum(dG[E[:, 0]], dG[E[:, 1]])
        holder = s.value * float(np.sum(np.exp(-constants.epsilon * q * de))) ** (1 / q)
        rep.record(_ok(holder >= cw - TOL and cw >= pc.beta * d * (1 - 1e-12)),
                   {**wit, "check": "holder", "holder": holder, "chain_sum": cw})
        worst_ratio = min(worst_ratio, s.value / d ** (1 / p))
        max_res = max(max_res, s.kkt_residual)
    rep.measured.update({"min_value_over_d1p": worst_ratio, "max_kkt_residual": max_res,
                         "unconverged": unconverged})
    return rep, sols


# properness ---------------------------------------------------------------------------

def _drop(_):
    return None


def _profile_solve(g, o, v, p, tol, summarize):
    s = min_norm_flow(g, o, v, p, tol=tol)
    return s.value, (s if summarize is None else summarize(s))


def properness_profile(g, p, basepoint=0, workers=None, tol=1e-8, return_solutions=False,
                       summarize=None):
    """[(r, min, max)] of the quotient norm of δ_o − δ_{g·o} over spheres around o.

    With ``return_solutions`` the FlowSolutions come back too; ``summarize``
    maps each one to something smaller inside the worker, which keeps memory
    flat on big balls.
    """
    if not g.is_cayley:
        raise UnsupportedOperationError("properness_profile needs a Cayley ball")
    if not p >= 1:
        raise DomainError("p must be >= 1")
    o = g.check_vertex(basepoint)
    do = g.distances_from(o)
    radius = int(do.max())
    rows = [(0, 0.0, 0.0)]
    sols = []
    if not return_solutions:
        summarize = _drop
    for r in range(1, radius + 1):
        sphere = [int(v) for v in np.flatnonzero(do == r)]
        if p == 1:
            vals = [float(r)] * len(sphere)
        else:
            found = _pmap(lambda v: _profile_solve(g, o, v, p, tol, summarize), sphere, workers)
            if return_solutions:
                sols += [kept for _, kept in found]
            vals = [val for val, _ in found]
        rows.append((r, min(vals), max(vals)))
    return (rows, sols) if return_solutions else rows
