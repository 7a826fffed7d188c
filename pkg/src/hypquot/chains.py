"""Chains on oriented edges modulo e^op = -e, their boundary, ℓ^p norms and
the path/loop decomposition driven by Kirchhoff's node law."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _config
from .errors import BoundaryError, DomainError, HypquotError, PathError


class Chain:
    """Finitely supported real coefficients on the edges of one graph.

    ``coeffs[i]`` is c(e) for the canonical orientation of edge ``i``; the
    opposite orientation reads ``-coeffs[i]``.  Fractions are supported via
    an object array (``exact=True``).
    """

    __slots__ = ("graph", "coeffs")

    def __init__(self, graph, coeffs=None, exact=False):
        self.graph = graph
        m = graph.edge_count
        if coeffs is None:
            coeffs = np.array([Fraction(0)] * m, dtype=object) if exact else np.zeros(m)
        else:
            coeffs = np.asarray(coeffs)
            if coeffs.shape != (m,):
                raise DomainError(f"expected {m} coefficients, got shape {coeffs.shape}")
            if coeffs.dtype != object:
                coeffs = coeffs.astype(np.float64)
        self.coeffs = coeffs

    @property
    def exact(self):
        return self.coeffs.dtype == object

    def __repr__(self):
        return f"Chain({self.to_triples()!r})"

    def value(self, u, v):
        """c(e) for the oriented edge e = (u, v)."""
        if u < v:
            return self.coeffs[self.graph.edge_index[(u, v)]]
        return -self.coeffs[self.graph.edge_index[(v, u)]]

    __getitem__ = lambda self, e: self.value(*e)  # noqa: E731

    def support(self):
        return np.flatnonzero(self.coeffs != 0)

    def _wrap(self, coeffs):
        return Chain(self.graph, coeffs)

    def __add__(self, other):
        return self._wrap(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return self._wrap(self.coeffs - other.coeffs)

    def __neg__(self):
        return self._wrap(-self.coeffs)

    def __mul__(self, scalar):
        return self._wrap(self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self._wrap(self.coeffs / scalar)

    def allclose(self, other, atol=1e-9):
        return bool(np.all(np.abs((self.coeffs - other.coeffs).astype(float)) <= atol))

    def to_triples(self):
        E = self.graph.canonical_edges
        return [(int(E[i, 0]), int(E[i, 1]),
                 self.coeffs[i] if self.exact else float(self.coeffs[i]))
                for i in self.support()]

    @classmethod
    def from_triples(cls, graph, triples, exact=False):
        c = cls(graph, exact=exact)
        for u, v, w in triples:
            u, v = int(u), int(v)
            key = (min(u, v), max(u, v))
            if key not in graph.edge_index:
                raise PathError(f"({u}, {v}) is not an edge")
            w = Fraction(w) if exact else float(w)
            c.coeffs[graph.edge_index[key]] += w if u < v else -w
        return c

    def to_json(self):
        return json.dumps([[u, v, str(w) if self.exact else w] for u, v, w in self.to_triples()])

    @classmethod
    def from_json(cls, graph, text, exact=False):
        return cls.from_triples(graph, json.loads(text), exact=exact)


def dirac_difference(g, x, y):
    """The vertex charge δ_y − δ_x."""
    q = np.zeros(g.vertex_count)
    q[g.check_vertex(y)] += 1.0
    q[g.check_vertex(x)] -= 1.0
    return q


def boundary(c):
    """∂c = Σ c(e)(δ_{e⁺} − δ_{e⁻}) as a length-n array (sums to zero)."""
    g = c.graph
    E = g.canonical_edges
    out = np.zeros(g.vertex_count, dtype=c.coeffs.dtype)
    if c.exact:
        out[:] = Fraction(0)
    np.add.at(out, E[:, 1], c.coeffs)
    np.subtract.at(out, E[:, 0], c.coeffs)
    return out


def chain_from_path(g, vertices, exact=False):
    """Sum of the oriented edges along a vertex path; back-tracking cancels."""
    c = Chain(g, exact=exact)
    one = Fraction(1) if exact else 1.0
    for u, v in zip(vertices, vertices[1:]):
        u, v = int(u), int(v)
        key = (min(u, v), max(u, v))
        i = g.edge_index.get(key)
        if i is None:
            raise PathError(f"consecutive vertices {u}, {v} are not adjacent")
        c.coeffs[i] += one if u < v else -one
    return c


def lp_norm(c, p):
    """(Σ_e |c(e)|^p)^{1/p}, one term per unoriented edge."""
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    a = np.abs(c.coeffs)
    if p == 1:
        return a.sum() if c.exact else float(a.sum())
    a = a.astype(np.float64)
    top = a.max(initial=0.0)
    if top == 0:
        return 0.0
    if np.isinf(p):
        return float(top)
    return float(top * np.sum((a / top) ** p) ** (1.0 / p))


@dataclass
class Term:
    weight: object
    chain: Chain = field(repr=False)
    vertices: list


@dataclass
class Decomposition:
    """c = Σ α_k c_k + Σ β_j l_j with paths c_k from x to y and loops l_j."""

    path_terms: list
    cycle_terms: list
    iterations: int
    source: object = None
    sink: object = None

    @property
    def alpha_sum(self):
        return sum((t.weight for t in self.path_terms), 0)

    def cycle(self, graph):
        total = Chain(graph, exact=self._exact())
        for t in self.cycle_terms:
            total = total + t.chain * t.weight
        return total

    def reconstruct(self, graph):
        total = self.cycle(graph)
        for t in self.path_terms:
            total = total + t.chain * t.weight
        return total

    def l1_sides(self, graph):
        """(Σ|α_k|·‖c_k‖₁ + ‖ℓ‖₁, Σ β_j‖l_j‖₁): the two ways to account for ℓ¹ mass."""
        paths = sum((abs(t.weight) * lp_norm(t.chain, 1) for t in self.path_terms), 0)
        loops = sum((t.weight * lp_norm(t.chain, 1) for t in self.cycle_terms), 0)
        return paths + lp_norm(self.cycle(graph), 1), paths + loops

    def _exact(self):
        terms = self.path_terms + self.cycle_terms
        return bool(terms) and terms[0].chain.exact


def _endpoints(c, tol):
    q = boundary(c)
    if c.exact:
        nz = [i for i, v in enumerate(q) if v != 0]
        vals = {i: q[i] for i in nz}
        one = 1
    else:
        nz = list(np.flatnonzero(np.abs(q) > tol))
        vals = {i: q[i] for i in nz}
        one = None
    if not nz:
        return None
    if len(nz) == 2:
        lo, hi = sorted(nz, key=lambda i: vals[i])
        ok = (vals[lo] == -1 and vals[hi] == 1) if one else (
            abs(vals[lo] + 1) <= tol and abs(vals[hi] - 1) <= tol)
        if ok:
            return int(lo), int(hi)
    raise BoundaryError("boundary must be zero or of the form δ_y − δ_x")


def _walk(g, cur, start, stop, sign=1):
    """Follow positive edges of ``sign * cur`` from ``start`` until ``stop`` or a revisit.

    Returns (vertices, edges, signs, is_loop), or None with the trail so far
    when the walk reaches a vertex without outgoing support.  At each step the
    outgoing edge of largest remaining coefficient wins, smallest edge index
    on ties.
    """
    pos = {start: 0}
    verts, edges, signs = [start], [], []
    u = start
    while u != stop:
        best = None
        for i, v, s in g.incident[u]:
            w = cur[i] * s * sign
            if w > 0 and (best is None or w > best[0]):
                best = (w, i, v, s)
        if best is None:
            return None, edges
        _, i, v, s = best
        edges.append(i)
        signs.append(s)
        if v in pos:
            k = pos[v]
            return (verts[k:] + [v], edges[k:], signs[k:], True), None
        pos[v] = len(verts)
        verts.append(v)
        u = v
    return (verts, edges, signs, False), None


def _flush(cur, exact, tol):
    if not exact:
        cur[np.abs(cur) < tol] = 0.0


def _chain_of(g, edges, signs, exact):
    c = Chain(g, exact=exact)
    one = Fraction(1) if exact else 1.0
    for i, s in zip(edges, signs):
        c.coeffs[i] += one * s
    return c


def _unstick(cur, trail, exact, noise, where):
    # float chains carry Kirchhoff imbalance at rounding level; a dead end
    # reached through a noise-sized edge drops that edge
    if exact or not trail or abs(cur[trail[-1]]) > noise:
        raise HypquotError(f"walk stuck at {where}: no outgoing support")
    cur[trail[-1]] = 0.0


def decompose(c, flush=_config.FLUSH):
    """Split a chain with boundary δ_y − δ_x (or 0) into weighted paths and loops.

    Path mode walks from x in the positive support graph; a path is removed
    with weight α = its smallest coefficient and the rest is rescaled by
    1/(1 − α); a loop is removed with weight β = its smallest coefficient.
    Once the boundary vanishes the remaining cycle is peeled loop by loop.

    The rescaling is tracked as a running factor instead of being applied, so
    recorded weights are minima of the unscaled remainder and no rounding
    error is amplified.
    """
    g = c.graph
    exact = c.exact
    cur = c.coeffs.copy()
    ends = _endpoints(c, 1e-9)
    paths, loops = [], []
    iterations = 0
    one = Fraction(1) if exact else 1.0
    num = (lambda v: v) if exact else float
    noise = 0 if exact else 1e-9 * max(1.0, float(np.abs(cur).max(initial=0.0)))
    scale = one
    x = y = None
    if ends is not None:
        x, y = ends
        while True:
            sign = 1 if scale > 0 else -1
            found, trail = _walk(g, cur, x, y, sign)
            if found is None:
                if not exact and abs(scale) <= noise:
                    break
                _unstick(cur, trail, exact, noise, f"vertex {x} (path mode)")
                continue
            verts, edges, signs, is_loop = found
            iterations += 1
            piece = _chain_of(g, edges, signs, exact)
            amount = min(cur[i] * s * sign for i, s in zip(edges, signs))
            cur = cur - (sign * amount) * piece.coeffs
            _flush(cur, exact, flush)
            if is_loop:
                if sign < 0:
                    loops.append(Term(num(amount), -piece, verts[::-1]))
                else:
                    loops.append(Term(num(amount), piece, verts))
                continue
            paths.append(Term(num(sign * amount), piece, verts))
            rest = scale - sign * amount
            if (rest == 0) if exact else abs(rest) <= flush * abs(scale):
                break
            scale = rest
    while np.any(cur != 0):
        i = int(np.flatnonzero(cur != 0)[0])
        u, v = g.canonical_edges[i]
        start = int(u) if cur[i] > 0 else int(v)
        found, trail = _walk(g, cur, start, None)
        if found is None:
            _unstick(cur, trail, exact, noise, "cycle mode")
            continue
        verts, edges, signs, _ = found
        iterations += 1
        piece = _chain_of(g, edges, signs, exact)
        amount = min(cur[i] * s for i, s in zip(edges, signs))
        loops.append(Term(num(amount), piece, verts))
        cur = cur - amount * piece.coeffs
        _flush(cur, exact, flush)
    return Decomposition(paths, loops, iterations, x, y)
