"""Word problems and Cayley balls for a handful of finitely generated groups.

Words are strings over lowercase generator letters with capitals for
inverses (``"aB"`` is a·b⁻¹); ``"e"`` and ``""`` both denote the identity.
"""
from __future__ import annotations

import random
import string
from dataclasses import dataclass

from . import _config
from .errors import DomainError, ResourceError, UnsupportedOperationError
from .graph import Graph

KINDS = ("free", "grid2d", "free_product_Z2_Z3", "surface_genus2")


@dataclass(frozen=True)
class GroupSpec:
    kind: str
    radius: int = 0
    rank: int = 2

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown group kind {self.kind!r}")
        if self.rank < 1 or self.rank > 13:
            raise DomainError(f"rank must lie in 1..13, got {self.rank}")
        if self.radius < 0:
            raise DomainError(f"radius must be >= 0, got {self.radius}")

    @classmethod
    def parse(cls, text, radius=0):
        """Accepts ``free:2``, ``grid2d`` (or ``z2``), ``z2z3``, ``surface2``."""
        name, _, arg = text.strip().lower().partition(":")
        if name == "free":
            return cls("free", radius, int(arg or 2))
        aliases = {
            "grid2d": "grid2d", "z2": "grid2d",
            "z2z3": "free_product_Z2_Z3", "free_product_z2_z3": "free_product_Z2_Z3",
            "surface2": "surface_genus2", "surface_genus2": "surface_genus2",
        }
        if name not in aliases:
            raise DomainError(f"unknown group spec {text!r}")
        return cls(aliases[name], radius)

    def group(self):
        if self.kind == "free":
            return FreeGroup(self.rank)
        if self.kind == "grid2d":
            return Grid2D()
        if self.kind == "free_product_Z2_Z3":
            return Z2FreeZ3()
        return SurfaceGenus2()


def _clean(word):
    word = word.strip()
    return "" if word in ("e", "1") else word


def invert(word):
    return _clean(word)[::-1].swapcase()


def free_reduce(word):
    out = []
    for ch in _clean(word):
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


class FreeGroup:
    canonical = True

    def __init__(self, rank):
        self.rank = rank
        self.letters = string.ascii_lowercase[:rank]

    def __repr__(self):
        return f"free:{self.rank}"

    def generators(self):
        return [c for x in self.letters for c in (x, x.upper())]

    def _check(self, word):
        bad = set(word.lower()) - set(self.letters)
        if bad:
            raise DomainError(f"letters {sorted(bad)} not in {self}")

    def reduce(self, word):
        word = _clean(word)
        self._check(word)
        return free_reduce(word)

    def key(self, word):
        return self.reduce(word)

    def equal(self, u, v):
        return self.reduce(u) == self.reduce(v)


class Grid2D:
    """Z² with generators a = (1, 0), b = (0, 1)."""

    canonical = True

    def __repr__(self):
        return "grid2d"

    def generators(self):
        return ["a", "A", "b", "B"]

    def coords(self, word):
        word = _clean(word)
        if set(word) - set("aAbB"):
            raise DomainError(f"word {word!r} not over a, b")
        return (word.count("a") - word.count("A"), word.count("b") - word.count("B"))

    def reduce(self, word):
        i, j = self.coords(word)
        return ("a" * i if i >= 0 else "A" * -i) + ("b" * j if j >= 0 else "B" * -j)

    def key(self, word):
        return self.coords(word)

    def equal(self, u, v):
        return self.coords(u) == self.coords(v)


class Z2FreeZ3:
    """⟨a, b | a², b³⟩ with generating set {a, b, b⁻¹}; ``A`` is read as ``a``."""

    canonical = True
    _exp = {"b": 1, "B": 2}

    def __repr__(self):
        return "z2z3"

    def generators(self):
        return ["a", "b", "B"]

    def reduce(self, word):
        out = []
        for ch in _clean(word):
            if ch == "A":
                ch = "a"
            if ch not in "abB":
                raise DomainError(f"letter {ch!r} not in z2z3")
            if ch == "a":
                if out and out[-1] == "a":
                    out.pop()
                else:
                    out.append("a")
            elif out and out[-1] in "bB":
                e = (self._exp[out.pop()] + self._exp[ch]) % 3
                if e:
                    out.append("b" if e == 1 else "B")
            else:
                out.append(ch)
        return "".join(out)

    def key(self, word):
        return self.reduce(word)

    def equal(self, u, v):
        return self.reduce(u) == self.reduce(v)


class SurfaceGenus2:
    """⟨a, b, c, d | [a,b][c,d]⟩ solved by Dehn's algorithm.

    Dehn-reduced words are not unique, so ball construction hashes elements
    through two representations into SL(2, F_p) and confirms every hash hit
    with the word problem.
    """

    canonical = False
    relator = "abABcdCD"
    _P = (1 << 61) - 1

    def __init__(self):
        cyc = []
        for r in (self.relator, invert(self.relator)):
            cyc += [r[i:] + r[:i] for i in range(len(r))]
        self._rules = {}
        half = len(self.relator) // 2
        for rho in cyc:
            for k in range(half + 1, len(rho) + 1):
                self._rules.setdefault(rho[:k], invert(rho[k:]))
        self._lengths = range(len(self.relator), half, -1)
        rng = random.Random(20170513)
        self._reps = [self._make_rep(rng) for _ in range(2)]

    def __repr__(self):
        return "surface2"

    def generators(self):
        return ["a", "A", "b", "B", "c", "C", "d", "D"]

    def reduce(self, word):
        word = _clean(word)
        if set(word.lower()) - set("abcd"):
            raise DomainError(f"word {word!r} not over a, b, c, d")
        w = free_reduce(word)
        changed = True
        while changed:
            changed = False
            for k in self._lengths:
                for i in range(len(w) - k + 1):
                    rep = self._rules.get(w[i:i + k])
                    if rep is not None:
                        w = free_reduce(w[:i] + rep + w[i + k:])
                        changed = True
                        break
                if changed:
                    break
        return w

    def equal(self, u, v):
        return self.reduce(_clean(u) + invert(v)) == ""

    # SL(2, F_p) hashing -------------------------------------------------
    def _mul(self, X, Y):
        p = self._P
        return ((X[0] * Y[0] + X[1] * Y[2]) % p, (X[0] * Y[1] + X[1] * Y[3]) % p,
                (X[2] * Y[0] + X[3] * Y[2]) % p, (X[2] * Y[1] + X[3] * Y[3]) % p)

    def _inv(self, X):
        p = self._P
        return (X[3], (-X[1]) % p, (-X[2]) % p, X[0])

    def _pow(self, X, k):
        R = (1, 0, 0, 1)
        while k:
            if k & 1:
                R = self._mul(R, X)
            X = self._mul(X, X)
            k >>= 1
        return R

    def _make_rep(self, rng):
        p = self._P

        def rand_sl2():
            a = rng.randrange(1, p)
            b, c = rng.randrange(p), rng.randrange(p)
            return (a, b, c, (1 + b * c) * pow(a, -1, p) % p)

        A, B = rand_sl2(), rand_sl2()
        comm = self._mul(self._mul(B, A), self._mul(self._inv(B), self._inv(A)))
        P = self._pow(comm, rng.randrange(2, 1 << 40))
        Pi = self._inv(P)
        C = self._mul(self._mul(P, B), Pi)
        D = self._mul(self._mul(P, A), Pi)
        rep = {"a": A, "b": B, "c": C, "d": D}
        rep.update({k.upper(): self._inv(v) for k, v in list(rep.items())})
        return rep

    def key(self, word):
        word = _clean(word)
        out = []
        for rep in self._reps:
            M = (1, 0, 0, 1)
            for ch in word:
                M = self._mul(M, rep[ch])
            out.append(M)
        return tuple(out)


def cayley_ball(spec, vertex_cap=_config.VERTEX_CAP):
    """Ball B(1, radius) of the Cayley graph, built breadth first.

    Vertex 0 is the identity; labels are the shortlex-first geodesic words
    found by the search, so BFS level equals word length.
    """
    group = spec.group()
    gens = group.generators()
    labels = [""]
    keys = [group.key("")]
    index = {keys[0]: [0]}
    level = [0]
    edges = set()
    frontier = [0]
    for r in range(spec.radius + 1):
        nxt = []
        for u in frontier:
            for s in gens:
                w = labels[u] + s
                k = group.key(w)
                v = None
                for cand in index.get(k, ()):
                    if group.canonical or group.equal(w, labels[cand]):
                        v = cand
                        break
                if v is None:
                    if r == spec.radius:
                        continue
                    v = len(labels)
                    if v >= vertex_cap:
                        raise ResourceError(
                            f"{spec} exceeds the vertex cap {vertex_cap}")
                    labels.append(group.reduce(w))
                    keys.append(k)
                    level.append(r + 1)
                    index.setdefault(k, []).append(v)
                    nxt.append(v)
                if u != v:
                    edges.add((min(u, v), max(u, v)))
        frontier = nxt
    g = Graph(len(labels), sorted(edges), labels=labels, group=group)
    g.key_index = index
    g.word_length = level
    return g


def locate(g, word):
    """Vertex of ``g`` representing ``word``, or None outside the ball."""
    if not g.is_cayley:
        raise UnsupportedOperationError("graph carries no Cayley structure")
    group = g.group
    for cand in g.key_index.get(group.key(group.reduce(word)), ()):
        if group.canonical or group.equal(word, g.labels[cand]):
            return cand
    return None


def translate(g, word, v):
    """Left translation ``v ↦ word·v`` restricted to the ball (None if it leaves)."""
    if not g.is_cayley:
        raise UnsupportedOperationError("translate needs a Cayley ball")
    v = g.check_vertex(v)
    return locate(g, _clean(word) + g.labels[v])
