"""Dissections of regular polygons and their dual trees.

A dissection of the (n+1)-gon is stored by its diagonal set; the n+1 sides
are always implicitly present.  Vertex v sits at exp(-2*pi*i*v/(n+1)), so
increasing index runs clockwise and the chord formula of the coding-path
reconstruction can use leaf counts as vertex indices directly.

The dual tree is rooted at the face adjacent to the side {n, 0} and its
children are read off face boundaries in increasing vertex order; with this
convention the round trip through the Lukasiewicz path is exact and is
enforced by the tests.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidPath, TooLarge
from .trees import (
    LukasiewiczPath,
    OrderedTree,
    WeightFamily,
    lukasiewicz,
    sample_gw_tree_with_n_leaves,
)

ENUMERATION_MAX_N = 8


@dataclass(frozen=True)
class Dissection:
    """Noncrossing diagonals of the regular (n+1)-gon (sides implicit)."""

    n: int
    diagonals: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dissections are defined for n >= 2")
        diags = frozenset((min(a, b), max(a, b)) for a, b in self.diagonals)
        object.__setattr__(self, "diagonals", diags)
        m = self.n + 1
        for a, b in diags:
            if not (0 <= a < b <= self.n):
                raise ValueError("diagonal endpoint out of range")
            if b - a == 1 or (a == 0 and b == self.n):
                raise ValueError("sides may not be listed as diagonals")
        _check_noncrossing(sorted(diags, key=lambda ab: (ab[0], -ab[1])))

    @property
    def sides(self) -> list[tuple[int, int]]:
        m = self.n + 1
        return [(v, (v + 1) % m) for v in range(m)]

    @property
    def chords(self) -> set[tuple[int, int]]:
        """All chords: the n+1 sides plus the diagonals."""
        out = {(min(a, b), max(a, b)) for a, b in self.sides}
        out.update(self.diagonals)
        return out

    def vertex_point(self, v: int) -> complex:
        return np.exp(-2j * np.pi * v / (self.n + 1))


@dataclass(frozen=True)
class Face:
    """One complementary component: its boundary cycle and degree."""

    boundary: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.boundary)


def _check_noncrossing(diags):
    # diagonals sorted by (a, -b); {a,b} and {c,d} cross iff a < c < b < d
    stack = []
    for a, b in diags:
        while stack and stack[-1] <= a:
            stack.pop()
        if stack and stack[-1] < b:
            raise ValueError("crossing diagonals")
        stack.append(b)


# ---------------------------------------------------------------------------
# dual tree
# ---------------------------------------------------------------------------

def _adjacency(d: Dissection) -> list[list[int]]:
    m = d.n + 1
    adj: list[list[int]] = [[] for _ in range(m)]
    for a, b in d.chords:
        adj[a].append(b)
        adj[b].append(a)
    for lst in adj:
        lst.sort()
    return adj


def _face_boundary(adj, a, b):
    """Boundary a = c_1 < ... < c_m = b of the face inside [a, b] adjacent
    to the edge {a, b}; greedy: from c the next vertex is the largest
    neighbor in (c, b].  The direct edge {a, b} itself (the parent edge)
    is skipped at the first step."""
    out = [a]
    cur = a
    while cur != b:
        nbrs = adj[cur]
        i = bisect.bisect_right(nbrs, b) - 1
        nxt = nbrs[i]
        if nxt == b and cur == a:
            nxt = nbrs[i - 1]
        if nxt <= cur:  # pragma: no cover - cannot happen on valid input
            raise RuntimeError("face walk stalled")
        out.append(nxt)
        cur = nxt
    return out


def dual_tree(d: Dissection) -> OrderedTree:
    """Dual tree of a dissection, rooted at the face on the side {n, 0}.

    Internal vertices correspond to faces (degree = child count + 1); leaves
    correspond to the non-root polygon sides.
    """
    adj = _adjacency(d)
    degrees: list[int] = []
    stack: list[tuple] = [("face", 0, d.n)]
    while stack:
        item = stack.pop()
        if item[0] == "leaf":
            degrees.append(0)
            continue
        _, a, b = item
        bd = _face_boundary(adj, a, b)
        degrees.append(len(bd) - 1)
        for u, v in reversed(list(zip(bd[:-1], bd[1:]))):
            if v - u >= 2:
                stack.append(("face", u, v))
            else:
                stack.append(("leaf",))
    return OrderedTree(tuple(degrees))


# ---------------------------------------------------------------------------
# reconstruction from a coding path
# ---------------------------------------------------------------------------

def _dfs_children_and_ends(degrees):
    """Child position lists and subtree end (exclusive) per vertex."""
    zeta = len(degrees)
    children: list[list[int]] = [[] for _ in range(zeta)]
    stack: list[int] = []
    remaining = [0] * zeta
    for i, deg in enumerate(degrees):
        if stack:
            p = stack[-1]
            children[p].append(i)
            remaining[p] -= 1
            if remaining[p] == 0:
                stack.pop()
        if deg > 0:
            stack.append(i)
            remaining[i] = deg
    ends = [0] * zeta
    for i in range(zeta - 1, -1, -1):
        size = 1
        for c in children[i]:
            size += ends[c] - c
        ends[i] = i + size
    return children, ends


def dissection_from_path(path) -> Dissection:
    """Dissection coded by an integer walk (supports unary steps).

    For each up-step the walk crosses one face: the chord endpoints are the
    leaf counts at the children positions of that vertex and at its subtree
    end, taken as vertex indices of the (leafcount+1)-gon.
    """
    if isinstance(path, LukasiewiczPath):
        values = list(path.values)
    else:
        values = [int(v) for v in path]
        if len(values) < 2 or values[0] != 0 or values[-1] != -1:
            raise InvalidPath("walk must start at 0 and end at -1")
        for k in range(len(values) - 1):
            if values[k] < 0:
                raise InvalidPath("walk negative before the final step")
            if values[k + 1] - values[k] < -1:
                raise InvalidPath("down-step larger than 1")
    degrees = [values[k + 1] - values[k] + 1 for k in range(len(values) - 1)]
    lam = [0]
    for d in degrees:
        lam.append(lam[-1] + (1 if d == 0 else 0))
    n = lam[-1]
    if n < 2:
        raise InvalidPath("need at least 2 leaves")

    children, ends = _dfs_children_and_ends(degrees)
    m = n + 1
    diagonals = set()
    for i, deg in enumerate(degrees):
        if deg < 2:
            continue
        cycle = [lam[c] for c in children[i]]
        cycle.append(lam[ends[i]])
        cycle.append(lam[i + 1])
        for a, b in zip(cycle[:-1], cycle[1:]):
            lo, hi = (a, b) if a < b else (b, a)
            if hi - lo == 1 or (lo == 0 and hi == n):
                continue  # polygon side
            diagonals.add((lo, hi))
    return Dissection(n, frozenset(diagonals))


# ---------------------------------------------------------------------------
# faces via planar walk (independent of the dual tree)
# ---------------------------------------------------------------------------

def faces(d: Dissection) -> list[Face]:
    """Faces extracted by walking half-edge orbits of the chord arrangement."""
    m = d.n + 1
    nbrs: dict[int, list[int]] = {v: [] for v in range(m)}
    for a, b in d.chords:
        nbrs[a].append(b)
        nbrs[b].append(a)
    for v in nbrs:
        nbrs[v].sort(key=lambda w: (w - v) % m)
    nxt_index = {v: {w: i for i, w in enumerate(lst)} for v, lst in nbrs.items()}

    seen = set()
    out = []
    for a, b in d.chords:
        for he in ((a, b), (b, a)):
            if he in seen:
                continue
            orbit = []
            cur = he
            while cur not in seen:
                seen.add(cur)
                orbit.append(cur)
                u, v = cur
                lst = nbrs[v]
                w = lst[(nxt_index[v][u] - 1) % len(lst)]
                cur = (v, w)
            boundary = tuple(u for u, _ in orbit)
            pts = [d.vertex_point(v) for v in boundary]
            area = 0.0
            for p, q in zip(pts, pts[1:] + pts[:1]):
                area += p.real * q.imag - q.real * p.imag
            if area < 0:  # clockwise orbits are the inner faces here
                out.append(Face(boundary))
    return out


# ---------------------------------------------------------------------------
# weights and enumeration
# ---------------------------------------------------------------------------

def boltzmann_weight(w: WeightFamily, d: Dissection) -> float:
    """Product over faces of mu_{deg(face) - 1}."""
    out = 1.0
    for f in faces(d):
        out *= w.mu(f.degree - 1)
        if out == 0.0:
            return 0.0
    return out


def enumerate_dissections(n: int) -> list[Dissection]:
    """All dissections of the (n+1)-gon, via noncrossing diagonal subsets."""
    if n < 2:
        raise ValueError("need n >= 2")
    if n > ENUMERATION_MAX_N:
        raise TooLarge("enumeration guarded at n <= %d" % ENUMERATION_MAX_N)
    return [Dissection(n, frozenset(sub)) for sub in _noncrossing_subsets(n)]


@lru_cache(maxsize=None)
def _noncrossing_subsets(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    m = n + 1
    diags = [(a, b) for a in range(m) for b in range(a + 2, m)
             if not (a == 0 and b == n)]
    crosses = {
        (d1, d2)
        for d1 in diags for d2 in diags
        if d1 < d2 and (d1[0] < d2[0] < d1[1] < d2[1] or d2[0] < d1[0] < d2[1] < d1[1])
    }
    out: list[tuple[tuple[int, int], ...]] = []

    def extend(prefix: tuple, start: int):
        out.append(prefix)
        for i in range(start, len(diags)):
            cand = diags[i]
            if all((min(p, cand), max(p, cand)) not in crosses for p in prefix):
                extend(prefix + (cand,), i + 1)

    extend((), 0)
    return tuple(out)


def partition_function(w: WeightFamily, n: int) -> float:
    """Z_n: total Boltzmann weight of all dissections of the (n+1)-gon."""
    if n > ENUMERATION_MAX_N:
        raise TooLarge("partition function is exhaustive; n <= %d" % ENUMERATION_MAX_N)
    return sum(boltzmann_weight(w, d) for d in enumerate_dissections(n))


def sample_boltzmann_dissection(w: WeightFamily, n: int, rng,
                                method: str = "cycle") -> Dissection:
    """Random dissection of the (n+1)-gon under the Boltzmann measure.

    Pipeline: conditioned tree -> Lukasiewicz path -> coded dissection.
    """
    t = sample_gw_tree_with_n_leaves(w, n, rng, method=method)
    return dissection_from_path(lukasiewicz(t))
