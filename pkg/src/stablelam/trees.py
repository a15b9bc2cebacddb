"""Rooted ordered trees, their coding paths, and Galton-Watson sampling.

A tree is stored as the sequence of child counts of its vertices in
depth-first (lexicographic) order.  The two coding walks derived from it are

* the Lukasiewicz path ``W``: ``W[0] = 0``, ``W[k+1] = W[k] + degrees[k] - 1``,
  nonnegative before the final step and ``-1`` at the end;
* the height sequence ``H``: ``H[k]`` is the depth of the k-th vertex.

Weight families are critical offspring distributions with no mass on degree 1.
Conditioned sampling (on a fixed number of leaves) offers a provably exact
rejection baseline and a fast cycle-rotation sampler; both are validated
against exhaustive enumeration in the tests.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import chain, product
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import zeta as _riemann_zeta

from .errors import (
    Mu1Nonzero,
    NegativeWeight,
    NonCritical,
    NotInternal,
    Overflow,
    RetryBudgetExhausted,
    TooLarge,
    UnreachableLeafCount,
)

CRITICALITY_TOL_PRESET = 1e-12
CRITICALITY_TOL_USER = 1e-9
DEFAULT_VERTEX_CAP = 10**8
ENUMERATION_MAX_LEAVES = 10


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderedTree:
    """Rooted ordered tree as its DFS child-count sequence."""

    degrees: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        walk = 0
        for i, d in enumerate(self.degrees):
            if d < 0:
                raise ValueError("negative child count")
            if walk < 0:
                raise ValueError("degree sequence ends before position %d" % i)
            walk += d - 1
        if walk != -1:
            raise ValueError("degree sequence does not encode exactly one tree")

    @property
    def size(self) -> int:
        return len(self.degrees)

    @property
    def leaf_count(self) -> int:
        return sum(1 for d in self.degrees if d == 0)

    def has_unary(self) -> bool:
        return any(d == 1 for d in self.degrees)


@dataclass(frozen=True)
class LukasiewiczPath:
    """Integer walk W_0..W_zeta with steps in {-1, 0, 1, 2, ...}."""

    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        v = self.values
        if len(v) < 2 or v[0] != 0 or v[-1] != -1:
            raise ValueError("walk must start at 0 and end at -1")
        for k in range(len(v) - 1):
            if v[k] < 0:
                raise ValueError("walk goes negative before the final step")
            if v[k + 1] - v[k] < -1:
                raise ValueError("down-steps larger than 1")

    @property
    def zeta(self) -> int:
        return len(self.values) - 1


@dataclass(frozen=True)
class HeightSequence:
    """Vertex depths in DFS order."""

    values: tuple[int, ...]


# ---------------------------------------------------------------------------
# weight families
# ---------------------------------------------------------------------------

class WeightFamily:
    """Critical offspring weights (mu_j) over j in {0, 2, 3, ...}.

    Three kinds are supported: ``finite`` (explicit table, which covers the
    p-angulation presets and user lists), ``geometric`` (the
    uniform-dissection preset, mu_i = c^(i-1) with c = (2-sqrt(2))/2), and
    ``zeta`` (heavy tail mu_j proportional to j^(-theta-1), critical by
    construction, in the domain of attraction of a theta-stable law).
    """

    def __init__(self, name, kind, theta, tail_kind, mu0, support=None, probs=None):
        self.name = name
        self.kind = kind
        self.theta = float(theta)
        self.tail_kind = tail_kind
        self.mu0 = float(mu0)
        # degree values >= 2 with positive weight, for finite kind
        self._support = None if support is None else np.asarray(support, dtype=np.int64)
        self._probs = None if probs is None else np.asarray(probs, dtype=np.float64)
        if kind == "finite":
            self._cum = np.concatenate(([self.mu0], self.mu0 + np.cumsum(self._probs)))
        elif kind == "geometric":
            self._c = (2.0 - np.sqrt(2.0)) / 2.0
        elif kind == "zeta":
            self._znorm = _riemann_zeta(self.theta) - 1.0  # sum_{j>=2} j^(1-theta-1+...)
            self._cum = self._zeta_cum_table(1 << 12)
        else:
            raise ValueError("unknown kind %r" % kind)

    # -- weights -------------------------------------------------------------

    def mu(self, j: int) -> float:
        """Weight of degree j (mu_1 is identically 0)."""
        if j < 0:
            raise ValueError("negative degree")
        if j == 0:
            return self.mu0
        if j == 1:
            return 0.0
        if self.kind == "finite":
            idx = np.searchsorted(self._support, j)
            if idx < len(self._support) and self._support[idx] == j:
                return float(self._probs[idx])
            return 0.0
        if self.kind == "geometric":
            return self._c ** (j - 1)
        return j ** (-self.theta - 1.0) / self._znorm

    def max_degree(self):
        """Largest degree with positive weight, or None if unbounded."""
        if self.kind == "finite":
            return int(self._support[-1])
        return None

    def _zeta_cum_table(self, size: int) -> np.ndarray:
        js = np.arange(2, size + 2, dtype=np.float64)
        w = js ** (-self.theta - 1.0) / self._znorm
        return np.concatenate(([self.mu0], self.mu0 + np.cumsum(w)))

    # -- sampling --------------------------------------------------------------

    def sample_degrees(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Vectorized i.i.d. degree draws."""
        u = rng.random(size)
        if self.kind == "finite":
            idx = np.searchsorted(self._cum, u, side="right")
            out = np.zeros(size, dtype=np.int64)
            pos = idx > 0
            out[pos] = self._support[idx[pos] - 1]
            return out
        if self.kind == "geometric":
            out = np.zeros(size, dtype=np.int64)
            branch = u >= self.mu0
            k = int(branch.sum())
            if k:
                # conditional on degree >= 2: P[deg = j] = (1-c) c^(j-2)
                out[branch] = 1 + rng.geometric(1.0 - self._c, k)
            return out
        # zeta kind: extend the cumulative table until every draw lands
        while u.max() > self._cum[-1]:
            self._cum = self._zeta_cum_table(2 * (len(self._cum) - 1))
        idx = np.searchsorted(self._cum, u, side="right")
        out = np.zeros(size, dtype=np.int64)
        pos = idx > 0
        out[pos] = idx[pos] + 1
        return out

    def sample_degree(self, rng: np.random.Generator) -> int:
        return int(self.sample_degrees(rng, 1)[0])

    # -- leaf-count support ----------------------------------------------------

    def leaf_count_reachable(self, n: int) -> bool:
        """Whether P[lambda(tree) = n] > 0.

        A tree with internal degrees j_1..j_m has 1 + sum (j_i - 1) leaves,
        so n is reachable iff n - 1 is a nonnegative integer combination of
        {j - 1 : mu_j > 0, j >= 2}.
        """
        if n < 1:
            return False
        if n == 1:
            return True
        if self.kind in ("geometric", "zeta"):
            return True  # degree 2 has positive weight
        coins = [int(j) - 1 for j in self._support]
        target = n - 1
        ok = np.zeros(target + 1, dtype=bool)
        ok[0] = True
        for c in coins:
            for v in range(c, target + 1):
                if ok[v - c]:
                    ok[v] = True
        return bool(ok[target])

    def __repr__(self):
        return "WeightFamily(%s, theta=%g, %s)" % (self.name, self.theta, self.tail_kind)


def validate_weights(spec, *, p: int | None = None, theta: float | None = None) -> WeightFamily:
    """Build and check a weight family from a preset name or explicit list.

    ``spec`` is one of the preset names ``"uniform-dissection"``,
    ``"p-angulation"`` (requires ``p``), ``"stable"`` (requires ``theta``),
    or a mapping {degree: weight} over degrees >= 2.  Explicit lists must be
    critical to within 1e-9; presets are critical in closed form and are
    checked to 1e-12.
    """
    if isinstance(spec, str):
        return _preset(spec, p=p, theta=theta)

    weights = {int(j): float(w) for j, w in dict(spec).items()}
    if not weights:
        raise NonCritical("empty weight list")
    if 1 in weights and weights[1] != 0.0:
        raise Mu1Nonzero("mu_1 must be zero")
    weights.pop(1, None)
    weights.pop(0, None)  # mu_0 is derived, never stored
    for j, w in weights.items():
        if w < 0:
            raise NegativeWeight("mu_%d = %g" % (j, w))
        if j < 2:
            raise ValueError("degrees must be >= 2")
    support = sorted(j for j, w in weights.items() if w > 0)
    if not support:
        raise NonCritical("all weights are zero")
    mean = sum(j * weights[j] for j in support)
    if abs(mean - 1.0) > CRITICALITY_TOL_USER:
        raise NonCritical("sum of j*mu_j = %.12g, expected 1" % mean)
    mu0 = 1.0 - sum(weights[j] for j in support)
    if not 0.0 < mu0 < 1.0:
        raise NonCritical("derived mu_0 = %g out of (0,1)" % mu0)
    if theta is not None:
        if not 1.0 < theta < 2.0:
            raise ValueError("declared tail exponent must lie in (1,2)")
        return WeightFamily("user", "finite", theta, "heavy-tail", mu0,
                            support, [weights[j] for j in support])
    # finitely many weights cannot certify a heavy tail; default finite variance
    return WeightFamily("user", "finite", 2.0, "finite-variance", mu0,
                        support, [weights[j] for j in support])


def _preset(name: str, *, p=None, theta=None) -> WeightFamily:
    if name == "uniform-dissection":
        c = (2.0 - np.sqrt(2.0)) / 2.0
        # criticality in closed form: sum_{i>=2} i c^(i-1) = c(2-c)/(1-c)^2 = 1
        mean = c * (2.0 - c) / (1.0 - c) ** 2
        if abs(mean - 1.0) > CRITICALITY_TOL_PRESET:
            raise NonCritical("uniform-dissection preset drifted: %.17g" % mean)
        return WeightFamily("uniform-dissection", "geometric", 2.0,
                            "finite-variance", 2.0 - np.sqrt(2.0))
    if name == "p-angulation":
        if p is None or p < 3:
            raise ValueError("p-angulation preset needs integer p >= 3")
        mu0 = 1.0 - 1.0 / (p - 1.0)
        w = 1.0 / (p - 1.0)
        if abs((p - 1) * w - 1.0) > CRITICALITY_TOL_PRESET:
            raise NonCritical("p-angulation preset drifted")
        return WeightFamily("p-angulation(p=%d)" % p, "finite", 2.0,
                            "finite-variance", mu0, [p - 1], [w])
    if name == "stable":
        if theta is None or not 1.0 < theta < 2.0:
            raise ValueError("stable preset needs theta in (1,2)")
        znorm = _riemann_zeta(theta) - 1.0  # = sum_{j>=2} j * j^(-theta-1)
        mu0 = 1.0 - (_riemann_zeta(theta + 1.0) - 1.0) / znorm
        if not 0.0 < mu0 < 1.0:
            raise NonCritical("stable preset mu_0 out of range")
        return WeightFamily("stable(theta=%g)" % theta, "zeta", theta,
                            "heavy-tail", mu0)
    raise ValueError("unknown preset %r" % name)


# ---------------------------------------------------------------------------
# coding paths
# ---------------------------------------------------------------------------

def lukasiewicz(t: OrderedTree) -> LukasiewiczPath:
    """Lukasiewicz path of a tree: steps are child counts minus one."""
    vals = [0]
    w = 0
    for d in t.degrees:
        w += d - 1
        vals.append(w)
    return LukasiewiczPath(tuple(vals))


def height(t: OrderedTree) -> HeightSequence:
    """Depths of the vertices in DFS order."""
    out = []
    stack = []  # remaining child counts along the current root path
    for d in t.degrees:
        out.append(len(stack))
        if d > 0:
            stack.append(d)
        else:
            while stack and stack[-1] == 1:
                stack.pop()
            if stack:
                stack[-1] -= 1
    return HeightSequence(tuple(out))


def children_positions(w: LukasiewiczPath, n: int) -> tuple[int, ...]:
    """DFS positions of the children of the vertex at position n.

    The i-th child sits at the first time >= n+1 the walk returns to level
    W[n+1] - (i-1); there are W[n+1] - W[n] + 1 children.
    """
    v = w.values
    if not 0 <= n < w.zeta:
        raise IndexError("vertex index out of range")
    k = v[n + 1] - v[n] + 1
    if k == 0:
        raise NotInternal("vertex %d is a leaf" % n)
    out = [n + 1]
    level = v[n + 1]
    pos = n + 1
    for i in range(1, k):
        target = level - i
        while v[pos] != target:
            pos += 1
        out.append(pos)
    return tuple(out)


def leaf_count_process(t: OrderedTree) -> tuple[int, ...]:
    """Running count of leaves among the first l vertices, l = 0..zeta."""
    out = [0]
    c = 0
    for d in t.degrees:
        if d == 0:
            c += 1
        out.append(c)
    return tuple(out)


def tree_probability(w: WeightFamily, t: OrderedTree) -> float:
    """Galton-Watson probability of the tree: product of mu_{degree} over vertices."""
    p = 1.0
    for d in t.degrees:
        p *= w.mu(d)
        if p == 0.0:
            return 0.0
    return p


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def sample_gw_tree(w: WeightFamily, rng: np.random.Generator,
                   cap: int = DEFAULT_VERTEX_CAP) -> OrderedTree:
    """Unconditioned Galton-Watson tree, generated in DFS order.

    Raises Overflow once the tree exceeds ``cap`` vertices (the critical
    tree is a.s. finite but has infinite expected size).
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    degrees: list[int] = []
    pending = 1
    block = 64
    while pending > 0:
        if len(degrees) >= cap:
            raise Overflow("tree exceeded %d vertices" % cap)
        draws = w.sample_degrees(rng, block)
        for d in draws:
            degrees.append(int(d))
            pending += int(d) - 1
            if pending == 0 or len(degrees) >= cap:
                break
        block = min(2 * block, 1 << 16)
    if pending > 0:
        raise Overflow("tree exceeded %d vertices" % cap)
    return OrderedTree(tuple(degrees))


def _rotate_to_path(x: np.ndarray) -> np.ndarray:
    """Unique cyclic shift of increments (summing to -1) that codes a tree.

    Starts right after the first minimum of the partial sums (cycle lemma).
    """
    s = np.cumsum(x)
    j = int(np.argmin(s))  # first attaining index
    if j == len(x) - 1:
        return x
    return np.concatenate((x[j + 1:], x[:j + 1]))


def sample_conditioned_forest(w: WeightFamily, n: int, rng: np.random.Generator,
                              count: int, method: str = "cycle",
                              max_attempts: int | None = None) -> list[OrderedTree]:
    """``count`` i.i.d. trees with exactly n leaves, conditioned GW law.

    Both methods draw from i.i.d. degree streams in vectorized blocks.
    ``rejection`` keeps complete unconditioned trees with the right leaf
    count.  ``cycle`` consumes the stream in windows of n leaf-steps,
    accepts a window when its increments sum to -1, and applies the unique
    cyclic rotation that turns it into a coding path; conditional on
    acceptance the rotated walk has exactly the conditioned law because a
    tree with n leaves is reachable from exactly n rotations, uniformly.
    """
    if n < 1:
        raise UnreachableLeafCount("leaf count must be >= 1")
    if not w.leaf_count_reachable(n):
        raise UnreachableLeafCount("P[lambda = %d] = 0 for %s" % (n, w.name))
    if method == "cycle":
        if w.kind == "geometric" or (w.kind == "finite" and len(w._support) == 1):
            return _cycle_batch_aggregate(w, n, rng, count, max_attempts)
        return _cycle_batch(w, n, rng, count, max_attempts)
    if method == "rejection":
        return _rejection_batch(w, n, rng, count, max_attempts)
    raise ValueError("method must be 'cycle' or 'rejection'")


def sample_gw_tree_with_n_leaves(w: WeightFamily, n: int, rng: np.random.Generator,
                                 method: str = "cycle",
                                 max_attempts: int | None = None) -> OrderedTree:
    """One tree with exactly n leaves, distributed as GW conditioned on leaves."""
    return sample_conditioned_forest(w, n, rng, 1, method, max_attempts)[0]


def _cycle_batch(w, n, rng, count, max_attempts):
    out: list[OrderedTree] = []
    attempts = 0
    buf = np.empty(0, dtype=np.int64)
    # expected window length is n/mu0; draw a few windows per block
    block = max(4 * int(n / w.mu0) + 64, 4096)
    while len(out) < count:
        fresh = w.sample_degrees(rng, block)
        buf = np.concatenate((buf, fresh)) if buf.size else fresh
        leaf_pos = np.flatnonzero(buf == 0)
        if leaf_pos.size < n:
            continue
        incr = buf - 1
        prefix = np.cumsum(incr)
        start = 0  # window start within buf
        consumed = 0
        wins = 0
        while True:
            lp = leaf_pos[leaf_pos >= start]
            if lp.size < n:
                break
            end = int(lp[n - 1])  # inclusive index of the n-th leaf
            wins += 1
            total = prefix[end] - (prefix[start - 1] if start else 0)
            if total == -1:
                x = incr[start:end + 1]
                degrees = _rotate_to_path(x) + 1
                out.append(OrderedTree(tuple(int(d) for d in degrees)))
                if len(out) >= count:
                    consumed = end + 1
                    break
            start = end + 1
            consumed = start
        attempts += wins
        if max_attempts is not None and attempts >= max_attempts and len(out) < count:
            raise RetryBudgetExhausted("cycle sampler: %d attempts" % attempts)
        buf = buf[consumed:]
    return out


def _cycle_batch_aggregate(w, n, rng, count, max_attempts):
    """Cycle sampler with aggregate acceptance testing.

    A window ends at its n-th leaf step and is accepted when its increments
    sum to -1, i.e. when the M up-steps drawn before that leaf sum to n-1.
    M is negative binomial, and for the geometric family the up-step sizes
    conditioned on their total form a uniform ordered composition (their
    joint weight (1-c)^M c^(sum-M) depends only on the total), so a rejected
    window costs two scalar draws and only accepted windows are materialized.
    Single-atom families (p-angulations) have constant up-steps.
    """
    geometric = w.kind == "geometric"
    step = None if geometric else int(w._support[0]) - 1
    out: list[OrderedTree] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        m = int(rng.negative_binomial(n, w.mu0))
        if geometric:
            y = int(rng.negative_binomial(m, 1.0 - w._c)) if m else 0
            ok = m + y == n - 1
        else:
            ok = m * step == n - 1
        if ok:
            length = n + m
            incr = np.full(length, -1, dtype=np.int64)
            if m:
                slots = np.sort(rng.choice(length - 1, size=m, replace=False))
                if geometric:
                    if y:
                        bars = np.sort(rng.choice(y + m - 1, size=m - 1,
                                                  replace=False)) if m > 1 else np.empty(0, np.int64)
                        edges = np.concatenate(([-1], bars, [y + m - 1]))
                        parts = np.diff(edges) - 1
                    else:
                        parts = np.zeros(m, dtype=np.int64)
                    incr[slots] = parts + 1
                else:
                    incr[slots] = step
            degrees = _rotate_to_path(incr) + 1
            out.append(OrderedTree(tuple(int(d) for d in degrees)))
        if max_attempts is not None and attempts >= max_attempts and len(out) < count:
            raise RetryBudgetExhausted("cycle sampler: %d attempts" % attempts)
    return out


def _rejection_batch(w, n, rng, count, max_attempts):
    # Resampling whole unconditioned trees until lambda = n is exact but the
    # critical tree has infinite expected size; abandoning an attempt as soon
    # as its leaf count exceeds n discards only trees that would be rejected
    # anyway, so the accepted law is unchanged and attempts have finite
    # expected length (at most the time of the (n+1)-th leaf).
    out: list[OrderedTree] = []
    attempts = 0
    pending = 1
    leaves = 0
    current: list[int] = []
    block = max(16 * (n + 1), 1024)
    while len(out) < count:
        draws = w.sample_degrees(rng, block).tolist()
        for d in draws:
            current.append(d)
            pending += d - 1
            if d == 0:
                leaves += 1
                if leaves > n:
                    attempts += 1
                    current.clear()
                    pending, leaves = 1, 0
                    continue
            if pending == 0:
                attempts += 1
                if leaves == n:
                    out.append(OrderedTree(tuple(current)))
                    if len(out) >= count:
                        break
                current.clear()
                pending, leaves = 1, 0
        if max_attempts is not None and attempts >= max_attempts and len(out) < count:
            raise RetryBudgetExhausted("rejection sampler: %d trees drawn" % attempts)
    return out


# ---------------------------------------------------------------------------
# enumeration oracle
# ---------------------------------------------------------------------------

def _compositions(total: int, parts: int):
    """Ordered tuples of positive integers of given length summing to total."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _trees_with_leaves(n: int) -> tuple[tuple[int, ...], ...]:
    if n == 1:
        return ((0,),)
    out = []
    for k in range(2, n + 1):
        for comp in _compositions(n, k):
            for subs in product(*(_trees_with_leaves(c) for c in comp)):
                out.append((k,) + tuple(chain.from_iterable(subs)))
    return tuple(out)


def enumerate_trees_with_n_leaves(n: int, no_unary: bool = True) -> list[OrderedTree]:
    """All trees with exactly n leaves and no unary vertices.

    With unary vertices allowed the set is infinite (chains of degree-1
    vertices preserve the leaf count), so only ``no_unary=True`` is valid.
    """
    if not no_unary:
        raise ValueError("the set of trees with unary vertices and a fixed "
                         "leaf count is infinite")
    if n < 1:
        raise ValueError("need n >= 1")
    if n > ENUMERATION_MAX_LEAVES:
        raise TooLarge("enumeration guarded at n <= %d" % ENUMERATION_MAX_LEAVES)
    return [OrderedTree(d) for d in _trees_with_leaves(n)]
