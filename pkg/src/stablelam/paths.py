"""Spectrally positive stable paths on a grid, excursions, and heights.

The driving process is normalized so that E[exp(-l X_t)] = exp(t l^theta)
for l > 0; for theta = 2 that is sqrt(2) times standard Brownian motion,
and for theta in (1, 2) a totally skewed (beta = 1) stable law simulated by
the Chambers-Mallows-Stuck transform.  In the S parametrization the Laplace
transform of S_theta(sigma, 1, 0) is exp(sigma^theta |sec(pi theta/2)|
l^theta), so the scale matching the target is
sigma = (t |cos(pi theta / 2)|)^(1/theta); the Monte Carlo Laplace oracle in
the tests gates this mapping.

Normalized excursions follow the straddling construction: cut the path at
the last pre-1 and first post-1 times it meets its running infimum, then
rescale time to [0, 1] and space by length^(-1/theta).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as _gamma_fn

from .errors import (
    BadEps,
    BadTheta,
    BudgetExceeded,
    ExcursionNotClosed,
)
from .trees import WeightFamily, lukasiewicz, sample_gw_tree_with_n_leaves

MAX_GRID_CELLS = 10**8


@dataclass
class GridPath:
    """A real path sampled on a uniform grid with jump annotations.

    ``values[k]`` is the value at time ``k*h``; as a cadlag step function the
    jump annotated at index k happens at time k*h and ``values[k-1]`` is the
    left limit there.  Jump sizes are always positive (spectral positivity).
    """

    h: float
    values: np.ndarray
    jumps: list  # [(index, size), ...]
    kind: str  # levy | excursion | height | discrete-tree
    theta: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        self.values.setflags(write=False)
        if any(size <= 0 for _, size in self.jumps):
            raise ValueError("jump sizes must be positive")

    @property
    def duration(self) -> float:
        return self.h * (len(self.values) - 1)

    def token(self) -> str:
        """Stable fingerprint used to tie derived laminations to this path."""
        hsh = hashlib.sha256()
        hsh.update(np.ascontiguousarray(self.values))
        hsh.update(repr((self.h, self.kind, len(self.jumps))).encode())
        return hsh.hexdigest()[:16]

    def scaled(self, c: float) -> "GridPath":
        """Same path with values (and jump sizes) multiplied by c > 0."""
        if c <= 0:
            raise ValueError("scale must be positive")
        return GridPath(self.h, self.values * c,
                        [(i, s * c) for i, s in self.jumps],
                        self.kind, self.theta, dict(self.meta))


def default_jump_threshold(theta: float, h: float) -> float:
    """Five times the self-similar scale of one grid increment."""
    return 5.0 * h ** (1.0 / theta)


def height_normalizer(theta: float, eps: float) -> float:
    """Jump-count normalizer: theta / (Gamma(2 - theta) * eps^(theta - 1))."""
    return theta / (_gamma_fn(2.0 - theta) * eps ** (theta - 1.0))


def _check_theta(theta: float, *, allow_two=True):
    if allow_two:
        if not 1.0 < theta <= 2.0:
            raise BadTheta("theta must lie in (1, 2]")
    elif not 1.0 < theta < 2.0:
        raise BadTheta("theta must lie in (1, 2)")


def sample_stable_increment(theta: float, t: float, rng, size=None):
    """Draws of X_t with E[exp(-l X_t)] = exp(t l^theta).

    theta = 2 is Normal(0, 2t).  For theta < 2 a beta = 1 CMS draw is
    rescaled by (t |cos(pi theta/2)|)^(1/theta).
    """
    _check_theta(theta)
    if t <= 0:
        raise ValueError("t must be positive")
    if theta == 2.0:
        return rng.normal(0.0, np.sqrt(2.0 * t), size)
    u = rng.uniform(-np.pi / 2.0, np.pi / 2.0, size)
    w = rng.exponential(1.0, size)
    ta = np.tan(np.pi * theta / 2.0)
    b = np.arctan(ta) / theta
    s = (1.0 + ta * ta) ** (1.0 / (2.0 * theta))
    x = (s * np.sin(theta * (u + b)) / np.cos(u) ** (1.0 / theta)
         * (np.cos(u - theta * (u + b)) / w) ** ((1.0 - theta) / theta))
    scale = (t * abs(np.cos(np.pi * theta / 2.0))) ** (1.0 / theta)
    return scale * x


def detect_jumps(values: np.ndarray, eps: float) -> list:
    """Grid cells whose increment exceeds eps, as (index, size) pairs."""
    if eps <= 0:
        raise BadEps("threshold must be positive")
    inc = np.diff(values)
    idx = np.flatnonzero(inc > eps)
    return [(int(i) + 1, float(inc[i])) for i in idx]


def sample_levy_grid(theta: float, T: float, h: float, rng,
                     eps: float | None = None) -> GridPath:
    """Stable path on [0, T] with step h; jumps annotated above eps."""
    _check_theta(theta)
    if T <= 0 or h <= 0:
        raise ValueError("T and h must be positive")
    n = int(round(T / h))
    if n > MAX_GRID_CELLS:
        raise BudgetExceeded("grid of %d cells exceeds the budget" % n)
    if n < 1:
        n = 1
    values = np.empty(n + 1)
    values[0] = 0.0
    values[1:] = np.cumsum(sample_stable_increment(theta, h, rng, n))
    if eps is None:
        eps = default_jump_threshold(theta, h)
    jumps = [] if theta == 2.0 else detect_jumps(values, eps)
    return GridPath(h, values, jumps, "levy", theta)


def normalized_excursion(theta: float, h: float, rng,
                         max_cells: int = MAX_GRID_CELLS,
                         eps: float | None = None,
                         min_cells: int = 0) -> GridPath:
    """Normalized excursion via the straddling-1 construction.

    The driving path is extended (doubling its horizon) until the excursion
    of X - inf X that straddles time 1 closes; the cut segment is shifted,
    clamped to 0 at its endpoint, rescaled in space by length^(-1/theta) and
    re-gridded on [0, 1].

    By self-similarity the normalized law does not depend on the straddling
    length, so when the cut segment has fewer than ``min_cells`` grid cells a
    fresh path is drawn without biasing the output.
    """
    _check_theta(theta)
    if h > 1e-3:
        raise ValueError("excursion grids need h <= 1e-3")
    n1 = int(round(1.0 / h))
    while True:
        n = 2 * n1
        values = np.empty(n + 1)
        values[0] = 0.0
        values[1:] = np.cumsum(sample_stable_increment(theta, h, rng, n))
        while True:
            run_min = np.minimum.accumulate(values)
            hits = np.flatnonzero(values[: n1 + 1] == run_min[: n1 + 1])
            g = int(hits[-1])
            after = np.flatnonzero(values[n1 + 1:] <= run_min[n1:-1])
            if after.size:
                d = int(after[0]) + n1 + 1
                break
            if 2 * (len(values) - 1) > max_cells:
                raise ExcursionNotClosed("budget of %d cells reached" % max_cells)
            ext = np.cumsum(sample_stable_increment(theta, h, rng, len(values) - 1))
            values = np.concatenate((values, values[-1] + ext))
        if d - g >= min_cells:
            break
    seg = values[g:d + 1] - values[g]
    seg[-1] = 0.0
    m = d - g
    seg = seg * (m * h) ** (-1.0 / theta)
    out_h = 1.0 / m
    if theta == 2.0:
        jumps = []
    else:
        jumps = detect_jumps(seg, eps if eps is not None
                             else default_jump_threshold(theta, out_h))
    return GridPath(out_h, seg, jumps, "excursion", theta)


def brownian_excursion(h: float, rng) -> GridPath:
    """Brownian excursion (theta = 2 normalization: sqrt(2) x standard).

    Random-walk bridge plus rotation at the argmin; the tests verify the
    sup-functional agrees with the straddling construction by KS.
    """
    if h > 1e-3:
        raise ValueError("excursion grids need h <= 1e-3")
    n = int(round(1.0 / h))
    walk = np.empty(n + 1)
    walk[0] = 0.0
    walk[1:] = np.cumsum(rng.normal(0.0, np.sqrt(2.0 * h), n))
    bridge = walk - np.linspace(0.0, 1.0, n + 1) * walk[-1]
    m = int(np.argmin(bridge))
    exc = np.concatenate((bridge[m:], bridge[1:m + 1])) - bridge[m]
    exc[0] = 0.0
    exc[-1] = 0.0
    return GridPath(1.0 / n, exc, [], "excursion", 2.0)


def approx_height_process(x: GridPath, eps: float) -> GridPath:
    """Approximate continuous height process of a stable excursion.

    H(t) counts the jumps u <= t of size > eps whose left limit is strictly
    below the running infimum of the path over [u, t], divided by
    theta / (Gamma(2-theta) eps^(theta-1)).  Defined for theta in (1, 2);
    for theta = 2 the excursion itself plays the role of its height process.
    """
    theta = x.theta
    if theta is None or not 1.0 < theta < 2.0:
        raise BadTheta("height approximation needs theta in (1, 2)")
    if x.kind not in ("excursion", "discrete-tree"):
        raise ValueError("need an excursion-like path")
    floor = x.h ** (1.0 / theta)
    if eps <= floor:
        raise BadEps("eps = %g at or below the grid noise floor %g" % (eps, floor))
    values = x.values
    jump_at = {}
    for i, size in detect_jumps(values, eps):
        jump_at[i] = values[i - 1]
    beta = height_normalizer(theta, eps)
    counts = np.zeros(len(values), dtype=np.int64)
    stack: list[float] = []  # left limits of live jumps, strictly increasing
    for k in range(len(values)):
        v = values[k]
        while stack and stack[-1] >= v:
            stack.pop()
        pre = jump_at.get(k)
        if pre is not None:
            stack.append(pre)
        counts[k] = len(stack)
    return GridPath(x.h, counts / beta, [], "height", theta,
                    {"eps": eps, "beta": beta, "parent": x.token()})


def discrete_height_path(tree) -> GridPath:
    """Height sequence of a tree as a path on the same 1/zeta time grid
    as its Lukasiewicz path (values at vertex positions 0..zeta-1)."""
    from .trees import height

    vals = np.array(height(tree).values, dtype=np.int64)
    zeta = len(vals)
    return GridPath(1.0 / zeta, vals, [], "height", None, {"zeta": zeta})


def discrete_excursion_from_tree(w: WeightFamily, n: int, rng,
                                 method: str = "cycle") -> GridPath:
    """Lukasiewicz path of a conditioned tree as a step path on [0, 1].

    Values stay integer-valued (the chord relations only compare orders, so
    no vertical normalization is applied); up-steps are annotated as jumps.
    """
    tree = sample_gw_tree_with_n_leaves(w, n, rng, method=method)
    walk = np.array(lukasiewicz(tree).values, dtype=np.int64)
    zeta = len(walk) - 1
    jumps = [(int(k), float(walk[k] - walk[k - 1]))
             for k in range(1, zeta + 1) if walk[k] > walk[k - 1]]
    return GridPath(1.0 / zeta, walk, jumps, "discrete-tree", w.theta,
                    {"n_leaves": n, "zeta": zeta})
