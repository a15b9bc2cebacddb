"""Chord systems of the disk extracted from paths and dissections.

Coordinates are fractions of the circle: the point u in [0, 1) sits at
exp(-2*pi*i*u).  Discrete sources (tree paths, dissections) use exact
rationals so round trips and the discrete coincidence of the two chord
routes can be asserted exactly; sampled paths use floats.

Chord extraction routes:

* ``chords_from_excursion`` - relation on cadlag excursions: each annotated
  jump s pairs with the first return of the path to its left limit; closure
  mode adds the sub-chords spanned by the new-infimum (ladder) points inside
  each jump interval, which approximate the closure of the jump-generated
  chord family.
* ``chords_from_brownian`` - equal-value pairing at interval minima for
  continuous excursions (the Brownian triangulation route).
* ``chords_from_height`` - equal-height pairing with strictly larger
  interior, plus min/max pairs of equal-height classes with >= 3 members.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.ndimage import distance_transform_edt

from .dissections import Dissection
from .errors import MissingJumps, SourceMismatch
from .paths import GridPath


@dataclass(frozen=True)
class Lamination:
    """Finite set of noncrossing chords (s, t), 0 <= s < t < 1; the unit
    circle is always implicitly part of the lamination."""

    chords: tuple
    source: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for s, t in self.chords:
            if not (0 <= s < t < 1):
                raise ValueError("chord (%s, %s) outside 0 <= s < t < 1" % (s, t))

    def check_noncrossing(self):
        """Raise if two chords cross (s < s' < t < t')."""
        ordered = sorted(self.chords, key=lambda c: (c[0], -c[1]))
        stack = []
        for s, t in ordered:
            while stack and stack[-1] <= s:
                stack.pop()
            if stack and stack[-1] < t:
                raise ValueError("crossing chords")
            stack.append(t)

    def endpoints(self) -> list:
        out = set()
        for s, t in self.chords:
            out.add(s)
            out.add(t)
        return sorted(out)

    def chord_lengths(self) -> np.ndarray:
        """Euclidean chord lengths 2*sin(pi*(t-s))."""
        gaps = np.array([float(t - s) for s, t in self.chords])
        return 2.0 * np.sin(np.pi * gaps)

    def longest_chord(self) -> float:
        lengths = self.chord_lengths()
        return float(lengths.max()) if lengths.size else 0.0

    def rotated(self, phi: float) -> "Lamination":
        """Rotate every chord by the circle fraction phi (floats)."""
        out = []
        for s, t in self.chords:
            a = (float(s) + phi) % 1.0
            b = (float(t) + phi) % 1.0
            lo, hi = (a, b) if a < b else (b, a)
            out.append((lo, hi))
        return Lamination(tuple(sorted(out)), self.source, dict(self.meta))


def chord_point(u) -> complex:
    return complex(np.cos(2.0 * np.pi * float(u)), -np.sin(2.0 * np.pi * float(u)))


@dataclass(frozen=True)
class FaceRecord:
    """Face attached to one jump: its span, sub-chords, and circle trace."""

    jump_time: object
    jump_size: float
    close_time: object
    sub_chords: tuple
    boundary: tuple

    def span(self):
        return self.close_time - self.jump_time


# ---------------------------------------------------------------------------
# extraction from jump structure
# ---------------------------------------------------------------------------

def _close_all_jumps(values, jumps):
    """First index b >= a with values[b] <= values[a-1], for every jump a.

    Single forward sweep; live jumps keep strictly increasing left limits,
    so a monotone stack suffices.
    """
    closes = {}
    stack = []  # (left limit, jump index), left limits strictly increasing
    jump_iter = iter(jumps)
    nxt = next(jump_iter, None)
    for l in range(len(values)):
        v = values[l]
        while stack and stack[-1][0] >= v:
            _, a = stack.pop()
            closes[a] = l
        if nxt is not None and nxt[0] == l:
            stack.append((values[l - 1], l))
            nxt = next(jump_iter, None)
    for _, a in stack:  # pragma: no cover - excursions always close at 0
        closes[a] = len(values) - 1
    return closes


def _ladder_points(values, a, b):
    """Indices in [a, b] where values sets a strict new minimum since a."""
    seg = values[a:b + 1]
    rm = np.minimum.accumulate(seg)
    strict = np.empty(len(seg), dtype=bool)
    strict[0] = True
    strict[1:] = rm[1:] < rm[:-1]
    return np.flatnonzero(strict) + a


def _index_coord(x: GridPath, coords: str):
    denom = int(round(1.0 / x.h))
    if x.kind == "discrete-tree" and coords == "leaf":
        lam = np.concatenate(([0], np.cumsum(np.diff(x.values) == -1)))
        n_leaves = int(lam[-1])
        return lambda i: Fraction(int(lam[i]), n_leaves + 1)
    if np.issubdtype(x.values.dtype, np.integer):
        return lambda i: Fraction(int(i), denom)
    return lambda i: i / denom


def chords_from_excursion(x: GridPath, mode: str = "e1", depth: int = 0,
                          coords: str = "time") -> Lamination:
    """Chords of the lamination coded by a cadlag excursion.

    Mode ``e1``: one chord per annotated jump, pairing the jump time with
    the first return of the path to (or below) its left limit.  Mode
    ``closure``: additionally, inside each jump interval, chords between
    consecutive strict-new-minimum times more than ``depth`` cells apart.
    """
    if x.kind not in ("excursion", "discrete-tree"):
        raise MissingJumps("chord extraction needs an excursion-like path")
    if x.jumps is None:
        raise MissingJumps("path carries no jump annotations")
    if mode not in ("e1", "closure"):
        raise ValueError("mode must be 'e1' or 'closure'")
    frac = _index_coord(x, coords)
    denom = int(round(1.0 / x.h))
    closes = _close_all_jumps(x.values, x.jumps)
    chords = set()
    for a, _size in x.jumps:
        b = closes[a]
        if b >= denom:
            continue  # return only at the terminal point; no chord
        s, t = frac(a), frac(b)
        if s != t:
            chords.add((min(s, t), max(s, t)))
        if mode == "closure":
            zs = _ladder_points(x.values, a, b)
            for z0, z1 in zip(zs[:-1], zs[1:]):
                if z1 - z0 > depth and z1 < denom:
                    u, v = frac(int(z0)), frac(int(z1))
                    if u != v:
                        chords.add((min(u, v), max(u, v)))
    lam = Lamination(tuple(sorted(chords)),
                     "excursion(theta=%s)" % x.theta if x.kind == "excursion"
                     else "discrete-tree",
                     {"coords": coords, "mode": mode, "depth": depth,
                      "path_token": x.token()})
    return lam


def _pair_equal_levels(values, tol, emit_classes):
    """Stack scan: consecutive equal-level pairs with strictly larger
    interior, plus (first, last) of classes with >= 3 members."""
    pairs = []
    stack = []  # [level, first, last, count]
    for pos in range(len(values)):
        v = values[pos]
        while stack and stack[-1][0] > v + tol:
            lvl, first, last, cnt = stack.pop()
            if emit_classes and cnt >= 3:
                pairs.append((first, last))
        if stack and abs(stack[-1][0] - v) <= tol:
            e = stack[-1]
            pairs.append((e[2], pos))
            e[2] = pos
            e[3] += 1
        else:
            stack.append([v, pos, pos, 1])
    while stack:
        lvl, first, last, cnt = stack.pop()
        if emit_classes and cnt >= 3:
            pairs.append((first, last))
    return pairs


def _auto_tol(values) -> float:
    if np.issubdtype(values.dtype, np.integer):
        return 0.0
    steps = np.abs(np.diff(values))
    steps = steps[steps > 0]
    return 2.0 * float(np.median(steps)) if steps.size else 0.0


def _pairs_to_lamination(x, pairs, min_gap, coords, source):
    frac = _index_coord(x, coords)
    denom = int(round(1.0 / x.h))
    gap_cells = min_gap * denom
    chords = set()
    for a, b in pairs:
        if b - a < gap_cells or b >= denom or (a, b) == (0, denom):
            continue
        s, t = frac(int(a)), frac(int(b))
        if s != t:
            chords.add((min(s, t), max(s, t)))
    return Lamination(tuple(sorted(chords)), source,
                      {"coords": coords, "min_gap": min_gap,
                       "path_token": x.token()})


def chords_from_brownian(e: GridPath, min_gap: float = 1e-3,
                         tol: float | None = None) -> Lamination:
    """Chords pairing times u < v with e(u) = e(v) = min over [u, v].

    Grid tolerance defaults to twice the typical one-cell increment.
    """
    if tol is None:
        tol = _auto_tol(e.values)
    pairs = _pair_equal_levels(e.values, tol, emit_classes=False)
    return _pairs_to_lamination(e, pairs, min_gap, "time", "brownian")


def chords_from_height(hpath: GridPath, min_gap: float = 0.0,
                       tol: float | None = None,
                       coords: str = "time") -> Lamination:
    """Chords from equal-height pairing.

    Emits pairs with equal height and strictly larger interior, and the
    (min, max) pair of every equal-height class with at least three
    members; classes of size two are already covered by the first rule.
    """
    if hpath.kind not in ("height", "excursion", "discrete-tree"):
        raise ValueError("need a height-like path")
    if tol is None:
        tol = _auto_tol(hpath.values)
    pairs = _pair_equal_levels(hpath.values, tol, emit_classes=True)
    return _pairs_to_lamination(hpath, pairs, min_gap, coords,
                                "height(theta=%s)" % hpath.theta)


def lamination_from_dissection(d: Dissection) -> Lamination:
    """Chords a/(n+1) .. b/(n+1) for every side and diagonal."""
    m = d.n + 1
    chords = set()
    for a, b in d.chords:
        chords.add((Fraction(a, m), Fraction(b, m)))
    return Lamination(tuple(sorted(chords)), "dissection(n=%d)" % d.n,
                      {"coords": "vertex", "n": d.n})


def faces_of_lamination(x: GridPath, lam: Lamination) -> list[FaceRecord]:
    """One face record per annotated jump of the generating excursion.

    The face of a jump at s spans up to the first strict descent below the
    jump's left limit; its circle trace is the set of times where the path
    meets its running infimum since s, and its sub-chords connect
    consecutive strict-new-minimum times.  On a grid the first sub-chord
    may start at s itself (in the continuum it starts strictly later).
    """
    if lam.meta.get("path_token") != x.token():
        raise SourceMismatch("lamination was not generated from this path")
    coords = lam.meta.get("coords", "time")
    frac = _index_coord(x, coords)
    values = x.values
    n_idx = len(values) - 1
    out = []
    for a, size in x.jumps:
        pre = values[a - 1]
        # strict closing: first l >= a with values[l] < pre
        seg = values[a:]
        below = np.flatnonzero(seg < pre)
        t_idx = int(below[0]) + a if below.size else n_idx
        seg = values[a:t_idx + 1]
        rm = np.minimum.accumulate(seg)
        sample_idx = np.flatnonzero(seg <= rm) + a
        zs = _ladder_points(values, a, t_idx)
        subs = tuple((frac(int(z0)), frac(int(z1)))
                     for z0, z1 in zip(zs[:-1], zs[1:]) if frac(int(z0)) != frac(int(z1)))
        out.append(FaceRecord(frac(a), float(size),
                              frac(min(t_idx, n_idx)) if t_idx < len(values) else frac(n_idx),
                              subs,
                              tuple(frac(int(r)) for r in sample_idx)))
    return out


# ---------------------------------------------------------------------------
# Hausdorff distance via rasterization
# ---------------------------------------------------------------------------

_RASTER_BOX = 1.05  # plane window [-1.05, 1.05]^2


def _rasterize(lam: Lamination, raster: int) -> np.ndarray:
    img = np.zeros((raster, raster), dtype=bool)
    cell = 2.0 * _RASTER_BOX / raster

    def mark(xs, ys):
        ix = np.clip(((xs + _RASTER_BOX) / cell).astype(int), 0, raster - 1)
        iy = np.clip(((ys + _RASTER_BOX) / cell).astype(int), 0, raster - 1)
        img[iy, ix] = True

    t = np.linspace(0.0, 2.0 * np.pi, int(4 * np.pi / cell) + 8)
    mark(np.cos(t), np.sin(t))
    for s, u in lam.chords:
        p = chord_point(s)
        q = chord_point(u)
        npts = int(abs(q - p) / (0.5 * cell)) + 2
        ts = np.linspace(0.0, 1.0, npts)
        mark(p.real + ts * (q.real - p.real), p.imag + ts * (q.imag - p.imag))
    return img


def hausdorff_distance(l1: Lamination, l2: Lamination, raster: int = 256) -> float:
    """Symmetric Hausdorff distance between rasterized laminations.

    Both chord systems (always including the circle) are drawn on a
    raster x raster grid over [-1.05, 1.05]^2 and compared through two
    distance transforms; the result is deterministic for fixed inputs.
    """
    if raster < 64:
        raise ValueError("raster must be >= 64")
    img1 = _rasterize(l1, raster)
    img2 = _rasterize(l2, raster)
    cell = 2.0 * _RASTER_BOX / raster
    d_to_1 = distance_transform_edt(~img1)
    d_to_2 = distance_transform_edt(~img2)
    d12 = d_to_2[img1].max() if img1.any() else 0.0
    d21 = d_to_1[img2].max() if img2.any() else 0.0
    return float(max(d12, d21)) * cell
