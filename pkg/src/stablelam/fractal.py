"""Box-counting (Minkowski) dimension estimation.

Plane sets (laminations: chords plus the circle) are covered by the square
grid of side delta anchored at the origin; a cell counts as soon as the set
meets it, via exact column/interval intersection tests rather than
rasterization.  Subsets of the circle (chord endpoints, face traces) are
covered by arcs, i.e. bins of the [0, 1) parameter.

The reported dimension is the least-squares slope of log N(delta) against
log(1/delta), with the regression standard error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWindow, EmptyInput
from .laminations import FaceRecord, Lamination, chord_point

DEFAULT_PLANE_SCALES = tuple(2.0 ** -k for k in range(4, 10))
DEFAULT_ARC_SCALES = tuple(2.0 ** -k for k in range(5, 13))
SATURATION_FACTOR = 2.0


@dataclass(frozen=True)
class DimensionEstimate:
    scales: tuple
    counts: tuple
    slope: float
    stderr: float
    window: tuple

    def as_dict(self) -> dict:
        return {"scales": list(self.scales), "counts": list(self.counts),
                "slope": self.slope, "stderr": self.stderr,
                "window": list(self.window)}


# ---------------------------------------------------------------------------
# covering counts
# ---------------------------------------------------------------------------

def _segment_cells(p: complex, q: complex, delta: float) -> set:
    """Grid cells of side delta met by the segment [p, q] (exact)."""
    out = set()
    x0, y0, x1, y1 = p.real, p.imag, q.real, q.imag
    if x1 < x0:
        x0, y0, x1, y1 = x1, y1, x0, y0
    ix0 = int(np.floor(x0 / delta))
    ix1 = int(np.floor(x1 / delta))
    if ix0 == ix1:
        lo, hi = sorted((y0, y1))
        for iy in range(int(np.floor(lo / delta)), int(np.floor(hi / delta)) + 1):
            out.add((ix0, iy))
        return out
    dx = x1 - x0
    for ix in range(ix0, ix1 + 1):
        cl = max(x0, ix * delta)
        cr = min(x1, (ix + 1) * delta)
        ya = y0 + (y1 - y0) * (cl - x0) / dx
        yb = y0 + (y1 - y0) * (cr - x0) / dx
        lo, hi = sorted((ya, yb))
        for iy in range(int(np.floor(lo / delta)), int(np.floor(hi / delta)) + 1):
            out.add((ix, iy))
    return out


def _circle_cells(delta: float) -> set:
    """Grid cells met by the unit circle (per-column arc extents, exact)."""
    out = set()
    ix0 = int(np.floor(-1.0 / delta))
    ix1 = int(np.floor(1.0 / delta))
    for ix in range(ix0, ix1 + 1):
        cl = max(ix * delta, -1.0)
        cr = min((ix + 1) * delta, 1.0)
        if cl > 1.0 or cr < -1.0 or cl > cr:
            continue
        ya = np.sqrt(max(0.0, 1.0 - cl * cl))
        yb = np.sqrt(max(0.0, 1.0 - cr * cr))
        hi = max(ya, yb)
        lo = min(ya, yb)
        if cl <= 0.0 <= cr:
            hi = 1.0
        for iy in range(int(np.floor(lo / delta)), int(np.floor(hi / delta)) + 1):
            out.add((ix, iy))
            out.add((ix, -iy - 1))  # lower arc by symmetry
    return out


def _points_cells(pts: np.ndarray, delta: float) -> int:
    idx = np.floor(pts / delta).astype(np.int64)
    return len(np.unique(idx, axis=0))


def box_count(obj, scales) -> np.ndarray:
    """Covering counts N(delta) for each delta in ``scales``.

    ``obj`` is a Lamination (chords plus the circle) or an (m, 2) point
    array.  Scales must be positive and descending.
    """
    scales = np.asarray(list(scales), dtype=float)
    if scales.size == 0 or (scales <= 0).any():
        raise ValueError("scales must be positive")
    if (np.diff(scales) >= 0).any():
        raise ValueError("scales must be strictly descending")
    if isinstance(obj, Lamination):
        segs = [(chord_point(s), chord_point(t)) for s, t in obj.chords]
        counts = []
        for delta in scales:
            cells = _circle_cells(float(delta))
            for p, q in segs:
                cells |= _segment_cells(p, q, float(delta))
            counts.append(len(cells))
        return np.array(counts, dtype=np.int64)
    pts = np.asarray(obj, dtype=float)
    if pts.size == 0:
        raise EmptyInput("no points to cover")
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (m, 2) array")
    return np.array([_points_cells(pts, float(d)) for d in scales], dtype=np.int64)


def arc_count(params, scales) -> np.ndarray:
    """Arc-covering counts for a subset of the circle given by its
    [0, 1) parameters: number of occupied delta-bins per scale."""
    u = np.asarray([float(p) for p in params], dtype=float)
    if u.size == 0:
        raise EmptyInput("no circle points to cover")
    out = []
    for delta in scales:
        out.append(len(np.unique(np.floor(u / float(delta)).astype(np.int64))))
    return np.array(out, dtype=np.int64)


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def fit_dimension(scales, counts, window=None) -> DimensionEstimate:
    """Least-squares slope of log N against log(1/delta) over the window."""
    scales = np.asarray(list(scales), dtype=float)
    counts = np.asarray(list(counts), dtype=float)
    if window is None:
        window = (scales.min(), scales.max())
    lo, hi = min(window), max(window)
    mask = (scales >= lo * (1 - 1e-12)) & (scales <= hi * (1 + 1e-12)) & (counts > 0)
    if mask.sum() < 4:
        raise DegenerateWindow("need at least 4 scales in the window")
    x = np.log(1.0 / scales[mask])
    y = np.log(counts[mask])
    coef, cov = np.polyfit(x, y, 1, cov=True)
    return DimensionEstimate(tuple(scales[mask]), tuple(int(c) for c in counts[mask]),
                             float(coef[0]), float(np.sqrt(cov[0, 0])),
                             (float(scales[mask].min()), float(scales[mask].max())))


def _drop_saturated(scales, counts, budget):
    """Drop the smallest scales once N(delta) exceeds the resolution budget
    (a finite chord system stops being fractal below its own spacing)."""
    keep_s, keep_c = [], []
    for s, c in zip(scales, counts):
        if c > budget and len(keep_s) >= 4:
            break
        keep_s.append(s)
        keep_c.append(c)
    return keep_s, keep_c


def estimate_lamination_dimension(lam: Lamination, scales=None) -> DimensionEstimate:
    """Box dimension of the chord system plus circle."""
    if scales is None:
        scales = DEFAULT_PLANE_SCALES
    counts = box_count(lam, scales)
    budget = SATURATION_FACTOR * max(len(lam.chords), 1)
    ks, kc = _drop_saturated(scales, counts, budget)
    return fit_dimension(ks, kc)


def _non_side_chords(lam: Lamination):
    n = lam.meta.get("n")
    if n is None:
        return list(lam.chords)
    side = 1.0 / (n + 1)
    out = []
    for s, t in lam.chords:
        gap = float(t - s)
        if min(gap, 1.0 - gap) > 1.5 * side:
            out.append((s, t))
    return out


def estimate_endpoint_dimension(lam: Lamination, scales=None) -> DimensionEstimate:
    """Arc dimension of the set of chord endpoints on the circle.

    For dissection sources the polygon sides are excluded: their endpoints
    are all polygon vertices and would measure the circle itself rather
    than the endpoints of the genuine chord system.  At covering scale
    delta only endpoints of chords with arc gap >= delta are counted: a
    shorter chord is indistinguishable from the circle at that resolution,
    and at finite n the microscopic chords are dense on the circle while in
    the limit they collapse into it.
    """
    if scales is None:
        scales = DEFAULT_ARC_SCALES
    chords = _non_side_chords(lam)
    if not chords:
        raise EmptyInput("no non-side chords")
    gaps = np.array([min(float(t - s), 1.0 - float(t - s)) for s, t in chords])
    ends = np.array([[float(s), float(t)] for s, t in chords])
    counts = []
    kept_scales = []
    for delta in scales:
        sel = ends[gaps >= float(delta)]
        if sel.size == 0:
            break
        pts = np.unique(sel.ravel())
        counts.append(len(np.unique(np.floor(pts / float(delta)).astype(np.int64))))
        kept_scales.append(delta)
    return fit_dimension(kept_scales, counts)


def estimate_face_boundary_dimension(face: FaceRecord, scales=None) -> DimensionEstimate:
    """Arc dimension of a face's circle trace."""
    if scales is None:
        scales = DEFAULT_ARC_SCALES
    counts = arc_count(face.boundary, scales)
    return fit_dimension(scales, counts)
