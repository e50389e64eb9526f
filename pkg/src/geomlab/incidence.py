"""Incidence counting engines and rich-point extraction.

Two counters with identical output: a brute-force counter testing every
(point, line) pair, and a bucketed counter that hashes line parameters
into a uniform grid of cell side C*delta and, per point, scans only the
cells meeting the dual strip of the point (lines incident to p = (x0, y0)
have parameters within vertical distance sqrt(2)*C*delta of the dual line
b = -x0 a + y0), inflated by one cell of safety margin.  Candidates are
then tested exactly, so the pruning can only discard true negatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .planar import LineFamily, Point2, PointSet, Scale, is_incident

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn
        return deco

SQRT2 = math.sqrt(2.0)


@njit(cache=True)
def _strip_count_kernel(px, py, cell_ptr, a_sorted, b_sorted, radius, cell,
                        nj, ncols):
    """Per-point richness via the dual-strip cell scan.  The incidence
    predicate repeats the naive engine's operation order exactly, so counts
    agree bit for bit."""
    n = px.size
    rich = np.zeros(n, dtype=np.int64)
    for i in range(n):
        x = px[i]
        y = py[i]
        cnt = 0
        for c in range(ncols):
            a_lo = -1.0 + cell * c
            a_hi = a_lo + cell
            e1 = y - a_lo * x
            e2 = y - a_hi * x
            amax = max(abs(a_lo), abs(a_hi))
            pad = radius * math.sqrt(1.0 + amax * amax)
            blo = min(e1, e2) - pad
            bhi = max(e1, e2) + pad
            jlo = int(math.floor((blo + 1.0) / cell)) - 1
            jhi = int(math.floor((bhi + 1.0) / cell)) + 1
            if jlo < 0:
                jlo = 0
            if jhi > nj - 1:
                jhi = nj - 1
            if jhi < jlo:
                continue
            base = c * nj
            for pos in range(cell_ptr[base + jlo], cell_ptr[base + jhi + 1]):
                a = a_sorted[pos]
                b = b_sorted[pos]
                vert = abs(a * x + b - y)
                if vert <= radius * math.sqrt(1.0 + a * a):
                    cnt += 1
        rich[i] = cnt
    return rich


def normalized_ratio(count: int, n_points: int, n_lines: int, delta: float) -> float:
    """count / (|P|^{2/3} |L|^{2/3} delta^{-1/3}); zero for empty instances."""
    if n_points == 0 or n_lines == 0:
        return 0.0
    denom = (n_points ** (2.0 / 3.0)) * (n_lines ** (2.0 / 3.0)) * delta ** (-1.0 / 3.0)
    return count / denom


@dataclass
class IncidenceReport:
    count: int
    richness: np.ndarray  # int64, one entry per point
    normalized_ratio: float
    pairs: Optional[List[Tuple[int, int]]] = None

    def same_as(self, other: "IncidenceReport") -> bool:
        if self.count != other.count:
            return False
        if not np.array_equal(self.richness, other.richness):
            return False
        if self.pairs is not None and other.pairs is not None:
            return self.pairs == other.pairs
        return True

    def richness_histogram(self) -> dict:
        vals, counts = np.unique(self.richness, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts)}

    def to_json_dict(self) -> dict:
        hist = self.richness_histogram()
        top = max(hist, default=0)
        return {"count": self.count,
                "ratio": self.normalized_ratio,
                "k_histogram": [hist.get(k, 0) for k in range(top + 1)]}

    def save_json(self, path) -> None:
        import json
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _incidence_mask(px, py, la, lb, radius):
    """Boolean (n_pts, n_lines) mask of closed incidences."""
    vert = np.abs(np.outer(px, la) + lb[None, :] - py[:, None])
    thr = radius * np.sqrt(1.0 + la * la)
    return vert <= thr[None, :]


def count_naive(P: PointSet, L: LineFamily, s: Scale,
                with_pairs: bool = False) -> IncidenceReport:
    """Exact count over all |P| * |L| pairs (the oracle engine)."""
    n, m = len(P), len(L)
    richness = np.zeros(n, dtype=np.int64)
    pairs: Optional[List[Tuple[int, int]]] = [] if with_pairs else None
    if n and m:
        px, py = P.coords[:, 0], P.coords[:, 1]
        la, lb = L.params[:, 0], L.params[:, 1]
        chunk = max(1, int(4e6) // max(m, 1))
        for lo in range(0, n, chunk):
            hi = min(n, lo + chunk)
            mask = _incidence_mask(px[lo:hi], py[lo:hi], la, lb, s.radius)
            richness[lo:hi] = mask.sum(axis=1)
            if with_pairs:
                pi, li = np.nonzero(mask)
                pairs.extend(zip((pi + lo).tolist(), li.tolist()))
    count = int(richness.sum())
    return IncidenceReport(count, richness,
                           normalized_ratio(count, n, m, s.delta), pairs)


class _DualGrid:
    """Lines bucketed by their (a, b) parameters on a grid of side `cell`.

    Lines are stored sorted by cell key, so candidate gathers run over
    contiguous slices; a dense CSR table over cells replaces binary search
    whenever the grid is small enough."""

    _DENSE_CELL_CAP = 20_000_000

    def __init__(self, params: np.ndarray, cell: float):
        self.cell = cell
        self.nj = int(math.floor(2.0 / cell)) + 3
        self.ncols = int(math.floor(2.0 / cell)) + 1
        ia = np.floor((params[:, 0] + 1.0) / cell).astype(np.int64)
        ib = np.floor((params[:, 1] + 1.0) / cell).astype(np.int64)
        key = ia * self.nj + ib
        self.order = np.argsort(key, kind="stable")
        self.keys = key[self.order]
        self.a_sorted = np.ascontiguousarray(params[self.order, 0])
        self.b_sorted = np.ascontiguousarray(params[self.order, 1])
        ncells = self.ncols * self.nj
        if ncells <= self._DENSE_CELL_CAP:
            counts = np.bincount(self.keys, minlength=ncells)
            self.cell_ptr = np.concatenate(
                [[0], np.cumsum(counts)]).astype(np.int64)
        else:
            self.cell_ptr = None
        self.col_lo = -1.0 + cell * np.arange(self.ncols)
        self.col_hi = self.col_lo + cell
        # widest |slope| per column bounds the strip half-width column-wise
        amax = np.maximum(np.abs(self.col_lo), np.abs(self.col_hi))
        self.col_pad = np.sqrt(1.0 + amax * amax)

    def candidates(self, px: np.ndarray, py: np.ndarray, radius: float):
        """For each query point, positions (into the sorted line order) of
        the lines whose parameters may sit in the dual strip of the point,
        inflated by one cell of safety margin."""
        cell, nj = self.cell, self.nj
        # b-interval per (point, column): endpoints of y0 - a*x0 over the
        # column, widened by the strip half-width radius * sqrt(1 + a^2)
        e1 = py[:, None] - px[:, None] * self.col_lo[None, :]
        e2 = py[:, None] - px[:, None] * self.col_hi[None, :]
        pad = radius * self.col_pad[None, :]
        blo = np.minimum(e1, e2)
        blo -= pad
        bhi = np.maximum(e1, e2)
        bhi += pad
        jlo = np.floor((blo + 1.0) / cell).astype(np.int64)
        jlo -= 1
        jhi = np.floor((bhi + 1.0) / cell).astype(np.int64)
        jhi += 1
        np.clip(jlo, 0, nj - 1, out=jlo)
        np.clip(jhi, 0, nj - 1, out=jhi)
        base = (np.arange(self.ncols, dtype=np.int64) * nj)[None, :]
        key_lo = (base + jlo).ravel()
        key_hi = (base + jhi).ravel()
        key_hi += 1
        if self.cell_ptr is not None:
            starts = self.cell_ptr[key_lo]
            ends = self.cell_ptr[key_hi]
        else:
            starts = np.searchsorted(self.keys, key_lo, side="left")
            ends = np.searchsorted(self.keys, key_hi, side="left")
        lens = ends - starts
        total = int(lens.sum())
        if total == 0:
            return (np.empty(0, dtype=np.int64),) * 2
        seg_end = np.cumsum(lens)
        shift = np.repeat(starts - (seg_end - lens), lens)
        cand_pos = np.arange(total, dtype=np.int64) + shift
        pt_of_seg = np.repeat(np.arange(px.size, dtype=np.int64), self.ncols)
        cand_pt = np.repeat(pt_of_seg, lens)
        return cand_pt, cand_pos


def count_bucketed(P: PointSet, L: LineFamily, s: Scale,
                   with_pairs: bool = False) -> IncidenceReport:
    """Same output as count_naive, via the dual-grid pruning."""
    n, m = len(P), len(L)
    richness = np.zeros(n, dtype=np.int64)
    pairs: Optional[List[Tuple[int, int]]] = [] if with_pairs else None
    if n and m:
        grid = _DualGrid(L.params, cell=s.radius)
        px, py = P.coords[:, 0], P.coords[:, 1]
        if not with_pairs and _HAVE_NUMBA and grid.cell_ptr is not None:
            richness = _strip_count_kernel(px, py, grid.cell_ptr,
                                           grid.a_sorted, grid.b_sorted,
                                           s.radius, grid.cell, grid.nj,
                                           grid.ncols)
        else:
            thr = s.radius * np.sqrt(1.0 + grid.a_sorted * grid.a_sorted)
            chunk = max(1, int(2e6) // max(grid.ncols, 1))
            for lo in range(0, n, chunk):
                hi = min(n, lo + chunk)
                cpt, cpos = grid.candidates(px[lo:hi], py[lo:hi], s.radius)
                if cpt.size:
                    a = grid.a_sorted[cpos]
                    vert = a * px[cpt + lo]
                    vert += grid.b_sorted[cpos]
                    vert -= py[cpt + lo]
                    np.abs(vert, out=vert)
                    hit = vert <= thr[cpos]
                    richness[lo:hi] = np.bincount(cpt[hit], minlength=hi - lo)
                    if with_pairs:
                        ppi = cpt[hit] + lo
                        pli = grid.order[cpos[hit]]
                        order = np.lexsort((pli, ppi))
                        pairs.extend(zip(ppi[order].tolist(),
                                         pli[order].tolist()))
    count = int(richness.sum())
    return IncidenceReport(count, richness,
                           normalized_ratio(count, n, m, s.delta), pairs)


def count_incidences(P, L, s, engine: str = "bucketed", with_pairs=False,
                     verify: bool = False) -> IncidenceReport:
    """Engine dispatcher; with verify=True runs both and asserts equality."""
    if verify:
        rep_b = count_bucketed(P, L, s, with_pairs=True)
        rep_n = count_naive(P, L, s, with_pairs=True)
        if not rep_b.same_as(rep_n):
            raise AssertionError("bucketed and naive engines disagree")
        return rep_b if engine == "bucketed" else rep_n
    fn = count_bucketed if engine == "bucketed" else count_naive
    return fn(P, L, s, with_pairs=with_pairs)


def max_concurrency(L: LineFamily, p: Point2, s: Scale) -> int:
    """Number of lines of L incident to p at radius C * delta."""
    if not p.in_unit_square():
        raise ValueError(f"query point {p} outside the unit square")
    a, b = L.params[:, 0], L.params[:, 1]
    vert = np.abs(a * p.x + b - p.y)
    return int(np.count_nonzero(vert <= s.radius * np.sqrt(1.0 + a * a)))


@dataclass
class RichPointResult:
    """delta-separated points found incident to >= k lines.

    Richness is certified on the delta-grid at multiplier C + 1 (any true
    k-rich point lies within delta/sqrt(2) of a grid point that is k-rich
    at the bumped multiplier, so the grid scan is a superset certificate);
    `used_multiplier` records the bump.
    """

    k: int
    points: PointSet
    bound_constant: float
    used_multiplier: float


def _grid_candidates(L: LineFamily, delta: float, radius: float) -> np.ndarray:
    """Grid points of the delta-lattice of the unit square lying within
    `radius` (plus one lattice step) of at least one line; returned in
    row-major (ix, iy) order as an (n, 2) coordinate array."""
    npts = int(math.floor(2.0 / delta)) + 1
    la, lb = L.params[:, 0], L.params[:, 1]
    xs = -1.0 + delta * np.arange(npts)
    marked = np.zeros(npts * npts, dtype=bool)
    chunk = max(1, int(2e6) // npts)
    for lo in range(0, len(L), chunk):
        a = la[lo:lo + chunk, None]
        b = lb[lo:lo + chunk, None]
        yc = a * xs[None, :] + b
        half = radius * np.sqrt(1.0 + a * a) + delta
        jlo = np.ceil((yc - half + 1.0) / delta).astype(np.int64)
        jhi = np.floor((yc + half + 1.0) / delta).astype(np.int64)
        np.clip(jlo, 0, npts - 1, out=jlo)
        np.clip(jhi, -1, npts - 1, out=jhi)
        lens = np.maximum(jhi - jlo + 1, 0).ravel()
        total = int(lens.sum())
        if total == 0:
            continue
        seg_end = np.cumsum(lens)
        seg_start = seg_end - lens
        offs = np.arange(total, dtype=np.int64) - np.repeat(seg_start, lens)
        jj = np.repeat(jlo.ravel(), lens) + offs
        ii = np.repeat(np.tile(np.arange(npts, dtype=np.int64), a.shape[0]), lens)
        marked[ii * npts + jj] = True
    flat = np.nonzero(marked)[0]
    ii, jj = flat // npts, flat % npts
    return np.column_stack([xs[ii], xs[jj]])


def _greedy_separated(coords: np.ndarray, delta: float) -> np.ndarray:
    """First-come greedy extraction of a delta-separated subset, scanning
    the rows in the given order; returns the kept row indices."""
    kept: List[int] = []
    cells: dict = {}
    inv = 1.0 / delta
    for i in range(coords.shape[0]):
        x, y = coords[i]
        ci, cj = int(math.floor(x * inv)), int(math.floor(y * inv))
        ok = True
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                for j in cells.get((ci + di, cj + dj), ()):
                    if math.hypot(x - coords[j, 0], y - coords[j, 1]) < delta:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            kept.append(i)
            cells.setdefault((ci, cj), []).append(i)
    return np.asarray(kept, dtype=np.int64)


@dataclass
class RichnessField:
    """Richness of every delta-grid candidate near the family, at the bumped
    multiplier; reusable across k thresholds."""

    coords: np.ndarray
    richness: np.ndarray
    used_multiplier: float


def grid_richness(L: LineFamily, s: Scale) -> RichnessField:
    used = s.multiplier + 1.0
    cand = (_grid_candidates(L, s.delta, used * s.delta) if len(L)
            else np.empty((0, 2)))
    if cand.shape[0] == 0:
        return RichnessField(cand, np.zeros(0, dtype=np.int64), used)
    bumped = Scale(s.delta, s.epsilon, used)
    # dual-strip pruning only pays off when the family outnumbers the
    # grid columns; otherwise brute force over the lines is cheaper
    ncols = int(math.floor(2.0 / bumped.radius)) + 1
    engine = count_bucketed if len(L) > 2 * ncols else count_naive
    rep = engine(PointSet(cand, s.delta), L, bumped)
    return RichnessField(cand, rep.richness, used)


def k_rich_points(L: LineFamily, k: int, s: Scale,
                  field: Optional[RichnessField] = None) -> RichPointResult:
    """Scan the delta-grid of the unit square for points incident to >= k
    lines (at multiplier C + 1), then greedily extract a delta-separated
    subset in row-major order."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if field is None:
        field = grid_richness(L, s)
    if len(L) == 0 or field.coords.shape[0] == 0:
        return RichPointResult(k, PointSet(np.empty((0, 2)), s.delta), 0.0,
                               field.used_multiplier)
    rich = field.coords[field.richness >= k]
    kept = _greedy_separated(rich, s.delta)
    pts = PointSet(rich[kept], s.delta)
    const = len(pts) * k ** 3 * L.epsilon / len(L) ** 2
    return RichPointResult(k, pts, const, field.used_multiplier)


def angular_split(L_at_p: LineFamily, p: Point2, s: Scale):
    """Split lines through p into the bottom and top slope quartiles and
    report the minimum pairwise angle between the two groups, with
    angle(l1, l2) = |arctan a1 - arctan a2|."""
    n = len(L_at_p)
    if n < 2:
        raise ValueError(f"need at least 2 lines, got {n}")
    for i, l in enumerate(L_at_p):
        if not is_incident(p, l, s):
            raise ValueError(f"line {i} is not incident to {p} at radius {s.radius}")
    slopes = L_at_p.params[:, 0]
    order = np.argsort(slopes, kind="stable")
    q = math.ceil(n / 4)
    bottom = order[:q]
    top = order[n - q:]
    ang = np.arctan(slopes)
    min_angle = float(np.min(np.abs(ang[bottom][:, None] - ang[top][None, :])))
    return bottom.tolist(), top.tolist(), min_angle
