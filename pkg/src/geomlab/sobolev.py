"""Discrete horizontal calculus on compactly supported grid functions.

The horizontal frame consists of the two vector fields

    X = d/dx - (y/2) d/dt,      Y = d/dy + (x/2) d/dt,

discretized with second-order central differences; the polynomial
coefficients y/2 and x/2 are evaluated exactly at cell centers, so the
stencils are exact on functions affine in each variable.  Dyadic level
sets, the levelwise projection bound, and the scale-invariant ratio
||f||_{4/3} / sqrt(||Xf||_1 ||Yf||_1) are all built from these pieces.

For functions of bounded variation the l1 norm of the difference
quotient stands in for the total variation of the derivative measure:
exact for C^1 samples, approximate near jumps, which is why rough data
enters only through mollified indicators.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .measure import VoxelSet, project_voxels


class GridFunction:
    """Scalar samples at the centers of an integer box of voxels of side h.

    values[i, j, k] is the sample at ((o0+i+.5) h, (o1+j+.5) h, (o2+k+.5) h)
    where origin = (o0, o1, o2).  The outermost layer of the box must be
    identically zero (compact support), so one-sided stencil rows vanish.
    """

    def __init__(self, values: np.ndarray, h: float,
                 origin: Tuple[int, int, int] = (0, 0, 0)):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 3:
            raise ValueError("values must be a 3d array")
        self.values = values
        self.h = float(h)
        self.origin = tuple(int(o) for o in origin)
        if not self._margin_zero(1):
            raise ValueError("boundary layer of the box must be zero")

    def _margin_zero(self, width: int) -> bool:
        v = self.values
        w = width
        if min(v.shape) <= 2 * w:
            return not np.any(v)
        for axis in range(3):
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[axis] = slice(0, w)
            hi[axis] = slice(-w, None)
            if np.any(v[tuple(lo)]) or np.any(v[tuple(hi)]):
                return False
        return True

    def axis_centers(self, axis: int) -> np.ndarray:
        n = self.values.shape[axis]
        return (self.origin[axis] + np.arange(n) + 0.5) * self.h

    def copy_with(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(values, self.h, self.origin)


def sample_to_grid(fn: Callable[[np.ndarray], np.ndarray], h: float,
                   half_extents: Sequence[float], margin: int = 3) -> GridFunction:
    """Sample an analytic function with support inside the centered box of
    the given half extents onto a grid with `margin` guaranteed zero cells."""
    ns = [int(math.ceil(e / h)) + margin for e in half_extents]
    origin = tuple(-n for n in ns)
    shape = tuple(2 * n for n in ns)
    xs = (np.arange(shape[0]) + origin[0] + 0.5) * h
    ys = (np.arange(shape[1]) + origin[1] + 0.5) * h
    ts = (np.arange(shape[2]) + origin[2] + 0.5) * h
    gx, gy, gt = np.meshgrid(xs, ys, ts, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel(), gt.ravel()])
    vals = np.asarray(fn(pts), dtype=np.float64).reshape(shape)
    return GridFunction(vals, h, origin)


def _central_diff(v: np.ndarray, axis: int, h: float) -> np.ndarray:
    out = np.zeros_like(v)
    sl_mid = [slice(None)] * 3
    sl_hi = [slice(None)] * 3
    sl_lo = [slice(None)] * 3
    sl_mid[axis] = slice(1, -1)
    sl_hi[axis] = slice(2, None)
    sl_lo[axis] = slice(None, -2)
    out[tuple(sl_mid)] = (v[tuple(sl_hi)] - v[tuple(sl_lo)]) / (2.0 * h)
    return out


def _require_interior_support(f: GridFunction) -> None:
    if not f._margin_zero(2):
        raise ValueError("support touches the box boundary; enlarge the box")


def field_X(f: GridFunction) -> GridFunction:
    """Xf = df/dx - (y/2) df/dt with central differences."""
    _require_interior_support(f)
    dx = _central_diff(f.values, 0, f.h)
    dt = _central_diff(f.values, 2, f.h)
    y = f.axis_centers(1)[None, :, None]
    return f.copy_with(dx - (y / 2.0) * dt)


def field_Y(f: GridFunction) -> GridFunction:
    """Yf = df/dy + (x/2) df/dt with central differences."""
    _require_interior_support(f)
    dy = _central_diff(f.values, 1, f.h)
    dt = _central_diff(f.values, 2, f.h)
    x = f.axis_centers(0)[:, None, None]
    return f.copy_with(dy + (x / 2.0) * dt)


def lp_norm(f: GridFunction, p: float) -> float:
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    cell = f.h ** 3
    return float((np.abs(f.values) ** p).sum() * cell) ** (1.0 / p)


@dataclass(frozen=True)
class GnsResult:
    lhs: float   # ||f||_{4/3}
    rhs: float   # sqrt(||Xf||_1 ||Yf||_1)
    ratio: float


def gns_check(f: GridFunction) -> GnsResult:
    lhs = lp_norm(f, 4.0 / 3.0)
    if lhs == 0.0:
        return GnsResult(0.0, 0.0, 0.0)
    rhs = math.sqrt(lp_norm(field_X(f), 1.0) * lp_norm(field_Y(f), 1.0))
    return GnsResult(lhs, rhs, lhs / rhs if rhs else math.inf)


# ---------------------------------------------------------------------------
# Dyadic level sets

def _level_mask(absvals: np.ndarray, k: int) -> np.ndarray:
    return (absvals >= 2.0 ** (k - 1)) & (absvals <= 2.0 ** k)


def level_range(f: GridFunction) -> range:
    a = np.abs(f.values)
    nz = a[a > 0]
    if nz.size == 0:
        return range(0)
    k_lo = int(math.floor(math.log2(nz.min())))
    k_hi = int(math.ceil(math.log2(nz.max()))) + 1
    return range(k_lo, k_hi + 1)


def level_sets(f: GridFunction) -> List[Tuple[int, VoxelSet]]:
    """All nonempty dyadic levels F_k = {2^{k-1} <= |f| <= 2^k} as voxel
    sets (values exactly 2^k belong to both F_k and F_{k+1})."""
    a = np.abs(f.values)
    idx = np.argwhere(a > 0)
    if idx.shape[0] == 0:
        return []
    vals = a[idx[:, 0], idx[:, 1], idx[:, 2]]
    out = []
    origin = np.asarray(f.origin, dtype=np.int64)
    for k in level_range(f):
        mask = _level_mask(vals, k)
        if mask.any():
            out.append((k, VoxelSet(idx[mask] + origin[None, :], f.h)))
    return out


@dataclass(frozen=True)
class LevelCheck:
    k: int
    lhs: float
    rhs: float
    holds: bool


def levelset_lemma_check(f: GridFunction, k: int, which: str = "x",
                         slack: float = 1.25,
                         oversample: int = 2) -> LevelCheck:
    """Check |proj_x(F_k)| <= slack * 2^{-k+2} * sum_{F_{k-1}} |Yf| h^3
    (or the proj_y / |Xf| twin for which='y')."""
    a = np.abs(f.values)
    mask_k = _level_mask(a, k)
    if not mask_k.any():
        raise ValueError(f"level {k} is empty")
    origin = np.asarray(f.origin, dtype=np.int64)
    fk = VoxelSet(np.argwhere(mask_k) + origin[None, :], f.h)
    lhs = project_voxels(fk, which, oversample).area()
    grad = field_Y(f) if which == "x" else field_X(f)
    mask_km1 = _level_mask(a, k - 1)
    rhs = 2.0 ** (-k + 2) * float(np.abs(grad.values[mask_km1]).sum()) * f.h ** 3
    return LevelCheck(k, lhs, rhs, bool(lhs <= slack * rhs))


# ---------------------------------------------------------------------------
# The unit-Jacobian shear (x, y, t) -> (x, y, t + xy/2)

def shear_change_of_variables(f: GridFunction, sign: float = 1.0) -> GridFunction:
    """Resample f composed with the shear: g(x, y, t) = f(x, y, t + sign*xy/2),
    by linear interpolation along t.  Rejects inputs whose sheared support
    would leave the box."""
    nx, ny, nz = f.values.shape
    xs = f.axis_centers(0)
    ys = f.axis_centers(1)
    shift = sign * np.outer(xs, ys) / 2.0 / f.h  # in t-index units
    # source support per column must stay inside [1, nz-2] after shifting
    nonzero = f.values != 0.0
    active = nonzero.any(axis=2)
    if active.any():
        kmin = np.argmax(nonzero, axis=2)
        kmax = nz - 1 - np.argmax(nonzero[:, :, ::-1], axis=2)
        lo = (kmin - shift)[active]
        hi = (kmax - shift)[active]
        # interpolation spreads support by one cell on each side
        if lo.min() < 2.0 or hi.max() > nz - 3.0:
            raise ValueError("sheared support would leave the box")
    pos = np.arange(nz, dtype=np.float64)[None, None, :] + shift[:, :, None]
    base = np.floor(pos)
    w = pos - base
    base = base.astype(np.int64)
    lo_ok = (base >= 0) & (base <= nz - 1)
    hi_ok = (base + 1 >= 0) & (base + 1 <= nz - 1)
    v_lo = np.take_along_axis(f.values, np.clip(base, 0, nz - 1), axis=2)
    v_hi = np.take_along_axis(f.values, np.clip(base + 1, 0, nz - 1), axis=2)
    out = (1.0 - w) * v_lo * lo_ok + w * v_hi * hi_ok
    return f.copy_with(out)


# ---------------------------------------------------------------------------
# Test-function zoo: closed-form C^1 bumps with exact compact support.

def bump(widths=(0.75, 0.75, 0.5), center=(0.0, 0.0, 0.0), amplitude=1.0):
    """(1 - R^2)_+^2 with R^2 the anisotropically scaled radius."""
    w = np.asarray(widths, dtype=np.float64)
    c = np.asarray(center, dtype=np.float64)

    def fn(pts: np.ndarray) -> np.ndarray:
        q = (pts - c[None, :]) / w[None, :]
        r2 = (q * q).sum(axis=1)
        return amplitude * np.clip(1.0 - r2, 0.0, None) ** 2

    return fn


def sheared_fn(fn, sign: float = -1.0):
    """fn composed with the inverse shear: the image of fn under the shear."""

    def out(pts: np.ndarray) -> np.ndarray:
        q = pts.copy()
        q[:, 2] = pts[:, 2] + sign * pts[:, 0] * pts[:, 1] / 2.0
        return fn(q)

    return out


def dilated_fn(fn, lam: float):
    """fn composed with the inverse dilation (so supports dilate by lam)."""

    def out(pts: np.ndarray) -> np.ndarray:
        q = pts / np.array([lam, lam, lam * lam])[None, :]
        return fn(q)

    return out


def smoothed_box(half=(0.5, 0.5, 0.25), edge: float = 0.25):
    """Mollified box indicator (1 - m^2)_+^2 built on the scaled sup norm,
    so the profile vanishes quadratically on the whole boundary (a product
    of edge ramps would vanish to higher order at corners, leaving dyadic
    tail bands unresolvable on any fixed grid)."""
    a = np.asarray(half, dtype=np.float64)

    def fn(pts: np.ndarray) -> np.ndarray:
        m = np.max(np.abs(pts) / a[None, :], axis=1)
        u = np.clip((m - 1.0) / edge, 0.0, 1.0)  # 0 inside, 1 outside the ramp
        return (1.0 - u * u) ** 2

    return fn


def function_zoo(h: float) -> dict:
    """Named grid functions used by the sweep experiments and tests."""
    specs = {
        "bump": (bump((0.75, 0.75, 0.5)), (0.8, 0.8, 0.55)),
        "narrow_bump": (bump((0.4, 0.4, 0.3)), (0.45, 0.45, 0.35)),
        "aniso_bump": (bump((0.8, 0.45, 0.35)), (0.85, 0.5, 0.4)),
        "sheared_bump": (sheared_fn(bump((0.6, 0.6, 0.35))), (0.65, 0.65, 0.6)),
        "smoothed_box": (smoothed_box((0.5, 0.5, 0.25), 0.25), (0.7, 0.7, 0.4)),
    }
    return {name: sample_to_grid(fn, h, ext) for name, (fn, ext) in specs.items()}


# ---------------------------------------------------------------------------
# Serialization: JSON header line + raw little-endian float64 samples.

def save_gridfunction(f: GridFunction, path) -> None:
    header = {"dims": list(f.values.shape), "h": f.h, "origin": list(f.origin)}
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(f.values.astype("<f8").tobytes(order="C"))


def load_gridfunction(path) -> GridFunction:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        raw = fh.read()
    vals = np.frombuffer(raw, dtype="<f8").reshape(header["dims"])
    return GridFunction(vals.copy(), header["h"], tuple(header["origin"]))
