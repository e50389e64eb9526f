"""Heisenberg group algebra on R^3 and the reduction to planar incidences.

Group law: (x, y, t) * (x', y', t') = (x+x', y+y', t+t' + (x y' - y x')/2).
Anisotropic dilations (lam x, lam y, lam^2 t) are automorphisms.  The two
vertical planes W_x = {(x, 0, t)} and W_y = {(0, y, t)} carry the
projections

    proj_x(x, y, t) = (x, 0, t - xy/2),   proj_y(x, y, t) = (0, y, t + xy/2),

whose fibers are the left cosets of the horizontal axes.  The fiber of a
W_x point w = (a, 0, b) projects under proj_y onto the straight line
{(y, a y + b)} of the (y, t)-plane, which is what turns projection
questions into planar incidence counting.

The homogeneous gauge used for balls is ((x^2 + y^2)^2 + 16 t^2)^{1/4};
the factor 16 is a convention (it makes the gauge a metric) and nothing
downstream depends on it quantitatively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np

from .planar import LineAB, LineFamily, PointSet, Scale, validate_separation
from .rng import Stream

# Q0 in the group is the cube [-1, 1]^3
CUBE = 1.0

# Default constant for the core-projection inclusion
#   proj_y(preimage tube of a delta-ball) subset line-neighborhood(A delta):
# the vertical deviation over the ball is |dt + du*y| <= delta*sqrt(1+y^2)
# <= sqrt(2)*delta inside the cube, so A = 2 is a safe rounded-up ceiling.
# measure_core_projection_constant() re-derives it empirically.
CORE_PROJ_CONST = 2.0


class Plane(str, Enum):
    W_X = "Wx"
    W_Y = "Wy"


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float
    t: float


@dataclass(frozen=True)
class VerticalPlanePoint:
    """Point of a vertical plane: (u, 0, t) in W_x or (0, u, t) in W_y."""

    plane: Plane
    u: float
    t: float

    def embed(self) -> HPoint:
        if self.plane == Plane.W_X:
            return HPoint(self.u, 0.0, self.t)
        return HPoint(0.0, self.u, self.t)


ORIGIN = HPoint(0.0, 0.0, 0.0)


def h_mul(p: HPoint, q: HPoint) -> HPoint:
    return HPoint(p.x + q.x, p.y + q.y,
                  p.t + q.t + 0.5 * (p.x * q.y - p.y * q.x))


def h_inv(p: HPoint) -> HPoint:
    return HPoint(-p.x, -p.y, -p.t)


def dilate(lam: float, p: HPoint) -> HPoint:
    if lam <= 0.0:
        raise ValueError(f"dilation factor must be positive, got {lam}")
    return HPoint(lam * p.x, lam * p.y, lam * lam * p.t)


def dilate_plane(lam: float, w: VerticalPlanePoint) -> VerticalPlanePoint:
    if lam <= 0.0:
        raise ValueError(f"dilation factor must be positive, got {lam}")
    return VerticalPlanePoint(w.plane, lam * w.u, lam * lam * w.t)


def proj_x(p: HPoint) -> VerticalPlanePoint:
    return VerticalPlanePoint(Plane.W_X, p.x, p.t - p.x * p.y / 2.0)


def proj_y(p: HPoint) -> VerticalPlanePoint:
    return VerticalPlanePoint(Plane.W_Y, p.y, p.t + p.x * p.y / 2.0)


def koranyi_norm(p: HPoint) -> float:
    return ((p.x * p.x + p.y * p.y) ** 2 + 16.0 * p.t * p.t) ** 0.25


def koranyi_dist(p: HPoint, q: HPoint) -> float:
    return koranyi_norm(h_mul(h_inv(q), p))


def horizontal_fiber(w: VerticalPlanePoint):
    """The fiber of w under its projection, as the map s -> w * (axis point s).

    For w in W_x the fiber runs along the y-axis: s -> (u, s, t + u s / 2);
    for w in W_y along the x-axis: s -> (s, u, t - u s / 2).
    """
    base = w.embed()
    if w.plane == Plane.W_X:
        return lambda s: h_mul(base, HPoint(0.0, s, 0.0))
    return lambda s: h_mul(base, HPoint(s, 0.0, 0.0))


def fiber_samples(w: VerticalPlanePoint, values: Sequence[float]) -> np.ndarray:
    f = horizontal_fiber(w)
    return np.array([[q.x, q.y, q.t] for q in (f(v) for v in values)])


def project_fiber_to_line(w: VerticalPlanePoint) -> LineAB:
    """proj_y(w * L_y) for w = (a, 0, b) is the line {(y, a y + b)} of the
    (y, t)-plane; symmetrically for w in W_y."""
    if abs(w.u) > 1.0 or abs(w.t) > 1.0:
        raise ValueError(f"plane point ({w.u}, {w.t}) outside the unit square")
    return LineAB(w.u, w.t)


@dataclass
class ReducedInstance:
    points: PointSet
    lines: LineFamily
    scale: Scale  # carries the incidence multiplier 1 + A

    def save(self, directory, generator: str = "reduction", seed=None) -> None:
        """Write the planar instance in the shared CSV formats, stamping the
        incidence multiplier into both sidecar metadata records."""
        from pathlib import Path

        from .planar import save_line_family, save_point_set
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        extra = {"multiplier": self.scale.multiplier}
        save_point_set(self.points, d / "points.csv", generator, seed, extra)
        save_line_family(self.lines, d / "lines.csv", generator, seed, extra)


def reduce_to_incidences(P_x: Sequence[VerticalPlanePoint],
                         P_y: Sequence[VerticalPlanePoint],
                         s: Scale,
                         core_const: float = CORE_PROJ_CONST) -> ReducedInstance:
    """Turn delta-separated plane point sets into the planar instance whose
    (1 + A) delta-incidences dominate pairs of intersecting preimage tubes.

    P_x points (a, 0, b) become the lines {(y, a y + b)}; P_y points are
    re-read as planar points (y, t).  Parameter distances equal the plane
    distances, so separations transfer exactly.
    """
    for w in P_x:
        if w.plane != Plane.W_X:
            raise ValueError("P_x must contain W_x points")
    for w in P_y:
        if w.plane != Plane.W_Y:
            raise ValueError("P_y must contain W_y points")
    lines = LineFamily([project_fiber_to_line(w) for w in P_x], epsilon=s.delta)
    points = PointSet([(w.u, w.t) for w in P_y], delta=s.delta)
    for obj, name in ((points, "P_y"), (lines, "P_x")):
        rep = validate_separation(obj)
        if not rep.ok:
            raise ValueError(f"{name} not {s.delta:g}-separated: pair "
                             f"{rep.pair} at distance {rep.min_distance:g}")
    return ReducedInstance(points, lines,
                           Scale(s.delta, s.epsilon, 1.0 + core_const))


# ---------------------------------------------------------------------------
# Tube geometry

def _line_through(w: VerticalPlanePoint) -> Tuple[np.ndarray, np.ndarray]:
    """Anchor point and direction of the horizontal line w * (axis)."""
    if w.plane == Plane.W_X:
        # {(a, s, b + a s / 2)}
        return (np.array([w.u, 0.0, w.t]), np.array([0.0, 1.0, w.u / 2.0]))
    # {(s, c, d - c s / 2)}
    return (np.array([0.0, w.u, w.t]), np.array([1.0, 0.0, -w.u / 2.0]))


def dist_to_horizontal_line(pts: np.ndarray, w: VerticalPlanePoint) -> np.ndarray:
    """Euclidean distance in R^3 from pts (n, 3) to the line w * (axis)."""
    anchor, direction = _line_through(w)
    d = direction / np.linalg.norm(direction)
    rel = pts - anchor[None, :]
    proj = rel @ d
    perp = rel - proj[:, None] * d[None, :]
    return np.linalg.norm(perp, axis=1)


def tube_inclusion_check(w: VerticalPlanePoint, s: Scale, samples: int = 20000,
                         seed: int = 7) -> float:
    """Sample the preimage tube proj^{-1}(B(w, delta)) inside the unit cube
    and return max distance to the horizontal line through w, divided by
    delta: an empirical lower bound for the tube constant A1."""
    stream = Stream(seed)
    # uniform points of the delta-disk around (u, t) in the plane
    ang = stream.uniform(samples, 0.0, 2.0 * math.pi)
    rad = s.delta * np.sqrt(stream.uniform(samples))
    du, dt = rad * np.cos(ang), rad * np.sin(ang)
    axis = stream.uniform(samples, -1.0, 1.0)
    u, t = w.u + du, w.t + dt
    if w.plane == Plane.W_X:
        # p = (u', s, t' + u' s / 2) projects to (u', 0, t')
        pts = np.column_stack([u, axis, t + u * axis / 2.0])
    else:
        pts = np.column_stack([axis, u, t - u * axis / 2.0])
    inside = np.all(np.abs(pts) <= CUBE, axis=1)
    pts = pts[inside]
    if pts.shape[0] == 0:
        return 0.0
    return float(dist_to_horizontal_line(pts, w).max() / s.delta)


def save_hpoints(points: Sequence[HPoint], path) -> None:
    """CSV with header x,y,t, one row per point."""
    with open(path, "w") as fh:
        fh.write("x,y,t\n")
        for p in points:
            fh.write(f"{p.x!r},{p.y!r},{p.t!r}\n")


def load_hpoints(path) -> List[HPoint]:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "x,y,t":
            raise ValueError(f"{path}: expected header x,y,t")
        return [HPoint(*(float(v) for v in line.split(",")))
                for line in fh if line.strip()]


def measure_core_projection_constant(s: Scale, samples: int = 20000,
                                     seed: int = 11) -> float:
    """Empirical constant A of the inclusion proj_y(preimage tube of
    B(w_x, delta)) subset (A delta)-neighborhood of the projected line:
    max over sampled tube points of dist(proj_y(p), line) / delta."""
    stream = Stream(seed)
    out = 0.0
    for trial in range(8):
        a = float(stream.uniform(1, -1.0, 1.0)[0])
        b = float(stream.uniform(1, -1.0, 1.0)[0])
        w = VerticalPlanePoint(Plane.W_X, a, b)
        ang = stream.uniform(samples, 0.0, 2.0 * math.pi)
        rad = s.delta * np.sqrt(stream.uniform(samples))
        du, dt = rad * np.cos(ang), rad * np.sin(ang)
        ys = stream.uniform(samples, -1.0, 1.0)
        # tube point (a+du, y, b+dt+(a+du) y/2), projected by proj_y
        px = a + du
        pt = b + dt + px * ys / 2.0
        proj_t = pt + px * ys / 2.0  # proj_y t-coordinate
        # distance to {(y, a y + b)} in the (y, t)-plane
        vert = np.abs(a * ys + b - proj_t)
        dist = vert / math.hypot(1.0, a)
        out = max(out, float(dist.max() / s.delta))
    return out
