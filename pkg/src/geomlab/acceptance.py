"""The acceptance suite: one callable per criterion, each returning a
CriterionResult with pinned tolerances.  tests/test_acceptance.py asserts
them and the CLI's verify-all experiment prints one line per criterion.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from . import heisenberg as hg
from .generators import (gen_greedy_concurrent, gen_kstar, gen_random,
                         gen_rectangle_example, gen_tube_example)
from .incidence import (count_bucketed, count_naive, grid_richness,
                        k_rich_points, max_concurrency, normalized_ratio)
from .measure import (Box, DilatedShape, boundary_projection_inclusion,
                      lw_ratio, project_voxels, shape_zoo, voxelize,
                      weak_isoperimetric_ratio)
from .planar import (LineAB, LineFamily, Point2, PointSet, Scale,
                     dual_line_to_point, dual_point_to_line, is_incident,
                     validate_separation)
from .rng import Stream, substream_seed
from .sobolev import (bump, dilated_fn, field_X, function_zoo, gns_check,
                      level_range, levelset_lemma_check, sample_to_grid)

LW_BOX_CONSTANT = 8.0 * 5.0 ** (-4.0 / 3.0)

# Measured ceilings, recorded here after sweeps; the criteria assert
# boundedness against these values, not any paper constant.
RICH_CONSTANT_CEILING = 40.0
GNS_RATIO_CEILING = 0.75


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    details: str
    elapsed: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] criterion {self.cid:2d} ({self.name}): "
                f"{self.details} [{self.elapsed:.1f}s]")


def _random_instance_params(i: int):
    dexp = 4 + (i % 7)               # delta in {2^-4 .. 2^-10}
    delta = 2.0 ** -dexp
    cells = int(1.0 / delta) ** 2
    cap = min(500, int(0.8 * cells))
    stream = Stream(substream_seed(20240601, i))
    n = 1 + int(stream.uniform(1, 0.0, 1.0)[0] * cap)
    m = 1 + int(stream.uniform(1, 0.0, 1.0)[0] * cap)
    return delta, n, m


def criterion_1() -> CriterionResult:
    """count_bucketed equals count_naive exactly on 100 seeded instances."""
    t0 = time.time()
    mismatches = 0
    for i in range(100):
        delta, n, m = _random_instance_params(i)
        P, L = gen_random(n, m, delta, seed=substream_seed(777, i))
        s = Scale(delta)
        a = count_naive(P, L, s, with_pairs=True)
        b = count_bucketed(P, L, s, with_pairs=True)
        if not a.same_as(b):
            mismatches += 1
    return CriterionResult(
        1, "oracle equivalence", mismatches == 0,
        f"100 instances, {mismatches} mismatches (exact count+richness+pairs)",
        time.time() - t0)


def criterion_2() -> CriterionResult:
    """Tube family tracks the count ~ 1/delta scaling with a bounded ratio."""
    t0 = time.time()
    ratios, logs = [], []
    for dexp in range(6, 13):
        delta = 2.0 ** -dexp
        P, L = gen_tube_example(delta)
        rep = count_naive(P, L, Scale(delta))
        ratios.append(rep.normalized_ratio)
        logs.append((dexp, math.log2(rep.count)))
    band = max(ratios) / min(ratios)
    xs = np.array([x for x, _ in logs])
    ys = np.array([y for _, y in logs])
    slope = float(np.polyfit(xs, ys, 1)[0])
    ok = band <= 100.0 and abs(slope - 1.0) <= 0.15
    return CriterionResult(
        2, "tube sharpness scaling", ok,
        f"ratio band {band:.2f} (<=100), log-log slope {slope:.3f} (1 +- 0.15)",
        time.time() - t0)


def _rich_sweep_series():
    """family label -> {dexp: max bound constant over (k, ratio, config)}."""
    ceilings: dict = {}

    def record(label, dexp, const):
        per = ceilings.setdefault(label, {})
        per[dexp] = max(per.get(dexp, 0.0), const)

    # rectangle families: line lattice at epsilon, k thresholds share a field
    for dexp in (4, 5, 6):
        delta = 2.0 ** -dexp
        for ratio in (1, 4, 16):
            eps = ratio * delta
            if eps > 1.0:
                continue
            for (r, s_len) in ((1.0, math.sqrt(delta)), (0.5, 0.25)):
                P, L = gen_rectangle_example(delta, r, s_len, epsilon=eps)
                field = grid_richness(L, Scale(delta, eps))
                for k in (2, 4, 8, 16):
                    res = k_rich_points(L, k, Scale(delta, eps), field=field)
                    record("rectangle", dexp, res.bound_constant)
    # k-star families need small delta so the slope budget fits
    for dexp in (8, 9, 10):
        delta = 2.0 ** -dexp
        for ratio in (1, 4, 16):
            eps = ratio * delta
            for k in (2, 4, 8, 16):
                P, L = gen_kstar(k, 2, delta, epsilon=eps)
                res = k_rich_points(L, k, Scale(delta, eps))
                record("k-star", dexp, res.bound_constant)
    return ceilings


def criterion_3() -> CriterionResult:
    """Per-family measured ceiling of the rich-point bound constant stays
    under one recorded value and does not grow with 1/delta by more than a
    factor 2 across the sweep.  (Individual (k, epsilon) rows oscillate with
    lattice resonances; the recorded quantity is the ceiling per scale.)"""
    t0 = time.time()
    ceilings = _rich_sweep_series()
    worst = 0.0
    growth_ok = True
    notes = []
    for label, per in ceilings.items():
        dexps = sorted(per)  # increasing dexp = decreasing delta
        vals = [per[d] for d in dexps]
        worst = max(worst, max(vals))
        base = vals[0]
        growth = max(vals) / base if base > 0 else math.inf
        growth_ok = growth_ok and growth <= 2.0
        notes.append(f"{label}: ceilings {[f'{v:.2f}' for v in vals]} "
                     f"growth {growth:.2f}")
    ok = worst <= RICH_CONSTANT_CEILING and growth_ok
    return CriterionResult(
        3, "rich-point bound", ok,
        f"max constant {worst:.3f} (recorded ceiling {RICH_CONSTANT_CEILING}); "
        + "; ".join(notes), time.time() - t0)


def criterion_4() -> CriterionResult:
    """Concurrent families: greedy achieves >= 0.5/eps lines through a
    common delta-ball; no probe point ever sees more than 4/eps."""
    t0 = time.time()
    ok = True
    notes = []
    for eexp in range(4, 9):
        eps = 2.0 ** -eexp
        delta = eps / 4.0
        fam = gen_greedy_concurrent(eps, delta)
        n = len(fam)
        lo, hi = int(0.5 / eps), int(4.0 / eps)
        sc = Scale(delta, eps)
        mc_origin = max_concurrency(fam, Point2(0.0, 0.0), sc)
        probe_max = mc_origin
        for px in np.linspace(-0.9, 0.9, 7):
            for py in np.linspace(-0.9, 0.9, 7):
                probe_max = max(probe_max,
                                max_concurrency(fam, Point2(px, py), sc))
        this_ok = (n >= lo and mc_origin == n and probe_max <= hi)
        ok = ok and this_ok
        notes.append(f"2^-{eexp}:{n}in[{lo},{hi}]")
    return CriterionResult(4, "star bound two-sided", ok, " ".join(notes),
                           time.time() - t0)


def criterion_5() -> CriterionResult:
    """Duality maps every delta-incidence to a 2 delta-incidence and
    preserves separation classes."""
    t0 = time.time()
    stream = Stream(99)
    delta = 2.0 ** -7
    target = 10_000
    failures = 0
    checked = 0
    s1 = Scale(delta)
    s2 = Scale(delta, multiplier=2.0)
    while checked < target:
        n = target
        xs = stream.uniform(n, -1.0, 1.0)
        ys = stream.uniform(n, -1.0, 1.0)
        aa = stream.uniform(n, -1.0, 1.0)
        off = stream.uniform(n, -delta, delta)
        for i in range(n):
            p = Point2(float(xs[i]), float(ys[i]))
            b = p.y - aa[i] * p.x + off[i]
            if abs(b) > 1.0:
                continue
            l = LineAB(float(aa[i]), float(b))
            if not is_incident(p, l, s1):
                continue
            checked += 1
            if not is_incident(dual_line_to_point(l), dual_point_to_line(p), s2):
                failures += 1
            if checked >= target:
                break
    # separation transfer: a delta-separated point set dualizes to a
    # delta-separated line family (distances are equal by construction)
    P, L = gen_random(400, 400, 2.0 ** -6, seed=4242)
    dual_lines = LineFamily([dual_point_to_line(p) for p in P], epsilon=P.delta)
    dual_points = PointSet([(l.a, l.b) for l in L], delta=L.epsilon)
    sep_ok = (validate_separation(dual_lines).ok
              and validate_separation(dual_points).ok)
    ok = failures == 0 and checked >= target and sep_ok
    return CriterionResult(
        5, "duality transfer", ok,
        f"{checked} incident pairs, {failures} dual failures; "
        f"separation transfer {'ok' if sep_ok else 'BROKEN'}",
        time.time() - t0)


def criterion_6() -> CriterionResult:
    """Group axioms, unique decomposition, dilation-projection commutation,
    fiber-line agreement at relative tolerance 1e-12."""
    t0 = time.time()
    tol = 1e-12
    stream = Stream(123)
    n = 100_000
    P = stream.uniform(3 * n, -1.0, 1.0).reshape(3, n)
    Q = stream.uniform(3 * n, -1.0, 1.0).reshape(3, n)
    R = stream.uniform(3 * n, -1.0, 1.0).reshape(3, n)

    def mul(p, q):
        return np.array([p[0] + q[0], p[1] + q[1],
                         p[2] + q[2] + 0.5 * (p[0] * q[1] - p[1] * q[0])])

    worst = 0.0
    lhs = mul(mul(P, Q), R)
    rhs = mul(P, mul(Q, R))
    worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    # inverse and identity
    inv = -P
    worst = max(worst, float(np.max(np.abs(mul(P, inv)))))
    # unique decomposition p = embed(proj_x p) * (0, y, 0)
    wx = np.array([P[0], np.zeros(n), P[2] - P[0] * P[1] / 2.0])
    rec = mul(wx, np.array([np.zeros(n), P[1], np.zeros(n)]))
    worst = max(worst, float(np.max(np.abs(rec - P))))
    # dilation commutes with projections
    lam = 1.7
    dil = np.array([lam * P[0], lam * P[1], lam * lam * P[2]])
    proj_dil = np.array([dil[0], np.zeros(n), dil[2] - dil[0] * dil[1] / 2.0])
    dil_proj = np.array([lam * wx[0], np.zeros(n), lam * lam * wx[2]])
    worst = max(worst, float(np.max(np.abs(proj_dil - dil_proj))))
    # fiber of (a, 0, b) projects onto the line {(y, a y + b)}
    a, b, yv = P[0], P[2], Q[1]
    fiber_t = b + a * yv / 2.0  # t-coordinate of w * (0, y, 0)
    projy_t = fiber_t + a * yv / 2.0
    worst = max(worst, float(np.max(np.abs(projy_t - (a * yv + b)))))
    ok = worst <= tol
    return CriterionResult(
        6, "group algebra", ok,
        f"worst deviation {worst:.2e} over {n} samples (tol {tol:.0e})",
        time.time() - t0)


def criterion_7() -> CriterionResult:
    """lw_ratio of the model box equals 8 * 5^{-4/3} within 10%, confirmed
    under grid refinement."""
    t0 = time.time()
    ok = True
    notes = []
    for r in (0.25, 0.5):
        for div in (64, 128):
            K = voxelize(Box((0, 0, 0), (r, r, r * r)), h=r / div)
            ratio = lw_ratio(K)
            rel = abs(ratio - LW_BOX_CONSTANT) / LW_BOX_CONSTANT
            ok = ok and rel <= 0.10
            notes.append(f"r={r},h=r/{div}:{ratio:.4f}")
    return CriterionResult(
        7, "Loomis-Whitney box constant", ok,
        f"target {LW_BOX_CONSTANT:.4f} +-10%; " + " ".join(notes),
        time.time() - t0)


def criterion_8() -> CriterionResult:
    """Volumes scale by lam^4 and projection areas by lam^3 within 5%.

    Matched anisotropic grids (h -> lam h, ht -> lam^2 ht) carry the law
    exactly; an independent resampled check at a fixed grid step is run
    wherever the rescaled shape stays at least four cells thick."""
    t0 = time.time()
    h = 1.0 / 48
    ok = True
    worst_v = worst_a = 0.0
    zoo = shape_zoo()
    for name, sh in zoo.items():
        K = voxelize(sh, h, h / 2.0)
        vol = K.volume()
        areas = {w: project_voxels(K, w).area() for w in ("x", "y")}
        for lam in (0.5, 2.0):
            KL = voxelize(DilatedShape(sh, lam), h * lam, (h / 2.0) * lam * lam)
            dv = abs(KL.volume() / (vol * lam ** 4) - 1.0)
            worst_v = max(worst_v, dv)
            for w in ("x", "y"):
                da = abs(project_voxels(KL, w).area() / (areas[w] * lam ** 3) - 1.0)
                worst_a = max(worst_a, da)
    # resampled cross-checks on well-resolved instances
    for name, lam in (("box", 0.5), ("box", 2.0), ("gauge_ball", 2.0),
                      ("two_boxes", 2.0)):
        sh = zoo[name]
        vol = voxelize(sh, h).volume()
        dv = abs(voxelize(DilatedShape(sh, lam), h).volume() / (vol * lam ** 4)
                 - 1.0)
        worst_v = max(worst_v, dv)
    ok = worst_v <= 0.05 and worst_a <= 0.05
    return CriterionResult(
        8, "dilation scaling", ok,
        f"worst volume dev {worst_v:.4f}, worst area dev {worst_a:.4f} (<=5%)",
        time.time() - t0)


def _maximal_plane_packing(region, delta: float, plane) -> list:
    from .incidence import _greedy_separated
    centers = region.centers()
    order = np.lexsort((centers[:, 1], centers[:, 0]))
    pts = centers[order]
    kept = _greedy_separated(pts, delta)
    return [hg.VerticalPlanePoint(plane, float(u), float(t))
            for u, t in pts[kept]]


def criterion_9() -> CriterionResult:
    """delta^3 times the reduced incidence count dominates the volume, with
    the overshoot stable within a factor 4 across delta."""
    t0 = time.time()
    overshoots = []
    box = Box((0, 0, 0), (0.25, 0.25, 0.0625))
    for dexp in (4, 5, 6, 7):
        delta = 2.0 ** -dexp
        K = voxelize(box, h=delta / 4.0)
        proj_x_region = project_voxels(K, "x")
        proj_y_region = project_voxels(K, "y")
        P_x = _maximal_plane_packing(proj_x_region, delta, hg.Plane.W_X)
        P_y = _maximal_plane_packing(proj_y_region, delta, hg.Plane.W_Y)
        red = hg.reduce_to_incidences(P_x, P_y, Scale(delta))
        rep = count_bucketed(red.points, red.lines, red.scale)
        overshoots.append(delta ** 3 * rep.count / K.volume())
    lo, hi = min(overshoots), max(overshoots)
    ok = lo >= 1.0 and hi / lo <= 4.0
    return CriterionResult(
        9, "projection-to-incidence reduction", ok,
        f"overshoot factors {[f'{o:.2f}' for o in overshoots]} "
        f"(>=1, spread {hi / lo:.2f} <= 4)",
        time.time() - t0)


def criterion_10() -> CriterionResult:
    """Levelwise projection bound with slack 1.25 at h in {1/64, 1/128},
    for every dyadic level whose predecessor band is populated (the bottom
    level of any sampled function has an empty predecessor by construction
    and a vacuous right-hand side)."""
    t0 = time.time()
    ok = True
    checked = skipped = 0
    worst = 0.0
    for h in (1.0 / 64, 1.0 / 128):
        for name, f in function_zoo(h).items():
            a = np.abs(f.values)
            nonempty = {}
            for k in level_range(f):
                mask = (a >= 2.0 ** (k - 1)) & (a <= 2.0 ** k)
                nonempty[k] = bool(mask.any())
            for k, has in nonempty.items():
                if not has:
                    continue
                if not nonempty.get(k - 1, False):
                    skipped += 1
                    continue
                for which in ("x", "y"):
                    res = levelset_lemma_check(f, k, which, slack=1.25)
                    checked += 1
                    if res.rhs > 0:
                        worst = max(worst, res.lhs / res.rhs)
                    ok = ok and res.holds
    return CriterionResult(
        10, "level-set projection bound", ok,
        f"{checked} checks, worst lhs/rhs {worst:.3f} (<=1.25), "
        f"{skipped} bottom levels with empty predecessor skipped",
        time.time() - t0)


def criterion_11() -> CriterionResult:
    """GNS ratio bounded over the zoo, invariant under dilation within 10%,
    and stencils second-order on polynomial oracles."""
    t0 = time.time()
    h = 1.0 / 64
    worst_ratio = 0.0
    for name, f in function_zoo(h).items():
        worst_ratio = max(worst_ratio, gns_check(f).ratio)
    # dilation invariance
    f0 = bump((0.5, 0.5, 0.35))
    base = gns_check(sample_to_grid(f0, h, (0.55, 0.55, 0.4))).ratio
    worst_dil = 0.0
    for lam in (0.5, 2.0):
        g = sample_to_grid(dilated_fn(f0, lam), h * lam,
                           (0.55 * lam, 0.55 * lam, 0.4 * lam * lam))
        worst_dil = max(worst_dil, abs(gns_check(g).ratio - base) / base)
    # stencil convergence on a cubic oracle, supported strictly inside
    def cubic(pts):
        inside = np.all(np.abs(pts) <= 0.5, axis=1)
        return np.where(inside, pts[:, 0] ** 3 + pts[:, 1] ** 3 + pts[:, 2] ** 3,
                        0.0)

    def stencil_error(hh):
        f = sample_to_grid(cubic, hh, (0.52, 0.52, 0.52))
        Xf = field_X(f)
        xs = f.axis_centers(0)[:, None, None]
        ys = f.axis_centers(1)[None, :, None]
        ts = f.axis_centers(2)[None, None, :]
        exact = 3.0 * xs ** 2 - (ys / 2.0) * (3.0 * ts ** 2)
        err = np.abs(Xf.values - exact)
        # compare away from the support edge, where the cubic is smooth
        core = (np.abs(xs) < 0.3) & (np.abs(ys) < 0.3) & (np.abs(ts) < 0.3)
        return float(np.max(err * core))

    e1, e2 = stencil_error(1.0 / 32), stencil_error(1.0 / 64)
    conv = e1 / e2
    ok = (worst_ratio <= GNS_RATIO_CEILING and worst_dil <= 0.10
          and conv >= 3.5)
    return CriterionResult(
        11, "horizontal Sobolev ratio", ok,
        f"zoo ratio max {worst_ratio:.3f} (<= {GNS_RATIO_CEILING}), dilation "
        f"drift {worst_dil:.4f} (<=10%), stencil ratio {conv:.2f} (>=3.5)",
        time.time() - t0)


def criterion_12() -> CriterionResult:
    """Boundary-projection inclusion for 100 random box unions; the weak
    isoperimetric ratio is stable within factor 2 under dilation and
    refinement."""
    t0 = time.time()
    from .measure import UnionShape
    stream = Stream(31337)
    h = 1.0 / 24
    incl_fail = 0
    for trial in range(100):
        nbox = 1 + int(stream.uniform(1, 0, 1)[0] * 4)
        boxes = []
        for _ in range(nbox):
            c = stream.uniform(3, -0.3, 0.3)
            w = stream.uniform(3, 0.1, 0.35)
            boxes.append(Box(c, w))
        E = voxelize(UnionShape(*boxes), h)
        if len(E) == 0 or not boundary_projection_inclusion(E):
            incl_fail += 1
    # ratio stability for the model box
    sh = Box((0, 0, 0), (0.5, 0.5, 0.25))
    base = weak_isoperimetric_ratio(voxelize(sh, 1.0 / 48))
    rats = [base]
    for lam in (0.5, 2.0):
        rats.append(weak_isoperimetric_ratio(
            voxelize(DilatedShape(sh, lam), lam / 48, lam * lam / 48)))
    rats.append(weak_isoperimetric_ratio(voxelize(sh, 1.0 / 96)))
    spread = max(rats) / min(rats)
    ok = incl_fail == 0 and spread <= 2.0
    return CriterionResult(
        12, "weak isoperimetry", ok,
        f"inclusion failures {incl_fail}/100; ratio spread {spread:.2f} "
        f"(<=2 over dilation and refinement)",
        time.time() - t0)


ALL_CRITERIA: List[Tuple[int, str, Callable[[], CriterionResult]]] = [
    (1, "oracle equivalence", criterion_1),
    (2, "tube sharpness scaling", criterion_2),
    (3, "rich-point bound", criterion_3),
    (4, "star bound two-sided", criterion_4),
    (5, "duality transfer", criterion_5),
    (6, "group algebra", criterion_6),
    (7, "Loomis-Whitney box constant", criterion_7),
    (8, "dilation scaling", criterion_8),
    (9, "projection-to-incidence reduction", criterion_9),
    (10, "level-set projection bound", criterion_10),
    (11, "horizontal Sobolev ratio", criterion_11),
    (12, "weak isoperimetry", criterion_12),
]


def run_all(verbose: bool = True) -> List[CriterionResult]:
    results = []
    for _, _, fn in ALL_CRITERIA:
        res = fn()
        results.append(res)
        if verbose:
            print(res.line(), flush=True)
    return results
